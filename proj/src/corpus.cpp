#include "privmt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "privmt/errors.hpp"

namespace privmt {

using nlohmann::json;

std::string_view to_string(Violation::Code code) {
  switch (code) {
    case Violation::Code::SpanOutOfBounds: return "span out of bounds";
    case Violation::Code::EmptySpan: return "empty span";
    case Violation::Code::SurfaceMismatch: return "surface/token mismatch";
    case Violation::Code::Overlap: return "overlap";
    case Violation::Code::DuplicateLink: return "duplicate link";
    case Violation::Code::LinkTypeMismatch: return "link type mismatch";
  }
  return "?";
}

namespace {

void validate_side(const std::string& side, const TokenSeq& tokens,
                   const std::vector<PrivacySpan>& spans,
                   std::vector<Violation>& out) {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const PrivacySpan& span = spans[i];
    if (span.length == 0) {
      out.push_back({Violation::Code::EmptySpan, side, i, std::nullopt,
                     "span length must be >= 1"});
      continue;
    }
    if (span.start + span.length > tokens.size()) {
      out.push_back({Violation::Code::SpanOutOfBounds, side, i, std::nullopt,
                     "span [" + std::to_string(span.start) + ", " +
                         std::to_string(span.start + span.length) +
                         ") exceeds sentence length " +
                         std::to_string(tokens.size())});
      continue;
    }
    TokenSeq covered(tokens.begin() + static_cast<std::ptrdiff_t>(span.start),
                     tokens.begin() +
                         static_cast<std::ptrdiff_t>(span.start + span.length));
    if (covered != span.surface) {
      out.push_back({Violation::Code::SurfaceMismatch, side, i, std::nullopt,
                     "surface '" + join_tokens(span.surface) +
                         "' does not equal sentence tokens '" +
                         join_tokens(covered) + "'"});
    }
  }

  for (std::size_t i = 0; i < spans.size(); ++i) {
    for (std::size_t j = i + 1; j < spans.size(); ++j) {
      const PrivacySpan& a = spans[i];
      const PrivacySpan& b = spans[j];
      if (a.length == 0 || b.length == 0) continue;
      bool disjoint =
          a.start + a.length <= b.start || b.start + b.length <= a.start;
      if (!disjoint) {
        out.push_back({Violation::Code::Overlap, side, i, j,
                       "spans " + std::to_string(i) + " and " +
                           std::to_string(j) + " overlap"});
      }
      if (a.link == b.link) {
        out.push_back({Violation::Code::DuplicateLink, side, i, j,
                       "link " + std::to_string(a.link) +
                           " used by spans " + std::to_string(i) + " and " +
                           std::to_string(j)});
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_pair(const AnnotatedPair& pair) {
  std::vector<Violation> out;
  validate_side("src", pair.src_tokens, pair.src_spans, out);
  validate_side("tgt", pair.tgt_tokens, pair.tgt_spans, out);

  std::unordered_map<std::uint32_t, std::size_t> tgt_links;
  for (std::size_t j = 0; j < pair.tgt_spans.size(); ++j) {
    tgt_links.emplace(pair.tgt_spans[j].link, j);
  }
  for (std::size_t i = 0; i < pair.src_spans.size(); ++i) {
    auto it = tgt_links.find(pair.src_spans[i].link);
    if (it != tgt_links.end() &&
        pair.src_spans[i].type != pair.tgt_spans[it->second].type) {
      out.push_back({Violation::Code::LinkTypeMismatch, "src", i, it->second,
                     "linked spans have types " +
                         std::string(to_string(pair.src_spans[i].type)) +
                         " and " +
                         std::string(to_string(pair.tgt_spans[it->second].type))});
    }
  }
  return out;
}

namespace {

PrivacySpan span_from_json(const json& record, std::size_t line) {
  if (!record.is_object()) throw DatasetError("span is not an object", line);
  PrivacySpan span;
  try {
    span.surface = split_tokens(record.at("surface").get<std::string>());
    const auto start = record.at("start").get<std::int64_t>();
    const auto length = record.at("length").get<std::int64_t>();
    const auto link = record.at("link").get<std::int64_t>();
    if (start < 0) throw DatasetError("span start is negative", line);
    if (length < 1) throw DatasetError("span length must be >= 1", line);
    if (link < 0) throw DatasetError("span link is negative", line);
    span.start = static_cast<std::size_t>(start);
    span.length = static_cast<std::size_t>(length);
    span.link = static_cast<std::uint32_t>(link);
    const auto type_name = record.at("type").get<std::string>();
    auto type = entity_type_from(type_name);
    if (!type) throw DatasetError("unknown entity type '" + type_name + "'", line);
    span.type = *type;
  } catch (const json::exception& e) {
    throw DatasetError(std::string("bad span record: ") + e.what(), line);
  }
  return span;
}

json span_to_json(const PrivacySpan& span) {
  return json{{"surface", join_tokens(span.surface)},
              {"start", span.start},
              {"length", span.length},
              {"type", std::string(to_string(span.type))},
              {"link", span.link}};
}

}  // namespace

std::vector<AnnotatedPair> parse_corpus(std::istream& in) {
  std::vector<AnnotatedPair> pairs;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw DatasetError(std::string("malformed record: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw DatasetError("record is not an object", line_no);

    AnnotatedPair pair;
    try {
      pair.id = record.at("id").get<std::string>();
      pair.src_tokens = split_tokens(record.at("src").get<std::string>());
      pair.tgt_tokens = split_tokens(record.at("tgt").get<std::string>());
      for (const json& s : record.value("src_spans", json::array())) {
        pair.src_spans.push_back(span_from_json(s, line_no));
      }
      for (const json& s : record.value("tgt_spans", json::array())) {
        pair.tgt_spans.push_back(span_from_json(s, line_no));
      }
    } catch (const json::exception& e) {
      throw DatasetError(std::string("bad record: ") + e.what(), line_no);
    }

    if (pair.id.empty()) throw DatasetError("empty pair id", line_no);
    if (!seen_ids.insert(pair.id).second) {
      throw DatasetError("duplicate pair id '" + pair.id + "'", line_no);
    }
    auto violations = validate_pair(pair);
    if (!violations.empty()) {
      const Violation& v = violations.front();
      throw DatasetError("pair '" + pair.id + "' " + v.side + " span " +
                             std::to_string(v.span_index) + ": " +
                             std::string(to_string(v.code)) + " (" + v.detail +
                             ")",
                         line_no);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<AnnotatedPair> parse_corpus(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

std::vector<AnnotatedPair> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset file '" + path + "'");
  return parse_corpus(in);
}

void serialize_corpus(const std::vector<AnnotatedPair>& pairs,
                      std::ostream& out) {
  for (const AnnotatedPair& pair : pairs) {
    json record{{"id", pair.id},
                {"src", join_tokens(pair.src_tokens)},
                {"tgt", join_tokens(pair.tgt_tokens)},
                {"src_spans", json::array()},
                {"tgt_spans", json::array()}};
    for (const PrivacySpan& span : pair.src_spans) {
      record["src_spans"].push_back(span_to_json(span));
    }
    for (const PrivacySpan& span : pair.tgt_spans) {
      record["tgt_spans"].push_back(span_to_json(span));
    }
    out << record.dump() << '\n';
  }
}

std::string serialize_corpus(const std::vector<AnnotatedPair>& pairs) {
  std::ostringstream out;
  serialize_corpus(pairs, out);
  return out.str();
}

std::vector<AnnotatorJudgment> parse_judgments(std::istream& in) {
  std::vector<AnnotatorJudgment> judgments;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
      AnnotatorJudgment j;
      j.annotator = record.at("annotator").get<std::string>();
      j.pair_id = record.at("pair_id").get<std::string>();
      j.sentence_private = record.at("private").get<bool>();
      for (const json& key : record.value("accepted", json::array())) {
        j.accepted.insert(key.get<std::string>());
      }
      judgments.push_back(std::move(j));
    } catch (const json::exception& e) {
      throw DatasetError(std::string("bad judgment record: ") + e.what(),
                         line_no);
    }
  }
  return judgments;
}

std::vector<AnnotatorJudgment> parse_judgments(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_judgments(in);
}

std::vector<AnnotatorJudgment> load_judgments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open judgment file '" + path + "'");
  return parse_judgments(in);
}

std::string span_key(std::string_view side, const PrivacySpan& span) {
  return std::string(side) + ":" + std::to_string(span.start) + ":" +
         std::to_string(span.length);
}

std::optional<AnnotatedPair> aggregate_annotations(
    const AnnotatedPair& candidates,
    const std::vector<AnnotatorJudgment>& judgments,
    const VoteThresholds& thresholds) {
  if (judgments.empty()) {
    throw DatasetError("no judgments for pair '" + candidates.id + "'");
  }

  std::map<std::string, int> accept_counts;
  for (const PrivacySpan& span : candidates.src_spans) {
    accept_counts.emplace(span_key("src", span), 0);
  }
  for (const PrivacySpan& span : candidates.tgt_spans) {
    accept_counts.emplace(span_key("tgt", span), 0);
  }

  int private_votes = 0;
  for (const AnnotatorJudgment& j : judgments) {
    if (j.pair_id != candidates.id) {
      throw DatasetError("judgment by '" + j.annotator + "' is for pair '" +
                         j.pair_id + "', not '" + candidates.id + "'");
    }
    if (!j.sentence_private && !j.accepted.empty()) {
      throw DatasetError("judgment by '" + j.annotator +
                         "' accepts spans but marks the pair non-private");
    }
    if (j.sentence_private) ++private_votes;
    for (const std::string& key : j.accepted) {
      auto it = accept_counts.find(key);
      if (it == accept_counts.end()) {
        throw DatasetError("judgment by '" + j.annotator +
                           "' references unknown candidate '" + key + "'");
      }
      ++it->second;
    }
  }

  const double total = static_cast<double>(judgments.size());
  if (static_cast<double>(private_votes) <=
      thresholds.sentence_fraction * total) {
    return std::nullopt;
  }

  AnnotatedPair gold;
  gold.id = candidates.id;
  gold.src_tokens = candidates.src_tokens;
  gold.tgt_tokens = candidates.tgt_tokens;
  for (const PrivacySpan& span : candidates.src_spans) {
    if (accept_counts.at(span_key("src", span)) > thresholds.term_votes) {
      gold.src_spans.push_back(span);
    }
  }
  for (const PrivacySpan& span : candidates.tgt_spans) {
    if (accept_counts.at(span_key("tgt", span)) > thresholds.term_votes) {
      gold.tgt_spans.push_back(span);
    }
  }
  auto by_start = [](const PrivacySpan& a, const PrivacySpan& b) {
    return a.start < b.start;
  };
  std::sort(gold.src_spans.begin(), gold.src_spans.end(), by_start);
  std::sort(gold.tgt_spans.begin(), gold.tgt_spans.end(), by_start);
  return gold;
}

}  // namespace privmt

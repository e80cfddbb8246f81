#include "privmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "privmt/errors.hpp"

namespace privmt {

PerReport make_per_report(std::uint64_t n_xe, std::uint64_t n_xp,
                          std::uint64_t n_ye, std::uint64_t n_yp) {
  PerReport r;
  r.n_xe = n_xe;
  r.n_xp = n_xp;
  r.n_ye = n_ye;
  r.n_yp = n_yp;
  r.r_x = n_xp ? static_cast<double>(n_xe) / static_cast<double>(n_xp) : 0.0;
  r.r_y = n_yp ? static_cast<double>(n_ye) / static_cast<double>(n_yp) : 0.0;
  r.per = (r.r_x + r.r_y) / 2.0;
  return r;
}

namespace {

Token ascii_fold(const Token& token) {
  Token folded = token;
  for (char& c : folded) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return folded;
}

}  // namespace

StopwordSet::StopwordSet(std::unordered_set<Token> words, bool fold_case)
    : fold_case_(fold_case) {
  if (!fold_case_) {
    words_ = std::move(words);
    return;
  }
  for (const Token& w : words) words_.insert(ascii_fold(w));
}

bool StopwordSet::contains(const Token& token) const {
  return words_.contains(fold_case_ ? ascii_fold(token) : token);
}

StopwordSet StopwordSet::defaults(bool fold_case) {
  static const char* kEnglish[] = {
      "the", "a",  "an", "of", "to", "in", "on", "at",  "and", "or",
      "for", "by", "'s", "is", "as", "be", "with", "from",
  };
  static const char* kChinese[] = {
      "的", "了", "和", "是", "在", "与", "及", "等", "之", "这", "那",
  };
  std::unordered_set<Token> words;
  for (const char* w : kEnglish) words.insert(w);
  for (const char* w : kChinese) words.insert(w);
  return StopwordSet(std::move(words), fold_case);
}

StopwordSet StopwordSet::parse(std::istream& in, bool fold_case) {
  std::unordered_set<Token> words;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    words.insert(line);
  }
  return StopwordSet(std::move(words), fold_case);
}

StopwordSet StopwordSet::load(const std::string& path, bool fold_case) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open stopword file '" + path + "'");
  return parse(in, fold_case);
}

namespace {

// Multiset of meaningful privacy tokens across the side's spans, and the
// exposure count against the transmitted text.
std::pair<std::uint64_t, std::uint64_t> side_counts(
    const std::vector<TokenSeq>& spans, const TokenSeq& transmitted,
    const StopwordSet& stopwords, ExposureMode mode) {
  std::unordered_map<Token, std::uint64_t> privacy;
  std::uint64_t total = 0;
  for (const TokenSeq& span : spans) {
    for (const Token& token : span) {
      if (stopwords.contains(token)) continue;
      ++privacy[token];
      ++total;
    }
  }
  if (privacy.empty()) return {0, 0};

  std::unordered_map<Token, std::uint64_t> occurrences;
  for (const Token& token : transmitted) ++occurrences[token];

  std::uint64_t exposed = 0;
  for (const auto& [token, count] : privacy) {
    auto it = occurrences.find(token);
    if (it == occurrences.end()) continue;
    exposed += mode == ExposureMode::Set ? count : std::min(count, it->second);
  }
  return {exposed, total};
}

}  // namespace

PerReport per_sentence(const TokenSeq& sent_tokens,
                       const TokenSeq& received_tokens,
                       const std::vector<TokenSeq>& x_p,
                       const std::vector<TokenSeq>& y_p,
                       const StopwordSet& stopwords, ExposureMode mode) {
  auto [n_xe, n_xp] = side_counts(x_p, sent_tokens, stopwords, mode);
  auto [n_ye, n_yp] = side_counts(y_p, received_tokens, stopwords, mode);
  return make_per_report(n_xe, n_xp, n_ye, n_yp);
}

PerReport per_corpus(const std::vector<PerReport>& reports,
                     PerAggregation mode) {
  if (reports.empty()) throw ConfigError("PER over an empty corpus");
  if (mode == PerAggregation::Micro) {
    std::uint64_t n_xe = 0, n_xp = 0, n_ye = 0, n_yp = 0;
    for (const PerReport& r : reports) {
      n_xe += r.n_xe;
      n_xp += r.n_xp;
      n_ye += r.n_ye;
      n_yp += r.n_yp;
    }
    return make_per_report(n_xe, n_xp, n_ye, n_yp);
  }
  double sum = 0.0;
  for (const PerReport& r : reports) sum += r.per;
  PerReport out;
  out.per = sum / static_cast<double>(reports.size());
  return out;
}

namespace {

std::string ngram_key(const TokenSeq& tokens, std::size_t start, int n) {
  std::string key;
  for (int k = 0; k < n; ++k) {
    if (k) key += '\x1f';
    key += tokens[start + static_cast<std::size_t>(k)];
  }
  return key;
}

}  // namespace

BleuStats bleu_stats(const std::vector<TokenSeq>& candidates,
                     const std::vector<TokenSeq>& references, int max_n) {
  if (candidates.size() != references.size()) {
    throw ConfigError("candidate/reference count mismatch");
  }
  if (candidates.empty()) throw ConfigError("BLEU over an empty corpus");
  if (max_n < 1 || max_n > 4) throw ConfigError("BLEU max_n must be in [1, 4]");

  BleuStats stats;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const TokenSeq& cand = candidates[s];
    const TokenSeq& ref = references[s];
    stats.candidate_len += cand.size();
    stats.reference_len += ref.size();

    for (int n = 1; n <= max_n; ++n) {
      if (cand.size() < static_cast<std::size_t>(n)) continue;
      std::unordered_map<std::string, std::uint64_t> ref_counts;
      if (ref.size() >= static_cast<std::size_t>(n)) {
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= ref.size(); ++i) {
          ++ref_counts[ngram_key(ref, i, n)];
        }
      }
      std::unordered_map<std::string, std::uint64_t> cand_counts;
      std::uint64_t total = 0;
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cand.size(); ++i) {
        ++cand_counts[ngram_key(cand, i, n)];
        ++total;
      }
      std::uint64_t matched = 0;
      for (const auto& [key, count] : cand_counts) {
        auto it = ref_counts.find(key);
        if (it != ref_counts.end()) matched += std::min(count, it->second);
      }
      stats.matched[static_cast<std::size_t>(n - 1)] += matched;
      stats.total[static_cast<std::size_t>(n - 1)] += total;
    }
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats, int max_n) {
  // Orders with no candidate n-grams anywhere in the corpus are vacuous and
  // skipped; a zero precision at any counted order still zeroes the score.
  double log_sum = 0.0;
  int counted = 0;
  for (int n = 1; n <= max_n; ++n) {
    std::uint64_t total = stats.total[static_cast<std::size_t>(n - 1)];
    if (total == 0) continue;
    std::uint64_t matched = stats.matched[static_cast<std::size_t>(n - 1)];
    if (matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
    ++counted;
  }

  const auto c = static_cast<double>(stats.candidate_len);
  const auto r = static_cast<double>(stats.reference_len);
  if (stats.candidate_len == 0) return stats.reference_len == 0 ? 100.0 : 0.0;
  double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  double precision = counted ? std::exp(log_sum / counted) : 1.0;
  return 100.0 * brevity * precision;
}

double bleu(const std::vector<TokenSeq>& candidates,
            const std::vector<TokenSeq>& references, int max_n) {
  return bleu_from_stats(bleu_stats(candidates, references, max_n), max_n);
}

namespace {

// Decodes UTF-8 into code points; bytes that do not form a valid sequence
// are taken one at a time.
std::vector<std::uint32_t> decode_utf8(const std::string& text) {
  std::vector<std::uint32_t> points;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto byte = static_cast<unsigned char>(text[i]);
    int extra = 0;
    std::uint32_t point = byte;
    if (byte >= 0xF0) {
      extra = 3;
      point = byte & 0x07u;
    } else if (byte >= 0xE0) {
      extra = 2;
      point = byte & 0x0Fu;
    } else if (byte >= 0xC0) {
      extra = 1;
      point = byte & 0x1Fu;
    }
    if (extra > 0 && i + static_cast<std::size_t>(extra) >= text.size()) {
      points.push_back(byte);
      ++i;
      continue;
    }
    bool valid = true;
    for (int k = 1; k <= extra && valid; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
      valid = (cont & 0xC0u) == 0x80u;
      point = (point << 6) | (cont & 0x3Fu);
    }
    if (!valid) {
      points.push_back(byte);
      ++i;
      continue;
    }
    points.push_back(point);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return points;
}

std::vector<std::uint32_t> chrf_characters(const TokenSeq& tokens) {
  std::string joined;
  for (const Token& token : tokens) joined += token;
  return decode_utf8(joined);
}

std::uint64_t char_ngram_overlap(const std::vector<std::uint32_t>& a,
                                 const std::vector<std::uint32_t>& b, int n) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string key;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= b.size(); ++i) {
    key.assign(reinterpret_cast<const char*>(&b[i]),
               static_cast<std::size_t>(n) * sizeof(std::uint32_t));
    ++counts[key];
  }
  std::uint64_t overlap = 0;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= a.size(); ++i) {
    key.assign(reinterpret_cast<const char*>(&a[i]),
               static_cast<std::size_t>(n) * sizeof(std::uint32_t));
    auto it = counts.find(key);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return overlap;
}

}  // namespace

std::vector<double> chrf_order_scores(const TokenSeq& candidate,
                                      const TokenSeq& reference, int char_n,
                                      double beta) {
  if (char_n < 1) throw ConfigError("chrF char_n must be >= 1");
  const auto cand = chrf_characters(candidate);
  const auto ref = chrf_characters(reference);

  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(char_n));
  const double beta2 = beta * beta;
  for (int n = 1; n <= char_n; ++n) {
    const std::uint64_t cand_total =
        cand.size() >= static_cast<std::size_t>(n)
            ? cand.size() - static_cast<std::size_t>(n) + 1
            : 0;
    const std::uint64_t ref_total =
        ref.size() >= static_cast<std::size_t>(n)
            ? ref.size() - static_cast<std::size_t>(n) + 1
            : 0;
    if (cand_total == 0 && ref_total == 0) {
      scores.push_back(-1.0);  // vacuous at this order
      continue;
    }
    if (cand_total == 0 || ref_total == 0) {
      scores.push_back(0.0);
      continue;
    }
    const std::uint64_t overlap = char_ngram_overlap(cand, ref, n);
    const double precision =
        static_cast<double>(overlap) / static_cast<double>(cand_total);
    const double recall =
        static_cast<double>(overlap) / static_cast<double>(ref_total);
    double f = 0.0;
    if (precision > 0.0 && recall > 0.0) {
      f = (1.0 + beta2) * precision * recall / (beta2 * precision + recall);
    }
    scores.push_back(100.0 * f);
  }
  return scores;
}

double sentence_chrf(const TokenSeq& candidate, const TokenSeq& reference,
                     int char_n, double beta) {
  const auto scores = chrf_order_scores(candidate, reference, char_n, beta);
  double sum = 0.0;
  int counted = 0;
  for (double score : scores) {
    if (score < 0.0) continue;
    sum += score;
    ++counted;
  }
  // Both strings empty at every order: identical empties score perfect.
  if (counted == 0) return 100.0;
  return sum / counted;
}

double chrf(const std::vector<TokenSeq>& candidates,
            const std::vector<TokenSeq>& references, int char_n, double beta) {
  if (candidates.size() != references.size()) {
    throw ConfigError("candidate/reference count mismatch");
  }
  if (candidates.empty()) throw ConfigError("chrF over an empty corpus");
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    sum += sentence_chrf(candidates[i], references[i], char_n, beta);
  }
  return sum / static_cast<double>(candidates.size());
}

}  // namespace privmt

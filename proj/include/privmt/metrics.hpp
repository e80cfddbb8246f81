#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

#include "privmt/types.hpp"

namespace privmt {

// Privacy exposure counts and ratios for a sentence or a corpus.
//   r_x = n_xe / n_xp   (0 when n_xp == 0)
//   r_y = n_ye / n_yp   (0 when n_yp == 0)
//   per = (r_x + r_y) / 2
struct PerReport {
  std::uint64_t n_xe = 0;
  std::uint64_t n_xp = 0;
  std::uint64_t n_ye = 0;
  std::uint64_t n_yp = 0;
  double r_x = 0.0;
  double r_y = 0.0;
  double per = 0.0;

  bool operator==(const PerReport&) const = default;
};

// Computes the ratios from the counts.
PerReport make_per_report(std::uint64_t n_xe, std::uint64_t n_xp,
                          std::uint64_t n_ye, std::uint64_t n_yp);

// Tokens excluded from privacy counting because they carry no real meaning
// on their own ("the", "of", ...). Matching is exact token equality after
// optional case folding; folding lowercases ASCII letters only, so
// Latin-script tokens fold and CJK tokens are untouched.
class StopwordSet {
 public:
  StopwordSet() = default;
  StopwordSet(std::unordered_set<Token> words, bool fold_case = true);

  bool contains(const Token& token) const;
  std::size_t size() const { return words_.size(); }

  // Built-in English + Chinese function words.
  static StopwordSet defaults(bool fold_case = true);
  // One token per line; blank lines and lines starting with '#' skipped.
  static StopwordSet parse(std::istream& in, bool fold_case = true);
  static StopwordSet load(const std::string& path, bool fold_case = true);

 private:
  std::unordered_set<Token> words_;
  bool fold_case_ = true;
};

// Whether exposure on the transmitted side counts by distinct occurrence
// (Set: a privacy token is exposed if it appears anywhere) or is bounded by
// the number of occurrences in the transmitted text (Multiset).
enum class ExposureMode { Set, Multiset };

// The privacy side is always a multiset: every occurrence of a token within
// the span list counts toward n_xp / n_xe, minus stopwords.
PerReport per_sentence(const TokenSeq& sent_tokens,
                       const TokenSeq& received_tokens,
                       const std::vector<TokenSeq>& x_p,
                       const std::vector<TokenSeq>& y_p,
                       const StopwordSet& stopwords,
                       ExposureMode mode = ExposureMode::Set);

enum class PerAggregation { Micro, Macro };

// Micro sums the counts over the corpus and computes the ratios once;
// Macro averages per-sentence PER values. Throws ConfigError on an empty
// corpus.
PerReport per_corpus(const std::vector<PerReport>& reports,
                     PerAggregation mode = PerAggregation::Micro);

// Corpus-level clipped n-gram counts; precision at order n is
// matched[n-1] / total[n-1]. Exposed so tests can check precisions exactly.
struct BleuStats {
  std::array<std::uint64_t, 4> matched{};
  std::array<std::uint64_t, 4> total{};
  std::uint64_t candidate_len = 0;
  std::uint64_t reference_len = 0;
};

BleuStats bleu_stats(const std::vector<TokenSeq>& candidates,
                     const std::vector<TokenSeq>& references, int max_n = 4);

// Corpus BLEU in [0, 100]: geometric mean of clipped n-gram precisions
// times the brevity penalty exp(1 - r/c) when c < r. An order with zero
// candidate n-grams corpus-wide is skipped (otherwise bleu(c, c) would be
// undefined for short corpora); a zero precision at any counted order gives
// 0 (no smoothing).
double bleu_from_stats(const BleuStats& stats, int max_n = 4);
double bleu(const std::vector<TokenSeq>& candidates,
            const std::vector<TokenSeq>& references, int max_n = 4);

// Sentence chrF decomposed per character-n-gram order: element n-1 is the
// F_beta score (in [0, 100]) at order n, or -1 where both sides have no
// n-grams of that order. Character counting is by Unicode code point on the
// whitespace-free concatenation of the tokens.
std::vector<double> chrf_order_scores(const TokenSeq& candidate,
                                      const TokenSeq& reference,
                                      int char_n = 6, double beta = 2.0);

double sentence_chrf(const TokenSeq& candidate, const TokenSeq& reference,
                     int char_n = 6, double beta = 2.0);

// Corpus chrF in [0, 100]: arithmetic mean of sentence scores.
double chrf(const std::vector<TokenSeq>& candidates,
            const std::vector<TokenSeq>& references, int char_n = 6,
            double beta = 2.0);

}  // namespace privmt

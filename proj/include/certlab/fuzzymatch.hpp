#pragma once

#include <boost/rational.hpp>

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace certlab::fuzzy {

using Rational = boost::rational<long long>;

/// Similarity percentage in [0, 100], kept exact.
class SimilarityScore {
 public:
  SimilarityScore() = default;
  explicit SimilarityScore(Rational value);

  static SimilarityScore from_indel(std::size_t distance, std::size_t total_length);

  const Rational& exact() const { return value_; }
  double value() const;
  /// Rounded to two decimal places.
  double rounded() const;

  friend auto operator<=>(const SimilarityScore& a, const SimilarityScore& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (b.value_ < a.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  friend bool operator==(const SimilarityScore&, const SimilarityScore&) = default;

 private:
  Rational value_{0};
};

/// Length of the longest common subsequence (bit-parallel).
std::size_t lcs_length(std::string_view a, std::string_view b);

/// Minimal number of single-character insertions and deletions turning a into b.
std::size_t indel_distance(std::string_view a, std::string_view b);

/// 100 * (1 - dist / (|a| + |b|)); 100 when both are empty.
SimilarityScore indel_similarity(std::string_view a, std::string_view b);

/// Best similarity of the shorter string against every window of the same
/// length in the longer one. Empty vs non-empty is 0, empty vs empty is 100.
SimilarityScore partial_ratio(std::string_view a, std::string_view b);

SimilarityScore partial_token_sort_ratio(std::string_view a, std::string_view b);
SimilarityScore partial_token_set_ratio(std::string_view a, std::string_view b);

/// max(partial_token_sort_ratio, partial_token_set_ratio)
SimilarityScore combined_similarity(std::string_view a, std::string_view b);

/// Whitespace tokens sorted and re-joined with single spaces.
std::string sorted_token_string(std::string_view text);

/// Rebuilds both inputs as "<sorted intersection> <sorted remainder>" over
/// their alphanumeric token sets.
std::pair<std::string, std::string> token_set_rebuild(std::string_view a, std::string_view b);

struct NormalizedTitle {
  std::vector<std::string> tokens;
  std::string joined;
};

class Lemmatizer {
 public:
  /// Uses the bundled exception dictionary.
  Lemmatizer();
  /// Parses `form base` pairs, one per line; '#' starts a comment.
  static Lemmatizer from_exceptions_text(std::string_view text);

  std::string lemma(std::string_view lowercase_token) const;
  NormalizedTitle normalize(std::string_view title) const;

 private:
  explicit Lemmatizer(std::map<std::string, std::string> exceptions);
  std::map<std::string, std::string> exceptions_;
};

/// Normalizes with the default Lemmatizer.
NormalizedTitle lemmatize_title(std::string_view title);

}  // namespace certlab::fuzzy

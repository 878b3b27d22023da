#include "certlab/fuzzymatch.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>

#include "certlab/common.hpp"
#include "embedded_data.hpp"

namespace certlab::fuzzy {

SimilarityScore::SimilarityScore(Rational value) : value_(value) {}

SimilarityScore SimilarityScore::from_indel(std::size_t distance, std::size_t total_length) {
  if (total_length == 0) return SimilarityScore(Rational(100));
  const auto total = static_cast<long long>(total_length);
  const auto dist = static_cast<long long>(distance);
  return SimilarityScore(Rational(100 * (total - dist), total));
}

double SimilarityScore::value() const { return boost::rational_cast<double>(value_); }

double SimilarityScore::rounded() const { return std::round(value() * 100.0) / 100.0; }

std::size_t lcs_length(std::string_view a, std::string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return 0;

  // Hyyro's bit-vector LCS over ceil(|a| / 64) words.
  const std::size_t words = (a.size() + 63) / 64;
  std::vector<std::uint64_t> match(256 * words, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto c = static_cast<unsigned char>(a[i]);
    match[c * words + i / 64] |= std::uint64_t{1} << (i % 64);
  }

  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  for (unsigned char c : b) {
    const std::uint64_t* m = &match[c * words];
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = v[w] & m[w];
      const std::uint64_t sum1 = v[w] + u;
      const std::uint64_t c1 = sum1 < v[w] ? 1 : 0;
      const std::uint64_t sum = sum1 + carry;
      const std::uint64_t c2 = sum < sum1 ? 1 : 0;
      carry = c1 | c2;
      v[w] = sum | (v[w] & ~m[w]);
    }
  }

  std::size_t zeros = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t word = v[w];
    const std::size_t bits = (w + 1 == words && a.size() % 64 != 0) ? a.size() % 64 : 64;
    if (bits < 64) word |= ~std::uint64_t{0} << bits;
    zeros += static_cast<std::size_t>(64 - std::popcount(word));
  }
  return zeros;
}

std::size_t indel_distance(std::string_view a, std::string_view b) {
  return a.size() + b.size() - 2 * lcs_length(a, b);
}

SimilarityScore indel_similarity(std::string_view a, std::string_view b) {
  return SimilarityScore::from_indel(indel_distance(a, b), a.size() + b.size());
}

SimilarityScore partial_ratio(std::string_view a, std::string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return SimilarityScore(Rational(b.empty() ? 100 : 0));
  SimilarityScore best;
  for (std::size_t start = 0; start + a.size() <= b.size(); ++start) {
    best = std::max(best, indel_similarity(a, b.substr(start, a.size())));
    if (best.exact() == Rational(100)) break;
  }
  return best;
}

std::string sorted_token_string(std::string_view text) {
  auto tokens = split_whitespace(text);
  std::sort(tokens.begin(), tokens.end());
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

namespace {

std::set<std::string> alnum_token_set(std::string_view text) {
  std::set<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.insert(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.insert(std::move(current));
  return tokens;
}

std::string join_parts(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  return out;
}

}  // namespace

std::pair<std::string, std::string> token_set_rebuild(std::string_view a, std::string_view b) {
  const auto set_a = alnum_token_set(a);
  const auto set_b = alnum_token_set(b);
  std::vector<std::string> common, only_a, only_b;
  std::set_intersection(set_a.begin(), set_a.end(), set_b.begin(), set_b.end(),
                        std::back_inserter(common));
  std::set_difference(set_a.begin(), set_a.end(), set_b.begin(), set_b.end(),
                      std::back_inserter(only_a));
  std::set_difference(set_b.begin(), set_b.end(), set_a.begin(), set_a.end(),
                      std::back_inserter(only_b));
  auto rebuilt_a = common;
  rebuilt_a.insert(rebuilt_a.end(), only_a.begin(), only_a.end());
  auto rebuilt_b = common;
  rebuilt_b.insert(rebuilt_b.end(), only_b.begin(), only_b.end());
  return {join_parts(rebuilt_a), join_parts(rebuilt_b)};
}

SimilarityScore partial_token_sort_ratio(std::string_view a, std::string_view b) {
  return partial_ratio(sorted_token_string(a), sorted_token_string(b));
}

SimilarityScore partial_token_set_ratio(std::string_view a, std::string_view b) {
  const auto [ra, rb] = token_set_rebuild(a, b);
  return partial_ratio(ra, rb);
}

SimilarityScore combined_similarity(std::string_view a, std::string_view b) {
  return std::max(partial_token_sort_ratio(a, b), partial_token_set_ratio(a, b));
}

// --- lemmatization -------------------------------------------------------

Lemmatizer::Lemmatizer() : Lemmatizer(from_exceptions_text(data::lemma_exceptions())) {}

Lemmatizer::Lemmatizer(std::map<std::string, std::string> exceptions)
    : exceptions_(std::move(exceptions)) {}

Lemmatizer Lemmatizer::from_exceptions_text(std::string_view text) {
  std::map<std::string, std::string> table;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto parts = split_whitespace(line);
    if (parts.empty()) continue;
    if (parts.size() != 2) throw SchemaError("lemma exception line needs 'form base': " + line);
    table[to_lower(parts[0])] = to_lower(parts[1]);
  }
  return Lemmatizer(std::move(table));
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

std::string Lemmatizer::lemma(std::string_view token) const {
  std::string word(token);
  if (auto it = exceptions_.find(word); it != exceptions_.end()) return it->second;
  if (word.size() <= 3 || has_digit(word)) return word;
  if (ends_with(word, "ies") && word.size() > 4) return word.substr(0, word.size() - 3) + "y";
  if (ends_with(word, "sses")) return word.substr(0, word.size() - 2);
  for (std::string_view suffix : {"xes", "ches", "shes"}) {
    if (ends_with(word, suffix)) return word.substr(0, word.size() - 2);
  }
  for (std::string_view keep : {"ss", "us", "is", "os"}) {
    if (ends_with(word, keep)) return word;
  }
  if (ends_with(word, "s")) return word.substr(0, word.size() - 1);
  return word;
}

NormalizedTitle Lemmatizer::normalize(std::string_view title) const {
  const std::string lower = to_lower(title);
  // Punctuation becomes a separator; a dot survives only between two
  // alphanumerics of a token that carries a digit (version strings).
  std::string spaced;
  spaced.reserve(lower.size());
  for (unsigned char c : lower) {
    spaced.push_back(std::isalnum(c) || c == '.' ? static_cast<char>(c) : ' ');
  }

  NormalizedTitle out;
  for (const auto& raw : split_whitespace(spaced)) {
    const bool versionish = has_digit(raw);
    std::string cleaned;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '.') {
        cleaned.push_back(raw[i]);
        continue;
      }
      const bool inner = i > 0 && i + 1 < raw.size() &&
                         std::isalnum(static_cast<unsigned char>(raw[i - 1])) &&
                         std::isalnum(static_cast<unsigned char>(raw[i + 1]));
      cleaned.push_back(versionish && inner ? '.' : ' ');
    }
    for (const auto& piece : split_whitespace(cleaned)) out.tokens.push_back(lemma(piece));
  }
  out.joined = join_parts(out.tokens);
  return out;
}

NormalizedTitle lemmatize_title(std::string_view title) {
  static const Lemmatizer lemmatizer;
  return lemmatizer.normalize(title);
}

}  // namespace certlab::fuzzy

#pragma once

#include <boost/rational.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "certlab/common.hpp"

namespace certlab::certid {

using Weight = boost::rational<long long>;

/// The 17 Common Criteria schemes with ID patterns, in table order.
const std::vector<std::string>& known_schemes();
bool is_known_scheme(std::string_view code);

/// Raised by canonicalize when no pattern of the scheme matches.
class NotAnId : public Error {
 public:
  using Error::Error;
};

/// Counters are numeric for most schemes; a few (UK "225A", IN "0520/0022")
/// keep their textual form.
using Counter = std::variant<long long, std::string>;

struct IdComponents {
  std::optional<int> year;
  Counter counter{0LL};
  std::optional<std::string> version;
  std::optional<std::string> lab;
  std::optional<std::string> doc;

  friend bool operator==(const IdComponents&, const IdComponents&) = default;
};

struct CertId {
  std::string scheme;
  std::string canonical;
  IdComponents components;

  friend bool operator==(const CertId&, const CertId&) = default;
};

enum class IdSource { filename, pdf_metadata, frontpage, contents };

inline constexpr IdSource kAllIdSources[] = {IdSource::filename, IdSource::pdf_metadata,
                                             IdSource::frontpage, IdSource::contents};

std::string_view to_string(IdSource source);
/// 1.0, 1.2, 1.5, 1.0 for filename, PDF metadata, front page and contents.
Weight source_multiplier(IdSource source);

struct IdCandidate {
  std::string raw;
  std::string canonical;
  IdSource source = IdSource::contents;
  /// Occurrences of this canonical ID in its source divided by all ID
  /// occurrences found in that source.
  Weight weight{0};
};

/// One regex hit, tagged with the scheme whose pattern produced it.
struct IdHit {
  std::string scheme;
  std::string raw;
  std::size_t offset = 0;
};

/// Runs all scheme patterns over `text` (each pattern scans independently,
/// non-overlapping).
std::vector<IdHit> scan_ids(std::string_view text);

CertId canonicalize(std::string_view raw, std::string_view scheme);
std::optional<CertId> try_canonicalize(std::string_view raw, std::string_view scheme);

/// Builds weighted candidates from raw-string occurrence counts per source.
/// Strings that do not parse under `scheme` count towards the source total
/// but yield no candidate.
std::vector<IdCandidate> candidates_from_counts(
    const std::map<IdSource, std::map<std::string, std::size_t>>& counts_by_source,
    std::string_view scheme);

std::vector<IdCandidate> find_candidates(const std::map<IdSource, std::string>& text_by_source,
                                         std::string_view scheme);

/// Weighted merge across sources; highest total wins, ties go to the longest
/// canonical string, then the lexicographically smallest.
std::optional<CertId> assign_id(const std::vector<IdCandidate>& candidates, std::string_view scheme);

/// Accumulated weight per canonical ID after source multipliers.
std::map<std::string, Weight> merged_weights(const std::vector<IdCandidate>& candidates);

/// Front page of a converted report: text up to the first form feed, or the
/// first 60 lines when the converter emitted none.
std::string front_page(std::string_view report_text);

/// Pattern source strings per scheme, as used by scan_ids.
const std::vector<std::pair<std::string, std::string>>& scheme_patterns();

}  // namespace certlab::certid

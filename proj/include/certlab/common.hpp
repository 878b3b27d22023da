#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace certlab {

using Date = std::chrono::year_month_day;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input file does not follow its expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

enum class DocKind { certificate_report, security_target, maintenance_update };

inline constexpr DocKind kAllDocKinds[] = {DocKind::certificate_report, DocKind::security_target,
                                           DocKind::maintenance_update};

std::string_view to_string(DocKind kind);
DocKind doc_kind_from_string(std::string_view name);

/// Parses YYYY-MM-DD; throws SchemaError on anything else.
Date parse_date(std::string_view text);
std::optional<Date> parse_optional_date(std::string_view text);
std::string format_date(const Date& date);

/// Signed number of days from `from` to `to`.
std::int64_t days_between(const Date& from, const Date& to);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
/// Trims and collapses internal whitespace runs to a single space.
std::string collapse_whitespace(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view text);

/// FNV-1a 64-bit, rendered as 16 lowercase hex digits.
std::string stable_hash_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace certlab

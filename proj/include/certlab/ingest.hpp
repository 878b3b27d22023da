#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "certlab/common.hpp"

namespace certlab::ingest {

enum class CertStatus { active, archived };

std::string_view to_string(CertStatus status);
CertStatus status_from_string(std::string_view text);

struct MaintenanceUpdate {
  Date date;
  std::string path;

  friend bool operator==(const MaintenanceUpdate&, const MaintenanceUpdate&) = default;
};

/// Unified metadata of one certified product.
struct CertRecord {
  std::string record_key;
  std::string scheme;  // two-letter code, or "??"
  std::string category;
  std::string title;
  std::string vendor;
  Date cert_date;
  std::optional<Date> expiry_date;
  CertStatus status = CertStatus::active;
  std::optional<std::string> declared_eal;
  /// Certification report and security target; relative to the artifacts root.
  std::map<DocKind, std::string> artifact_paths;
  std::vector<MaintenanceUpdate> maintenance_updates;
  /// Title/subject metadata of the report PDF, when the snapshot carries it.
  std::string report_pdf_metadata;

  friend bool operator==(const CertRecord&, const CertRecord&) = default;
};

/// record_key = stable hash of (scheme, title, report file basename).
std::string make_record_key(std::string_view scheme, std::string_view title, std::string_view report_path);

/// Recognized scheme code or "??" for anything else.
std::string normalize_scheme(std::string_view code);

struct ConflictWarning {
  std::string record_key;
  std::string field;
  std::string csv_value;
  std::string html_value;
};

struct IngestResult {
  std::vector<CertRecord> records;
  std::vector<ConflictWarning> conflicts;
  std::vector<std::string> warnings;
};

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// CSV is authoritative for dates, status, metadata and artifact links; the
/// HTML-derived records contribute maintenance updates, PDF metadata and any
/// links the CSV lacks. Records are joined on (scheme, report basename),
/// falling back to the record key.
IngestResult ingest_snapshot_text(std::string_view csv_text, std::string_view html_records_text);
IngestResult ingest_snapshot(const std::string& csv_path, const std::string& html_records_path);

/// Drops artifact links whose file does not exist under `artifacts_dir`,
/// reporting each dropped link as a warning.
std::vector<std::string> register_artifacts(std::vector<CertRecord>& records, const std::string& artifacts_dir);

// --- conversion quality --------------------------------------------------

struct ConversionThresholds {
  std::size_t min_lines = 30;
  std::size_t min_bytes = 1000;
  double min_avg_line_length = 20.0;
  std::size_t min_varied_lines = 15;
  double min_alnum_ratio = 0.5;
};

struct ConversionQuality {
  std::size_t line_count = 0;
  std::size_t byte_size = 0;
  double avg_line_length = 0.0;
  /// Lines whose even-indexed characters are not all the same.
  std::size_t even_char_nonidentical_lines = 0;
  double alnum_ratio = 0.0;
  bool malformed = false;
  /// Indices 1-5 of the checks that fell strictly below their threshold.
  std::set<int> failed_checks;
};

ConversionQuality check_conversion(std::string_view text, std::size_t byte_size,
                                   const ConversionThresholds& thresholds = {});

class ConverterFailed : public Error {
 public:
  using Error::Error;
};

/// Runs an external converter. `command_template` must contain `{in}` and
/// `{out}`; both are substituted with shell-quoted paths. When `out_path` is
/// empty the output goes next to the input with a .txt extension.
std::string run_converter(const std::string& pdf_path, const std::string& command_template,
                          const std::string& out_path = {});

/// Template from $CERTLAB_CONVERTER if set, otherwise `fallback`.
std::string converter_template(const std::string& fallback = "pdftotext -raw {in} {out}");

struct ConversionOutcome {
  std::string text;
  ConversionQuality quality;
  bool used_fallback = false;
};

/// Runs the primary converter; if its output is malformed and a fallback
/// (OCR) template is given, runs that and keeps its result.
ConversionOutcome convert_with_fallback(const std::string& pdf_path, const std::string& primary_template,
                                        const std::string& fallback_template, const std::string& out_path = {});

}  // namespace certlab::ingest

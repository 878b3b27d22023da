#include "certlab/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>
#include <unordered_map>

#include "certlab/certid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace certlab::ingest {

std::string_view to_string(CertStatus status) {
  return status == CertStatus::active ? "active" : "archived";
}

CertStatus status_from_string(std::string_view text) {
  const auto lower = to_lower(trim(text));
  if (lower == "active") return CertStatus::active;
  if (lower == "archived") return CertStatus::archived;
  throw SchemaError("unknown certificate status: '" + std::string(text) + "'");
}

std::string make_record_key(std::string_view scheme, std::string_view title, std::string_view report_path) {
  const auto basename = fs::path(std::string(report_path)).filename().string();
  std::string material;
  material.append(scheme).push_back('\x1f');
  material.append(title).push_back('\x1f');
  material.append(basename);
  return stable_hash_hex(material);
}

std::string normalize_scheme(std::string_view code) {
  std::string upper = trim(code);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return certid::is_known_scheme(upper) ? upper : "??";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row.front().empty())) rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) throw SchemaError("stray quote inside unquoted CSV field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw SchemaError("unterminated quoted CSV field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

namespace {

const std::vector<std::string> kCsvColumns = {"scheme", "category", "title",  "vendor",      "cert_date",
                                              "expiry_date", "status", "eal", "report_path", "target_path"};

struct RawRecord {
  CertRecord record;
  std::size_t source_line = 0;
};

void set_artifacts(CertRecord& record, const std::string& report, const std::string& target) {
  if (!report.empty()) record.artifact_paths[DocKind::certificate_report] = report;
  if (!target.empty()) record.artifact_paths[DocKind::security_target] = target;
}

std::optional<std::string> optional_text(const std::string& value) {
  auto t = trim(value);
  if (t.empty()) return std::nullopt;
  return t;
}

void finish_record(CertRecord& record, std::size_t line, const char* origin) {
  if (record.expiry_date && std::chrono::sys_days{*record.expiry_date} < std::chrono::sys_days{record.cert_date}) {
    throw SchemaError(std::string(origin) + " line " + std::to_string(line) + ": expiry_date precedes cert_date");
  }
  auto report = record.artifact_paths.count(DocKind::certificate_report)
                    ? record.artifact_paths.at(DocKind::certificate_report)
                    : std::string{};
  record.record_key = make_record_key(record.scheme, record.title, report);
}

std::vector<RawRecord> read_csv_records(std::string_view csv_text) {
  std::vector<RawRecord> out;
  const auto rows = parse_csv(csv_text);
  if (rows.empty()) return out;

  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows.front().size(); ++i) col[to_lower(trim(rows.front()[i]))] = i;
  for (const auto& name : kCsvColumns) {
    if (!col.count(name)) throw SchemaError("CSV snapshot is missing column '" + name + "'");
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto get = [&](const std::string& name) -> std::string {
      const auto idx = col.at(name);
      if (idx >= row.size()) throw SchemaError("CSV row " + std::to_string(r + 1) + " has too few columns");
      return row[idx];
    };
    try {
      RawRecord raw;
      auto& rec = raw.record;
      rec.scheme = normalize_scheme(get("scheme"));
      rec.category = trim(get("category"));
      rec.title = trim(get("title"));
      rec.vendor = trim(get("vendor"));
      rec.cert_date = parse_date(trim(get("cert_date")));
      rec.expiry_date = parse_optional_date(get("expiry_date"));
      rec.status = status_from_string(get("status"));
      rec.declared_eal = optional_text(get("eal"));
      set_artifacts(rec, trim(get("report_path")), trim(get("target_path")));
      raw.source_line = r + 1;
      finish_record(rec, raw.source_line, "CSV");
      out.push_back(std::move(raw));
    } catch (const SchemaError& e) {
      throw SchemaError("CSV row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  return out;
}

std::string json_string(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return {};
  if (!obj.at(key).is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

std::vector<RawRecord> read_html_records(std::string_view text) {
  std::vector<RawRecord> out;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json obj = json::parse(line);
      if (!obj.is_object()) throw SchemaError("record is not an object");
      RawRecord raw;
      auto& rec = raw.record;
      rec.scheme = normalize_scheme(json_string(obj, "scheme"));
      rec.category = trim(json_string(obj, "category"));
      rec.title = trim(json_string(obj, "title"));
      rec.vendor = trim(json_string(obj, "vendor"));
      rec.cert_date = parse_date(trim(json_string(obj, "cert_date")));
      rec.expiry_date = parse_optional_date(json_string(obj, "expiry_date"));
      rec.status = status_from_string(json_string(obj, "status"));
      rec.declared_eal = optional_text(json_string(obj, "eal"));
      rec.report_pdf_metadata = json_string(obj, "pdf_metadata");
      set_artifacts(rec, trim(json_string(obj, "report_path")), trim(json_string(obj, "target_path")));
      if (obj.contains("maintenance_updates")) {
        for (const auto& mu : obj.at("maintenance_updates")) {
          rec.maintenance_updates.push_back({parse_date(json_string(mu, "date")), json_string(mu, "path")});
        }
      }
      raw.source_line = line_no;
      finish_record(rec, line_no, "HTML");
      out.push_back(std::move(raw));
    } catch (const json::exception& e) {
      throw SchemaError("HTML record line " + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError("HTML record line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string join_key(const CertRecord& rec) {
  auto it = rec.artifact_paths.find(DocKind::certificate_report);
  if (it == rec.artifact_paths.end() || it->second.empty()) return "key:" + rec.record_key;
  return "doc:" + rec.scheme + "/" + fs::path(it->second).filename().string();
}

std::string date_text(const std::optional<Date>& d) { return d ? format_date(*d) : std::string{}; }

void compare_field(std::vector<ConflictWarning>& out, const CertRecord& csv, const char* field,
                   const std::string& csv_value, const std::string& html_value) {
  // Fields the HTML listing leaves out are not disagreements.
  if (!html_value.empty() && csv_value != html_value) out.push_back({csv.record_key, field, csv_value, html_value});
}

}  // namespace

IngestResult ingest_snapshot_text(std::string_view csv_text, std::string_view html_records_text) {
  IngestResult result;
  auto csv = read_csv_records(csv_text);
  auto html = read_html_records(html_records_text);

  std::unordered_map<std::string, std::size_t> html_by_join;
  std::vector<bool> html_used(html.size(), false);
  for (std::size_t i = 0; i < html.size(); ++i) {
    auto [it, inserted] = html_by_join.try_emplace(join_key(html[i].record), i);
    if (!inserted) {
      if (html[i].record == html[it->second].record) {
        html_used[i] = true;  // exact duplicate
      } else {
        result.warnings.push_back("HTML line " + std::to_string(html[i].source_line) +
                                  " duplicates an earlier record; ignored");
        html_used[i] = true;
      }
    }
  }

  std::unordered_map<std::string, std::size_t> index_by_key;
  for (auto& raw : csv) {
    auto& rec = raw.record;
    if (auto seen = index_by_key.find(rec.record_key); seen != index_by_key.end()) {
      if (!(result.records[seen->second] == rec)) {
        result.warnings.push_back("CSV row " + std::to_string(raw.source_line) + " repeats record " +
                                  rec.record_key + " with different fields; first row kept");
      }
      continue;
    }

    if (auto h = html_by_join.find(join_key(rec)); h != html_by_join.end() && !html_used[h->second]) {
      html_used[h->second] = true;
      const auto& other = html[h->second].record;
      compare_field(result.conflicts, rec, "title", rec.title, other.title);
      compare_field(result.conflicts, rec, "vendor", rec.vendor, other.vendor);
      compare_field(result.conflicts, rec, "category", rec.category, other.category);
      compare_field(result.conflicts, rec, "cert_date", format_date(rec.cert_date), format_date(other.cert_date));
      compare_field(result.conflicts, rec, "expiry_date", date_text(rec.expiry_date), date_text(other.expiry_date));
      compare_field(result.conflicts, rec, "status", std::string(to_string(rec.status)),
                    std::string(to_string(other.status)));
      for (const auto& [kind, path] : other.artifact_paths) rec.artifact_paths.try_emplace(kind, path);
      rec.maintenance_updates = other.maintenance_updates;
      rec.report_pdf_metadata = other.report_pdf_metadata;
      if (!rec.declared_eal) rec.declared_eal = other.declared_eal;
    }
    index_by_key.emplace(rec.record_key, result.records.size());
    result.records.push_back(std::move(rec));
  }

  for (std::size_t i = 0; i < html.size(); ++i) {
    if (html_used[i]) continue;
    auto& rec = html[i].record;
    if (index_by_key.count(rec.record_key)) continue;
    index_by_key.emplace(rec.record_key, result.records.size());
    result.records.push_back(std::move(rec));
  }
  return result;
}

IngestResult ingest_snapshot(const std::string& csv_path, const std::string& html_records_path) {
  return ingest_snapshot_text(read_file(csv_path), read_file(html_records_path));
}

std::vector<std::string> register_artifacts(std::vector<CertRecord>& records, const std::string& artifacts_dir) {
  std::vector<std::string> warnings;
  const fs::path root(artifacts_dir);
  for (auto& rec : records) {
    for (auto it = rec.artifact_paths.begin(); it != rec.artifact_paths.end();) {
      if (fs::is_regular_file(root / it->second)) {
        ++it;
        continue;
      }
      warnings.push_back(rec.record_key + ": missing " + std::string(to_string(it->first)) + " " + it->second);
      it = rec.artifact_paths.erase(it);
    }
    std::erase_if(rec.maintenance_updates, [&](const MaintenanceUpdate& mu) {
      if (!mu.path.empty() && fs::is_regular_file(root / mu.path)) return false;
      warnings.push_back(rec.record_key + ": missing maintenance_update " + mu.path);
      return true;
    });
  }
  return warnings;
}

// --- conversion quality --------------------------------------------------

ConversionQuality check_conversion(std::string_view text, std::size_t byte_size,
                                   const ConversionThresholds& thresholds) {
  ConversionQuality q;
  q.byte_size = byte_size;

  std::size_t line_chars = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++q.line_count;
    line_chars += line.size();
    bool varied = false;
    for (std::size_t i = 2; i < line.size(); i += 2) {
      if (line[i] != line[0]) {
        varied = true;
        break;
      }
    }
    if (varied) ++q.even_char_nonidentical_lines;
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }

  q.avg_line_length = q.line_count ? static_cast<double>(line_chars) / static_cast<double>(q.line_count) : 0.0;
  const auto alnum = std::count_if(text.begin(), text.end(), [](unsigned char c) { return std::isalnum(c) != 0; });
  q.alnum_ratio = text.empty() ? 0.0 : static_cast<double>(alnum) / static_cast<double>(text.size());

  if (q.line_count < thresholds.min_lines) q.failed_checks.insert(1);
  if (q.byte_size < thresholds.min_bytes) q.failed_checks.insert(2);
  if (q.avg_line_length < thresholds.min_avg_line_length) q.failed_checks.insert(3);
  if (q.even_char_nonidentical_lines < thresholds.min_varied_lines) q.failed_checks.insert(4);
  if (q.alnum_ratio < thresholds.min_alnum_ratio) q.failed_checks.insert(5);
  q.malformed = !q.failed_checks.empty();
  return q;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

std::string substitute(std::string command, std::string_view placeholder, const std::string& value) {
  for (std::size_t pos = 0; (pos = command.find(placeholder, pos)) != std::string::npos; pos += value.size()) {
    command.replace(pos, placeholder.size(), value);
  }
  return command;
}

}  // namespace

std::string run_converter(const std::string& pdf_path, const std::string& command_template,
                          const std::string& out_path) {
  if (command_template.find("{in}") == std::string::npos || command_template.find("{out}") == std::string::npos) {
    throw ConverterFailed("converter template needs {in} and {out} placeholders: " + command_template);
  }
  const std::string out = out_path.empty() ? fs::path(pdf_path).replace_extension(".txt").string() : out_path;
  auto command = substitute(command_template, "{in}", shell_quote(pdf_path));
  command = substitute(command, "{out}", shell_quote(out));

  const int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw ConverterFailed("converter exited with failure: " + command);
  }
  if (!fs::is_regular_file(out)) throw ConverterFailed("converter produced no output file: " + out);
  return read_file(out);
}

std::string converter_template(const std::string& fallback) {
  if (const char* env = std::getenv("CERTLAB_CONVERTER"); env != nullptr && *env != '\0') return env;
  return fallback;
}

ConversionOutcome convert_with_fallback(const std::string& pdf_path, const std::string& primary_template,
                                        const std::string& fallback_template, const std::string& out_path) {
  ConversionOutcome outcome;
  outcome.text = run_converter(pdf_path, primary_template, out_path);
  outcome.quality = check_conversion(outcome.text, outcome.text.size());
  if (!outcome.quality.malformed || fallback_template.empty()) return outcome;

  outcome.text = run_converter(pdf_path, fallback_template, out_path);
  outcome.quality = check_conversion(outcome.text, outcome.text.size());
  outcome.used_fallback = true;
  return outcome;
}

}  // namespace certlab::ingest

#include "regex_util.hpp"

namespace certlab::detail {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string translate_pattern(std::string_view pattern) {
  std::string out(pattern);
  replace_all(out, "(?P<", "(?<");
  replace_all(out, "[ -‐]", "(?:[ -]|‐)");
  replace_all(out, "[-‐]", "(?:-|‐)");
  return out;
}

boost::regex compile_pattern(std::string_view pattern, bool case_insensitive) {
  boost::regex::flag_type flags = boost::regex::perl;
  if (case_insensitive) flags |= boost::regex::icase;
  return boost::regex(translate_pattern(pattern), flags);
}

}  // namespace certlab::detail

#pragma once

#include <boost/regex.hpp>

#include <string>
#include <string_view>

namespace certlab::detail {

// Rewrites Python-flavoured regex syntax for Boost.Regex: named groups
// (?P<name>...) become (?<name>...), and character classes mixing ASCII and
// U+2010 hyphens become alternations (Boost matches bytes, not code points).
std::string translate_pattern(std::string_view pattern);

boost::regex compile_pattern(std::string_view pattern, bool case_insensitive = false);

}  // namespace certlab::detail

#pragma once

#include <string_view>

// Contents of data/*.txt, compiled in by cmake/embed_data.cmake.
namespace certlab::data {

std::string_view default_rules();
std::string_view lemma_exceptions();
std::string_view cwe_names();

}  // namespace certlab::data

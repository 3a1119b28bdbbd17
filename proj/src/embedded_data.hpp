#pragma once

#include <string_view>

// Contents of the files under data/, compiled into the library.
namespace minispace::embedded {

std::string_view default_maps_json();
std::string_view ueq_key_json();
std::string_view study_default_json();

}  // namespace minispace::embedded

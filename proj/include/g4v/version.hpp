#pragma once

namespace g4v {
inline constexpr const char* toolkit_version = "0.1.0";
}

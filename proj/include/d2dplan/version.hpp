#pragma once

namespace d2dplan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace d2dplan

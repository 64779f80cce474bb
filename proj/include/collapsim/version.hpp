#pragma once

namespace collapsim {

inline constexpr char kVersion[] = "0.1.0";

}  // namespace collapsim

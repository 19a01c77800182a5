#pragma once

namespace horizon {

inline constexpr const char* kFormatVersion = "1";
inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace horizon

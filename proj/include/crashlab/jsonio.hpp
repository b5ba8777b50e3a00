#pragma once

#include <json.hpp>

namespace crashlab {

// Insertion-ordered JSON keeps emitted artifacts byte-stable.
using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "1.0.0";

}  // namespace crashlab

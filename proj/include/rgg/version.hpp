#pragma once

namespace rgg {

inline constexpr const char* artifact_version = "rgg 0.1.0";

}

#pragma once

namespace qnet {

inline constexpr const char* version = "0.1.0";

}

#pragma once

#define REPALIGN_VERSION_STRING "0.1.0"

namespace repalign {

constexpr const char* version() { return REPALIGN_VERSION_STRING; }

}  // namespace repalign

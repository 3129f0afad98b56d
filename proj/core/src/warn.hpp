#pragma once

#include <iostream>
#include <string>

namespace repalign::detail {

inline void warn(const std::string& message) { std::cerr << "repalign: warning: " << message << "\n"; }

}  // namespace repalign::detail

#include "repalign/parallel.hpp"

#include <cstdlib>
#include <string>

namespace repalign {

namespace {

std::atomic<unsigned>& override_slot() {
  static std::atomic<unsigned> slot{0};
  return slot;
}

unsigned automatic_limit() {
  static const unsigned resolved = [] {
    if (const char* env = std::getenv("REPALIGN_THREADS")) {
      try {
        const long v = std::stol(env);
        if (v >= 1) return static_cast<unsigned>(v);
      } catch (...) {
        // Unparseable value falls through to the hardware default.
      }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
  }();
  return resolved;
}

}  // namespace

void set_thread_limit(unsigned n) { override_slot().store(n); }

unsigned thread_limit() {
  const unsigned forced = override_slot().load();
  if (forced) return forced;
  return automatic_limit();
}

}  // namespace repalign

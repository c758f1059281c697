#include "qct/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace qct {

namespace {
std::atomic<unsigned> g_default_threads{0};
}

unsigned resolve_threads(unsigned requested) {
  if (const char* env = std::getenv("QCT_THREADS"); env && *env) {
    try {
      requested = static_cast<unsigned>(std::stoul(env));
    } catch (...) {
    }
  }
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

void set_default_threads(unsigned n) { g_default_threads = resolve_threads(n); }

unsigned default_threads() {
  const unsigned n = g_default_threads.load();
  return n == 0 ? resolve_threads(0) : n;
}

}  // namespace qct

#include "bmsync/parallel.hpp"

#include <cstdlib>
#include <string>

namespace bmsync {

int resolve_workers(std::optional<int> configured) {
  if (configured && *configured > 0) return *configured;
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace bmsync

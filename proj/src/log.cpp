#include "basinctl/log.hpp"

#include <cstdlib>
#include <string>

namespace basinctl::log {

Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("BASINCTL_LOG");
    if (!env) return Level::Error;
    const std::string s(env);
    if (s == "debug") return Level::Debug;
    if (s == "info") return Level::Info;
    return Level::Error;
  }();
  return lvl;
}

}  // namespace basinctl::log

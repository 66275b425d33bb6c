#pragma once

#include <iostream>
#include <sstream>

namespace basinctl::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

/// Current level, initialized once from BASINCTL_LOG={error,info,debug}.
Level level();

namespace detail {
template <typename... Args>
void emit(const char* tag, Args&&... args) {
  std::ostringstream os;
  os << tag;
  (os << ... << args);
  os << '\n';
  std::cerr << os.str();
}
}  // namespace detail

template <typename... Args>
void error(Args&&... args) {
  detail::emit("[basinctl error] ", std::forward<Args>(args)...);
}

template <typename... Args>
void info(Args&&... args) {
  if (level() >= Level::Info) detail::emit("[basinctl] ", std::forward<Args>(args)...);
}

template <typename... Args>
void debug(Args&&... args) {
  if (level() >= Level::Debug) detail::emit("[basinctl debug] ", std::forward<Args>(args)...);
}

}  // namespace basinctl::log

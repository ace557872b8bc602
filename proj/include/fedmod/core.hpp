#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fedmod {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : error {
  using error::error;
};

struct parse_error : error {
  using error::error;
};

struct domain_error : error {
  using error::error;
};

struct protocol_error : error {
  using error::error;
};

template <typename... Ts>
std::string concat(Ts&&... parts) {
  std::ostringstream oss;
  (oss << ... << parts);
  return oss.str();
}

template <typename E = error, typename... Ts>
[[noreturn]] void fail(Ts&&... parts) {
  throw E(concat(std::forward<Ts>(parts)...));
}

// Log verbosity from FEDMOD_LOG: quiet | info (default) | debug
inline int log_level() {
  static int level = [] {
    const char* env = std::getenv("FEDMOD_LOG");
    if (!env) return 1;
    std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
  }();
  return level;
}

template <typename... Ts>
void log_info(Ts&&... parts) {
  if (log_level() >= 1) std::cerr << "[fedmod] " << concat(std::forward<Ts>(parts)...) << "\n";
}

template <typename... Ts>
void log_debug(Ts&&... parts) {
  if (log_level() >= 2) std::cerr << "[fedmod] " << concat(std::forward<Ts>(parts)...) << "\n";
}

}  // namespace fedmod

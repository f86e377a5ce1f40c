#include "lsrn/diagnostics.hpp"

#include "lsrn/common.hpp"

#include <iostream>
#include <mutex>

namespace lsrn {
namespace {

std::mutex g_mutex;

void stderr_handler(const std::string& message) { std::cerr << "lsrn: warning: " << message << '\n'; }

WarningHandler& handler() {
  static WarningHandler h = stderr_handler;
  return h;
}

}  // namespace

const char* to_string(Orientation o) noexcept { return o == Orientation::tall ? "tall" : "wide"; }

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  handler()(message);
}

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(g_mutex);
  WarningHandler previous = std::move(handler());
  handler() = h ? std::move(h) : WarningHandler(stderr_handler);
  return previous;
}

}  // namespace lsrn

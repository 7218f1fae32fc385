#include "boxlabel/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace boxlabel {
namespace {
std::atomic<bool> g_enabled{true};
std::mutex g_mutex;
}  // namespace

void log_warning(std::string_view message) {
  if (!g_enabled.load(std::memory_order_relaxed)) return;
  std::lock_guard lock(g_mutex);
  std::fprintf(stderr, "WARN: %.*s\n", static_cast<int>(message.size()), message.data());
}

void set_warnings_enabled(bool enabled) noexcept { g_enabled.store(enabled, std::memory_order_relaxed); }

}  // namespace boxlabel

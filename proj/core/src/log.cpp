#include "varkde/log.hpp"

#include <iostream>
#include <mutex>

namespace varkde {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& current_sink() {
  static LogSink sink = [](LogLevel level, std::string_view message) {
    if (level == LogLevel::Debug) return;
    static constexpr const char* names[] = {"debug", "info", "warning", "error"};
    std::clog << "[varkde " << names[static_cast<int>(level)] << "] " << message << '\n';
  };
  return sink;
}

}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard lock(sink_mutex());
  current_sink() = std::move(sink);
}

void log(LogLevel level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (auto& sink = current_sink()) sink(level, message);
}

}  // namespace varkde

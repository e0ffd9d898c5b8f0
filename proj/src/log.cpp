#include "log.hpp"

#include <iostream>
#include <mutex>

namespace prom::log {
namespace {

std::mutex g_mutex;
Sink g_sink;

void emit(Level level, const std::string& msg) {
  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(level, msg);
    return;
  }
  if (level == Level::Warning) std::cerr << "warning: " << msg << '\n';
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void info(const std::string& msg) { emit(Level::Info, msg); }
void warn(const std::string& msg) { emit(Level::Warning, msg); }

}  // namespace prom::log

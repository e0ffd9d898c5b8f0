#pragma once

#include <functional>
#include <string>

namespace prom::log {

enum class Level { Info, Warning };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the process-wide sink. Passing an empty function restores stderr.
void set_sink(Sink sink);

void info(const std::string& msg);
void warn(const std::string& msg);

}  // namespace prom::log

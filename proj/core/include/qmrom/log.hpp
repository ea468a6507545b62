#pragma once

#include <functional>
#include <string>

namespace qmrom::log {

enum class Level { info, warning };

using Sink = std::function<void(Level, const std::string&)>;

/// Replaces the process-wide sink and returns the previous one.
/// The default sink writes warnings to stderr and drops info messages.
Sink set_sink(Sink sink);

void info(const std::string& message);
void warn(const std::string& message);

}  // namespace qmrom::log

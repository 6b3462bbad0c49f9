#pragma once

#include <iostream>
#include <string>
#include <string_view>

namespace occ::cli {

enum class LogLevel { Quiet = 0, Error, Warn, Info, Debug };

/// Reads OCC_BARRIER_LOG (quiet, error, warn, info, debug). Default: warn.
LogLevel logLevelFromEnv();

class Log {
 public:
  explicit Log(std::ostream& sink, LogLevel level = logLevelFromEnv()) : sink_(sink), level_(level) {}

  void error(std::string_view msg) const { write(LogLevel::Error, "error", msg); }
  void warn(std::string_view msg) const { write(LogLevel::Warn, "warn", msg); }
  void info(std::string_view msg) const { write(LogLevel::Info, "info", msg); }
  void debug(std::string_view msg) const { write(LogLevel::Debug, "debug", msg); }

  LogLevel level() const noexcept { return level_; }

 private:
  void write(LogLevel at, const char* tag, std::string_view msg) const {
    if (static_cast<int>(at) <= static_cast<int>(level_)) sink_ << "[" << tag << "] " << msg << '\n';
  }

  std::ostream& sink_;
  LogLevel level_;
};

}  // namespace occ::cli

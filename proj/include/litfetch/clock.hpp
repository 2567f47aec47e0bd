#pragma once

#include <chrono>
#include <string>

namespace litfetch {

using Timestamp = std::chrono::sys_seconds;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

// Always returns the same instant; used for reproducible reports.
class FixedClock final : public Clock {
 public:
  explicit FixedClock(Timestamp t) : t_(t) {}
  Timestamp now() const override { return t_; }
  void set(Timestamp t) { t_ = t; }

 private:
  Timestamp t_;
};

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp t);
// Accepts the format produced by format_timestamp. Throws std::invalid_argument.
Timestamp parse_timestamp(const std::string& s);

}  // namespace litfetch

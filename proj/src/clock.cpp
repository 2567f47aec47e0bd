#include "litfetch/clock.hpp"

#include <cstdio>
#include <stdexcept>

namespace litfetch {

Timestamp SystemClock::now() const {
  return std::chrono::floor<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(const std::string& s) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
  char z = 0;
  if (std::sscanf(s.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi,
                  &se, &z) != 7 ||
      z != 'Z' || s.size() != 20) {
    throw std::invalid_argument("timestamp must look like 2024-01-31T12:00:00Z");
  }
  year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 60) {
    throw std::invalid_argument("timestamp out of range: " + s);
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
}

}  // namespace litfetch

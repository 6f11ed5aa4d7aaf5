#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace iai {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Date = std::chrono::sys_days;

Timestamp now_utc();

// Accepts `YYYY-MM-DDTHH:MM:SS[.fff][Z]`. A bare `YYYY-MM-DD` is read as the
// last millisecond of that day, so a date-only cutoff includes the whole day.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

Date parse_date(std::string_view text);
std::string format_date(Date d);

// Empty input yields nullopt.
std::optional<Date> parse_optional_date(std::string_view text);

}  // namespace iai

#include "iai/time_util.h"

#include <charconv>
#include <cstdio>

#include "iai/errors.h"

namespace iai {

namespace {

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > text.size()) throw ParseError("truncated timestamp: " + std::string(whole));
    int value = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw ParseError("malformed timestamp: " + std::string(whole));
    }
    return value;
}

Date date_from_fields(int y, int m, int d, std::string_view whole) {
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw ParseError("invalid calendar date: " + std::string(whole));
    return sys_days{ymd};
}

}  // namespace

Timestamp now_utc() {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ParseError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    return date_from_fields(parse_int(text, 0, 4, text), parse_int(text, 5, 2, text),
                            parse_int(text, 8, 2, text), text);
}

std::optional<Date> parse_optional_date(std::string_view text) {
    if (text.empty()) return std::nullopt;
    return parse_date(text);
}

std::string format_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    if (text.size() == 10) {
        return Timestamp{parse_date(text)} + days{1} - milliseconds{1};
    }
    if (text.size() < 19 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') {
        throw ParseError("expected ISO-8601 timestamp, got '" + std::string(text) + "'");
    }
    Date d = parse_date(text.substr(0, 10));
    int hh = parse_int(text, 11, 2, text);
    int mm = parse_int(text, 14, 2, text);
    int ss = parse_int(text, 17, 2, text);
    if (hh > 23 || mm > 59 || ss > 60) throw ParseError("invalid time of day: " + std::string(text));
    std::size_t pos = 19;
    int millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (digits < 3) millis = millis * 10 + (text[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) throw ParseError("empty fractional seconds: " + std::string(text));
        for (int i = digits; i < 3; ++i) millis *= 10;
    }
    if (pos < text.size() && text[pos] == 'Z') ++pos;
    if (pos != text.size()) throw ParseError("unsupported timestamp suffix: " + std::string(text));
    return Timestamp{d} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    auto day = floor<days>(ts);
    auto rest = ts - day;
    auto h = duration_cast<hours>(rest);
    rest -= h;
    auto m = duration_cast<minutes>(rest);
    rest -= m;
    auto s = duration_cast<seconds>(rest);
    rest -= s;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d.%03dZ", format_date(day).c_str(),
                  static_cast<int>(h.count()), static_cast<int>(m.count()),
                  static_cast<int>(s.count()), static_cast<int>(rest.count()));
    return buf;
}

}  // namespace iai

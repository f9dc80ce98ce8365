#include "pairtrade/date.hpp"

#include <charconv>
#include <cstdio>

#include "pairtrade/error.hpp"

namespace pairtrade {

namespace {

int parse_field(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw DataError("unparsable date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date parse_date(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw DataError("unparsable date '" + std::string(text) + "'");
    }
    const int y = parse_field(text.substr(0, 4), text);
    const int m = parse_field(text.substr(5, 2), text);
    const int d = parse_field(text.substr(8, 2), text);
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw DataError("invalid calendar date '" + std::string(text) + "'");
    }
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

Date add_days(const Date& date, int days) {
    return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

}  // namespace pairtrade

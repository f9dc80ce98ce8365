#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace pairtrade {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws DataError.
Date parse_date(std::string_view text);

std::string format_date(const Date& date);

/// Calendar-day offset, used by the synthetic generators.
Date add_days(const Date& date, int days);

}  // namespace pairtrade

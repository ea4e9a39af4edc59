#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "screenwise/core/error.hpp"

namespace screenwise {

/// Calendar month. Every date in the panels is canonicalized to one of
/// these; day-level dates only appear on scored events.
class Month {
public:
    constexpr Month() = default;
    constexpr Month(int year, int month) : index_(year * 12 + (month - 1)) {}

    static constexpr Month from_index(int index) {
        Month m;
        m.index_ = index;
        return m;
    }

    constexpr int year() const { return floor_div(index_, 12); }
    constexpr int month() const { return index_ - year() * 12 + 1; }
    constexpr int index() const { return index_; }

    constexpr Month operator+(int months) const { return from_index(index_ + months); }
    constexpr Month operator-(int months) const { return from_index(index_ - months); }
    constexpr int operator-(Month other) const { return index_ - other.index_; }
    Month& operator++() {
        ++index_;
        return *this;
    }

    constexpr auto operator<=>(const Month&) const = default;

    std::chrono::year_month_day first_day() const {
        return std::chrono::year{year()} / std::chrono::month{static_cast<unsigned>(month())} /
               std::chrono::day{1};
    }

    std::chrono::year_month_day last_day() const {
        return std::chrono::year{year()} / std::chrono::month{static_cast<unsigned>(month())} /
               std::chrono::last;
    }

    std::string str() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
        return buf;
    }

    /// Accepts `YYYY-MM` or `YYYY-MM-DD`; the day is validated then dropped.
    static Month parse(std::string_view text) {
        int y = 0, m = 0, d = 1;
        if (!parse_parts(text, y, m, d))
            throw Error(ErrorCode::InvalidValue, "bad month '" + std::string(text) + "'");
        return Month(y, m);
    }

    static Month of(std::chrono::year_month_day date) {
        return Month(static_cast<int>(date.year()), static_cast<int>(static_cast<unsigned>(date.month())));
    }

private:
    static constexpr int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

    static bool parse_int(std::string_view s, int& out) {
        if (s.empty()) return false;
        for (char c : s)
            if (c < '0' || c > '9') return false;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    }

    friend std::chrono::year_month_day parse_date(std::string_view text);

    static bool parse_parts(std::string_view text, int& y, int& m, int& d) {
        if (text.size() != 7 && text.size() != 10) return false;
        if (text[4] != '-') return false;
        if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m)) return false;
        if (m < 1 || m > 12) return false;
        if (text.size() == 10) {
            if (text[7] != '-' || !parse_int(text.substr(8, 2), d)) return false;
            auto ymd = std::chrono::year{y} / std::chrono::month{static_cast<unsigned>(m)} /
                       std::chrono::day{static_cast<unsigned>(d)};
            if (!ymd.ok()) return false;
        }
        return true;
    }

    int index_ = 0;
};

/// Parses a `YYYY-MM-DD` calendar date.
inline std::chrono::year_month_day parse_date(std::string_view text) {
    int y = 0, m = 0, d = 0;
    if (text.size() != 10 || !Month::parse_parts(text, y, m, d))
        throw Error(ErrorCode::InvalidValue, "bad date '" + std::string(text) + "'");
    return std::chrono::year{y} / std::chrono::month{static_cast<unsigned>(m)} /
           std::chrono::day{static_cast<unsigned>(d)};
}

inline std::string format_date(std::chrono::year_month_day date) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

/// Whole days from `earlier` to `later` (negative if `later` precedes).
inline long days_between(std::chrono::year_month_day earlier, std::chrono::year_month_day later) {
    return (std::chrono::sys_days{later} - std::chrono::sys_days{earlier}).count();
}

}  // namespace screenwise

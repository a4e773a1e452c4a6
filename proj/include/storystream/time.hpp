/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/
#ifndef STORYSTREAM_TIME_HPP_
#define STORYSTREAM_TIME_HPP_

#include <charconv>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "error.hpp"

namespace storystream {

/// Millisecond-resolution UTC instants. Calendar arithmetic is never needed
/// past the parse/format boundary.
using Duration = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Duration>;

inline constexpr Duration whole_days(std::int64_t n) { return std::chrono::duration_cast<Duration>(std::chrono::days{n}); }

inline std::int64_t to_millis(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_millis(std::int64_t ms) { return Timestamp{Duration{ms}}; }

namespace detail {

inline int parse_fixed(std::string_view text, std::size_t pos, std::size_t width, std::string_view whole) {
    int value = 0;
    if (pos + width > text.size()) {
        throw Error(Errc::ParseError, "truncated timestamp '" + std::string(whole) + "'");
    }
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, value);
    if (ec != std::errc{} || ptr != text.data() + pos + width) {
        throw Error(Errc::ParseError, "malformed timestamp '" + std::string(whole) + "'");
    }
    return value;
}

inline void expect_char(std::string_view text, std::size_t pos, char c, std::string_view whole) {
    if (pos >= text.size() || text[pos] != c) {
        throw Error(Errc::ParseError, "malformed timestamp '" + std::string(whole) + "'");
    }
}

}// namespace detail

/// Accepts `YYYY-MM-DD` and `YYYY-MM-DDTHH:MM[:SS[.fff]]` followed by `Z` or
/// `+00:00`. Any other offset is rejected; inputs are UTC by contract.
inline Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    const auto whole = text;
    const int y = detail::parse_fixed(text, 0, 4, whole);
    detail::expect_char(text, 4, '-', whole);
    const int mo = detail::parse_fixed(text, 5, 2, whole);
    detail::expect_char(text, 7, '-', whole);
    const int d = detail::parse_fixed(text, 8, 2, whole);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw Error(Errc::ParseError, "invalid calendar date '" + std::string(whole) + "'");
    }
    Timestamp result = time_point_cast<Duration>(sys_days{ymd});
    if (text.size() == 10) {
        return result;
    }
    detail::expect_char(text, 10, 'T', whole);
    const int hh = detail::parse_fixed(text, 11, 2, whole);
    detail::expect_char(text, 13, ':', whole);
    const int mm = detail::parse_fixed(text, 14, 2, whole);
    int ss = 0;
    int ms = 0;
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        ss = detail::parse_fixed(text, pos + 1, 2, whole);
        pos += 3;
        if (pos < text.size() && text[pos] == '.') {
            std::size_t digits = 0;
            ++pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                if (digits < 3) {
                    ms = ms * 10 + (text[pos] - '0');
                }
                ++digits;
                ++pos;
            }
            if (digits == 0) {
                throw Error(Errc::ParseError, "malformed fraction in '" + std::string(whole) + "'");
            }
            for (; digits < 3; ++digits) {
                ms *= 10;
            }
        }
    }
    const auto zone = text.substr(pos);
    if (zone != "Z" && zone != "+00:00") {
        throw Error(Errc::ParseError, "timestamp must be UTC: '" + std::string(whole) + "'");
    }
    if (hh > 23 || mm > 59 || ss > 60) {
        throw Error(Errc::ParseError, "time of day out of range in '" + std::string(whole) + "'");
    }
    return result + hours{hh} + minutes{mm} + seconds{ss} + Duration{ms};
}

/// `YYYY-MM-DDTHH:MM:SSZ`, with `.mmm` appended only when the millisecond
/// part is nonzero.
inline std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const auto in_day = t - day_point;
    const auto h = duration_cast<hours>(in_day);
    const auto m = duration_cast<minutes>(in_day - h);
    const auto s = duration_cast<seconds>(in_day - h - m);
    const auto ms = (in_day - h - m - s).count();
    std::string out = fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}", static_cast<int>(ymd.year()),
                                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h.count(),
                                  m.count(), s.count());
    if (ms != 0) {
        out += fmt::format(".{:03d}", ms);
    }
    out += 'Z';
    return out;
}

}// namespace storystream

#endif// STORYSTREAM_TIME_HPP_

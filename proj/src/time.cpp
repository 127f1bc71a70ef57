#include "rankstab/time.hpp"

#include <charconv>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace rankstab {

namespace {

using namespace std::chrono;

int parse_digits(std::string_view text, std::size_t pos, std::size_t count, std::string_view whole) {
    if (pos + count > text.size()) {
        throw std::invalid_argument(fmt::format("truncated timestamp '{}'", whole));
    }
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') {
            throw std::invalid_argument(fmt::format("invalid timestamp '{}'", whole));
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c, std::string_view whole) {
    if (pos >= text.size() || text[pos] != c) {
        throw std::invalid_argument(fmt::format("invalid timestamp '{}'", whole));
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// "+HH:MM", "-HHMM", "+HH".
minutes parse_signed_offset(std::string_view text, std::string_view whole) {
    if (text.empty() || (text[0] != '+' && text[0] != '-')) {
        throw std::invalid_argument(fmt::format("invalid zone offset '{}'", whole));
    }
    const int sign = text[0] == '-' ? -1 : 1;
    text.remove_prefix(1);
    const int hh = parse_digits(text, 0, 2, whole);
    int mm = 0;
    if (text.size() == 5) {
        expect_char(text, 2, ':', whole);
        mm = parse_digits(text, 3, 2, whole);
    } else if (text.size() == 4) {
        mm = parse_digits(text, 2, 2, whole);
    } else if (text.size() != 2) {
        throw std::invalid_argument(fmt::format("invalid zone offset '{}'", whole));
    }
    if (hh > 14 || mm > 59) {
        throw std::invalid_argument(fmt::format("zone offset out of range '{}'", whole));
    }
    return sign * (hours{hh} + minutes{mm});
}

}  // namespace

ZoneOffset ZoneOffset::parse(std::string_view text) {
    text = trim(text);
    if (text == "UTC" || text == "Z" || text == "GMT") return ZoneOffset{};
    if (text == "CET") return ZoneOffset{hours{1}};
    if (text == "CEST") return ZoneOffset{hours{2}};
    if (text.starts_with("UTC") && text.size() > 3) text.remove_prefix(3);
    return ZoneOffset{parse_signed_offset(text, text)};
}

Instant ZoneOffset::to_utc(local_seconds local) const {
    return Instant{local.time_since_epoch() - offset_};
}

local_seconds ZoneOffset::to_local(Instant utc) const {
    return local_seconds{utc.time_since_epoch() + offset_};
}

std::string ZoneOffset::to_string() const {
    const auto total = offset_.count();
    const char sign = total < 0 ? '-' : '+';
    const auto magnitude = total < 0 ? -total : total;
    return fmt::format("{}{:02}:{:02}", sign, magnitude / 60, magnitude % 60);
}

Instant parse_timestamp(std::string_view text, ZoneOffset zone) {
    const std::string_view whole = text;
    text = trim(text);
    const int y = parse_digits(text, 0, 4, whole);
    expect_char(text, 4, '-', whole);
    const int mo = parse_digits(text, 5, 2, whole);
    expect_char(text, 7, '-', whole);
    const int d = parse_digits(text, 8, 2, whole);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw std::invalid_argument(fmt::format("invalid calendar date '{}'", whole));
    }

    seconds time_of_day{0};
    std::size_t pos = 10;
    if (text.size() > pos) {
        if (text[pos] != ' ' && text[pos] != 'T') {
            throw std::invalid_argument(fmt::format("invalid timestamp '{}'", whole));
        }
        const int hh = parse_digits(text, pos + 1, 2, whole);
        expect_char(text, pos + 3, ':', whole);
        const int mi = parse_digits(text, pos + 4, 2, whole);
        int ss = 0;
        pos += 6;
        if (pos < text.size() && text[pos] == ':') {
            ss = parse_digits(text, pos + 1, 2, whole);
            pos += 3;
        }
        // Fractional seconds are truncated.
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        }
        if (hh > 23 || mi > 59 || ss > 60) {
            throw std::invalid_argument(fmt::format("time of day out of range '{}'", whole));
        }
        time_of_day = hours{hh} + minutes{mi} + seconds{ss};
    }

    const auto local = local_days{ymd} + time_of_day;
    const std::string_view suffix = trim(text.substr(std::min(pos, text.size())));
    if (suffix.empty()) {
        return zone.to_utc(local);
    }
    if (suffix == "Z") {
        return Instant{local.time_since_epoch()};
    }
    return ZoneOffset{parse_signed_offset(suffix, whole)}.to_utc(local);
}

std::string format_utc(Instant t) {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

std::string format_local(Instant t, ZoneOffset zone) {
    const auto local = zone.to_local(t);
    const auto day_point = floor<days>(local);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{local - day_point};
    return fmt::format("{:04}-{:02}-{:02} {:02}:{:02}:{:02}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

minutes parse_time_of_day(std::string_view text) {
    const std::string_view whole = text;
    text = trim(text);
    if (text.size() != 5) {
        throw std::invalid_argument(fmt::format("expected HH:MM, got '{}'", whole));
    }
    const int hh = parse_digits(text, 0, 2, whole);
    expect_char(text, 2, ':', whole);
    const int mm = parse_digits(text, 3, 2, whole);
    if (hh > 23 || mm > 59) {
        throw std::invalid_argument(fmt::format("time of day out of range '{}'", whole));
    }
    return hours{hh} + minutes{mm};
}

}  // namespace rankstab

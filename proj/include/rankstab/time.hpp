#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace rankstab {

/// A UTC instant at second precision.
using Instant = std::chrono::sys_seconds;

/// A fixed offset from UTC. Log timestamps without an explicit zone are
/// read as local time in this offset.
class ZoneOffset {
public:
    constexpr ZoneOffset() = default;
    constexpr explicit ZoneOffset(std::chrono::minutes offset) : offset_(offset) {}

    /// Accepts "UTC", "Z", "CET" (+01:00), "CEST" (+02:00) or a signed
    /// "+HH:MM" / "-HH:MM" / "+HHMM". Throws std::invalid_argument.
    static ZoneOffset parse(std::string_view text);

    constexpr std::chrono::minutes offset() const { return offset_; }
    Instant to_utc(std::chrono::local_seconds local) const;
    std::chrono::local_seconds to_local(Instant utc) const;
    std::string to_string() const;

    friend constexpr bool operator==(ZoneOffset, ZoneOffset) = default;

private:
    std::chrono::minutes offset_{0};
};

inline constexpr ZoneOffset kCentralEuropeanTime{std::chrono::hours{1}};

/// Parses "YYYY-MM-DD HH:MM:SS" or "YYYY-MM-DDTHH:MM:SS", optionally
/// followed by "Z" or a "+HH:MM" offset. Timestamps without an explicit
/// offset are interpreted in `zone`. A bare date "YYYY-MM-DD" means
/// local midnight. Throws std::invalid_argument.
Instant parse_timestamp(std::string_view text, ZoneOffset zone);

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc(Instant t);

/// "YYYY-MM-DD HH:MM:SS" in the given zone, without an offset suffix.
std::string format_local(Instant t, ZoneOffset zone);

/// "HH:MM" local time of day. Throws std::invalid_argument.
std::chrono::minutes parse_time_of_day(std::string_view text);

}  // namespace rankstab

#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace rankstab {

/// Maps dataset-specific query spellings onto canonical query keys.
///
/// Config format, one entry per line, '#' starts a comment:
///
///     Bündniss90/Die Grünen = grüne
///     die linke = dielinke
///     cdu = MISSING
///
/// `key = MISSING` records that the canonical key has no suggestion data.
/// Spellings without an entry are their own canonical key. Mapping is a
/// single lookup; chains (a = b, b = c) are rejected.
class QueryAliasMap {
public:
    static constexpr std::string_view kMissingMarker = "MISSING";

    QueryAliasMap() = default;

    /// Throws ConfigError naming the offending line.
    static QueryAliasMap parse(std::istream& in);
    static QueryAliasMap load(const std::filesystem::path& path);

    std::string canonical(std::string_view raw) const;
    bool is_missing(std::string_view canonical_key) const;

    const std::map<std::string, std::string, std::less<>>& aliases() const noexcept { return aliases_; }
    const std::set<std::string, std::less<>>& missing() const noexcept { return missing_; }

    /// Every canonical key the config names, including MISSING markers.
    std::set<std::string> configured_keys() const;

private:
    std::map<std::string, std::string, std::less<>> aliases_;
    std::set<std::string, std::less<>> missing_;
};

}  // namespace rankstab

#include "rankstab/aliases.hpp"

#include <fstream>

#include <fmt/format.h>

#include "rankstab/errors.hpp"
#include "strings.hpp"

namespace rankstab {

QueryAliasMap QueryAliasMap::parse(std::istream& in) {
    QueryAliasMap map;
    std::map<std::string, std::size_t, std::less<>> defined_at;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = detail::trim(text);
        if (text.empty()) continue;

        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("alias map line {}: expected 'raw_query = canonical_key'", line_no));
        }
        const std::string lhs{detail::trim(text.substr(0, eq))};
        const std::string rhs{detail::trim(text.substr(eq + 1))};
        if (lhs.empty() || rhs.empty()) {
            throw ConfigError(fmt::format("alias map line {}: empty query or key", line_no));
        }
        if (rhs == kMissingMarker) {
            map.missing_.insert(lhs);
            continue;
        }
        if (auto it = map.aliases_.find(lhs); it != map.aliases_.end() && it->second != rhs) {
            throw ConfigError(fmt::format("alias map line {}: '{}' already maps to '{}' (line {})", line_no, lhs,
                                          it->second, defined_at[lhs]));
        }
        map.aliases_[lhs] = rhs;
        defined_at[lhs] = line_no;
    }

    for (const auto& [raw, key] : map.aliases_) {
        if (raw != key && map.aliases_.contains(key) && map.aliases_.at(key) != key) {
            throw ConfigError(fmt::format("alias map line {}: '{}' maps to '{}', which is itself an alias",
                                          defined_at[raw], raw, key));
        }
    }
    return map;
}

QueryAliasMap QueryAliasMap::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open alias map '{}'", path.string()));
    return parse(in);
}

std::string QueryAliasMap::canonical(std::string_view raw) const {
    if (auto it = aliases_.find(raw); it != aliases_.end()) return it->second;
    return std::string(raw);
}

bool QueryAliasMap::is_missing(std::string_view canonical_key) const { return missing_.contains(canonical_key); }

std::set<std::string> QueryAliasMap::configured_keys() const {
    std::set<std::string> keys(missing_.begin(), missing_.end());
    for (const auto& [raw, key] : aliases_) keys.insert(key);
    return keys;
}

}  // namespace rankstab

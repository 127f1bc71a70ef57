#include "rankstab/ranking.hpp"

#include <string_view>
#include <unordered_set>
#include <utility>

namespace rankstab {

Ranking::Ranking(std::vector<std::string> items) : items_(std::move(items)) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(items_.size());
    for (const auto& item : items_) {
        if (!seen.insert(item).second) {
            throw DuplicateItemError(item);
        }
    }
}

Ranking::Ranking(std::initializer_list<std::string> items)
    : Ranking(std::vector<std::string>(items)) {}

}  // namespace rankstab

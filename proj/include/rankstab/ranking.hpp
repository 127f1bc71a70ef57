#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankstab {

class DuplicateItemError : public std::invalid_argument {
public:
    explicit DuplicateItemError(const std::string& item)
        : std::invalid_argument("duplicate item in ranking: '" + item + "'"), item_(item) {}

    const std::string& item() const noexcept { return item_; }

private:
    std::string item_;
};

/// An ordered sequence of pairwise distinct items (URLs or suggestion terms),
/// best item first. The ranking is treated as the observed prefix of a
/// conceptually unbounded list.
class Ranking {
public:
    using const_iterator = std::vector<std::string>::const_iterator;

    Ranking() = default;

    /// Throws DuplicateItemError if any item occurs twice.
    explicit Ranking(std::vector<std::string> items);
    Ranking(std::initializer_list<std::string> items);

    const std::vector<std::string>& items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    const std::string& operator[](std::size_t rank0) const { return items_[rank0]; }

    const_iterator begin() const noexcept { return items_.begin(); }
    const_iterator end() const noexcept { return items_.end(); }

    friend bool operator==(const Ranking&, const Ranking&) = default;
    friend auto operator<=>(const Ranking&, const Ranking&) = default;

private:
    std::vector<std::string> items_;
};

}  // namespace rankstab

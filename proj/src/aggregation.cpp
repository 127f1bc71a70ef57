#include "rankstab/aggregation.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string_view>

namespace rankstab {

AggregationPolicy::AggregationPolicy(double presence_threshold) : threshold_(presence_threshold) {
    if (!(presence_threshold > 0.0 && presence_threshold <= 1.0)) {
        throw std::invalid_argument("presence threshold must lie in (0, 1], got " +
                                    std::to_string(presence_threshold));
    }
}

Ranking aggregate(const RequestBatch& batch, const AggregationPolicy& policy) {
    if (batch.lists.empty()) {
        throw std::invalid_argument("cannot aggregate an empty batch for query '" + batch.query + "'");
    }

    struct Tally {
        std::uint64_t rank_sum = 0;
        std::uint64_t count = 0;
    };
    std::map<std::string_view, Tally> tallies;
    for (const auto& list : batch.lists) {
        std::uint64_t rank = 1;
        for (const auto& url : list.urls) {
            auto& tally = tallies[url];
            tally.rank_sum += rank++;
            ++tally.count;
        }
    }

    const double total = static_cast<double>(batch.lists.size());
    struct Candidate {
        std::string_view url;
        Tally tally;
    };
    std::vector<Candidate> kept;
    for (const auto& [url, tally] : tallies) {
        if (static_cast<double>(tally.count) / total > policy.presence_threshold()) {
            kept.push_back({url, tally});
        }
    }

    // Mean ranks compared as exact fractions: sum_a / n_a < sum_b / n_b.
    std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
        const auto lhs = a.tally.rank_sum * b.tally.count;
        const auto rhs = b.tally.rank_sum * a.tally.count;
        if (lhs != rhs) return lhs < rhs;
        return a.url < b.url;
    });

    std::vector<std::string> urls;
    urls.reserve(kept.size());
    for (const auto& candidate : kept) urls.emplace_back(candidate.url);
    return Ranking(std::move(urls));
}

}  // namespace rankstab

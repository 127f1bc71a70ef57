#pragma once

#include <string>
#include <vector>

#include "rankstab/ranking.hpp"
#include "rankstab/time.hpp"

namespace rankstab {

/// One user's result page for a query. Ranks are implicit and 1-based.
struct ResultList {
    std::string request_id;
    Instant timestamp;
    Ranking urls;
};

/// Every result list observed for one (query, collection round).
struct RequestBatch {
    std::string query;
    Instant timepoint;
    std::vector<ResultList> lists;
};

class AggregationPolicy {
public:
    static constexpr double kDefaultPresenceThreshold = 1.0 / 3.0;

    /// Throws std::invalid_argument unless 0 < threshold <= 1.
    explicit AggregationPolicy(double presence_threshold = kDefaultPresenceThreshold);

    double presence_threshold() const noexcept { return threshold_; }

private:
    double threshold_;
};

/// Collapses a batch into its "typical" ranking.
///
/// A URL is kept when the fraction of lists containing it is strictly
/// greater than the presence threshold. Kept URLs are ordered by their mean
/// rank over the lists that contain them; equal means fall back to the URL
/// string. Throws std::invalid_argument for an empty batch.
Ranking aggregate(const RequestBatch& batch, const AggregationPolicy& policy = AggregationPolicy{});

}  // namespace rankstab

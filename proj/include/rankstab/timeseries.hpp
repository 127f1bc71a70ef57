#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rankstab/ranking.hpp"
#include "rankstab/rbo.hpp"
#include "rankstab/time.hpp"

namespace rankstab {

enum class SourceKind { results, suggestions };
enum class ComparisonMode { successive, fixed };

std::string_view to_string(SourceKind kind);
std::string_view to_string(ComparisonMode mode);
SourceKind parse_source_kind(std::string_view text);
ComparisonMode parse_comparison_mode(std::string_view text);

/// One observed ranking of a stream. `source` names the engine for
/// suggestions and is empty for aggregated result lists.
struct RankedSnapshot {
    std::string query;
    Instant timepoint;
    Ranking ranking;
    SourceKind kind = SourceKind::suggestions;
    std::string source;

    friend bool operator==(const RankedSnapshot&, const RankedSnapshot&) = default;
};

/// The RBO components of one comparison, stamped with the later snapshot's
/// timepoint. After smoothing each component holds its window mean.
struct SeriesPoint {
    Instant timepoint;
    double rbo_min = 0.0;
    double rbo_res = 0.0;
    double rbo_ext = 0.0;
};

struct StabilitySeries {
    std::string query;
    SourceKind kind = SourceKind::suggestions;
    std::string source;
    ComparisonMode mode = ComparisonMode::successive;
    std::vector<SeriesPoint> points;
};

class SmoothingPolicy {
public:
    /// Throws std::invalid_argument for window == 0.
    explicit SmoothingPolicy(std::size_t window);

    std::size_t window() const noexcept { return window_; }

private:
    std::size_t window_;
};

class EmptySeriesError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Point i compares snapshot i with snapshot i - 1. Requires at least two
/// snapshots of one (query, kind, source) stream with strictly increasing
/// timepoints.
StabilitySeries successive_series(std::span<const RankedSnapshot> snapshots, const RboParams& params);

/// Point i compares snapshot i with snapshot 0. Same preconditions as
/// successive_series; the reference itself is not a point.
StabilitySeries fixed_reference_series(std::span<const RankedSnapshot> snapshots, const RboParams& params);

StabilitySeries compare_series(std::span<const RankedSnapshot> snapshots, const RboParams& params,
                               ComparisonMode mode);

/// Trailing arithmetic mean over up to `window` most recent points; the
/// first points average over however many exist.
StabilitySeries moving_average(const StabilitySeries& series, const SmoothingPolicy& policy);

/// Converts a window in days to an observation count using the median gap
/// between consecutive timepoints. Returns at least 1.
std::size_t window_for_days(std::span<const Instant> timepoints, double window_days);

}  // namespace rankstab

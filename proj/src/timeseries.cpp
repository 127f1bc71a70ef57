#include "rankstab/timeseries.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace rankstab {

std::string_view to_string(SourceKind kind) {
    return kind == SourceKind::results ? "results" : "suggestions";
}

std::string_view to_string(ComparisonMode mode) {
    return mode == ComparisonMode::successive ? "successive" : "fixed";
}

SourceKind parse_source_kind(std::string_view text) {
    if (text == "results") return SourceKind::results;
    if (text == "suggestions") return SourceKind::suggestions;
    throw std::invalid_argument("unknown source kind '" + std::string(text) + "'");
}

ComparisonMode parse_comparison_mode(std::string_view text) {
    if (text == "successive") return ComparisonMode::successive;
    if (text == "fixed") return ComparisonMode::fixed;
    throw std::invalid_argument("unknown comparison mode '" + std::string(text) + "'");
}

SmoothingPolicy::SmoothingPolicy(std::size_t window) : window_(window) {
    if (window == 0) throw std::invalid_argument("smoothing window must be at least 1");
}

namespace {

void check_stream(std::span<const RankedSnapshot> snapshots) {
    if (snapshots.size() < 2) {
        throw EmptySeriesError("a stability series needs at least two snapshots, got " +
                               std::to_string(snapshots.size()));
    }
    const auto& first = snapshots.front();
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        const auto& s = snapshots[i];
        if (s.query != first.query || s.kind != first.kind || s.source != first.source) {
            throw std::invalid_argument("snapshots mix streams: '" + first.query + "' and '" + s.query + "'");
        }
        if (s.timepoint <= snapshots[i - 1].timepoint) {
            throw std::invalid_argument("snapshot timepoints must be strictly increasing (query '" +
                                        first.query + "', at " + format_utc(s.timepoint) + ")");
        }
    }
}

}  // namespace

StabilitySeries compare_series(std::span<const RankedSnapshot> snapshots, const RboParams& params,
                               ComparisonMode mode) {
    check_stream(snapshots);
    StabilitySeries series;
    series.query = snapshots.front().query;
    series.kind = snapshots.front().kind;
    series.source = snapshots.front().source;
    series.mode = mode;
    series.points.reserve(snapshots.size() - 1);
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        const auto& reference = mode == ComparisonMode::successive ? snapshots[i - 1] : snapshots.front();
        const RboResult r = rbo(snapshots[i].ranking, reference.ranking, params);
        series.points.push_back({snapshots[i].timepoint, r.min, r.res, r.ext});
    }
    return series;
}

StabilitySeries successive_series(std::span<const RankedSnapshot> snapshots, const RboParams& params) {
    return compare_series(snapshots, params, ComparisonMode::successive);
}

StabilitySeries fixed_reference_series(std::span<const RankedSnapshot> snapshots, const RboParams& params) {
    return compare_series(snapshots, params, ComparisonMode::fixed);
}

StabilitySeries moving_average(const StabilitySeries& series, const SmoothingPolicy& policy) {
    if (series.points.empty()) {
        throw EmptySeriesError("cannot smooth an empty series (query '" + series.query + "')");
    }
    StabilitySeries smoothed = series;
    const std::size_t window = policy.window();
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
        double sum_min = 0.0;
        double sum_res = 0.0;
        double sum_ext = 0.0;
        for (std::size_t j = first; j <= i; ++j) {
            sum_min += series.points[j].rbo_min;
            sum_res += series.points[j].rbo_res;
            sum_ext += series.points[j].rbo_ext;
        }
        const double n = static_cast<double>(i - first + 1);
        auto& out = smoothed.points[i];
        out.rbo_min = sum_min / n;
        out.rbo_res = sum_res / n;
        // Rounding must not push the mean outside the window's range.
        double lo = series.points[first].rbo_ext;
        double hi = lo;
        for (std::size_t j = first; j <= i; ++j) {
            lo = std::min(lo, series.points[j].rbo_ext);
            hi = std::max(hi, series.points[j].rbo_ext);
        }
        out.rbo_ext = std::clamp(sum_ext / n, lo, hi);
    }
    return smoothed;
}

std::size_t window_for_days(std::span<const Instant> timepoints, double window_days) {
    if (!(window_days > 0.0)) throw std::invalid_argument("window length in days must be positive");
    if (timepoints.size() < 2) return 1;
    std::vector<double> gaps;
    gaps.reserve(timepoints.size() - 1);
    for (std::size_t i = 1; i < timepoints.size(); ++i) {
        gaps.push_back(static_cast<double>((timepoints[i] - timepoints[i - 1]).count()));
    }
    std::sort(gaps.begin(), gaps.end());
    const std::size_t mid = gaps.size() / 2;
    const double median = gaps.size() % 2 == 1 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
    if (median <= 0.0) return 1;
    const double count = std::round(window_days * 86400.0 / median);
    return count < 1.0 ? 1 : static_cast<std::size_t>(count);
}

}  // namespace rankstab

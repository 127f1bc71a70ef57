#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rankstab/aggregation.hpp"
#include "rankstab/ingestion.hpp"
#include "rankstab/rbo.hpp"
#include "rankstab/timeseries.hpp"

namespace rankstab {

enum class OutputFormat { csv, svg, both };

OutputFormat parse_output_format(std::string_view text);

struct AnalysisConfig {
    std::vector<ComparisonMode> modes{ComparisonMode::successive, ComparisonMode::fixed};
    RboParams rbo;
    double window_days = 3.0;
    AggregationPolicy aggregation;
    OutputFormat format = OutputFormat::both;
    double reference_level = 0.5;

    /// Throws ConfigError.
    void validate() const;
};

struct StreamKey {
    SourceKind kind = SourceKind::suggestions;
    std::string source;
    std::string query;

    friend auto operator<=>(const StreamKey&, const StreamKey&) = default;
    friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

struct ModeSeries {
    StabilitySeries raw;
    StabilitySeries smoothed;
};

struct StreamAnalysis {
    StreamKey key;
    std::size_t snapshot_count = 0;
    std::size_t window = 1;  // smoothing window in observations
    std::vector<ModeSeries> series;  // one per configured mode, in config order
};

/// Aggregates each batch into one results snapshot.
std::vector<RankedSnapshot> snapshots_from_batches(const std::vector<RequestBatch>& batches,
                                                   const AggregationPolicy& policy);

std::map<StreamKey, std::vector<RankedSnapshot>> group_streams(const std::vector<RankedSnapshot>& snapshots);

/// Builds raw and smoothed series for every stream with at least two
/// snapshots, in StreamKey order. Streams are processed concurrently.
/// Skipped streams are described in `warnings` when given.
std::vector<StreamAnalysis> analyze_streams(const std::vector<RankedSnapshot>& snapshots, const AnalysisConfig& config,
                                            std::vector<std::string>* warnings = nullptr);

/// `timepoint,rbo_min,rbo_res,rbo_ext,rbo_ext_smoothed` with six decimals.
std::string series_csv(const ModeSeries& series);

/// Small-multiples grid with one panel per query. Each panel plots the
/// smoothed series of every source kind and one horizontal reference line.
std::string render_svg(const std::vector<StreamAnalysis>& analyses, ComparisonMode mode, double reference_level);

/// File name for a stream's CSV, e.g. "successive_suggestions_google_CSU.csv".
std::string series_file_name(const StreamKey& key, ComparisonMode mode);

/// Writes every output file into `out_dir` (created if needed) and returns
/// their paths. On failure, files already written are removed and IoError
/// is thrown.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& out_dir,
                                                 const std::vector<StreamAnalysis>& analyses,
                                                 const AnalysisConfig& config);

}  // namespace rankstab

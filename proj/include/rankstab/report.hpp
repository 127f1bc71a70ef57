#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rankstab/aliases.hpp"
#include "rankstab/ingestion.hpp"

namespace rankstab {

struct QueryCoverage {
    std::string query;
    std::size_t result_rounds = 0;
    std::size_t suggestion_snapshots = 0;
    bool marked_missing = false;  // alias map declares no suggestion data
};

struct StreamCadence {
    SourceKind kind = SourceKind::suggestions;
    std::string source;
    std::size_t streams = 0;
    double median_gap_hours = 0.0;  // median over all consecutive gaps in all streams
};

struct CoverageReport {
    SuggestionStats suggestions;
    std::size_t suggestion_snapshots = 0;
    ResultStats results;
    std::vector<QueryCoverage> queries;
    std::vector<StreamCadence> cadence;
};

/// Either log may be absent; absent logs count as empty.
CoverageReport build_report(const SuggestionLog* suggestions, const ResultLog* results,
                            const QueryAliasMap& aliases);

/// Plain-text `key: value` lines followed by cadence and per-query tables.
void print_report(std::ostream& out, const CoverageReport& report);

}  // namespace rankstab

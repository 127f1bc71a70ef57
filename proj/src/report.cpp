#include "rankstab/report.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

namespace rankstab {

namespace {

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

CoverageReport build_report(const SuggestionLog* suggestions, const ResultLog* results, const QueryAliasMap& aliases) {
    CoverageReport report;
    std::map<std::string, QueryCoverage> coverage;
    for (const auto& key : aliases.configured_keys()) coverage[key].query = key;

    // (kind, source) -> (per-stream timepoints)
    std::map<std::pair<SourceKind, std::string>, std::map<std::string, std::vector<Instant>>> streams;

    if (suggestions != nullptr) {
        report.suggestions = suggestions->stats;
        report.suggestion_snapshots = suggestions->snapshots.size();
        for (const auto& s : suggestions->snapshots) {
            auto& row = coverage[s.query];
            row.query = s.query;
            ++row.suggestion_snapshots;
            streams[{SourceKind::suggestions, s.source}][s.query].push_back(s.timepoint);
        }
    }
    if (results != nullptr) {
        report.results = results->stats;
        for (const auto& b : results->batches) {
            auto& row = coverage[b.query];
            row.query = b.query;
            ++row.result_rounds;
            streams[{SourceKind::results, ""}][b.query].push_back(b.timepoint);
        }
    }
    for (auto& [query, row] : coverage) {
        row.marked_missing = aliases.is_missing(query);
        report.queries.push_back(row);
    }

    for (const auto& [key, per_query] : streams) {
        StreamCadence cadence;
        cadence.kind = key.first;
        cadence.source = key.second;
        cadence.streams = per_query.size();
        std::vector<double> gaps;
        for (const auto& [query, times] : per_query) {
            auto sorted = times;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 1; i < sorted.size(); ++i) {
                gaps.push_back(static_cast<double>((sorted[i] - sorted[i - 1]).count()) / 3600.0);
            }
        }
        cadence.median_gap_hours = median(std::move(gaps));
        report.cadence.push_back(cadence);
    }
    return report;
}

void print_report(std::ostream& out, const CoverageReport& report) {
    const auto& s = report.suggestions;
    const auto& r = report.results;
    out << fmt::format("suggestions.records: {}\n", s.rows);
    out << fmt::format("suggestions.records_kept: {}\n", s.rows_kept);
    out << fmt::format("suggestions.records_malformed: {}\n", s.rows_malformed);
    out << fmt::format("suggestions.records_out_of_window: {}\n", s.rows_out_of_window);
    out << fmt::format("suggestions.fetches: {}\n", s.fetches);
    out << fmt::format("suggestions.snapshots: {}\n", report.suggestion_snapshots);
    out << fmt::format("suggestions.unique_terms: {}\n", s.unique_terms);
    out << fmt::format("results.records: {}\n", r.rows);
    out << fmt::format("results.records_kept: {}\n", r.rows_kept);
    out << fmt::format("results.records_malformed: {}\n", r.rows_malformed);
    out << fmt::format("results.records_not_organic: {}\n", r.rows_not_organic);
    out << fmt::format("results.records_wrong_country: {}\n", r.rows_wrong_country);
    out << fmt::format("results.records_wrong_keyboard: {}\n", r.rows_wrong_keyboard);
    out << fmt::format("results.records_out_of_window: {}\n", r.rows_out_of_window);
    out << fmt::format("results.requests: {}\n", r.requests);
    out << fmt::format("results.requests_with_gaps: {}\n", r.requests_with_gaps);
    out << fmt::format("results.unique_lists: {}\n", r.unique_lists);
    out << fmt::format("results.rounds: {}\n", r.batches);

    out << "cadence:\n";
    for (const auto& c : report.cadence) {
        const double per_day = c.median_gap_hours > 0.0 ? 24.0 / c.median_gap_hours : 0.0;
        const std::string name = c.source.empty() ? std::string(to_string(c.kind))
                                                  : fmt::format("{}/{}", to_string(c.kind), c.source);
        out << fmt::format("  {}: {} streams, median gap {:.2f} h ({:.2f} per day)\n", name, c.streams,
                           c.median_gap_hours, per_day);
    }

    out << "coverage:\n";
    out << "  query\tresult_rounds\tsuggestion_snapshots\n";
    for (const auto& q : report.queries) {
        const std::string suggestions =
            q.marked_missing ? (q.suggestion_snapshots == 0 ? std::string("MISSING")
                                                            : fmt::format("{} (marked MISSING)", q.suggestion_snapshots))
                             : std::to_string(q.suggestion_snapshots);
        out << fmt::format("  {}\t{}\t{}\n", q.query, q.result_rounds, suggestions);
    }
}

}  // namespace rankstab

#pragma once

// Parsing and normalisation of the two input logs.
//
// Suggestion log: delimiter-separated text with the header
//   source,queryterm,date,suggestterm,position
// where position is 0-based. Every (source, queryterm, date) group is one
// fetch; its positions must be exactly 0..n-1.
//
// Result log: delimiter-separated text whose column names are given by a
// ResultColumns mapping. Ranks are 1-based. Rows are cleaned (organic only,
// country, keyboard layout, date window), grouped by request id into result
// lists and then by (canonical query, collection round) into batches.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rankstab/aggregation.hpp"
#include "rankstab/aliases.hpp"
#include "rankstab/time.hpp"
#include "rankstab/timeseries.hpp"

namespace rankstab {

struct Diagnostic {
    std::size_t line = 0;
    std::string message;
};

/// Half-open interval [from, until) of accepted timestamps.
class DateWindow {
public:
    DateWindow(Instant from, Instant until);

    static DateWindow unbounded();

    /// Whole local days first..last inclusive.
    static DateWindow whole_days(std::chrono::year_month_day first, std::chrono::year_month_day last,
                                 ZoneOffset zone);

    /// 2017-08-04 through 2017-09-30, CET.
    static DateWindow observation_period_2017();

    bool contains(Instant t) const noexcept { return t >= from_ && t < until_; }
    Instant from() const noexcept { return from_; }
    Instant until() const noexcept { return until_; }

private:
    Instant from_;
    Instant until_;
};

/// Assigns timestamps to collection rounds. A round starts `tolerance`
/// before its anchor (a local time of day) and lasts until `tolerance`
/// before the next anchor, so early arrivals join the upcoming round.
struct BinningPolicy {
    std::vector<std::chrono::minutes> anchors{std::chrono::hours{5}, std::chrono::hours{17}};
    std::chrono::minutes tolerance{90};
    ZoneOffset zone = kCentralEuropeanTime;

    /// Six rounds a day at 00:00, 04:00, ..., 20:00 local.
    static BinningPolicy every_four_hours(ZoneOffset zone = kCentralEuropeanTime);

    /// Throws ConfigError for empty, unsorted, duplicate or out-of-day
    /// anchors, or a negative tolerance.
    void validate() const;
};

/// The round (as the anchor's UTC instant) each timestamp belongs to.
std::vector<Instant> bin_rounds(std::span<const Instant> timestamps, const BinningPolicy& policy);
Instant round_of(Instant timestamp, const BinningPolicy& policy);

struct SuggestionRecord {
    std::string source;
    std::string queryterm;
    Instant date;
    std::string suggestterm;
    std::size_t position = 0;

    friend bool operator==(const SuggestionRecord&, const SuggestionRecord&) = default;
};

struct SuggestionOptions {
    char delimiter = ',';
    bool strict = false;
    ZoneOffset zone = kCentralEuropeanTime;
    DateWindow window = DateWindow::unbounded();
    BinningPolicy binning;
};

struct SuggestionStats {
    std::size_t rows = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_malformed = 0;
    std::size_t rows_out_of_window = 0;
    std::size_t fetches = 0;
    std::size_t fetches_superseded = 0;  // later fetches in an already-filled round
    std::size_t fetches_malformed = 0;
    std::size_t unique_terms = 0;
};

struct SuggestionLog {
    std::vector<RankedSnapshot> snapshots;  // sorted by source, query, timepoint
    SuggestionStats stats;
    std::vector<Diagnostic> diagnostics;
};

/// Throws InputError for a bad header, ParseError for malformed rows in
/// strict mode and for duplicate positions in any mode.
SuggestionLog parse_suggestions(std::istream& in, const QueryAliasMap& aliases,
                                const SuggestionOptions& options = {});

void write_suggestion_header(std::ostream& out, char delimiter = ',');
void write_suggestion_records(std::ostream& out, std::span<const SuggestionRecord> records, ZoneOffset zone,
                              char delimiter = ',');

/// Header plus one row per ranked item. Empty rankings produce no rows.
void write_suggestions(std::ostream& out, std::span<const RankedSnapshot> snapshots, ZoneOffset zone,
                       char delimiter = ',');

std::vector<SuggestionRecord> to_records(const RankedSnapshot& snapshot);

/// Column names of the result log's semantic fields.
struct ResultColumns {
    std::string request_id = "request_id";
    std::string query = "query";
    std::string timestamp = "timestamp";
    std::string rank = "rank";
    std::string url = "url";
    std::string result_type = "result_type";
    std::string country = "country";
    std::string keyboard = "keyboard";

    /// `field = column` lines, '#' comments. Throws ConfigError.
    static ResultColumns parse(std::istream& in);
    static ResultColumns load(const std::filesystem::path& path);
};

/// Row filters; an empty string disables that filter. Comparisons ignore
/// ASCII case.
struct CleaningPolicy {
    std::string organic_type = "organic";
    std::string country = "DE";
    std::string keyboard = "de";
    DateWindow window = DateWindow::unbounded();
};

struct ResultOptions {
    ResultColumns columns;
    CleaningPolicy cleaning;
    BinningPolicy binning = BinningPolicy::every_four_hours();
    ZoneOffset zone = kCentralEuropeanTime;
    char delimiter = ',';
    bool strict = false;
};

struct ResultRecord {
    std::string request_id;
    std::string query;
    Instant timestamp;
    std::size_t rank = 0;
    std::string url;
    std::string result_type;
    std::string country;
    std::string keyboard;
};

struct ResultStats {
    std::size_t rows = 0;
    std::size_t rows_malformed = 0;
    std::size_t rows_not_organic = 0;
    std::size_t rows_wrong_country = 0;
    std::size_t rows_wrong_keyboard = 0;
    std::size_t rows_out_of_window = 0;
    std::size_t rows_kept = 0;
    std::size_t requests = 0;
    std::size_t requests_malformed = 0;
    std::size_t requests_with_gaps = 0;
    std::size_t unique_lists = 0;  // distinct (query, URL sequence) pairs
    std::size_t batches = 0;
};

struct ResultLog {
    std::vector<RequestBatch> batches;  // sorted by query, timepoint
    ResultStats stats;
    std::vector<Diagnostic> diagnostics;
};

/// Throws InputError for a bad header, ParseError for malformed rows in
/// strict mode and for duplicate ranks within a request in any mode.
ResultLog parse_results(std::istream& in, const QueryAliasMap& aliases, const ResultOptions& options = {});

/// True if the record survives every filter of the policy.
bool passes_filters(const ResultRecord& record, const CleaningPolicy& policy);

}  // namespace rankstab

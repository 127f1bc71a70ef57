#include "rankstab/ingestion.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "rankstab/csv.hpp"
#include "rankstab/errors.hpp"
#include "strings.hpp"

namespace rankstab {

using namespace std::chrono;

DateWindow::DateWindow(Instant from, Instant until) : from_(from), until_(until) {
    if (until < from) throw std::invalid_argument("date window ends before it starts");
}

DateWindow DateWindow::unbounded() {
    return DateWindow(Instant{seconds{std::numeric_limits<seconds::rep>::min() / 2}},
                      Instant{seconds{std::numeric_limits<seconds::rep>::max() / 2}});
}

DateWindow DateWindow::whole_days(year_month_day first, year_month_day last, ZoneOffset zone) {
    return DateWindow(zone.to_utc(std::chrono::local_days{first}),
                      zone.to_utc(std::chrono::local_days{last} + days{1}));
}

DateWindow DateWindow::observation_period_2017() {
    return whole_days(year{2017} / August / 4, year{2017} / September / 30, kCentralEuropeanTime);
}

BinningPolicy BinningPolicy::every_four_hours(ZoneOffset zone) {
    BinningPolicy policy;
    policy.anchors.clear();
    for (int h = 0; h < 24; h += 4) policy.anchors.push_back(hours{h});
    policy.tolerance = minutes{90};
    policy.zone = zone;
    return policy;
}

void BinningPolicy::validate() const {
    if (anchors.empty()) throw ConfigError("binning policy needs at least one anchor time");
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (anchors[i] < minutes{0} || anchors[i] >= hours{24}) {
            throw ConfigError("binning anchor outside 00:00..23:59");
        }
        if (i > 0 && anchors[i] <= anchors[i - 1]) {
            throw ConfigError("binning anchors must be strictly increasing");
        }
    }
    if (tolerance < minutes{0} || tolerance >= hours{24}) {
        throw ConfigError("binning tolerance must lie in [0, 24h)");
    }
}

Instant round_of(Instant timestamp, const BinningPolicy& policy) {
    const auto shifted = policy.zone.to_local(timestamp) + policy.tolerance;
    auto day = floor<days>(shifted);
    const auto time_of_day = shifted - day;
    auto it = std::upper_bound(policy.anchors.begin(), policy.anchors.end(), time_of_day,
                               [](seconds t, minutes anchor) { return t < anchor; });
    minutes anchor;
    if (it == policy.anchors.begin()) {
        day -= days{1};
        anchor = policy.anchors.back();
    } else {
        anchor = *std::prev(it);
    }
    return policy.zone.to_utc(day + anchor);
}

std::vector<Instant> bin_rounds(std::span<const Instant> timestamps, const BinningPolicy& policy) {
    policy.validate();
    std::vector<Instant> rounds;
    rounds.reserve(timestamps.size());
    for (const auto t : timestamps) rounds.push_back(round_of(t, policy));
    return rounds;
}

namespace {

bool blank_record(const std::vector<std::string>& fields) {
    return std::all_of(fields.begin(), fields.end(), [](const std::string& f) { return detail::trim(f).empty(); });
}

std::map<std::string, std::size_t, std::less<>> header_index(const std::vector<std::string>& header) {
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name{detail::trim(header[i])};
        if (!index.emplace(name, i).second) {
            throw InputError(fmt::format("duplicate column '{}' in header", name));
        }
    }
    return index;
}

// Collects malformed-row handling shared by both parsers.
class RowErrors {
public:
    RowErrors(bool strict, std::vector<Diagnostic>& diagnostics) : strict_(strict), diagnostics_(diagnostics) {}

    void report(std::size_t line, std::string message) {
        if (strict_) throw ParseError(line, message);
        diagnostics_.push_back({line, std::move(message)});
    }

    void note(std::size_t line, std::string message) { diagnostics_.push_back({line, std::move(message)}); }

private:
    bool strict_;
    std::vector<Diagnostic>& diagnostics_;
};

constexpr std::array<std::string_view, 5> kSuggestionColumns = {"source", "queryterm", "date", "suggestterm",
                                                                 "position"};

}  // namespace

SuggestionLog parse_suggestions(std::istream& in, const QueryAliasMap& aliases, const SuggestionOptions& options) {
    options.binning.validate();
    SuggestionLog log;
    RowErrors errors(options.strict, log.diagnostics);
    CsvReader reader(in, options.delimiter);

    std::vector<std::string> fields;
    if (!reader.next(fields)) return log;
    const auto index = header_index(fields);
    if (index.size() != kSuggestionColumns.size() ||
        !std::all_of(kSuggestionColumns.begin(), kSuggestionColumns.end(),
                     [&](std::string_view c) { return index.contains(c); })) {
        throw InputError("suggestion log header must be exactly source,queryterm,date,suggestterm,position");
    }
    const std::size_t col_source = index.find("source")->second;
    const std::size_t col_query = index.find("queryterm")->second;
    const std::size_t col_date = index.find("date")->second;
    const std::size_t col_term = index.find("suggestterm")->second;
    const std::size_t col_position = index.find("position")->second;

    struct Entry {
        std::size_t position;
        std::string term;
        std::size_t line;
    };
    using FetchKey = std::tuple<std::string, std::string, Instant>;
    std::map<FetchKey, std::vector<Entry>> fetches;
    std::set<std::string, std::less<>> terms;

    while (reader.next(fields)) {
        if (blank_record(fields)) continue;
        ++log.stats.rows;
        const std::size_t line = reader.line();
        if (fields.size() != kSuggestionColumns.size()) {
            ++log.stats.rows_malformed;
            errors.report(line, fmt::format("expected {} fields, found {}", kSuggestionColumns.size(), fields.size()));
            continue;
        }
        const std::string source{detail::trim(fields[col_source])};
        const std::string query{detail::trim(fields[col_query])};
        const std::string term{detail::trim(fields[col_term])};
        const auto position = detail::parse_int<std::size_t>(fields[col_position]);
        std::optional<Instant> date;
        try {
            date = parse_timestamp(fields[col_date], options.zone);
        } catch (const std::invalid_argument& e) {
            ++log.stats.rows_malformed;
            errors.report(line, e.what());
            continue;
        }
        if (source.empty() || query.empty() || term.empty()) {
            ++log.stats.rows_malformed;
            errors.report(line, "empty source, queryterm or suggestterm");
            continue;
        }
        if (!position) {
            ++log.stats.rows_malformed;
            errors.report(line, fmt::format("invalid position '{}'", fields[col_position]));
            continue;
        }
        if (!options.window.contains(*date)) {
            ++log.stats.rows_out_of_window;
            continue;
        }
        ++log.stats.rows_kept;
        terms.insert(term);
        fetches[{source, aliases.canonical(query), *date}].push_back({*position, term, line});
    }
    log.stats.unique_terms = terms.size();
    log.stats.fetches = fetches.size();

    std::optional<std::pair<std::string, std::string>> stream;
    std::optional<Instant> stream_round;
    for (auto& [key, entries] : fetches) {
        const auto& [source, query, date] = key;
        std::stable_sort(entries.begin(), entries.end(),
                         [](const Entry& a, const Entry& b) { return a.position < b.position; });
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (entries[i].position == entries[i - 1].position) {
                throw ParseError(entries[i].line,
                                 fmt::format("duplicate position {} for query '{}' at {}", entries[i].position, query,
                                             format_local(date, options.zone)));
            }
        }
        const bool gapless = entries.back().position + 1 == entries.size();
        if (!gapless) {
            errors.report(entries.front().line,
                          fmt::format("positions for query '{}' at {} are not 0..{}", query,
                                      format_local(date, options.zone), entries.size() - 1));
        }

        std::vector<std::string> items;
        items.reserve(entries.size());
        for (auto& e : entries) items.push_back(std::move(e.term));
        std::optional<Ranking> ranking;
        try {
            ranking.emplace(std::move(items));
        } catch (const DuplicateItemError& e) {
            ++log.stats.fetches_malformed;
            errors.report(entries.front().line, fmt::format("query '{}' at {}: {}", query,
                                                            format_local(date, options.zone), e.what()));
            continue;
        }

        const Instant round = round_of(date, options.binning);
        const std::pair<std::string, std::string> this_stream{source, query};
        if (stream == this_stream && stream_round == round) {
            ++log.stats.fetches_superseded;
            errors.note(entries.front().line,
                        fmt::format("query '{}' fetched again at {} in the same round; keeping the earlier fetch",
                                    query, format_local(date, options.zone)));
            continue;
        }
        stream = this_stream;
        stream_round = round;
        log.snapshots.push_back({query, date, std::move(*ranking), SourceKind::suggestions, source});
    }
    return log;
}

void write_suggestion_header(std::ostream& out, char delimiter) {
    const std::vector<std::string> header(kSuggestionColumns.begin(), kSuggestionColumns.end());
    write_csv_row(out, header, delimiter);
}

void write_suggestion_records(std::ostream& out, std::span<const SuggestionRecord> records, ZoneOffset zone,
                              char delimiter) {
    for (const auto& r : records) {
        const std::array<std::string, 5> row = {r.source, r.queryterm, format_local(r.date, zone), r.suggestterm,
                                                std::to_string(r.position)};
        write_csv_row(out, row, delimiter);
    }
}

std::vector<SuggestionRecord> to_records(const RankedSnapshot& snapshot) {
    std::vector<SuggestionRecord> records;
    records.reserve(snapshot.ranking.size());
    for (std::size_t i = 0; i < snapshot.ranking.size(); ++i) {
        records.push_back({snapshot.source, snapshot.query, snapshot.timepoint, snapshot.ranking[i], i});
    }
    return records;
}

void write_suggestions(std::ostream& out, std::span<const RankedSnapshot> snapshots, ZoneOffset zone,
                       char delimiter) {
    write_suggestion_header(out, delimiter);
    for (const auto& snapshot : snapshots) {
        write_suggestion_records(out, to_records(snapshot), zone, delimiter);
    }
}

ResultColumns ResultColumns::parse(std::istream& in) {
    ResultColumns columns;
    const std::map<std::string_view, std::string ResultColumns::*> fields = {
        {"request_id", &ResultColumns::request_id}, {"query", &ResultColumns::query},
        {"timestamp", &ResultColumns::timestamp},   {"rank", &ResultColumns::rank},
        {"url", &ResultColumns::url},               {"result_type", &ResultColumns::result_type},
        {"country", &ResultColumns::country},       {"keyboard", &ResultColumns::keyboard},
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = detail::trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("column mapping line {}: expected 'field = column'", line_no));
        }
        const auto field = detail::trim(text.substr(0, eq));
        const auto column = detail::trim(text.substr(eq + 1));
        const auto it = fields.find(field);
        if (it == fields.end()) {
            throw ConfigError(fmt::format("column mapping line {}: unknown field '{}'", line_no, field));
        }
        if (column.empty()) {
            throw ConfigError(fmt::format("column mapping line {}: empty column name for '{}'", line_no, field));
        }
        columns.*(it->second) = std::string(column);
    }
    return columns;
}

ResultColumns ResultColumns::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open column mapping '{}'", path.string()));
    return parse(in);
}

bool passes_filters(const ResultRecord& record, const CleaningPolicy& policy) {
    if (!policy.organic_type.empty() && !detail::iequals(record.result_type, policy.organic_type)) return false;
    if (!policy.country.empty() && !detail::iequals(record.country, policy.country)) return false;
    if (!policy.keyboard.empty() && !detail::iequals(record.keyboard, policy.keyboard)) return false;
    return policy.window.contains(record.timestamp);
}

ResultLog parse_results(std::istream& in, const QueryAliasMap& aliases, const ResultOptions& options) {
    options.binning.validate();
    ResultLog log;
    RowErrors errors(options.strict, log.diagnostics);
    CsvReader reader(in, options.delimiter);

    std::vector<std::string> fields;
    if (!reader.next(fields)) return log;
    const auto index = header_index(fields);
    const std::size_t header_size = fields.size();
    const auto& c = options.columns;
    std::vector<std::string> missing;
    const auto column = [&](const std::string& name) -> std::size_t {
        const auto it = index.find(name);
        if (it == index.end()) {
            missing.push_back(name);
            return 0;
        }
        return it->second;
    };
    const std::size_t col_request = column(c.request_id);
    const std::size_t col_query = column(c.query);
    const std::size_t col_time = column(c.timestamp);
    const std::size_t col_rank = column(c.rank);
    const std::size_t col_url = column(c.url);
    const std::size_t col_type = column(c.result_type);
    const std::size_t col_country = column(c.country);
    const std::size_t col_keyboard = column(c.keyboard);
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw InputError("result log header lacks required columns: " + list);
    }

    struct Row {
        ResultRecord record;
        std::size_t line;
    };
    std::map<std::string, std::vector<Row>> requests;

    while (reader.next(fields)) {
        if (blank_record(fields)) continue;
        ++log.stats.rows;
        const std::size_t line = reader.line();
        if (fields.size() != header_size) {
            ++log.stats.rows_malformed;
            errors.report(line, fmt::format("expected {} fields, found {}", header_size, fields.size()));
            continue;
        }
        ResultRecord record;
        record.request_id = std::string(detail::trim(fields[col_request]));
        record.query = std::string(detail::trim(fields[col_query]));
        record.url = std::string(detail::trim(fields[col_url]));
        record.result_type = std::string(detail::trim(fields[col_type]));
        record.country = std::string(detail::trim(fields[col_country]));
        record.keyboard = std::string(detail::trim(fields[col_keyboard]));
        try {
            record.timestamp = parse_timestamp(fields[col_time], options.zone);
        } catch (const std::invalid_argument& e) {
            ++log.stats.rows_malformed;
            errors.report(line, e.what());
            continue;
        }
        const auto rank = detail::parse_int<std::size_t>(fields[col_rank]);
        if (!rank || *rank == 0) {
            ++log.stats.rows_malformed;
            errors.report(line, fmt::format("invalid rank '{}'", fields[col_rank]));
            continue;
        }
        record.rank = *rank;
        if (record.request_id.empty() || record.query.empty() || record.url.empty()) {
            ++log.stats.rows_malformed;
            errors.report(line, "empty request id, query or url");
            continue;
        }

        const auto& policy = options.cleaning;
        if (!policy.organic_type.empty() && !detail::iequals(record.result_type, policy.organic_type)) {
            ++log.stats.rows_not_organic;
            continue;
        }
        if (!policy.country.empty() && !detail::iequals(record.country, policy.country)) {
            ++log.stats.rows_wrong_country;
            continue;
        }
        if (!policy.keyboard.empty() && !detail::iequals(record.keyboard, policy.keyboard)) {
            ++log.stats.rows_wrong_keyboard;
            continue;
        }
        if (!policy.window.contains(record.timestamp)) {
            ++log.stats.rows_out_of_window;
            continue;
        }
        ++log.stats.rows_kept;
        const std::string id = record.request_id;
        requests[id].push_back({std::move(record), line});
    }

    using BatchKey = std::pair<std::string, Instant>;
    std::map<BatchKey, std::vector<ResultList>> batches;
    std::set<std::pair<std::string, std::vector<std::string>>> unique_lists;

    for (auto& [id, rows] : requests) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.record.rank < b.record.rank; });
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].record.rank == rows[i - 1].record.rank) {
                throw ParseError(rows[i].line,
                                 fmt::format("duplicate rank {} in request '{}'", rows[i].record.rank, id));
            }
        }
        const std::string& raw_query = rows.front().record.query;
        const auto mixed = std::find_if(rows.begin(), rows.end(),
                                        [&](const Row& r) { return r.record.query != raw_query; });
        if (mixed != rows.end()) {
            ++log.stats.requests_malformed;
            errors.report(mixed->line, fmt::format("request '{}' mixes queries '{}' and '{}'", id, raw_query,
                                                   mixed->record.query));
            continue;
        }

        bool gaps = rows.front().record.rank != 1;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].record.rank != rows[i - 1].record.rank + 1) gaps = true;
        }
        if (gaps) {
            ++log.stats.requests_with_gaps;
            errors.note(rows.front().line, fmt::format("request '{}' has gaps in its ranks", id));
        }

        std::vector<std::string> urls;
        Instant timestamp = rows.front().record.timestamp;
        for (const auto& r : rows) {
            urls.push_back(r.record.url);
            timestamp = std::min(timestamp, r.record.timestamp);
        }
        std::optional<Ranking> ranking;
        try {
            ranking.emplace(urls);
        } catch (const DuplicateItemError& e) {
            ++log.stats.requests_malformed;
            errors.report(rows.front().line, fmt::format("request '{}': {}", id, e.what()));
            continue;
        }

        ++log.stats.requests;
        std::string query = aliases.canonical(raw_query);
        unique_lists.emplace(query, std::move(urls));
        const Instant round = round_of(timestamp, options.binning);
        batches[{std::move(query), round}].push_back({id, timestamp, std::move(*ranking)});
    }
    log.stats.unique_lists = unique_lists.size();

    for (auto& [key, lists] : batches) {
        std::sort(lists.begin(), lists.end(), [](const ResultList& a, const ResultList& b) {
            return std::tie(a.timestamp, a.request_id) < std::tie(b.timestamp, b.request_id);
        });
        log.batches.push_back({key.first, key.second, std::move(lists)});
    }
    log.stats.batches = log.batches.size();
    return log;
}

}  // namespace rankstab

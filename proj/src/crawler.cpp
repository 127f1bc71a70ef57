#include "rankstab/crawler.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace rankstab {

using namespace std::chrono;
using nlohmann::json;

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t count = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

template <typename T>
T get_field(const json& object, const std::string& key, const std::string& path, const T& fallback) {
    if (!object.contains(key)) return fallback;
    try {
        return object.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("{}{}: wrong type", path, key));
    }
}

std::vector<minutes> parse_schedule(const json& value, const std::string& field) {
    if (!value.is_array()) throw ConfigError(field + ": expected an array of \"HH:MM\" strings");
    std::vector<minutes> schedule;
    for (std::size_t i = 0; i < value.size(); ++i) {
        const auto item_field = fmt::format("{}[{}]", field, i);
        if (!value[i].is_string()) throw ConfigError(item_field + ": expected \"HH:MM\"");
        try {
            schedule.push_back(parse_time_of_day(value[i].get<std::string>()));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(item_field + ": " + e.what());
        }
    }
    std::sort(schedule.begin(), schedule.end());
    return schedule;
}

ZoneOffset parse_zone_field(const json& value, const std::string& field) {
    if (!value.is_string()) throw ConfigError(field + ": expected a zone such as \"CET\" or \"+01:00\"");
    try {
        return ZoneOffset::parse(value.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field + ": " + e.what());
    }
}

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string target;  // path?query
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw FetchError(FetchError::Kind::network, 0, "invalid URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

void CrawlerConfig::validate() const {
    if (targets.empty()) throw ConfigError("targets: at least one target is required");
    if (output.empty()) throw ConfigError("output: path must not be empty");
    if (retry.attempts < 1) throw ConfigError("retry.attempts: must be at least 1");
    if (retry.initial_backoff < milliseconds{0}) throw ConfigError("retry.initial_backoff_ms: must not be negative");
    if (retry.backoff_multiplier < 1.0) throw ConfigError("retry.multiplier: must be at least 1");
    if (politeness_delay < milliseconds{0}) throw ConfigError("politeness_delay_ms: must not be negative");
    if (request_timeout <= seconds{0}) throw ConfigError("request_timeout_s: must be positive");

    std::set<std::string> sources;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        const auto field = fmt::format("targets[{}].", i);
        if (t.source.empty()) throw ConfigError(field + "source: must not be empty");
        if (!sources.insert(t.source).second) throw ConfigError(field + "source: duplicate source '" + t.source + "'");
        if (count_occurrences(t.endpoint, CrawlTarget::kQueryPlaceholder) != 1) {
            throw ConfigError(field + "endpoint: must contain exactly one {query} placeholder");
        }
        if (!t.endpoint.starts_with("http://") && !t.endpoint.starts_with("https://")) {
            throw ConfigError(field + "endpoint: must be an http:// or https:// URL");
        }
        if (t.queries.empty()) throw ConfigError(field + "queries: at least one query is required");
        std::set<std::string> seen;
        for (std::size_t q = 0; q < t.queries.size(); ++q) {
            if (t.queries[q].empty()) throw ConfigError(fmt::format("{}queries[{}]: must not be empty", field, q));
            if (!seen.insert(t.queries[q]).second) {
                throw ConfigError(fmt::format("{}queries[{}]: duplicate query '{}'", field, q, t.queries[q]));
            }
        }
        if (t.schedule.empty()) throw ConfigError(field + "schedule: at least one time of day is required");
        for (std::size_t s = 1; s < t.schedule.size(); ++s) {
            if (t.schedule[s] <= t.schedule[s - 1]) {
                throw ConfigError(field + "schedule: times must be distinct and increasing");
            }
        }
    }
}

CrawlerConfig parse_crawler_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");

    CrawlerConfig config;
    config.output = get_field<std::string>(root, "output", "", "");
    ZoneOffset zone = kCentralEuropeanTime;
    if (root.contains("timezone")) zone = parse_zone_field(root["timezone"], "timezone");
    config.output_zone = zone;
    std::vector<minutes> default_schedule{hours{5}, hours{17}};
    if (root.contains("schedule")) default_schedule = parse_schedule(root["schedule"], "schedule");

    if (root.contains("retry")) {
        const auto& retry = root["retry"];
        if (!retry.is_object()) throw ConfigError("retry: expected an object");
        config.retry.attempts = get_field<int>(retry, "attempts", "retry.", config.retry.attempts);
        config.retry.initial_backoff = milliseconds{
            get_field<long long>(retry, "initial_backoff_ms", "retry.", config.retry.initial_backoff.count())};
        config.retry.backoff_multiplier =
            get_field<double>(retry, "multiplier", "retry.", config.retry.backoff_multiplier);
    }
    config.politeness_delay =
        milliseconds{get_field<long long>(root, "politeness_delay_ms", "", config.politeness_delay.count())};
    config.request_timeout =
        seconds{get_field<long long>(root, "request_timeout_s", "", config.request_timeout.count())};
    config.missed_slot_grace =
        minutes{get_field<long long>(root, "missed_slot_grace_min", "", config.missed_slot_grace.count())};

    if (!root.contains("targets") || !root["targets"].is_array()) {
        throw ConfigError("targets: expected an array of targets");
    }
    const auto& targets = root["targets"];
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        const auto field = fmt::format("targets[{}].", i);
        if (!t.is_object()) throw ConfigError(fmt::format("targets[{}]: expected an object", i));
        CrawlTarget target;
        target.source = get_field<std::string>(t, "source", field, "");
        target.endpoint = get_field<std::string>(t, "endpoint", field, "");
        target.queries = get_field<std::vector<std::string>>(t, "queries", field, {});
        target.schedule = t.contains("schedule") ? parse_schedule(t["schedule"], field + "schedule") : default_schedule;
        target.zone = t.contains("timezone") ? parse_zone_field(t["timezone"], field + "timezone") : zone;
        const auto index = get_field<long long>(t, "suggestion_index", field, 1);
        if (index < 0) throw ConfigError(field + "suggestion_index: must not be negative");
        target.suggestion_index = static_cast<std::size_t>(index);
        target.headers = get_field<std::map<std::string, std::string>>(t, "headers", field, {});
        config.targets.push_back(std::move(target));
    }
    config.validate();
    return config;
}

CrawlerConfig load_crawler_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_crawler_config(buffer.str());
}

std::string url_encode(std::string_view text) {
    std::string out;
    out.reserve(text.size() * 3);
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
            c == '_' || c == '~') {
            out.push_back(ch);
        } else {
            out += fmt::format("%{:02X}", c);
        }
    }
    return out;
}

std::vector<std::string> parse_suggestion_payload(std::string_view body, std::size_t index) {
    json payload;
    try {
        payload = json::parse(body);
    } catch (const json::parse_error& e) {
        throw FetchError(FetchError::Kind::payload, 200, std::string("payload is not JSON: ") + e.what());
    }
    if (!payload.is_array() || payload.size() <= index || !payload[index].is_array()) {
        throw FetchError(FetchError::Kind::payload, 200,
                         fmt::format("payload element {} is not an array of suggestions", index));
    }
    std::vector<std::string> suggestions;
    std::set<std::string> seen;
    for (const auto& item : payload[index]) {
        // Some endpoints wrap each suggestion as [text, ...].
        const json* text = &item;
        if (item.is_array() && !item.empty()) text = &item[0];
        if (!text->is_string()) {
            throw FetchError(FetchError::Kind::payload, 200, "suggestion entry is not a string");
        }
        auto value = text->get<std::string>();
        if (!seen.insert(value).second) {
            throw FetchError(FetchError::Kind::payload, 200, "payload repeats suggestion '" + value + "'");
        }
        suggestions.push_back(std::move(value));
    }
    return suggestions;
}

Instant SystemClock::now() { return floor<seconds>(system_clock::now()); }

bool SystemClock::sleep_until(Instant t) {
    while (!stopped()) {
        const auto remaining = t - system_clock::now();
        if (remaining <= system_clock::duration::zero()) return true;
        std::this_thread::sleep_for(std::min<system_clock::duration>(remaining, milliseconds{200}));
    }
    return false;
}

bool SystemClock::sleep_for(milliseconds d) {
    return sleep_until(floor<seconds>(system_clock::now() + d + milliseconds{999}));
}

CrawlResult fetch_suggestions(const CrawlTarget& target, std::string_view query, Clock& clock, seconds timeout) {
    std::string url = target.endpoint;
    const auto at = url.find(CrawlTarget::kQueryPlaceholder);
    url.replace(at, CrawlTarget::kQueryPlaceholder.size(), url_encode(query));
    const SplitUrl parts = split_url(url);

    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_follow_location(true);
    httplib::Headers headers;
    for (const auto& [name, value] : target.headers) headers.emplace(name, value);

    CrawlResult result;
    result.query = std::string(query);
    result.fetched_at = clock.now();
    const auto response = client.Get(parts.target, headers);
    if (!response) {
        throw FetchError(FetchError::Kind::network, 0,
                         fmt::format("GET {} failed: {}", url, httplib::to_string(response.error())));
    }
    result.http_status = response->status;
    if (response->status < 200 || response->status >= 300) {
        throw FetchError(FetchError::Kind::status, response->status,
                         fmt::format("GET {} returned HTTP {}", url, response->status));
    }
    result.suggestions = parse_suggestion_payload(response->body, target.suggestion_index);
    return result;
}

CsvSuggestionSink::CsvSuggestionSink(std::filesystem::path path, ZoneOffset zone, char delimiter)
    : path_(std::move(path)), zone_(zone), delimiter_(delimiter) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0;
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) throw SinkError(fmt::format("cannot open '{}' for appending", path_.string()));
    if (fresh) {
        write_suggestion_header(out_, delimiter_);
        out_.flush();
        if (!out_) throw SinkError(fmt::format("cannot write header to '{}'", path_.string()));
    }
}

void CsvSuggestionSink::append(std::span<const SuggestionRecord> records) {
    std::ostringstream buffer;
    write_suggestion_records(buffer, records, zone_, delimiter_);
    const std::string text = buffer.str();
    out_.write(text.data(), static_cast<std::streamsize>(text.size()));
    out_.flush();
    if (!out_) throw SinkError(fmt::format("write to '{}' failed", path_.string()));
}

void CsvSuggestionSink::flush() {
    out_.flush();
    if (!out_) throw SinkError(fmt::format("flush of '{}' failed", path_.string()));
}

Instant next_slot(const CrawlerConfig& config, Instant after) {
    std::optional<Instant> best;
    for (const auto& target : config.targets) {
        const auto today = floor<days>(target.zone.to_local(after));
        for (const auto day : {today, today + days{1}}) {
            for (const auto time : target.schedule) {
                const Instant candidate = target.zone.to_utc(day + time);
                if (candidate > after && (!best || candidate < *best)) best = candidate;
            }
        }
    }
    if (!best) throw ConfigError("schedule: no slots configured");
    return *best;
}

std::vector<const CrawlTarget*> targets_due(const CrawlerConfig& config, Instant slot) {
    std::vector<const CrawlTarget*> due;
    for (const auto& target : config.targets) {
        const auto local = target.zone.to_local(slot);
        const auto time_of_day = local - floor<days>(local);
        if (std::any_of(target.schedule.begin(), target.schedule.end(),
                        [&](minutes t) { return seconds{t} == time_of_day; })) {
            due.push_back(&target);
        }
    }
    return due;
}

namespace {

using WrittenKey = std::tuple<std::string, std::string, Instant>;

struct RoundState {
    std::mutex mutex;
    SuggestionSink& sink;
    std::set<WrittenKey>& written;
    std::ostream* log;
    RunSummary summary;

    void write_log(const std::string& line) {
        if (log != nullptr) *log << line << '\n';
    }
};

// Serial fetches for one source. Returns false if interrupted.
bool crawl_source(const CrawlerConfig& config, const CrawlTarget& target, Instant slot, Clock& clock,
                  RoundState& state) {
    for (std::size_t q = 0; q < target.queries.size(); ++q) {
        const auto& query = target.queries[q];
        if (q > 0 && !clock.sleep_for(config.politeness_delay)) return false;

        std::optional<CrawlResult> result;
        std::string last_error;
        auto backoff = config.retry.initial_backoff;
        for (int attempt = 1; attempt <= config.retry.attempts; ++attempt) {
            try {
                result = fetch_suggestions(target, query, clock, config.request_timeout);
                break;
            } catch (const FetchError& e) {
                last_error = e.what();
                {
                    std::lock_guard lock(state.mutex);
                    state.write_log(fmt::format("{} {} '{}' attempt {}/{}: {}", format_utc(slot), target.source,
                                                query, attempt, config.retry.attempts, e.what()));
                }
                if (!e.retryable() || attempt == config.retry.attempts) break;
                if (!clock.sleep_for(backoff)) return false;
                backoff = duration_cast<milliseconds>(backoff * config.retry.backoff_multiplier);
            }
        }

        std::lock_guard lock(state.mutex);
        if (!result) {
            state.summary.failures.push_back({slot, target.source, query, last_error});
            state.write_log(fmt::format("{} {} '{}' missing after retries", format_utc(slot), target.source, query));
            continue;
        }
        if (!state.written.insert({target.source, query, result->fetched_at}).second) {
            state.summary.failures.push_back({slot, target.source, query, "duplicate fetch timestamp"});
            state.write_log(fmt::format("{} {} '{}' already written at {}; skipped", format_utc(slot), target.source,
                                        query, format_utc(result->fetched_at)));
            continue;
        }
        std::vector<SuggestionRecord> records;
        records.reserve(result->suggestions.size());
        for (std::size_t i = 0; i < result->suggestions.size(); ++i) {
            records.push_back({target.source, query, result->fetched_at, result->suggestions[i], i});
        }
        state.sink.append(records);
        state.summary.rows_written += records.size();
        state.write_log(fmt::format("{} {} '{}' {} suggestions", format_utc(slot), target.source, query,
                                    records.size()));
    }
    return true;
}

RunSummary run_round_impl(const CrawlerConfig& config, std::span<const CrawlTarget* const> targets, Instant slot,
                          SuggestionSink& sink, Clock& clock, std::ostream* log, std::set<WrittenKey>& written) {
    RoundState state{{}, sink, written, log, {}};
    bool completed = true;
    if (targets.size() == 1) {
        completed = crawl_source(config, *targets.front(), slot, clock, state);
    } else {
        std::vector<std::future<bool>> jobs;
        for (const auto* target : targets) {
            jobs.push_back(std::async(std::launch::async, [&, target] {
                return crawl_source(config, *target, slot, clock, state);
            }));
        }
        std::exception_ptr failure;
        for (auto& job : jobs) {
            try {
                completed = job.get() && completed;
            } catch (...) {
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    state.summary.slots_run = 1;
    state.summary.interrupted = !completed;
    return std::move(state.summary);
}

}  // namespace

RunSummary run_round(const CrawlerConfig& config, std::span<const CrawlTarget* const> targets, Instant slot,
                     SuggestionSink& sink, Clock& clock, std::ostream* log) {
    std::set<WrittenKey> written;
    return run_round_impl(config, targets, slot, sink, clock, log, written);
}

RunSummary run_schedule(const CrawlerConfig& config, SuggestionSink& sink, Clock& clock, const RunOptions& options) {
    config.validate();
    RunSummary summary;
    std::set<WrittenKey> written;
    Instant cursor = clock.now();
    std::size_t processed = 0;
    while (!options.max_slots || processed < *options.max_slots) {
        const Instant slot = next_slot(config, cursor);
        if (!clock.sleep_until(slot)) {
            summary.interrupted = true;
            break;
        }
        cursor = slot;
        ++processed;
        const Instant woke = clock.now();
        if (woke - slot > config.missed_slot_grace) {
            ++summary.slots_missed;
            summary.missed_slots.push_back(slot);
            if (options.log != nullptr) {
                *options.log << format_utc(slot) << " slot missed (woke at " << format_utc(woke) << "); skipped\n";
            }
            continue;
        }
        const auto due = targets_due(config, slot);
        RunSummary round = run_round_impl(config, due, slot, sink, clock, options.log, written);
        sink.flush();
        summary.slots_run += round.slots_run;
        summary.rows_written += round.rows_written;
        summary.failures.insert(summary.failures.end(), round.failures.begin(), round.failures.end());
        if (round.interrupted) {
            summary.interrupted = true;
            break;
        }
    }
    sink.flush();
    return summary;
}

}  // namespace rankstab

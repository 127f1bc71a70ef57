#pragma once

// Scheduled collection of live query suggestions.
//
// At every scheduled local time of day the crawler fetches each configured
// query once and appends one suggestion-log row per returned suggestion.
// Slots that pass while the crawler is not running are skipped, never
// back-filled, so gaps stay visible in the data.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankstab/errors.hpp"
#include "rankstab/ingestion.hpp"
#include "rankstab/time.hpp"

namespace rankstab {

struct CrawlTarget {
    static constexpr std::string_view kQueryPlaceholder = "{query}";

    std::string source;
    std::string endpoint;  // URL with exactly one {query} placeholder
    std::vector<std::string> queries;
    std::vector<std::chrono::minutes> schedule;  // local times of day, sorted
    ZoneOffset zone = kCentralEuropeanTime;
    std::size_t suggestion_index = 1;  // payload array element holding the suggestions
    std::map<std::string, std::string> headers;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double backoff_multiplier = 2.0;
};

struct CrawlerConfig {
    std::vector<CrawlTarget> targets;
    RetryPolicy retry;
    std::chrono::milliseconds politeness_delay{2000};
    std::chrono::seconds request_timeout{10};
    std::chrono::minutes missed_slot_grace{10};
    std::filesystem::path output;
    ZoneOffset output_zone = kCentralEuropeanTime;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Reads a JSON crawler config. Throws ConfigError naming the offending field.
CrawlerConfig parse_crawler_config(std::string_view json_text);
CrawlerConfig load_crawler_config(const std::filesystem::path& path);

struct CrawlResult {
    std::string query;
    Instant fetched_at;
    std::vector<std::string> suggestions;
    int http_status = 0;
};

class FetchError : public std::runtime_error {
public:
    enum class Kind { network, status, payload };

    FetchError(Kind kind, int status, const std::string& message)
        : std::runtime_error(message), kind_(kind), status_(status) {}

    Kind kind() const noexcept { return kind_; }
    int status() const noexcept { return status_; }

    /// Network failures, 5xx and 429 are worth retrying.
    bool retryable() const noexcept {
        return kind_ == Kind::network || (kind_ == Kind::status && (status_ >= 500 || status_ == 429));
    }

private:
    Kind kind_;
    int status_;
};

/// Percent-encodes everything except RFC 3986 unreserved characters.
std::string url_encode(std::string_view text);

/// Extracts the suggestion strings from a JSON payload whose element
/// `index` is an array of strings. Throws FetchError(payload).
std::vector<std::string> parse_suggestion_payload(std::string_view body, std::size_t index);

class Clock {
public:
    virtual ~Clock() = default;
    virtual Instant now() = 0;
    /// Returns false if the wait was interrupted by a stop request.
    virtual bool sleep_until(Instant t) = 0;
    virtual bool sleep_for(std::chrono::milliseconds d) = 0;
};

/// Wall clock. Sleeps wake early when `stop` becomes true.
class SystemClock : public Clock {
public:
    explicit SystemClock(const std::atomic<bool>* stop = nullptr) : stop_(stop) {}

    Instant now() override;
    bool sleep_until(Instant t) override;
    bool sleep_for(std::chrono::milliseconds d) override;

private:
    bool stopped() const { return stop_ != nullptr && stop_->load(); }
    const std::atomic<bool>* stop_;
};

/// One HTTP GET with the query substituted and URL-encoded. Throws
/// FetchError; never retries.
CrawlResult fetch_suggestions(const CrawlTarget& target, std::string_view query, Clock& clock,
                              std::chrono::seconds timeout = std::chrono::seconds{10});

class SinkError : public IoError {
public:
    using IoError::IoError;
};

/// Append-only destination for suggestion rows.
class SuggestionSink {
public:
    virtual ~SuggestionSink() = default;
    /// Appends one complete fetch. Throws SinkError.
    virtual void append(std::span<const SuggestionRecord> records) = 0;
    virtual void flush() = 0;
};

/// Appends to a suggestion-log file, writing the header if the file is new
/// or empty.
class CsvSuggestionSink : public SuggestionSink {
public:
    CsvSuggestionSink(std::filesystem::path path, ZoneOffset zone, char delimiter = ',');

    void append(std::span<const SuggestionRecord> records) override;
    void flush() override;

private:
    std::filesystem::path path_;
    ZoneOffset zone_;
    char delimiter_;
    std::ofstream out_;
};

struct MissedFetch {
    Instant slot;
    std::string source;
    std::string query;
    std::string reason;
};

struct RunSummary {
    std::size_t slots_run = 0;
    std::size_t slots_missed = 0;
    std::size_t rows_written = 0;
    std::vector<MissedFetch> failures;
    std::vector<Instant> missed_slots;
    bool interrupted = false;
};

struct RunOptions {
    std::optional<std::size_t> max_slots;  // stop after this many slots (run or missed)
    std::ostream* log = nullptr;
};

/// The next slot strictly after `after` across all targets.
Instant next_slot(const CrawlerConfig& config, Instant after);

/// Targets scheduled at the given slot.
std::vector<const CrawlTarget*> targets_due(const CrawlerConfig& config, Instant slot);

/// Fetches every query of the given targets once, stamping rows with the
/// fetch time. Sources run concurrently; queries of one source run one
/// after another with the politeness delay in between.
RunSummary run_round(const CrawlerConfig& config, std::span<const CrawlTarget* const> targets, Instant slot,
                     SuggestionSink& sink, Clock& clock, std::ostream* log = nullptr);

/// Sleeps until each scheduled slot and runs it, until the clock reports a
/// stop or `max_slots` is reached. A slot whose wake-up comes later than
/// the grace period is logged as missed and skipped. Sink failures
/// propagate as SinkError.
RunSummary run_schedule(const CrawlerConfig& config, SuggestionSink& sink, Clock& clock,
                        const RunOptions& options = {});

}  // namespace rankstab

#pragma once

// Helpers shared by unit tests and the acceptance suite.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "rankstab/crawler.hpp"
#include "rankstab/ranking.hpp"
#include "rankstab/time.hpp"
#include "rankstab/timeseries.hpp"

namespace httplib {
class Server;
}

namespace rankstab::testkit {

/// Deterministic clock: sleeping advances time instantly. Optionally jumps
/// forward on a chosen sleep to simulate a suspended process.
class ManualClock : public Clock {
public:
    explicit ManualClock(Instant start) : now_(start) {}

    Instant now() override;
    bool sleep_until(Instant t) override;
    bool sleep_for(std::chrono::milliseconds d) override;

    /// The n-th (0-based) call of sleep_until overshoots its target by `late`.
    void oversleep_on(std::size_t call, std::chrono::seconds late);
    /// Every sleep after `calls` sleep_until calls reports a stop request.
    void stop_after(std::size_t calls);

private:
    std::mutex mutex_;
    Instant now_;
    std::chrono::milliseconds carry_{0};
    std::size_t sleep_until_calls_ = 0;
    std::map<std::size_t, std::chrono::seconds> oversleep_;
    std::size_t stop_after_ = static_cast<std::size_t>(-1);
};

/// Suggestion endpoint on 127.0.0.1 answering `/complete?q=...` with
/// `[query, [suggestions...]]`. The handler decides the response per call.
class MockSuggestionServer {
public:
    struct Reply {
        int status = 200;
        std::string body;
    };
    using Handler = std::function<Reply(const std::string& query, std::size_t call)>;

    explicit MockSuggestionServer(Handler handler);
    ~MockSuggestionServer();
    MockSuggestionServer(const MockSuggestionServer&) = delete;
    MockSuggestionServer& operator=(const MockSuggestionServer&) = delete;

    int port() const { return port_; }
    std::string endpoint() const;  // with the {query} placeholder
    std::size_t calls(const std::string& query) const;
    std::size_t total_calls() const;

    static std::string payload(const std::string& query, const std::vector<std::string>& suggestions);

private:
    Handler handler_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t> calls_;
};

/// Unique, self-deleting scratch directory.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Ranking of `prefix0 .. prefix{n-1}`.
Ranking numbered(const std::string& prefix, std::size_t n);

struct SyntheticFixture {
    std::filesystem::path suggestions;
    std::filesystem::path results;
    std::filesystem::path aliases;
    std::vector<std::string> queries;  // canonical keys
};

/// Two months (2017-08-04 .. 2017-09-30) of simulated collection for 16
/// queries: result requests in six rounds a day, suggestions twice a day.
/// The same seed always produces byte-identical files.
SyntheticFixture write_synthetic_fixture(const std::filesystem::path& dir, std::uint32_t seed = 20170924);

/// Suggestion log of `queries` with 30 snapshots each at 05:00 and 17:00
/// CET from 2017-09-01. All rankings equal L = l0..l9, except for the
/// query `disrupted`: snapshot 12 swaps L's top two items, snapshots 13..16
/// are four lists disjoint from L and from each other.
void write_disruption_fixture(const std::filesystem::path& file, const std::vector<std::string>& queries,
                              const std::string& disrupted);

}  // namespace rankstab::testkit

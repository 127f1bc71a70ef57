#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <httplib.h>

namespace rankstab::testkit {

using namespace std::chrono;

// ---------------------------------------------------------------- clock

Instant ManualClock::now() {
    std::lock_guard lock(mutex_);
    return now_;
}

bool ManualClock::sleep_until(Instant t) {
    std::lock_guard lock(mutex_);
    const std::size_t call = sleep_until_calls_++;
    if (call >= stop_after_) return false;
    if (t > now_) now_ = t;
    if (const auto it = oversleep_.find(call); it != oversleep_.end()) now_ += it->second;
    return true;
}

bool ManualClock::sleep_for(milliseconds d) {
    std::lock_guard lock(mutex_);
    if (sleep_until_calls_ > stop_after_) return false;
    carry_ += d;
    const auto whole = duration_cast<seconds>(carry_);
    now_ += whole;
    carry_ -= whole;
    return true;
}

void ManualClock::oversleep_on(std::size_t call, seconds late) {
    std::lock_guard lock(mutex_);
    oversleep_[call] = late;
}

void ManualClock::stop_after(std::size_t calls) {
    std::lock_guard lock(mutex_);
    stop_after_ = calls;
}

// ---------------------------------------------------------------- server

MockSuggestionServer::MockSuggestionServer(Handler handler)
    : handler_(std::move(handler)), server_(std::make_unique<httplib::Server>()) {
    server_->Get("/complete", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string query = req.get_param_value("q");
        std::size_t call = 0;
        {
            std::lock_guard lock(mutex_);
            call = calls_[query]++;
        }
        const Reply reply = handler_(query, call);
        res.status = reply.status;
        res.set_content(reply.body, "application/json; charset=utf-8");
    });
    port_ = server_->bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("mock server: cannot bind");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

MockSuggestionServer::~MockSuggestionServer() {
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

std::string MockSuggestionServer::endpoint() const {
    return fmt::format("http://127.0.0.1:{}/complete?client=firefox&q={{query}}", port_);
}

std::size_t MockSuggestionServer::calls(const std::string& query) const {
    std::lock_guard lock(mutex_);
    const auto it = calls_.find(query);
    return it == calls_.end() ? 0 : it->second;
}

std::size_t MockSuggestionServer::total_calls() const {
    std::lock_guard lock(mutex_);
    std::size_t total = 0;
    for (const auto& [query, n] : calls_) total += n;
    return total;
}

std::string MockSuggestionServer::payload(const std::string& query, const std::vector<std::string>& suggestions) {
    std::string body = "[\"" + query + "\",[";
    for (std::size_t i = 0; i < suggestions.size(); ++i) {
        if (i > 0) body += ',';
        body += "\"" + suggestions[i] + "\"";
    }
    return body + "]]";
}

// ---------------------------------------------------------------- files

TempDir::TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "rankstab-test-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
}

TempDir::~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

Ranking numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> items;
    for (std::size_t i = 0; i < n; ++i) items.push_back(prefix + std::to_string(i));
    return Ranking(std::move(items));
}

// ---------------------------------------------------------------- fixtures

namespace {

// mt19937's output sequence is fixed by the standard; the distributions
// are not, so draws are reduced by hand.
class Draw {
public:
    explicit Draw(std::uint32_t seed) : engine_(seed) {}
    std::uint32_t below(std::uint32_t n) { return engine_() % n; }
    bool chance(std::uint32_t one_in) { return below(one_in) == 0; }
    int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint32_t>(hi - lo + 1))); }

private:
    std::mt19937 engine_;
};

struct FixtureQuery {
    std::string key;               // canonical
    std::string result_spelling;   // as it appears in the result log
    std::string suggest_spelling;  // as it appears in the suggestion log; empty = none collected
};

const std::vector<FixtureQuery>& fixture_queries() {
    static const std::vector<FixtureQuery> queries = {
        {"afd", "AfD", "afd"},
        {"alexander gauland", "Alexander Gauland", "alexander gauland"},
        {"alice weidel", "Alice Weidel", "alice weidel"},
        {"angela merkel", "Angela Merkel", "angela merkel"},
        {"cdu", "CDU", ""},
        {"christian lindner", "Christian Lindner", "christian lindner"},
        {"csu", "CSU", "csu"},
        {"dielinke", "Die Linke", "die linke"},
        {"fdp", "FDP", "fdp"},
        {"grüne", "Bündnis90/Die Grünen", "grüne"},
        {"katrin göring-eckardt", "Katrin Göring-Eckardt", "katrin göring-eckardt"},
        {"martin schulz", "Martin Schulz", "martin schulz"},
        {"sahra wagenknecht", "Sahra Wagenknecht", "sahra wagenknecht"},
        {"spd", "SPD", "spd"},
        {"cem özdemir", "Cem Özdemir", "cem özdemir"},
        {"dietmar bartsch", "Dietmar Bartsch", "dietmar bartsch"},
    };
    return queries;
}

const std::vector<std::string>& suggestion_words() {
    static const std::vector<std::string> words = {
        "wahlprogramm", "umfrage",   "news",      "twitter",    "alter",      "partei",   "wahl 2017",
        "rede",         "interview", "bundestag", "kandidaten", "wahlplakat", "kritik",   "biografie",
        "familie",      "instagram", "facebook",  "wiki",       "steuern",    "rente",    "flüchtlinge",
        "tv duell",     "koalition", "zitate",    "skandal",    "wahlkreis",  "programm", "heute"};
    return words;
}

// A slowly drifting list: occasionally neighbours swap or an entry is
// replaced by a fresh one.
class DriftingList {
public:
    DriftingList(std::vector<std::string> items, std::function<std::string()> fresh)
        : items_(std::move(items)), fresh_(std::move(fresh)) {}

    void step(Draw& draw, std::uint32_t swap_one_in, std::uint32_t replace_one_in) {
        if (draw.chance(swap_one_in)) {
            const auto i = draw.below(static_cast<std::uint32_t>(items_.size() - 1));
            std::swap(items_[i], items_[i + 1]);
        }
        if (draw.chance(replace_one_in)) {
            const auto i = draw.below(static_cast<std::uint32_t>(items_.size()));
            std::string candidate = fresh_();
            if (std::find(items_.begin(), items_.end(), candidate) == items_.end()) items_[i] = candidate;
        }
    }

    const std::vector<std::string>& items() const { return items_; }

private:
    std::vector<std::string> items_;
    std::function<std::string()> fresh_;
};

std::string local_stamp(sys_days day, minutes time_of_day, ZoneOffset zone) {
    const Instant t = zone.to_utc(local_seconds{day.time_since_epoch()} + time_of_day);
    return format_local(t, zone);
}

std::string slug(const std::string& text) {
    std::string out;
    for (const char c : text) out.push_back(c == ' ' ? '-' : c);
    return out;
}

}  // namespace

SyntheticFixture write_synthetic_fixture(const std::filesystem::path& dir, std::uint32_t seed) {
    std::filesystem::create_directories(dir);
    SyntheticFixture fixture;
    fixture.suggestions = dir / "suggestions.csv";
    fixture.results = dir / "results.csv";
    fixture.aliases = dir / "aliases.txt";

    const auto& queries = fixture_queries();
    Draw draw(seed);
    const sys_days first = sys_days{year{2017} / August / 4};
    const sys_days last = sys_days{year{2017} / September / 30};
    const ZoneOffset zone = kCentralEuropeanTime;

    {
        std::ostringstream aliases;
        aliases << "# spellings used by the two logs\n";
        for (const auto& q : queries) {
            fixture.queries.push_back(q.key);
            if (q.result_spelling != q.key) aliases << q.result_spelling << " = " << q.key << '\n';
            if (!q.suggest_spelling.empty() && q.suggest_spelling != q.key) {
                aliases << q.suggest_spelling << " = " << q.key << '\n';
            }
            if (q.suggest_spelling.empty()) aliases << q.key << " = MISSING\n";
        }
        write_file(fixture.aliases, aliases.str());
    }

    // Search results: six rounds a day, three German requests per round
    // plus the odd foreign one, ten organic hits and an ad per request.
    {
        std::ostringstream out;
        out << "request_id,query,timestamp,rank,url,result_type,country,keyboard\n";
        std::vector<DriftingList> lists;
        std::size_t url_counter = 0;
        for (const auto& q : queries) {
            std::vector<std::string> urls;
            const std::string base = slug(q.key);
            for (int i = 0; i < 10; ++i) urls.push_back(fmt::format("https://site{}.example/{}", i, base));
            lists.emplace_back(std::move(urls), [&url_counter, base] {
                return fmt::format("https://news{}.example/{}", url_counter++, base);
            });
        }
        std::size_t request = 0;
        for (sys_days day = first; day <= last; day += days{1}) {
            for (int round = 0; round < 6; ++round) {
                for (std::size_t qi = 0; qi < queries.size(); ++qi) {
                    lists[qi].step(draw, 3, 8);
                    const int requests = 3 + (draw.chance(5) ? 1 : 0);
                    for (int r = 0; r < requests; ++r) {
                        const bool foreign = r == 3;
                        auto urls = lists[qi].items();
                        if (draw.chance(3)) {
                            const auto i = draw.below(9);
                            std::swap(urls[i], urls[i + 1]);
                        }
                        const int offset = draw.between(-45, 45);
                        const std::string id = fmt::format("r{:07d}", request++);
                        const minutes when = hours{4 * round} + minutes{offset} + minutes{r};
                        const sys_days stamp_day = when < minutes{0} ? day - days{1} : day;
                        const minutes tod = when < minutes{0} ? when + hours{24} : when;
                        const std::string stamp = local_stamp(stamp_day, tod, zone);
                        const std::string country = foreign ? "AT" : "DE";
                        const std::string keyboard = foreign ? "de" : (draw.chance(40) ? "en" : "de");
                        out << fmt::format("{},{},{},1,https://ads.example/{},ad,{},{}\n", id,
                                           queries[qi].result_spelling, stamp, slug(queries[qi].key), country,
                                           keyboard);
                        for (std::size_t k = 0; k < urls.size(); ++k) {
                            out << fmt::format("{},{},{},{},{},organic,{},{}\n", id, queries[qi].result_spelling,
                                               stamp, k + 1, urls[k], country, keyboard);
                        }
                    }
                }
            }
        }
        write_file(fixture.results, out.str());
    }

    // Suggestions: twice a day near 05:00 and 17:00, with an occasional
    // repeated fetch later in the same round.
    {
        std::ostringstream out;
        out << "source,queryterm,date,suggestterm,position\n";
        const auto& words = suggestion_words();
        std::vector<DriftingList> lists;
        for (const auto& q : queries) {
            std::vector<std::string> terms;
            for (std::size_t i = 0; i < 8; ++i) terms.push_back(q.suggest_spelling + " " + words[(i * 3) % words.size()]);
            const std::string stem = q.suggest_spelling;
            lists.emplace_back(std::move(terms), [&draw, &words, stem] {
                return stem + " " + words[draw.below(static_cast<std::uint32_t>(words.size()))];
            });
        }
        for (sys_days day = first; day <= last; day += days{1}) {
            for (const int hour : {5, 17}) {
                for (std::size_t qi = 0; qi < queries.size(); ++qi) {
                    if (queries[qi].suggest_spelling.empty()) continue;
                    lists[qi].step(draw, 4, 10);
                    const int fetches = draw.chance(20) ? 2 : 1;
                    for (int f = 0; f < fetches; ++f) {
                        const minutes tod = hours{hour} + minutes{draw.between(0, 12) + 40 * f};
                        const std::string stamp = local_stamp(day, tod, zone);
                        const auto& terms = lists[qi].items();
                        for (std::size_t k = 0; k < terms.size(); ++k) {
                            out << fmt::format("google,{},{},{},{}\n", queries[qi].suggest_spelling, stamp, terms[k],
                                               k);
                        }
                    }
                }
            }
        }
        write_file(fixture.suggestions, out.str());
    }
    return fixture;
}

void write_disruption_fixture(const std::filesystem::path& file, const std::vector<std::string>& queries,
                              const std::string& disrupted) {
    const auto items_of = [](const std::string& prefix) {
        std::vector<std::string> items;
        for (int i = 0; i < 10; ++i) items.push_back(prefix + std::to_string(i));
        return items;
    };
    const std::vector<std::string> base = items_of("l");
    std::ostringstream out;
    out << "source,queryterm,date,suggestterm,position\n";
    const sys_days first = sys_days{year{2017} / September / 1};
    for (const auto& query : queries) {
        for (int j = 0; j < 30; ++j) {
            std::vector<std::string> items = base;
            if (query == disrupted && j == 12) std::swap(items[0], items[1]);
            if (query == disrupted && j >= 13 && j <= 16) items = items_of(fmt::format("m{}_", j - 12));
            const sys_days day = first + days{j / 2};
            const minutes tod = hours{j % 2 == 0 ? 5 : 17};
            const std::string stamp = local_stamp(day, tod, kCentralEuropeanTime);
            for (std::size_t k = 0; k < items.size(); ++k) {
                out << fmt::format("google,{},{},{},{}\n", query, stamp, items[k], k);
            }
        }
    }
    write_file(file, out.str());
}

}  // namespace rankstab::testkit

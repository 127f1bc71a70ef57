// rankstab: ranking-stability analysis of search results and query suggestions.
//
//   rankstab analyze --suggestions s.csv --results r.csv --out-dir out
//   rankstab report  --suggestions s.csv --results r.csv
//   rankstab crawl   --config crawler.json

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rankstab/crawler.hpp"
#include "rankstab/errors.hpp"
#include "rankstab/ingestion.hpp"
#include "rankstab/pipeline.hpp"
#include "rankstab/report.hpp"

namespace {

using namespace rankstab;

constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

std::atomic<bool> g_stop{false};

extern "C" void handle_interrupt(int) { g_stop.store(true); }

struct InputOptions {
    std::string suggestions;
    std::string results;
    std::string aliases;
    std::string result_columns;
    std::string from = "2017-08-04";
    std::string to = "2017-09-30";
    std::string timezone = "CET";
    std::string delimiter = ",";
    std::string suggestion_rounds = "05:00,17:00";
    std::string result_rounds = "00:00,04:00,08:00,12:00,16:00,20:00";
    int round_tolerance = 90;
    std::string organic = "organic";
    std::string country = "DE";
    std::string keyboard = "de";
    bool strict = false;
};

void add_input_options(CLI::App& cmd, InputOptions& o) {
    cmd.add_option("--suggestions", o.suggestions, "Suggestion log (source,queryterm,date,suggestterm,position)");
    cmd.add_option("--results", o.results, "Search result log");
    cmd.add_option("--aliases", o.aliases, "Query alias map ('raw = canonical' and 'key = MISSING' lines)");
    cmd.add_option("--result-columns", o.result_columns, "Column mapping for the result log ('field = column')");
    cmd.add_option("--from", o.from, "First day (YYYY-MM-DD) or instant to include; empty for no bound")
        ->capture_default_str();
    cmd.add_option("--to", o.to, "Last day (YYYY-MM-DD, inclusive) or instant to include; empty for no bound")
        ->capture_default_str();
    cmd.add_option("--timezone", o.timezone, "Zone of timestamps without offset (CET, UTC, +02:00, ...)")
        ->capture_default_str();
    cmd.add_option("--delimiter", o.delimiter, "Field delimiter: a single character or 'tab'")->capture_default_str();
    cmd.add_option("--suggestion-rounds", o.suggestion_rounds, "Local anchor times of suggestion rounds")
        ->capture_default_str();
    cmd.add_option("--result-rounds", o.result_rounds, "Local anchor times of result rounds")->capture_default_str();
    cmd.add_option("--round-tolerance", o.round_tolerance, "Minutes before an anchor that already count for it")
        ->capture_default_str();
    cmd.add_option("--organic", o.organic, "result_type value of organic results; empty disables the filter")
        ->capture_default_str();
    cmd.add_option("--country", o.country, "Required country; empty disables the filter")->capture_default_str();
    cmd.add_option("--keyboard", o.keyboard, "Required keyboard layout; empty disables the filter")
        ->capture_default_str();
    cmd.add_flag("--strict", o.strict, "Fail on the first malformed row instead of skipping it");
}

ZoneOffset zone_of(const InputOptions& o) {
    try {
        return ZoneOffset::parse(o.timezone);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--timezone: ") + e.what());
    }
}

char delimiter_of(const InputOptions& o) {
    if (o.delimiter == "tab" || o.delimiter == "\\t") return '\t';
    if (o.delimiter.size() != 1) throw ConfigError("--delimiter: expected one character or 'tab'");
    return o.delimiter[0];
}

DateWindow window_of(const InputOptions& o) {
    const ZoneOffset zone = zone_of(o);
    const DateWindow all = DateWindow::unbounded();
    try {
        const Instant from = o.from.empty() ? all.from() : parse_timestamp(o.from, zone);
        Instant until = all.until();
        if (!o.to.empty()) {
            const Instant to = parse_timestamp(o.to, zone);
            until = o.to.size() == 10 ? to + std::chrono::days{1} : to + std::chrono::seconds{1};
        }
        if (until < from) throw ConfigError("--from/--to: the window ends before it starts");
        return DateWindow(from, until);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--from/--to: ") + e.what());
    }
}

BinningPolicy binning_of(const std::string& anchors, const InputOptions& o, const char* flag) {
    BinningPolicy policy;
    policy.anchors.clear();
    policy.zone = zone_of(o);
    policy.tolerance = std::chrono::minutes{o.round_tolerance};
    std::stringstream list(anchors);
    std::string item;
    try {
        while (std::getline(list, item, ',')) policy.anchors.push_back(parse_time_of_day(item));
        policy.validate();
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("{}: {}", flag, e.what()));
    }
    return policy;
}

QueryAliasMap aliases_of(const InputOptions& o) {
    return o.aliases.empty() ? QueryAliasMap{} : QueryAliasMap::load(o.aliases);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path));
    return in;
}

void print_diagnostics(const std::string& path, const std::vector<Diagnostic>& diagnostics) {
    constexpr std::size_t limit = 20;
    for (std::size_t i = 0; i < diagnostics.size() && i < limit; ++i) {
        std::cerr << fmt::format("{}:{}: {}\n", path, diagnostics[i].line, diagnostics[i].message);
    }
    if (diagnostics.size() > limit) {
        std::cerr << fmt::format("{}: {} more diagnostics not shown\n", path, diagnostics.size() - limit);
    }
}

struct LoadedInputs {
    std::optional<SuggestionLog> suggestions;
    std::optional<ResultLog> results;
};

LoadedInputs load_inputs(const InputOptions& o, const QueryAliasMap& aliases) {
    LoadedInputs loaded;
    const DateWindow window = window_of(o);
    const ZoneOffset zone = zone_of(o);
    const char delimiter = delimiter_of(o);
    if (!o.suggestions.empty()) {
        SuggestionOptions options;
        options.delimiter = delimiter;
        options.strict = o.strict;
        options.zone = zone;
        options.window = window;
        options.binning = binning_of(o.suggestion_rounds, o, "--suggestion-rounds");
        auto in = open_input(o.suggestions);
        loaded.suggestions = parse_suggestions(in, aliases, options);
        print_diagnostics(o.suggestions, loaded.suggestions->diagnostics);
    }
    if (!o.results.empty()) {
        ResultOptions options;
        if (!o.result_columns.empty()) options.columns = ResultColumns::load(o.result_columns);
        options.cleaning.organic_type = o.organic;
        options.cleaning.country = o.country;
        options.cleaning.keyboard = o.keyboard;
        options.cleaning.window = window;
        options.binning = binning_of(o.result_rounds, o, "--result-rounds");
        options.zone = zone;
        options.delimiter = delimiter;
        options.strict = o.strict;
        auto in = open_input(o.results);
        loaded.results = parse_results(in, aliases, options);
        print_diagnostics(o.results, loaded.results->diagnostics);
    }
    return loaded;
}

struct AnalyzeOptions {
    std::string mode = "both";
    double p = RboParams::kDefaultPersistence;
    double window_days = 3.0;
    double threshold = AggregationPolicy::kDefaultPresenceThreshold;
    double reference = 0.5;
    std::string format = "both";
    std::string out_dir = "rankstab-out";
};

int cmd_analyze(const InputOptions& inputs, const AnalyzeOptions& o) {
    AnalysisConfig config;
    if (o.mode == "both") {
        config.modes = {ComparisonMode::successive, ComparisonMode::fixed};
    } else {
        try {
            config.modes = {parse_comparison_mode(o.mode)};
        } catch (const std::invalid_argument&) {
            throw ConfigError("--mode: expected successive, fixed or both");
        }
    }
    try {
        config.rbo = RboParams(o.p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--p: ") + e.what());
    }
    try {
        config.aggregation = AggregationPolicy(o.threshold);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--threshold: ") + e.what());
    }
    config.window_days = o.window_days;
    config.reference_level = o.reference;
    config.format = parse_output_format(o.format);
    config.validate();
    if (inputs.suggestions.empty() && inputs.results.empty()) {
        throw ConfigError("analyze: give --suggestions and/or --results");
    }

    const auto aliases = aliases_of(inputs);
    auto loaded = load_inputs(inputs, aliases);
    std::vector<RankedSnapshot> snapshots;
    if (loaded.suggestions) snapshots = std::move(loaded.suggestions->snapshots);
    if (loaded.results) {
        auto aggregated = snapshots_from_batches(loaded.results->batches, config.aggregation);
        snapshots.insert(snapshots.end(), std::make_move_iterator(aggregated.begin()),
                         std::make_move_iterator(aggregated.end()));
    }

    std::vector<std::string> warnings;
    const auto analyses = analyze_streams(snapshots, config, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    const auto files = write_outputs(o.out_dir, analyses, config);
    std::cout << fmt::format("{} streams analysed, {} files written to {}\n", analyses.size(), files.size(),
                             o.out_dir);
    return 0;
}

int cmd_report(const InputOptions& inputs) {
    const auto aliases = aliases_of(inputs);
    const auto loaded = load_inputs(inputs, aliases);
    const auto report = build_report(loaded.suggestions ? &*loaded.suggestions : nullptr,
                                     loaded.results ? &*loaded.results : nullptr, aliases);
    print_report(std::cout, report);
    return 0;
}

struct CrawlOptions {
    std::string config;
    std::string output;
    bool dry_run = false;
    bool once = false;
    std::size_t slots = 0;
};

int cmd_crawl(const CrawlOptions& o) {
    CrawlerConfig config = load_crawler_config(o.config);
    if (!o.output.empty()) config.output = o.output;

    SystemClock clock(&g_stop);
    if (o.dry_run) {
        const Instant start = clock.now();
        std::cout << fmt::format("output: {}\n", config.output.string());
        for (const auto& t : config.targets) {
            std::cout << fmt::format("target {}: {} queries via {}\n", t.source, t.queries.size(), t.endpoint);
            for (const auto& q : t.queries) std::cout << "  query: " << q << '\n';
        }
        std::cout << "planned slots (next 24 h):\n";
        for (Instant slot = next_slot(config, start); slot - start <= std::chrono::hours{24};
             slot = next_slot(config, slot)) {
            std::string sources;
            for (const auto* t : targets_due(config, slot)) {
                sources += (sources.empty() ? "" : ", ") + t->source;
            }
            std::cout << fmt::format("  {} (local {}): {}\n", format_utc(slot),
                                     format_local(slot, config.output_zone), sources);
        }
        return 0;
    }

    std::signal(SIGINT, handle_interrupt);
    std::signal(SIGTERM, handle_interrupt);
    CsvSuggestionSink sink(config.output, config.output_zone);
    RunSummary summary;
    if (o.once) {
        std::vector<const CrawlTarget*> all;
        for (const auto& t : config.targets) all.push_back(&t);
        summary = run_round(config, all, clock.now(), sink, clock, &std::cerr);
        sink.flush();
    } else {
        RunOptions options;
        if (o.slots > 0) options.max_slots = o.slots;
        options.log = &std::cerr;
        summary = run_schedule(config, sink, clock, options);
    }
    std::cout << fmt::format("{} slots run, {} missed, {} rows written, {} fetches failed{}\n", summary.slots_run,
                             summary.slots_missed, summary.rows_written, summary.failures.size(),
                             summary.interrupted ? " (interrupted)" : "");
    return 0;
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ranking stability of search results and query suggestions"};
    app.require_subcommand(1);

    InputOptions analyze_inputs;
    AnalyzeOptions analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "Build stability time series, CSV tables and SVG figures");
    add_input_options(*analyze_cmd, analyze_inputs);
    analyze_cmd->add_option("--mode", analyze.mode, "successive, fixed or both")->capture_default_str();
    analyze_cmd->add_option("--p", analyze.p, "RBO persistence")->capture_default_str();
    analyze_cmd->add_option("--window-days", analyze.window_days, "Moving-average window in days")
        ->capture_default_str();
    analyze_cmd->add_option("--threshold", analyze.threshold, "Presence threshold for aggregated result lists")
        ->capture_default_str();
    analyze_cmd->add_option("--reference", analyze.reference, "Level of the reference line in figures")
        ->capture_default_str();
    analyze_cmd->add_option("--format", analyze.format, "csv, svg or both")->capture_default_str();
    analyze_cmd->add_option("--out-dir", analyze.out_dir, "Output directory")->capture_default_str();

    InputOptions report_inputs;
    auto* report_cmd = app.add_subcommand("report", "Print record counts, coverage and cadence");
    add_input_options(*report_cmd, report_inputs);

    CrawlOptions crawl;
    auto* crawl_cmd = app.add_subcommand("crawl", "Collect query suggestions on a schedule");
    crawl_cmd->add_option("--config", crawl.config, "Crawler config (JSON)")->required();
    crawl_cmd->add_option("--output", crawl.output, "Override the config's output file");
    crawl_cmd->add_flag("--dry-run", crawl.dry_run, "Print planned slots and queries without fetching");
    crawl_cmd->add_flag("--once", crawl.once, "Run one round immediately and exit");
    crawl_cmd->add_option("--slots", crawl.slots, "Stop after this many scheduled slots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (*analyze_cmd) return guarded([&] { return cmd_analyze(analyze_inputs, analyze); });
    if (*report_cmd) return guarded([&] { return cmd_report(report_inputs); });
    return guarded([&] { return cmd_crawl(crawl); });
}

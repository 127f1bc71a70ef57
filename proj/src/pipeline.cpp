#include "rankstab/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "rankstab/csv.hpp"
#include "rankstab/errors.hpp"

namespace rankstab {

OutputFormat parse_output_format(std::string_view text) {
    if (text == "csv") return OutputFormat::csv;
    if (text == "svg") return OutputFormat::svg;
    if (text == "both") return OutputFormat::both;
    throw ConfigError("--format: expected csv, svg or both, got '" + std::string(text) + "'");
}

void AnalysisConfig::validate() const {
    if (modes.empty()) throw ConfigError("--mode: at least one comparison mode is required");
    if (!(window_days > 0.0)) throw ConfigError("--window-days: must be positive");
    if (!(reference_level >= 0.0 && reference_level <= 1.0)) {
        throw ConfigError("reference level must lie in [0, 1]");
    }
}

std::vector<RankedSnapshot> snapshots_from_batches(const std::vector<RequestBatch>& batches,
                                                   const AggregationPolicy& policy) {
    std::vector<RankedSnapshot> snapshots;
    snapshots.reserve(batches.size());
    for (const auto& batch : batches) {
        snapshots.push_back({batch.query, batch.timepoint, aggregate(batch, policy), SourceKind::results, ""});
    }
    return snapshots;
}

std::map<StreamKey, std::vector<RankedSnapshot>> group_streams(const std::vector<RankedSnapshot>& snapshots) {
    std::map<StreamKey, std::vector<RankedSnapshot>> streams;
    for (const auto& s : snapshots) streams[{s.kind, s.source, s.query}].push_back(s);
    for (auto& [key, list] : streams) {
        std::stable_sort(list.begin(), list.end(),
                         [](const RankedSnapshot& a, const RankedSnapshot& b) { return a.timepoint < b.timepoint; });
    }
    return streams;
}

std::vector<StreamAnalysis> analyze_streams(const std::vector<RankedSnapshot>& snapshots, const AnalysisConfig& config,
                                            std::vector<std::string>* warnings) {
    config.validate();
    const auto streams = group_streams(snapshots);

    std::vector<std::future<StreamAnalysis>> jobs;
    for (const auto& [key, list] : streams) {
        if (list.size() < 2) {
            if (warnings != nullptr) {
                warnings->push_back(fmt::format("{} '{}': only {} snapshot(s), no series", to_string(key.kind),
                                                key.query, list.size()));
            }
            continue;
        }
        jobs.push_back(std::async(std::launch::async, [&config, &key, &list] {
            StreamAnalysis analysis;
            analysis.key = key;
            analysis.snapshot_count = list.size();
            std::vector<Instant> timepoints;
            timepoints.reserve(list.size());
            for (const auto& s : list) timepoints.push_back(s.timepoint);
            analysis.window = window_for_days(timepoints, config.window_days);
            const SmoothingPolicy smoothing(analysis.window);
            for (const auto mode : config.modes) {
                StabilitySeries raw = compare_series(list, config.rbo, mode);
                StabilitySeries smoothed = moving_average(raw, smoothing);
                analysis.series.push_back({std::move(raw), std::move(smoothed)});
            }
            return analysis;
        }));
    }

    std::vector<StreamAnalysis> analyses;
    analyses.reserve(jobs.size());
    for (auto& job : jobs) analyses.push_back(job.get());
    return analyses;
}

std::string series_csv(const ModeSeries& series) {
    std::string out = "timepoint,rbo_min,rbo_res,rbo_ext,rbo_ext_smoothed\n";
    for (std::size_t i = 0; i < series.raw.points.size(); ++i) {
        const auto& p = series.raw.points[i];
        out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", format_utc(p.timepoint), p.rbo_min, p.rbo_res,
                           p.rbo_ext, series.smoothed.points[i].rbo_ext);
    }
    return out;
}

namespace {

std::string slug(std::string_view text) {
    std::string out;
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        const bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
                          c == '.' || c >= 0x80;
        out.push_back(keep ? ch : '_');
    }
    if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
    return out;
}

std::string xml_escape(std::string_view text) {
    std::string out;
    for (const char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

const ModeSeries* find_mode(const StreamAnalysis& analysis, ComparisonMode mode) {
    for (const auto& s : analysis.series) {
        if (s.raw.mode == mode) return &s;
    }
    return nullptr;
}

std::string_view kind_colour(SourceKind kind) { return kind == SourceKind::results ? "#1f77b4" : "#d62728"; }

std::string date_label(Instant t) { return format_utc(t).substr(0, 10); }

}  // namespace

std::string series_file_name(const StreamKey& key, ComparisonMode mode) {
    std::string name = fmt::format("{}_{}", to_string(mode), to_string(key.kind));
    if (!key.source.empty()) name += "_" + slug(key.source);
    return name + "_" + slug(key.query) + ".csv";
}

std::string render_svg(const std::vector<StreamAnalysis>& analyses, ComparisonMode mode, double reference_level) {
    // Panels by query; each panel may hold a results and a suggestions line.
    std::map<std::string, std::vector<const StreamAnalysis*>> panels;
    std::optional<Instant> t0;
    std::optional<Instant> t1;
    for (const auto& a : analyses) {
        const auto* series = find_mode(a, mode);
        if (series == nullptr || series->smoothed.points.empty()) continue;
        panels[a.key.query].push_back(&a);
        const auto first = series->smoothed.points.front().timepoint;
        const auto last = series->smoothed.points.back().timepoint;
        if (!t0 || first < *t0) t0 = first;
        if (!t1 || last > *t1) t1 = last;
    }

    constexpr double panel_w = 240.0;
    constexpr double panel_h = 150.0;
    constexpr double pad_left = 34.0;
    constexpr double pad_right = 10.0;
    constexpr double pad_top = 22.0;
    constexpr double pad_bottom = 24.0;
    constexpr double header_h = 48.0;
    const std::size_t n = panels.size();
    const std::size_t columns = std::max<std::size_t>(1, std::min<std::size_t>(4, n));
    const std::size_t rows = n == 0 ? 1 : (n + columns - 1) / columns;
    const double width = static_cast<double>(columns) * panel_w;
    const double height = header_h + static_cast<double>(rows) * panel_h;

    const double plot_w = panel_w - pad_left - pad_right;
    const double plot_h = panel_h - pad_top - pad_bottom;
    const double span = t0 && t1 && *t1 > *t0 ? static_cast<double>((*t1 - *t0).count()) : 1.0;
    const auto x_of = [&](Instant t) { return pad_left + plot_w * static_cast<double>((t - *t0).count()) / span; };
    const auto y_of = [&](double v) { return pad_top + plot_h * (1.0 - v); };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" viewBox=\"0 0 {0:.0f} {1:.0f}\" "
        "font-family=\"sans-serif\" font-size=\"10\">\n",
        width, height);
    svg += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", width, height);
    svg += fmt::format("<text x=\"8\" y=\"18\" font-size=\"13\">Ranking stability: {} comparison</text>\n",
                       mode == ComparisonMode::successive ? "successive" : "fixed");
    svg += fmt::format(
        "<g class=\"legend\"><line x1=\"8\" y1=\"34\" x2=\"28\" y2=\"34\" stroke=\"{}\" stroke-width=\"2\"/>"
        "<text x=\"32\" y=\"37\">search results</text>"
        "<line x1=\"120\" y1=\"34\" x2=\"140\" y2=\"34\" stroke=\"{}\" stroke-width=\"2\"/>"
        "<text x=\"144\" y=\"37\">suggestions</text></g>\n",
        kind_colour(SourceKind::results), kind_colour(SourceKind::suggestions));

    std::size_t index = 0;
    for (const auto& [query, members] : panels) {
        const double ox = static_cast<double>(index % columns) * panel_w;
        const double oy = header_h + static_cast<double>(index / columns) * panel_h;
        ++index;
        svg += fmt::format("<g class=\"panel\" transform=\"translate({:.1f},{:.1f})\">\n", ox, oy);
        svg += fmt::format("<text class=\"panel-title\" x=\"{:.1f}\" y=\"14\" font-size=\"11\">{}</text>\n", pad_left,
                           xml_escape(query));
        svg += fmt::format(
            "<rect class=\"frame\" x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
            "stroke=\"#444\"/>\n",
            pad_left, pad_top, plot_w, plot_h);
        for (const double tick : {0.0, 0.5, 1.0}) {
            svg += fmt::format("<text class=\"y-tick\" x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n",
                               pad_left - 4.0, y_of(tick) + 3.0, tick == 0.5 ? "0.5" : (tick == 0.0 ? "0" : "1"));
        }
        svg += fmt::format(
            "<text class=\"axis-label\" x=\"10\" y=\"{:.1f}\" transform=\"rotate(-90 10 {:.1f})\" "
            "text-anchor=\"middle\">RBO</text>\n",
            pad_top + plot_h / 2.0, pad_top + plot_h / 2.0);
        if (t0 && t1) {
            svg += fmt::format("<text class=\"x-tick\" x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", pad_left,
                               pad_top + plot_h + 14.0, date_label(*t0));
            svg += fmt::format("<text class=\"x-tick\" x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n",
                               pad_left + plot_w, pad_top + plot_h + 14.0, date_label(*t1));
        }
        svg += fmt::format(
            "<line class=\"reference\" x1=\"{:.1f}\" y1=\"{:.3f}\" x2=\"{:.1f}\" y2=\"{:.3f}\" stroke=\"#999\" "
            "data-level=\"{:.6f}\"/>\n",
            pad_left, y_of(reference_level), pad_left + plot_w, y_of(reference_level), reference_level);
        for (const auto* analysis : members) {
            const auto* series = find_mode(*analysis, mode);
            std::string points;
            for (const auto& p : series->smoothed.points) {
                if (!points.empty()) points.push_back(' ');
                points += fmt::format("{:.2f},{:.2f}", x_of(p.timepoint), y_of(p.rbo_ext));
            }
            svg += fmt::format(
                "<polyline class=\"series {}\" data-source=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" "
                "points=\"{}\"/>\n",
                to_string(analysis->key.kind), xml_escape(analysis->key.source), kind_colour(analysis->key.kind),
                points);
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& out_dir,
                                                 const std::vector<StreamAnalysis>& analyses,
                                                 const AnalysisConfig& config) {
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    std::set<std::string> names;
    std::string index = "mode,kind,source,query,file,window\n";
    const auto unique_name = [&](std::string name) {
        if (names.insert(name).second) return name;
        const auto stem = name.substr(0, name.size() - 4);
        for (int i = 2;; ++i) {
            auto candidate = fmt::format("{}_{}.csv", stem, i);
            if (names.insert(candidate).second) return candidate;
        }
    };
    if (config.format != OutputFormat::svg) {
        for (const auto mode : config.modes) {
            for (const auto& a : analyses) {
                const auto* series = find_mode(a, mode);
                if (series == nullptr) continue;
                const auto name = unique_name(series_file_name(a.key, mode));
                files.emplace_back(out_dir / name, series_csv(*series));
                std::ostringstream row;
                const std::vector<std::string> fields = {std::string(to_string(mode)), std::string(to_string(a.key.kind)),
                                                         a.key.source, a.key.query, name, std::to_string(a.window)};
                write_csv_row(row, fields);
                index += row.str();
            }
        }
        files.emplace_back(out_dir / "index.csv", index);
    }
    if (config.format != OutputFormat::csv) {
        for (const auto mode : config.modes) {
            files.emplace_back(out_dir / fmt::format("{}.svg", to_string(mode)),
                               render_svg(analyses, mode, config.reference_level));
        }
    }

    std::vector<std::filesystem::path> written;
    const auto fail = [&](const std::string& message) {
        std::error_code ignored;
        for (const auto& path : written) std::filesystem::remove(path, ignored);
        throw IoError(message);
    };
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(fmt::format("cannot create output directory '{}': {}", out_dir.string(), ec.message()));
    for (const auto& [path, content] : files) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (out) {
            written.push_back(path);
            out.write(content.data(), static_cast<std::streamsize>(content.size()));
            out.close();
        }
        if (!out) fail(fmt::format("cannot write '{}'", path.string()));
    }
    return written;
}

}  // namespace rankstab

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fmt/format.h>

#include <sstream>

#include "rankstab/aggregation.hpp"
#include "rankstab/aliases.hpp"
#include "rankstab/errors.hpp"
#include "rankstab/ingestion.hpp"
#include "rankstab/rbo.hpp"
#include "rankstab/timeseries.hpp"

namespace py = pybind11;
using namespace rankstab;

namespace {

// Timestamps cross the boundary as ISO-8601 strings; unzoned input is UTC.
Instant instant_from(const std::string& text) { return parse_timestamp(text, ZoneOffset{}); }

std::vector<RankedSnapshot> snapshots_from(const std::vector<std::string>& timepoints,
                                           const std::vector<std::vector<std::string>>& rankings) {
    if (timepoints.size() != rankings.size()) {
        throw std::invalid_argument("timepoints and rankings must have the same length");
    }
    std::vector<RankedSnapshot> out;
    out.reserve(rankings.size());
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        out.push_back({"", instant_from(timepoints[i]), Ranking(rankings[i]), SourceKind::suggestions, ""});
    }
    return out;
}

StabilitySeries series_from(const std::vector<SeriesPoint>& points) {
    StabilitySeries s;
    s.points = points;
    return s;
}

py::dict stats_dict(const SuggestionStats& s) {
    py::dict d;
    d["rows"] = s.rows;
    d["rows_kept"] = s.rows_kept;
    d["rows_malformed"] = s.rows_malformed;
    d["rows_out_of_window"] = s.rows_out_of_window;
    d["fetches"] = s.fetches;
    d["fetches_superseded"] = s.fetches_superseded;
    d["fetches_malformed"] = s.fetches_malformed;
    d["unique_terms"] = s.unique_terms;
    return d;
}

}  // namespace

PYBIND11_MODULE(_rankstab, m) {
    m.doc() = "Rank-biased overlap and ranking-stability analysis";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.attr("DEFAULT_PERSISTENCE") = RboParams::kDefaultPersistence;
    m.attr("DEFAULT_PRESENCE_THRESHOLD") = AggregationPolicy::kDefaultPresenceThreshold;

    py::class_<RboResult>(m, "RboResult")
        .def_readonly("min", &RboResult::min)
        .def_readonly("res", &RboResult::res)
        .def_readonly("ext", &RboResult::ext)
        .def_readonly("depth", &RboResult::depth)
        .def_property_readonly("max", &RboResult::max)
        .def("__repr__", [](const RboResult& r) {
            return fmt::format("RboResult(min={:.6f}, res={:.6f}, ext={:.6f}, depth={})", r.min, r.res, r.ext,
                               r.depth);
        });

    py::class_<SeriesPoint>(m, "SeriesPoint")
        .def(py::init([](const std::string& timepoint, double rbo_min, double rbo_res, double rbo_ext) {
                 return SeriesPoint{instant_from(timepoint), rbo_min, rbo_res, rbo_ext};
             }),
             py::arg("timepoint"), py::arg("rbo_min"), py::arg("rbo_res"), py::arg("rbo_ext"))
        .def_property_readonly("timepoint", [](const SeriesPoint& p) { return format_utc(p.timepoint); })
        .def_readonly("rbo_min", &SeriesPoint::rbo_min)
        .def_readonly("rbo_res", &SeriesPoint::rbo_res)
        .def_readonly("rbo_ext", &SeriesPoint::rbo_ext)
        .def("__repr__", [](const SeriesPoint& p) {
            return fmt::format("SeriesPoint({}, ext={:.6f})", format_utc(p.timepoint), p.rbo_ext);
        });

    m.def(
        "rbo",
        [](const std::vector<std::string>& a, const std::vector<std::string>& b, double p) {
            return rbo(Ranking(a), Ranking(b), RboParams(p));
        },
        py::arg("a"), py::arg("b"), py::arg("p") = RboParams::kDefaultPersistence,
        "Bounds and extrapolated rank-biased overlap of two rankings.");

    m.def(
        "prefix_weight", [](double p, std::size_t depth) { return prefix_weight(RboParams(p), depth); },
        py::arg("p"), py::arg("depth"), "Share of the total weight carried by the first `depth` ranks.");

    m.def(
        "expected_depth", [](double p) { return expected_depth(RboParams(p)); }, py::arg("p"));

    m.def(
        "aggregate",
        [](const std::vector<std::vector<std::string>>& lists, double threshold) {
            RequestBatch batch;
            for (std::size_t i = 0; i < lists.size(); ++i) {
                batch.lists.push_back({std::to_string(i), Instant{}, Ranking(lists[i])});
            }
            return aggregate(batch, AggregationPolicy(threshold)).items();
        },
        py::arg("lists"), py::arg("threshold") = AggregationPolicy::kDefaultPresenceThreshold,
        "Merges result lists of one round into a single ranking by mean rank.");

    m.def(
        "stability_series",
        [](const std::vector<std::string>& timepoints, const std::vector<std::vector<std::string>>& rankings,
           const std::string& mode, double p) {
            const auto snapshots = snapshots_from(timepoints, rankings);
            return compare_series(snapshots, RboParams(p), parse_comparison_mode(mode)).points;
        },
        py::arg("timepoints"), py::arg("rankings"), py::arg("mode") = "successive",
        py::arg("p") = RboParams::kDefaultPersistence,
        "RBO of each snapshot against its predecessor ('successive') or the first one ('fixed').");

    m.def(
        "moving_average",
        [](const std::vector<SeriesPoint>& points, std::size_t window) {
            return moving_average(series_from(points), SmoothingPolicy(window)).points;
        },
        py::arg("points"), py::arg("window"));

    m.def(
        "window_for_days",
        [](const std::vector<std::string>& timepoints, double days) {
            std::vector<Instant> instants;
            for (const auto& t : timepoints) instants.push_back(instant_from(t));
            return window_for_days(instants, days);
        },
        py::arg("timepoints"), py::arg("days"));

    m.def(
        "parse_suggestions",
        [](const std::string& text, const std::string& aliases_text, const std::string& zone, bool strict) {
            std::istringstream alias_in(aliases_text);
            const auto aliases = QueryAliasMap::parse(alias_in);
            SuggestionOptions options;
            options.zone = ZoneOffset::parse(zone);
            options.strict = strict;
            std::istringstream in(text);
            const auto log = parse_suggestions(in, aliases, options);
            py::list snapshots;
            for (const auto& s : log.snapshots) {
                py::dict d;
                d["source"] = s.source;
                d["query"] = s.query;
                d["timepoint"] = format_utc(s.timepoint);
                d["ranking"] = s.ranking.items();
                snapshots.append(d);
            }
            py::list diagnostics;
            for (const auto& diag : log.diagnostics) diagnostics.append(py::make_tuple(diag.line, diag.message));
            py::dict out;
            out["snapshots"] = snapshots;
            out["stats"] = stats_dict(log.stats);
            out["diagnostics"] = diagnostics;
            return out;
        },
        py::arg("text"), py::arg("aliases") = "", py::arg("zone") = "CET", py::arg("strict") = false,
        "Parses a suggestion log into one ranked snapshot per source, query and round.");
}

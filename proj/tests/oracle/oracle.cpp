#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace rankstab::oracle {

namespace {

std::size_t count_common(const std::vector<std::string>& a, std::size_t da, const std::vector<std::string>& b,
                         std::size_t db) {
    std::size_t common = 0;
    for (std::size_t i = 0; i < std::min(da, a.size()); ++i) {
        for (std::size_t j = 0; j < std::min(db, b.size()); ++j) {
            if (a[i] == b[j]) ++common;
        }
    }
    return common;
}

double agreement(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t d,
                 Tail tail) {
    const std::vector<std::string>& shorter = a.size() <= b.size() ? a : b;
    const std::vector<std::string>& longer = a.size() <= b.size() ? b : a;
    const std::size_t s = shorter.size();
    const std::size_t l = longer.size();
    if (s == 0) return 0.0;
    const std::size_t depth = std::min(d, l);
    double x = static_cast<double>(count_common(shorter, depth, longer, depth));
    if (tail == Tail::constant && depth > s) {
        const double rate = static_cast<double>(count_common(shorter, s, longer, s)) / static_cast<double>(s);
        x += rate * static_cast<double>(depth - s);
    }
    if (d > l && tail == Tail::zero) return 0.0;
    return x / static_cast<double>(depth);
}

void extensions(const std::vector<std::string>& base, const std::vector<std::string>& pool, std::size_t length,
                std::vector<std::string>& current, std::vector<std::vector<std::string>>& out) {
    if (current.size() == length) {
        out.push_back(current);
        return;
    }
    for (const auto& item : pool) {
        if (std::find(current.begin(), current.end(), item) != current.end()) continue;
        current.push_back(item);
        extensions(base, pool, length, current, out);
        current.pop_back();
    }
}

std::vector<std::vector<std::string>> all_extensions(const std::vector<std::string>& base,
                                                     const std::vector<std::string>& universe,
                                                     std::size_t length) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> current = base;
    extensions(base, universe, length, current, out);
    return out;
}

}  // namespace

double rbo_series(const Ranking& a, const Ranking& b, double p, Tail tail) {
    const std::size_t l = std::max(a.size(), b.size());
    // Agreement is fixed beyond the longer list, so it is computed once there.
    const double beyond = agreement(a.items(), b.items(), l + 1, tail);
    double sum = 0.0;
    double weight = 1.0;  // p^(d-1)
    for (std::size_t d = 1;; ++d) {
        const double agree = d <= l ? agreement(a.items(), b.items(), d, tail) : beyond;
        sum += (1.0 - p) * weight * agree;
        weight *= p;
        if (weight < 1e-12) break;
    }
    return sum;
}

double rbo_max_by_enumeration(const Ranking& a, const Ranking& b, double p) {
    const std::size_t l = std::max(a.size(), b.size());
    const std::size_t depth = 2 * l;
    if (l == 0) return 1.0;

    std::vector<std::string> universe(a.begin(), a.end());
    for (const auto& item : b) {
        if (std::find(universe.begin(), universe.end(), item) == universe.end()) universe.push_back(item);
    }
    for (std::size_t i = 0; i < l; ++i) universe.push_back("fresh#" + std::to_string(i));

    const auto ext_a = all_extensions(a.items(), universe, depth);
    const auto ext_b = all_extensions(b.items(), universe, depth);
    double best = 0.0;
    for (const auto& x : ext_a) {
        for (const auto& y : ext_b) {
            if (std::set<std::string>(x.begin(), x.end()) != std::set<std::string>(y.begin(), y.end())) continue;
            double sum = 0.0;
            for (std::size_t d = 1; d <= depth; ++d) {
                const double common = static_cast<double>(count_common(x, d, y, d));
                sum += (1.0 - p) * std::pow(p, static_cast<double>(d - 1)) * common / static_cast<double>(d);
            }
            sum += std::pow(p, static_cast<double>(depth));  // agreement 1 from here on
            best = std::max(best, sum);
        }
    }
    return best;
}

Ranking aggregate(const RequestBatch& batch, double threshold) {
    std::vector<std::string> urls;
    for (const auto& list : batch.lists) {
        for (const auto& url : list.urls) {
            if (std::find(urls.begin(), urls.end(), url) == urls.end()) urls.push_back(url);
        }
    }
    std::vector<std::pair<double, std::string>> kept;
    const double n = static_cast<double>(batch.lists.size());
    for (const auto& url : urls) {
        double present = 0.0;
        double rank_sum = 0.0;
        for (const auto& list : batch.lists) {
            for (std::size_t i = 0; i < list.urls.size(); ++i) {
                if (list.urls[i] == url) {
                    present += 1.0;
                    rank_sum += static_cast<double>(i + 1);
                }
            }
        }
        if (present / n > threshold) kept.emplace_back(rank_sum / present, url);
    }
    std::sort(kept.begin(), kept.end());
    std::vector<std::string> ordered;
    for (const auto& entry : kept) ordered.push_back(entry.second);
    return Ranking(ordered);
}

StabilitySeries moving_average(const StabilitySeries& series, std::size_t window) {
    StabilitySeries out = series;
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
        double mn = 0.0;
        double rs = 0.0;
        double ex = 0.0;
        for (std::size_t j = first; j <= i; ++j) {
            mn += series.points[j].rbo_min;
            rs += series.points[j].rbo_res;
            ex += series.points[j].rbo_ext;
        }
        const double count = static_cast<double>(i - first + 1);
        out.points[i].rbo_min = mn / count;
        out.points[i].rbo_res = rs / count;
        out.points[i].rbo_ext = ex / count;
    }
    return out;
}

}  // namespace rankstab::oracle

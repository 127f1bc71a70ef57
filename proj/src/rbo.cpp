#include "rankstab/rbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace rankstab {

namespace {

// X_d for d = 1..depth (index d - 1). Each step adds at most two items, so
// the overlap grows by 0, 1 or 2 per depth.
std::vector<std::size_t> overlap_profile(const Ranking& a, const Ranking& b, std::size_t depth) {
    std::vector<std::size_t> overlaps;
    overlaps.reserve(depth);
    std::unordered_set<std::string_view> seen_a;
    std::unordered_set<std::string_view> seen_b;
    std::size_t overlap = 0;
    for (std::size_t d = 0; d < depth; ++d) {
        const bool has_a = d < a.size();
        const bool has_b = d < b.size();
        if (has_a && has_b && a[d] == b[d]) {
            ++overlap;
        } else {
            if (has_a && seen_b.contains(a[d])) ++overlap;
            if (has_b && seen_a.contains(b[d])) ++overlap;
        }
        if (has_a) seen_a.insert(a[d]);
        if (has_b) seen_b.insert(b[d]);
        overlaps.push_back(overlap);
    }
    return overlaps;
}

}  // namespace

RboParams::RboParams(double persistence) : p_(persistence) {
    if (!(persistence > 0.0 && persistence < 1.0)) {
        throw std::invalid_argument("persistence p must lie strictly between 0 and 1, got " +
                                    std::to_string(persistence));
    }
}

std::size_t overlap_at_depth(const Ranking& a, const Ranking& b, std::size_t depth) {
    if (depth == 0) {
        throw std::invalid_argument("overlap depth must be at least 1");
    }
    return overlap_profile(a, b, depth).back();
}

RboResult rbo(const Ranking& a, const Ranking& b, const RboParams& params) {
    const double p = params.persistence();
    const std::size_t s = std::min(a.size(), b.size());
    const std::size_t l = std::max(a.size(), b.size());

    RboResult result;
    result.depth = l;
    if (l == 0) {
        result.min = 0.0;
        result.res = 1.0;
        result.ext = 1.0;
        return result;
    }

    const std::vector<std::size_t> x = overlap_profile(a, b, l);
    const auto overlap = [&](std::size_t d) { return static_cast<double>(x[d - 1]); };

    // min: observed agreement only.
    double min = 0.0;
    double weight = 1.0 - p;  // (1 - p) p^(d - 1)
    for (std::size_t d = 1; d <= l; ++d) {
        min += weight * overlap(d) / static_cast<double>(d);
        weight *= p;
    }
    const double p_l = std::pow(p, static_cast<double>(l));

    // max: every unseen position agrees as much as the observed prefixes
    // allow. Between s and l each unseen item of the shorter list can match
    // one more item of the longer list; past l both lists gain one item per
    // depth, so the overlap grows by up to two until it reaches the depth.
    // Summed as a deficit from 1 so that fully agreeing lists give exactly 1.
    const std::size_t overlap_at_l_max = x[l - 1] + (l - s);
    const std::size_t full_agreement_depth = 2 * l - overlap_at_l_max;
    double deficit = 0.0;
    weight = 1.0 - p;
    for (std::size_t d = 1; d < full_agreement_depth; ++d) {
        std::size_t best;
        if (d <= s) {
            best = x[d - 1];
        } else if (d <= l) {
            best = x[d - 1] + (d - s);
        } else {
            best = std::min(d, overlap_at_l_max + 2 * (d - l));
        }
        deficit += weight * (1.0 - static_cast<double>(best) / static_cast<double>(d));
        weight *= p;
    }
    double max = std::clamp(1.0 - deficit, 0.0, 1.0);
    max = std::max(max, min);

    double ext = 0.0;
    if (s == 0) {
        ext = 0.0;
    } else {
        const double short_overlap = overlap(s);
        const double short_len = static_cast<double>(s);
        bool full_agreement = true;
        weight = 1.0 - p;
        for (std::size_t d = 1; d <= l; ++d) {
            // X_d plus the extrapolated matches of the shorter list's unseen
            // items, at rate X_s / s. Compared in integers: A_d == 1 iff
            // s X_d + X_s (d - s) == s d.
            const std::size_t carried = d > s ? x[s - 1] * (d - s) : 0;
            if (s * x[d - 1] + carried != s * d) full_agreement = false;
            double term = overlap(d) / static_cast<double>(d);
            if (d > s) {
                term += short_overlap * static_cast<double>(d - s) / (short_len * static_cast<double>(d));
            }
            ext += weight * term;
            weight *= p;
        }
        const double tail_agreement =
            (overlap(l) - short_overlap) / static_cast<double>(l) + short_overlap / short_len;
        ext += tail_agreement * p_l;
        if (full_agreement) ext = 1.0;
    }

    result.min = min;
    result.ext = std::clamp(ext, min, max);
    result.res = max - min;
    return result;
}

double prefix_weight(const RboParams& params, std::size_t depth) {
    if (depth == 0) {
        throw std::invalid_argument("prefix depth must be at least 1");
    }
    const double p = params.persistence();
    const double d = static_cast<double>(depth);

    // tail = sum_{i >= depth} p^i / i, summed directly to avoid subtracting
    // a partial sum from -log(1 - p).
    double tail = 0.0;
    double power = std::pow(p, d);
    for (std::size_t i = depth;; ++i) {
        const double term = power / static_cast<double>(i);
        tail += term;
        if (term <= tail * std::numeric_limits<double>::epsilon() * 0.25) break;
        power *= p;
    }
    return 1.0 - std::pow(p, d - 1.0) + (1.0 - p) / p * d * tail;
}

double expected_depth(const RboParams& params) { return 1.0 / (1.0 - params.persistence()); }

}  // namespace rankstab

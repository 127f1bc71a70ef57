#pragma once

// Rank-biased overlap for indefinite, possibly non-conjoint rankings.
//
// The agreement at depth d is A_d = X_d / d, where X_d is the size of the
// intersection of the two depth-d prefixes. RBO weights A_d by
// (1 - p) * p^(d - 1), so the persistence p controls how top-heavy the
// measure is. Evaluated at the observed depth k (the longer list's length):
//
//   min  the truncated sum over depths 1..k, i.e. no agreement is credited
//        beyond what was observed;
//   res  the largest mass that any continuation of the two lists could add
//        on top of min;
//   ext  the point estimate that carries the observed agreement forward.
//        For unequal lengths the shorter list's unseen items are assumed to
//        agree at its final rate, and beyond depth k the agreement stays
//        constant.

#include <cstddef>
#include <stdexcept>

#include "rankstab/ranking.hpp"

namespace rankstab {

class RboParams {
public:
    static constexpr double kDefaultPersistence = 0.85;

    /// Throws std::invalid_argument unless 0 < p < 1.
    explicit RboParams(double persistence = kDefaultPersistence);

    double persistence() const noexcept { return p_; }

private:
    double p_;
};

struct RboResult {
    double min = 0.0;
    double res = 0.0;
    double ext = 0.0;
    std::size_t depth = 0;

    double max() const noexcept { return min + res; }
};

/// |prefix(a, depth) ∩ prefix(b, depth)|. Prefixes saturate at the list
/// length. Throws std::invalid_argument for depth == 0.
std::size_t overlap_at_depth(const Ranking& a, const Ranking& b, std::size_t depth);

/// Full min/res/ext decomposition. Symmetric in (a, b) bit for bit.
///
/// Two empty rankings compare as min = 0, res = 1, ext = 1. An empty
/// ranking against a non-empty one has ext = 0.
RboResult rbo(const Ranking& a, const Ranking& b, const RboParams& params = RboParams{});

/// Share of the total RBO weight that falls on ranks 1..depth. Each rank i
/// receives the sum over d >= i of (1 - p) p^(d-1) / d.
/// Throws std::invalid_argument for depth == 0.
double prefix_weight(const RboParams& params, std::size_t depth);

/// Mean of the geometric stopping depth, 1 / (1 - p).
double expected_depth(const RboParams& params);

}  // namespace rankstab

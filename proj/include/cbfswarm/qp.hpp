#pragma once

#include <vector>

#include "cbfswarm/core.hpp"

namespace cbfswarm::qp {

enum class Status { Optimal, RelaxedFeasible, Infeasible };

const char* to_string(Status s);

/// Minimum-deviation problem: min |u - nominal|^2 over the box
/// [lower, upper] intersected with the stacked half-spaces a . u <= b.
struct Problem {
    Vec2 nominal;
    Vec2 lower;
    Vec2 upper;
    std::vector<LinearConstraint> constraints;

    Problem() = default;
    Problem(const Vec2& nominal_, const Vec2& lower_, const Vec2& upper_,
            std::vector<LinearConstraint> constraints_);
};

/// active_set entries >= 0 index problem.constraints; negative entries are
/// box edges: -1 x<=upper.x, -2 x>=lower.x, -3 y<=upper.y, -4 y>=lower.y.
struct Solution {
    Vec2 u;
    Status status = Status::Optimal;
    double slack_used = 0.0;
    double objective = 0.0;
    std::vector<int> active_set;
};

/// Exact 2-D active-set solver. Enumerates the nominal, its projection on
/// every constraint line, and every pairwise line intersection (box edges
/// included as four half-spaces); returns the feasible candidate with the
/// least objective, ties broken toward lexicographically smaller (x, y).
///
/// If the feasible set is empty, the box being nonempty, the smallest
/// shared slack s >= 0 with every half-space relaxed to a . u <= b + s is
/// found exactly (vertex enumeration of the lifted 3-variable LP) and the
/// projection inside the relaxed set is returned as RelaxedFeasible with
/// slack_used = s. Infeasible is reserved for numeric breakdown of that
/// fallback and is not expected in practice.
Solution solve(const Problem& problem);

/// Test oracle: exhaustive scan of the resolution x resolution grid over
/// the box, returning the feasible grid point with the least objective, or
/// Infeasible (u = nominal clamped to the box) when no grid point passes.
/// Requires resolution >= 100.
Solution brute_force_solve(const Problem& problem, int resolution);

/// |u - nominal|^2.
double objective_value(const Problem& problem, const Vec2& u);

/// Max over constraints of (a . u - b), box edges included; <= 0 means u
/// is feasible.
double max_violation(const Problem& problem, const Vec2& u);

}  // namespace cbfswarm::qp

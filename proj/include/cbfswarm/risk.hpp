#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "cbfswarm/core.hpp"

namespace cbfswarm::risk {

/// Pairwise losses and per-agent aggregates for one scene snapshot.
/// pair_loss is row major over agent indices with a zero diagonal and is
/// symmetric: both members of a pair see the same number.
struct Report {
    int step = 0;
    int agent_count = 0;
    std::vector<int> agent_ids;
    std::vector<double> pair_loss;
    std::vector<double> agent_risk;

    double loss(int i, int j) const { return pair_loss[static_cast<std::size_t>(i) * agent_count + j]; }
    double min_pair_loss() const;  // min over off-diagonal entries
};

/// Barrier value h = |x_i - x_j|^2 - R^2 with R the pair safety radius.
/// Positive outside the safety bubble, zero on its boundary.
double safety_value(const AgentState& a, const AgentState& b);

/// Shared decay rate for a pair: min of the two agents' gammas, so the
/// pair is judged by the stricter agent.
double pair_gamma(const AgentState& a, const AgentState& b);

/// Instantaneous safety loss for an ordered pair, evaluated at the agents'
/// current velocities:
///   L = -2 d . (v_i - v_j) - 2 CVaR_alpha(d . (e_i - e_j)) - gamma h + c
/// with d = x_i - x_j. Symmetric under swapping the pair. Larger when the
/// pair is closing fast, deep inside each other's margin, or both.
double safety_loss(const AgentState& a, const AgentState& b, double alpha, double c);

/// Evaluates every unordered pair once and aggregates per-agent risk
/// R_i = sum over j != i of L_ij. Pairs farther apart than
/// neighbor_cutoff contribute nothing. Parallel over pairs; results are
/// bitwise identical to evaluate_scene_risk_serial.
Report evaluate_scene_risk(const Scene& scene, int step = 0,
                           double neighbor_cutoff = std::numeric_limits<double>::infinity());

/// Single-threaded reference implementation.
Report evaluate_scene_risk_serial(const Scene& scene, int step = 0,
                                  double neighbor_cutoff = std::numeric_limits<double>::infinity());

/// Rows "step,i,j,L" for every ordered pair, then rows "step,i,R" per
/// agent; i and j are agent ids.
void write_csv(const Report& report, std::ostream& out);

}  // namespace cbfswarm::risk

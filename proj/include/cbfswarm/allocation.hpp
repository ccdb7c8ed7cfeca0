#pragma once

namespace cbfswarm::alloc {

struct PairWeights {
    double w_i = 0.5;
    double w_j = 0.5;
};

/// Responsibility split for a pair from the two agents' aggregated risks:
/// w_i = R_j / (R_i + R_j), w_j = R_i / (R_i + R_j). The riskier agent
/// takes the smaller share of the pair's admissible budget, i.e. it is
/// constrained harder. A zero denominator yields the even split.
PairWeights responsibility_weights(double risk_i, double risk_j);

/// Exponential smoothing: beta * previous + (1 - beta) * raw. beta = 0
/// reproduces the raw weight. beta must lie in [0, 1).
double smooth_weight(double previous, double raw, double beta);

}  // namespace cbfswarm::alloc

#include "cbfswarm/allocation.hpp"

#include <cmath>

#include "cbfswarm/core.hpp"

namespace cbfswarm::alloc {

PairWeights responsibility_weights(double risk_i, double risk_j) {
    if (!std::isfinite(risk_i) || !std::isfinite(risk_j)) {
        throw InvalidArgument("responsibility_weights needs finite risks");
    }
    if (risk_i < 0.0 || risk_j < 0.0) {
        throw InvalidArgument("responsibility_weights needs nonnegative risks");
    }
    const double sum = risk_i + risk_j;
    if (sum == 0.0) return {0.5, 0.5};
    return {risk_j / sum, risk_i / sum};
}

double smooth_weight(double previous, double raw, double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) {
        throw InvalidArgument("smooth_weight needs beta in [0, 1)");
    }
    return beta * previous + (1.0 - beta) * raw;
}

}  // namespace cbfswarm::alloc

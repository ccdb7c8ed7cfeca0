#include "cbfswarm/risk.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include "cbfswarm/csv.hpp"
#include "cbfswarm/uncertainty.hpp"

namespace cbfswarm::risk {

double Report::min_pair_loss() const {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < agent_count; ++i) {
        for (int j = 0; j < agent_count; ++j) {
            if (i != j) best = std::min(best, loss(i, j));
        }
    }
    return best;
}

double safety_value(const AgentState& a, const AgentState& b) {
    if (a.id == b.id) {
        throw InvalidArgument("safety_value needs two distinct agents");
    }
    const double r = pair_safety_radius(a, b);
    return (a.position - b.position).norm_sq() - r * r;
}

double pair_gamma(const AgentState& a, const AgentState& b) {
    return std::min(a.gamma, b.gamma);
}

double safety_loss(const AgentState& a, const AgentState& b, double alpha, double c) {
    const Vec2 d = a.position - b.position;
    const double closing = -2.0 * d.dot(a.velocity - b.velocity);
    const double noise_term = -2.0 * cvar::pairwise_noise_cvar(d, a.noise, b.noise, alpha);
    return closing + noise_term - pair_gamma(a, b) * safety_value(a, b) + c;
}

namespace {

Report evaluate_impl(const Scene& scene, int step, double neighbor_cutoff, bool parallel) {
    const int n = static_cast<int>(scene.agents.size());
    Report report;
    report.step = step;
    report.agent_count = n;
    report.agent_ids.reserve(scene.agents.size());
    for (const AgentState& a : scene.agents) report.agent_ids.push_back(a.id);
    report.pair_loss.assign(static_cast<std::size_t>(n) * n, 0.0);
    report.agent_risk.assign(n, 0.0);

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }

    const auto eval_pair = [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const AgentState& ai = scene.agents[i];
        const AgentState& aj = scene.agents[j];
        if ((ai.position - aj.position).norm() > neighbor_cutoff) return;
        const double l = safety_loss(ai, aj, scene.alpha, scene.loss_offset_c);
        report.pair_loss[static_cast<std::size_t>(i) * n + j] = l;
        report.pair_loss[static_cast<std::size_t>(j) * n + i] = l;
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t k = 0; k < pairs.size(); ++k) eval_pair(k);
    } else {
        for (std::size_t k = 0; k < pairs.size(); ++k) eval_pair(k);
    }

    // Row sums run serially in index order so the reduction order is fixed.
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += report.pair_loss[static_cast<std::size_t>(i) * n + j];
        report.agent_risk[i] = sum;
    }
    return report;
}

}  // namespace

Report evaluate_scene_risk(const Scene& scene, int step, double neighbor_cutoff) {
    return evaluate_impl(scene, step, neighbor_cutoff, true);
}

Report evaluate_scene_risk_serial(const Scene& scene, int step, double neighbor_cutoff) {
    return evaluate_impl(scene, step, neighbor_cutoff, false);
}

void write_csv(const Report& report, std::ostream& out) {
    for (int i = 0; i < report.agent_count; ++i) {
        for (int j = 0; j < report.agent_count; ++j) {
            if (i == j) continue;
            out << report.step << ',' << report.agent_ids[i] << ',' << report.agent_ids[j]
                << ',' << fmt_double(report.loss(i, j)) << '\n';
        }
    }
    for (int i = 0; i < report.agent_count; ++i) {
        out << report.step << ',' << report.agent_ids[i] << ','
            << fmt_double(report.agent_risk[i]) << '\n';
    }
}

}  // namespace cbfswarm::risk

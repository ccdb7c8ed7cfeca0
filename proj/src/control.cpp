#include "cbfswarm/control.hpp"

#include <algorithm>
#include <cmath>

#include "cbfswarm/allocation.hpp"

namespace cbfswarm::control {

ControllerKind ControllerKind::fixed_share(double share) {
    if (!(share > 0.0 && share < 1.0)) {
        throw InvalidArgument("fixed share must lie in (0, 1)");
    }
    return {Type::FixedShareDecentralized, share};
}

const char* to_string(ControllerKind::Type t) {
    switch (t) {
        case ControllerKind::Type::RiskAwareDecentralized: return "risk-aware";
        case ControllerKind::Type::FixedShareDecentralized: return "fixed-share";
        case ControllerKind::Type::Centralized: return "centralized";
    }
    return "?";
}

double pair_constraint_offset(const AgentState& i, const AgentState& j, double alpha,
                              cvar::Convention convention) {
    const Vec2 d = i.position - j.position;
    const double gh = risk::pair_gamma(i, j) * risk::safety_value(i, j);
    if (convention == cvar::Convention::PaperLiteral) {
        return gh + 2.0 * cvar::pairwise_noise_cvar(d, i.noise, j.noise, alpha);
    }
    return gh - 2.0 * cvar::pairwise_noise_cvar(-d, i.noise, j.noise, alpha);
}

LinearConstraint build_pair_constraint(const AgentState& i, const AgentState& j, double w_i,
                                       double alpha, cvar::Convention convention) {
    if (i.id == j.id) {
        throw InvalidArgument("build_pair_constraint needs two distinct agents");
    }
    if (!(w_i >= 0.0 && w_i <= 1.0)) {
        throw InvalidArgument("build_pair_constraint needs w_i in [0, 1]");
    }
    const Vec2 a = (i.position - j.position) * -2.0;
    return LinearConstraint(a, w_i * pair_constraint_offset(i, j, alpha, convention), i.id,
                            j.id);
}

std::vector<double> controller_weights(const risk::Report& report,
                                       const ControllerKind& kind) {
    if (kind.type == ControllerKind::Type::Centralized) {
        throw InvalidArgument("controller_weights needs a decentralized kind");
    }
    const int n = report.agent_count;
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (kind.type == ControllerKind::Type::FixedShareDecentralized) {
                w[static_cast<std::size_t>(i) * n + j] = kind.share;
                w[static_cast<std::size_t>(j) * n + i] = kind.share;
            } else {
                const auto pw = alloc::responsibility_weights(report.agent_risk[i],
                                                              report.agent_risk[j]);
                w[static_cast<std::size_t>(i) * n + j] = pw.w_i;
                w[static_cast<std::size_t>(j) * n + i] = pw.w_j;
            }
        }
    }
    return w;
}

std::vector<ControlDecision> decentralized_step(const Scene& scene,
                                                std::span<const Vec2> nominals,
                                                const ControlBounds& bounds,
                                                const std::vector<double>& weights,
                                                cvar::Convention convention) {
    const int n = static_cast<int>(scene.agents.size());
    if (static_cast<int>(nominals.size()) != n) {
        throw InvalidArgument("decentralized_step: nominals must align with scene agents");
    }
    if (weights.size() != static_cast<std::size_t>(n) * n) {
        throw InvalidArgument("decentralized_step: weight matrix must be N x N");
    }
    std::vector<ControlDecision> decisions(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        std::vector<LinearConstraint> constraints;
        constraints.reserve(n - 1);
        std::vector<std::pair<int, double>> used;
        used.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = weights[static_cast<std::size_t>(i) * n + j];
            constraints.push_back(build_pair_constraint(scene.agents[i], scene.agents[j], w,
                                                        scene.alpha, convention));
            used.emplace_back(scene.agents[j].id, w);
        }
        const qp::Problem problem(nominals[i], bounds.lower, bounds.upper,
                                  std::move(constraints));
        const qp::Solution sol = qp::solve(problem);
        ControlDecision& d = decisions[i];
        d.agent_id = scene.agents[i].id;
        d.u_applied = sol.u;
        d.u_nominal = nominals[i];
        d.deviation = (sol.u - nominals[i]).norm();
        d.qp_status = sol.status;
        d.slack_used = sol.slack_used;
        d.weights_used = std::move(used);
    }
    return decisions;
}

std::vector<ControlDecision> decentralized_step(const Scene& scene,
                                                std::span<const Vec2> nominals,
                                                const ControlBounds& bounds,
                                                const ControllerKind& kind,
                                                cvar::Convention convention) {
    if (kind.type == ControllerKind::Type::Centralized) {
        throw InvalidArgument("decentralized_step needs a decentralized kind");
    }
    const risk::Report report = risk::evaluate_scene_risk(scene);
    return decentralized_step(scene, nominals, bounds, controller_weights(report, kind),
                              convention);
}

namespace {

struct JointHalfSpace {
    int i, j;
    Vec2 a;       // acts as +a on block i and -a on block j
    double b;
    double g_norm_sq;  // 2 |a|^2
};

double joint_violation(const JointHalfSpace& h, const std::vector<Vec2>& x, double slack) {
    return h.a.dot(x[h.i] - x[h.j]) - (h.b + slack);
}

/// Distance-scaled residual of the worst constraint (boxes are exact after
/// a clamp pass, so only half-spaces matter here).
double max_residual(const std::vector<JointHalfSpace>& rows, const std::vector<Vec2>& x,
                    const ControlBounds& bounds, double slack) {
    double worst = 0.0;
    for (const JointHalfSpace& h : rows) {
        const double v = joint_violation(h, x, slack);
        if (v > 0.0 && h.g_norm_sq > 0.0) worst = std::max(worst, v / std::sqrt(h.g_norm_sq));
    }
    for (const Vec2& u : x) {
        worst = std::max({worst, bounds.lower.x - u.x, u.x - bounds.upper.x,
                          bounds.lower.y - u.y, u.y - bounds.upper.y});
    }
    return worst;
}

void project_half_space(const JointHalfSpace& h, std::vector<Vec2>& x, double slack) {
    const double v = joint_violation(h, x, slack);
    if (v <= 0.0 || h.g_norm_sq <= 0.0) return;
    const double t = v / h.g_norm_sq;
    x[h.i] -= h.a * t;
    x[h.j] += h.a * t;
}

void project_box(std::vector<Vec2>& x, const ControlBounds& bounds) {
    for (Vec2& u : x) {
        u = {std::clamp(u.x, bounds.lower.x, bounds.upper.x),
             std::clamp(u.y, bounds.lower.y, bounds.upper.y)};
    }
}

/// Dykstra's algorithm over the half-spaces plus the joint box. Returns
/// true when the iterate is feasible to tol and the cycle has settled.
bool dykstra(std::vector<Vec2>& x, const std::vector<JointHalfSpace>& rows,
             const ControlBounds& bounds, double slack, int max_cycles, double tol) {
    const std::size_t n = x.size();
    // One correction for each half-space and one for the box.
    std::vector<std::vector<Vec2>> corr(rows.size() + 1, std::vector<Vec2>(n));
    std::vector<Vec2> before(n);
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        double cycle_delta = 0.0;
        for (std::size_t m = 0; m <= rows.size(); ++m) {
            for (std::size_t k = 0; k < n; ++k) {
                x[k] += corr[m][k];
                before[k] = x[k];
            }
            if (m < rows.size()) {
                project_half_space(rows[m], x, slack);
            } else {
                project_box(x, bounds);
            }
            for (std::size_t k = 0; k < n; ++k) {
                corr[m][k] = before[k] - x[k];
                cycle_delta = std::max(cycle_delta, (before[k] - x[k]).norm());
            }
        }
        if (max_residual(rows, x, bounds, slack) <= tol && cycle_delta <= tol) {
            return true;
        }
    }
    return max_residual(rows, x, bounds, slack) <= tol;
}

/// Plain alternating projections: converges into the intersection iff it
/// is nonempty, which is all the slack search needs to know.
bool pocs_feasible(std::vector<Vec2> x, const std::vector<JointHalfSpace>& rows,
                   const ControlBounds& bounds, double slack, int max_cycles, double tol) {
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        for (const JointHalfSpace& h : rows) project_half_space(h, x, slack);
        project_box(x, bounds);
        if (max_residual(rows, x, bounds, slack) <= tol) return true;
    }
    return false;
}

}  // namespace

std::vector<ControlDecision> centralized_step(const Scene& scene,
                                              std::span<const Vec2> nominals,
                                              const ControlBounds& bounds,
                                              cvar::Convention convention) {
    const int n = static_cast<int>(scene.agents.size());
    if (static_cast<int>(nominals.size()) != n) {
        throw InvalidArgument("centralized_step: nominals must align with scene agents");
    }
    std::vector<JointHalfSpace> rows;
    rows.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Vec2 a = (scene.agents[i].position - scene.agents[j].position) * -2.0;
            const double b =
                pair_constraint_offset(scene.agents[i], scene.agents[j], scene.alpha, convention);
            rows.push_back({i, j, a, b, 2.0 * a.norm_sq()});
        }
    }

    constexpr double kTol = 1e-8;
    constexpr int kMaxCycles = 10000;

    std::vector<Vec2> x(nominals.begin(), nominals.end());
    double slack_used = 0.0;
    qp::Status status = qp::Status::Optimal;
    if (!dykstra(x, rows, bounds, 0.0, kMaxCycles, kTol)) {
        // Empty joint set: search the smallest shared slack that makes the
        // relaxed half-spaces meet the boxes, then project inside it.
        const auto feasible = [&](double s) {
            return pocs_feasible(std::vector<Vec2>(nominals.begin(), nominals.end()), rows,
                                 bounds, s, 3000, 1e-9);
        };
        double hi = 1e-6;
        while (!feasible(hi) && hi < 1e12) hi *= 2.0;
        if (hi >= 1e12) {
            std::vector<ControlDecision> decisions(n);
            for (int i = 0; i < n; ++i) {
                ControlDecision& d = decisions[i];
                d.agent_id = scene.agents[i].id;
                d.u_nominal = nominals[i];
                d.u_applied = {std::clamp(nominals[i].x, bounds.lower.x, bounds.upper.x),
                               std::clamp(nominals[i].y, bounds.lower.y, bounds.upper.y)};
                d.deviation = (d.u_applied - d.u_nominal).norm();
                d.qp_status = qp::Status::Infeasible;
            }
            return decisions;
        }
        double lo = 0.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (feasible(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        slack_used = hi;
        status = qp::Status::RelaxedFeasible;
        x.assign(nominals.begin(), nominals.end());
        dykstra(x, rows, bounds, hi * (1.0 + 1e-9) + 1e-12, kMaxCycles, kTol);
    }

    std::vector<ControlDecision> decisions(n);
    for (int i = 0; i < n; ++i) {
        ControlDecision& d = decisions[i];
        d.agent_id = scene.agents[i].id;
        d.u_applied = x[i];
        d.u_nominal = nominals[i];
        d.deviation = (x[i] - nominals[i]).norm();
        d.qp_status = status;
        d.slack_used = slack_used;
    }
    return decisions;
}

Vec2 move_to_goal_nominal(const AgentState& state, const Vec2& target, double k) {
    if (!(k > 0.0)) {
        throw InvalidArgument("move_to_goal_nominal needs k > 0");
    }
    return (state.position - target) * -k;
}

Vec2 rotate_clockwise(const Vec2& v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {v.x * c + v.y * s, -v.x * s + v.y * c};
}

Vec2 right_hand_deadlock_adjust(const AgentState&, const Vec2& nominal,
                                bool deadlock_detected, double rotation) {
    if (!deadlock_detected) return nominal;
    return rotate_clockwise(nominal, rotation);
}

}  // namespace cbfswarm::control

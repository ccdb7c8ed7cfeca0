#pragma once

#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "cbfswarm/core.hpp"
#include "cbfswarm/qp.hpp"
#include "cbfswarm/risk.hpp"
#include "cbfswarm/uncertainty.hpp"

namespace cbfswarm::control {

struct ControllerKind {
    enum class Type { RiskAwareDecentralized, FixedShareDecentralized, Centralized };
    Type type = Type::RiskAwareDecentralized;
    double share = 0.5;  // FixedShareDecentralized only

    static ControllerKind risk_aware() { return {Type::RiskAwareDecentralized, 0.5}; }
    static ControllerKind fixed_share(double share);  // share in (0,1)
    static ControllerKind centralized() { return {Type::Centralized, 0.5}; }
};

const char* to_string(ControllerKind::Type t);

/// Shared control box for every agent.
struct ControlBounds {
    Vec2 lower{-1.0, -1.0};
    Vec2 upper{1.0, 1.0};
};

struct ControlDecision {
    int agent_id = 0;
    Vec2 u_applied;
    Vec2 u_nominal;
    double deviation = 0.0;  // |u_applied - u_nominal|
    qp::Status qp_status = qp::Status::Optimal;
    double slack_used = 0.0;
    std::vector<std::pair<int, double>> weights_used;  // (other agent id, own share)
};

/// Unweighted admissible budget b_raw for a pair; the same number is
/// produced from either end. PaperLiteral adds the pairwise noise CVaR as
/// written in the loss expansion; Conservative subtracts the CVaR of the
/// opposite tail, which tightens the budget (for zero-mean noise the two
/// differ only in sign of the noise term).
double pair_constraint_offset(const AgentState& i, const AgentState& j, double alpha,
                              cvar::Convention convention);

/// Half-space on agent i's control for the pair (i, j):
/// a = -2 (x_i - x_j), b = w_i * b_raw. Requires distinct ids and
/// w_i in [0, 1].
LinearConstraint build_pair_constraint(const AgentState& i, const AgentState& j, double w_i,
                                       double alpha, cvar::Convention convention);

/// Row-major N x N share matrix; entry (i, j) is agent i's share for the
/// pair (i, j). Risk-aware rows come from responsibility_weights over the
/// report's per-agent risks; fixed-share fills every off-diagonal with the
/// configured share. Rejects the Centralized kind.
std::vector<double> controller_weights(const risk::Report& report, const ControllerKind& kind);

/// One decentralized control round with explicit shares: each agent stacks
/// its weighted pair constraints, solves its own box QP around its
/// nominal, and never sees the others' solutions. Per-agent solves run in
/// parallel; the result is ordered like scene.agents and is bitwise
/// reproducible.
std::vector<ControlDecision> decentralized_step(const Scene& scene,
                                                std::span<const Vec2> nominals,
                                                const ControlBounds& bounds,
                                                const std::vector<double>& weights,
                                                cvar::Convention convention);

/// Convenience round: evaluates scene risk once, derives shares from the
/// controller kind, then runs the explicit-shares round above.
std::vector<ControlDecision> decentralized_step(const Scene& scene,
                                                std::span<const Vec2> nominals,
                                                const ControlBounds& bounds,
                                                const ControllerKind& kind,
                                                cvar::Convention convention);

/// Joint baseline: minimizes the stacked deviation over all agents subject
/// to every coupled pair constraint a . (u_i - u_j) <= b_raw and all
/// boxes. Solved by Dykstra's cyclic projection to 1e-8 residual (cap
/// 10,000 cycles); an empty joint set triggers the minimal-shared-slack
/// relaxation and RelaxedFeasible statuses.
std::vector<ControlDecision> centralized_step(const Scene& scene,
                                              std::span<const Vec2> nominals,
                                              const ControlBounds& bounds,
                                              cvar::Convention convention);

/// Proportional go-to-goal law -k (position - target); the caller clamps.
Vec2 move_to_goal_nominal(const AgentState& state, const Vec2& target, double k);

Vec2 rotate_clockwise(const Vec2& v, double angle);

/// Right-hand deadlock heuristic: while a deadlock is flagged, the nominal
/// is rotated clockwise (to the agent's right) by the given angle.
Vec2 right_hand_deadlock_adjust(const AgentState& state, const Vec2& nominal,
                                bool deadlock_detected,
                                double rotation = std::numbers::pi / 4.0);

}  // namespace cbfswarm::control

#include "cbfswarm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cbfswarm/csv.hpp"
#include "cbfswarm/log.hpp"
#include "cbfswarm/rng.hpp"

namespace cbfswarm::sim {

namespace {

constexpr std::uint64_t kNoiseLane = 1;

Vec2 clamp_vec(const Vec2& v, const Vec2& lo, const Vec2& hi) {
    return {std::clamp(v.x, lo.x, hi.x), std::clamp(v.y, lo.y, hi.y)};
}

}  // namespace

AgentState step_dynamics(const AgentState& state, const Vec2& u, const Vec2& noise_sample,
                         double dt, Dynamics dynamics, NoiseChannel channel) {
    if (!(dt > 0.0)) {
        throw InvalidArgument("step_dynamics needs dt > 0");
    }
    Vec2 position = state.position;
    Vec2 velocity = state.velocity;
    if (dynamics == Dynamics::SingleIntegrator) {
        velocity = u + noise_sample;
        position += velocity * dt;
    } else if (channel == NoiseChannel::PositionRate) {
        position += (velocity + noise_sample) * dt;
        velocity += u * dt;
    } else {
        position += velocity * dt;
        velocity += (u + noise_sample) * dt;
    }
    return AgentState(state.id, position, velocity, state.safety_radius, state.gamma,
                      state.noise);
}

TrajectoryLog run(const Scene& scene, const SimConfig& config,
                  std::span<const Vec2> targets) {
    const int n = static_cast<int>(scene.agents.size());
    if (static_cast<int>(targets.size()) != n) {
        throw InvalidArgument("run: targets must align with scene agents");
    }
    if (!(config.dt > 0.0)) {
        throw InvalidArgument("run: dt must be > 0");
    }
    if (config.horizon_steps < 1) {
        throw InvalidArgument("run: horizon_steps must be >= 1");
    }
    if (!(config.weight_smoothing >= 0.0 && config.weight_smoothing < 1.0)) {
        throw InvalidArgument("run: weight_smoothing must lie in [0, 1)");
    }
    if (config.nominal == NominalKind::WaypointPath) {
        if (static_cast<int>(config.paths.size()) != n ||
            static_cast<int>(config.desired_speeds.size()) != n) {
            throw InvalidArgument("run: waypoint policy needs per-agent paths and speeds");
        }
        for (const auto& path : config.paths) {
            if (path.empty()) throw InvalidArgument("run: waypoint paths must be non-empty");
        }
    }

    Scene cur = scene;
    TrajectoryLog log;
    log.dt = config.dt;
    log.loss_offset_c = scene.loss_offset_c;
    Metrics& metrics = log.metrics;

    const double u_max_scalar =
        std::max({std::abs(config.bounds.lower.x), std::abs(config.bounds.lower.y),
                  std::abs(config.bounds.upper.x), std::abs(config.bounds.upper.y)});
    const double v_eps = config.deadlock.v_eps_factor * u_max_scalar;

    std::vector<int> dead_counter(n, 0);
    std::vector<bool> dead_active(n, false);
    std::vector<std::size_t> waypoint(n, 0);
    std::vector<double> weights;
    std::vector<double> prev_weights;

    const auto scan_distances = [&](const std::vector<AgentState>& states) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double dist = (states[i].position - states[j].position).norm();
                metrics.min_pairwise_distance = std::min(metrics.min_pairwise_distance, dist);
                if (dist < pair_safety_radius(states[i], states[j]) - 1e-9) {
                    metrics.collision_occurred = true;
                }
            }
        }
    };
    scan_distances(cur.agents);

    bool warned_nonpositive = false;
    for (int step = 0; step < config.horizon_steps; ++step) {
        std::vector<Vec2> nominals(n);
        for (int i = 0; i < n; ++i) {
            const AgentState& agent = cur.agents[i];
            Vec2 u;
            if (config.nominal == NominalKind::MoveToGoal) {
                u = control::move_to_goal_nominal(agent, targets[i], config.goal_gain);
            } else {
                const auto& path = config.paths[i];
                std::size_t& wp = waypoint[i];
                while (wp + 1 < path.size()) {
                    const Vec2 leg = path[wp + 1] - path[wp];
                    const bool close =
                        (agent.position - path[wp]).norm() < config.waypoint_switch_radius;
                    const bool passed = (agent.position - path[wp]).dot(leg) > 0.0;
                    if (close || passed) {
                        ++wp;
                    } else {
                        break;
                    }
                }
                const Vec2 goal = path[wp];
                const Vec2 to_goal = goal - agent.position;
                const double dist = to_goal.norm();
                const bool last = wp + 1 == path.size();
                const double speed =
                    last ? std::min(config.desired_speeds[i], config.goal_gain * dist)
                         : config.desired_speeds[i];
                u = dist > 1e-12 ? to_goal * (speed / dist) : Vec2{0.0, 0.0};
            }
            if (config.deadlock.enabled) {
                const double speed = agent.velocity.norm();
                const double goal_dist = (agent.position - targets[i]).norm();
                const double d_eps = config.deadlock.d_eps_factor * agent.safety_radius;
                if (dead_active[i]) {
                    if (speed >= v_eps) {
                        dead_active[i] = false;
                        dead_counter[i] = 0;
                    }
                } else if (speed < v_eps && goal_dist > d_eps) {
                    if (++dead_counter[i] >= config.deadlock.t_dead_steps) {
                        dead_active[i] = true;
                    }
                } else {
                    dead_counter[i] = 0;
                }
                u = control::right_hand_deadlock_adjust(agent, u, dead_active[i],
                                                        config.deadlock.rotation_rad);
            }
            nominals[i] = clamp_vec(u, config.bounds.lower, config.bounds.upper);
        }

        risk::Report report = risk::evaluate_scene_risk(cur, step, config.neighbor_cutoff);
        if (!warned_nonpositive && report.min_pair_loss() <= 0.0) {
            log_msg(LogLevel::Warn,
                    "pair loss <= 0 at step %d; loss_offset_c=%g is too small for this "
                    "scene, responsibility ratios may degenerate",
                    step, cur.loss_offset_c);
            warned_nonpositive = true;
        }

        std::vector<control::ControlDecision> decisions;
        if (config.controller.type == control::ControllerKind::Type::Centralized) {
            decisions = control::centralized_step(cur, nominals, config.bounds,
                                                  config.convention);
            weights.assign(static_cast<std::size_t>(n) * n, 0.5);
        } else {
            weights = control::controller_weights(report, config.controller);
            if (config.weight_smoothing > 0.0 && !prev_weights.empty()) {
                for (std::size_t k = 0; k < weights.size(); ++k) {
                    weights[k] = config.weight_smoothing * prev_weights[k] +
                                 (1.0 - config.weight_smoothing) * weights[k];
                }
            }
            prev_weights = weights;
            decisions = control::decentralized_step(cur, nominals, config.bounds, weights,
                                                    config.convention);
        }

        std::vector<PairRecord> pairs;
        pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                PairRecord rec;
                rec.i = cur.agents[i].id;
                rec.j = cur.agents[j].id;
                rec.distance = (cur.agents[i].position - cur.agents[j].position).norm();
                rec.h = risk::safety_value(cur.agents[i], cur.agents[j]);
                rec.loss = report.loss(i, j);
                rec.w_i = weights[static_cast<std::size_t>(i) * n + j];
                rec.w_j = weights[static_cast<std::size_t>(j) * n + i];
                rec.b_raw = control::pair_constraint_offset(cur.agents[i], cur.agents[j],
                                                            cur.alpha, config.convention);
                pairs.push_back(rec);
            }
        }

        double worst_deviation = 0.0;
        bool any_relaxed = false;
        for (const auto& d : decisions) {
            metrics.total_deviation_integral += d.deviation * config.dt;
            metrics.max_individual_deviation =
                std::max(metrics.max_individual_deviation, d.deviation);
            worst_deviation = std::max(worst_deviation, d.deviation);
            any_relaxed = any_relaxed || d.qp_status != qp::Status::Optimal;
        }
        if (worst_deviation > kDeviationActiveThreshold) {
            metrics.deviation_active_duration += config.dt;
        }
        if (any_relaxed) ++metrics.relaxed_step_count;

        StepRecord record;
        record.step = step;
        record.time = step * config.dt;
        record.states = cur.agents;
        record.decisions = decisions;
        record.risk = std::move(report);
        record.pairs = std::move(pairs);
        log.steps.push_back(std::move(record));

        // Noise streams are keyed by (agent id, step), so the draw order is
        // fixed no matter how the loop above was parallelized.
        std::vector<AgentState> next(cur.agents);
        for (int i = 0; i < n; ++i) {
            const AgentState& agent = cur.agents[i];
            SplitRng rng(config.seed, kNoiseLane, static_cast<std::uint64_t>(agent.id),
                         static_cast<std::uint64_t>(step));
            const Vec2 eps = sample_noise(agent.noise, rng);
            Vec2 u_dyn = decisions[i].u_applied;
            if (config.dynamics == Dynamics::DoubleIntegrator) {
                u_dyn = clamp_vec((u_dyn - agent.velocity) * config.velocity_tracking_gain,
                                  config.accel_lower, config.accel_upper);
            }
            next[i] = step_dynamics(agent, u_dyn, eps, config.dt, config.dynamics,
                                    config.noise_channel);
        }
        cur.agents = std::move(next);
        metrics.steps_executed = step + 1;
        scan_distances(cur.agents);

        bool all_arrived = true;
        for (int i = 0; i < n; ++i) {
            if ((cur.agents[i].position - targets[i]).norm() > config.goal_tolerance) {
                all_arrived = false;
                break;
            }
        }
        if (all_arrived) {
            metrics.completion_time = (step + 1) * config.dt;
            break;
        }
    }

    log.final_states = cur.agents;
    return log;
}

void write_trajectory_csv(const TrajectoryLog& log, std::ostream& out) {
    out << "step,time,agent_id,px,py,vx,vy,ux_applied,uy_applied,deviation,qp_status\n";
    for (const StepRecord& rec : log.steps) {
        for (std::size_t i = 0; i < rec.states.size(); ++i) {
            const AgentState& s = rec.states[i];
            const control::ControlDecision& d = rec.decisions[i];
            out << rec.step << ',' << fmt_double(rec.time) << ',' << s.id << ','
                << fmt_double(s.position.x) << ',' << fmt_double(s.position.y) << ','
                << fmt_double(s.velocity.x) << ',' << fmt_double(s.velocity.y) << ','
                << fmt_double(d.u_applied.x) << ',' << fmt_double(d.u_applied.y) << ','
                << fmt_double(d.deviation) << ',' << qp::to_string(d.qp_status) << '\n';
        }
    }
}

void write_pairs_csv(const TrajectoryLog& log, std::ostream& out) {
    out << "step,i,j,distance,h_ij,L_ij,w_i\n";
    for (const StepRecord& rec : log.steps) {
        for (const PairRecord& p : rec.pairs) {
            out << rec.step << ',' << p.i << ',' << p.j << ',' << fmt_double(p.distance)
                << ',' << fmt_double(p.h) << ',' << fmt_double(p.loss) << ','
                << fmt_double(p.w_i) << '\n';
            out << rec.step << ',' << p.j << ',' << p.i << ',' << fmt_double(p.distance)
                << ',' << fmt_double(p.h) << ',' << fmt_double(p.loss) << ','
                << fmt_double(p.w_j) << '\n';
        }
    }
}

}  // namespace cbfswarm::sim

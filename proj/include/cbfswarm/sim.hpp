#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cbfswarm/control.hpp"
#include "cbfswarm/core.hpp"
#include "cbfswarm/risk.hpp"
#include "cbfswarm/uncertainty.hpp"

namespace cbfswarm::sim {

enum class Dynamics { SingleIntegrator, DoubleIntegrator };

/// Where the disturbance enters a double integrator. PositionRate follows
/// the reference state-space form (epsilon drives the position channel);
/// Velocity is the alternative reading with epsilon on the velocity rate.
/// Single integrators ignore this flag.
enum class NoiseChannel { PositionRate, Velocity };

enum class NominalKind { MoveToGoal, WaypointPath };

struct DeadlockConfig {
    bool enabled = false;
    double v_eps_factor = 0.05;  // speed threshold = factor * u_max
    double d_eps_factor = 2.0;   // distance threshold = factor * safety_radius
    int t_dead_steps = 25;
    double rotation_rad = std::numbers::pi / 4.0;
};

struct SimConfig {
    double dt = 0.02;
    int horizon_steps = 10000;
    Dynamics dynamics = Dynamics::SingleIntegrator;
    NoiseChannel noise_channel = NoiseChannel::PositionRate;
    control::ControlBounds bounds;
    Vec2 accel_lower{-6.0, -6.0};  // double integrator only
    Vec2 accel_upper{6.0, 6.0};
    double velocity_tracking_gain = 5.0;  // k_v of the acceleration bridge
    cvar::Convention convention = cvar::Convention::Conservative;
    control::ControllerKind controller = control::ControllerKind::risk_aware();
    std::uint64_t seed = 0;
    double goal_tolerance = 0.5;
    NominalKind nominal = NominalKind::MoveToGoal;
    double goal_gain = 1.0;  // k of the move-to-goal law
    // WaypointPath policy: per-agent waypoint chains (last entry must be
    // the agent's target) traversed at the agent's desired cruise speed.
    std::vector<std::vector<Vec2>> paths;
    std::vector<double> desired_speeds;
    double waypoint_switch_radius = 3.0;
    DeadlockConfig deadlock;
    double neighbor_cutoff = std::numeric_limits<double>::infinity();
    double weight_smoothing = 0.0;  // exponential smoothing beta, 0 = off
};

struct PairRecord {
    int i = 0, j = 0;  // agent ids, i-slot < j-slot in scene order
    double distance = 0.0;
    double h = 0.0;
    double loss = 0.0;
    double w_i = 0.5, w_j = 0.5;
    double b_raw = 0.0;
};

struct StepRecord {
    int step = 0;
    double time = 0.0;
    std::vector<AgentState> states;  // before this step's motion
    std::vector<control::ControlDecision> decisions;
    risk::Report risk;
    std::vector<PairRecord> pairs;
};

/// deviation_active_duration counts steps whose worst per-agent deviation
/// exceeds 1e-6 (threshold documented with the metric).
struct Metrics {
    double min_pairwise_distance = std::numeric_limits<double>::infinity();
    bool collision_occurred = false;
    std::optional<double> completion_time;
    double total_deviation_integral = 0.0;
    double max_individual_deviation = 0.0;
    double deviation_active_duration = 0.0;
    int relaxed_step_count = 0;
    int steps_executed = 0;
};

struct TrajectoryLog {
    std::vector<StepRecord> steps;
    std::vector<AgentState> final_states;
    Metrics metrics;
    double dt = 0.02;
    double loss_offset_c = 0.0;  // echoed for reproducibility
};

constexpr double kDeviationActiveThreshold = 1e-6;

/// One forward-Euler step, no substeps. SingleIntegrator: position +=
/// (u + noise) dt, velocity := u + noise. DoubleIntegrator: u is an
/// acceleration; with PositionRate noise, position += (v + noise) dt and
/// velocity += u dt; with Velocity noise, position += v dt and velocity +=
/// (u + noise) dt.
AgentState step_dynamics(const AgentState& state, const Vec2& u, const Vec2& noise_sample,
                         double dt, Dynamics dynamics,
                         NoiseChannel channel = NoiseChannel::PositionRate);

/// Seeded closed-loop rollout: nominal computation, risk evaluation,
/// responsibility weights, constraint stacking, per-agent (or joint) QP,
/// then dynamics under freshly drawn noise, one stream per (agent, step).
/// Stops at the horizon or once every agent sits within goal_tolerance of
/// its target. Pure function of (scene, config, targets).
TrajectoryLog run(const Scene& scene, const SimConfig& config, std::span<const Vec2> targets);

struct Scenario {
    std::string name;
    Scene scene;
    SimConfig config;
    std::vector<Vec2> targets;
};

/// step,time,agent_id,px,py,vx,vy,ux_applied,uy_applied,deviation,qp_status
void write_trajectory_csv(const TrajectoryLog& log, std::ostream& out);

/// step,i,j,distance,h_ij,L_ij,w_i (one row per ordered pair).
void write_pairs_csv(const TrajectoryLog& log, std::ostream& out);

}  // namespace cbfswarm::sim

#pragma once

#include <cstdint>

#include "cbfswarm/sim.hpp"

namespace cbfswarm::sim {

/// Ramp-merge geometry and randomization ranges. Distances in meters,
/// speeds in m/s. Two vehicles start on the ramp (ids 1 and 3) and one on
/// the main lane (id 2); the ramp meets the lane (the x axis) at merge_x
/// under ramp_angle_deg, approaching from below. Each vehicle cruises to
/// the merge point, then to a per-vehicle target on the lane; targets are
/// staggered by target_spacing in order of initial distance to the merge,
/// so the closer vehicle parks farther down the lane.
struct RampParams {
    double lane_length = 120.0;
    double merge_x = 80.0;
    double ramp_angle_deg = 15.0;
    double safety_radius = 5.0;
    double gamma = 0.7;
    double alpha = 0.999;
    double sigma = 0.05;  // per-axis disturbance std dev
    double dt = 0.02;
    int horizon_steps = 3000;
    double target_spacing = 8.0;
    double target_runout = 10.0;  // first target sits this far past lane end
    double goal_tolerance = 1.0;
    double goal_gain = 1.0;
    Vec2 command_lower{-15.0, -15.0};
    Vec2 command_upper{15.0, 15.0};
    Vec2 accel_lower{-6.0, -6.0};
    Vec2 accel_upper{6.0, 6.0};
    double velocity_tracking_gain = 5.0;
    double waypoint_switch_radius = 3.0;
    // Uniform randomization ranges for the trial suite: the main-lane
    // start abscissa, the two ramp start arc-distances to the merge, the
    // initial speed along the travel direction, and the cruise speed.
    double main_x_min = 30.0, main_x_max = 40.0;
    double ramp_near_min = 35.0, ramp_near_max = 45.0;
    double ramp_far_min = 55.0, ramp_far_max = 65.0;
    double init_speed_min = 7.0, init_speed_max = 10.0;
    double cruise_min = 8.0, cruise_max = 12.0;
};

struct SwapParams {
    double circle_radius = 20.0;
    double safety_radius = 2.0;
    double gamma = 1.0;
    double alpha = 0.95;
    // Kept well under the deadlock speed threshold (0.05 * u_max = 0.1
    // m/s): a noisier single integrator never reads as "stopped" for 25
    // consecutive steps and the right-hand heuristic would starve.
    double sigma = 0.01;
    double dt = 0.02;
    int horizon_steps = 10000;
    double goal_tolerance = 0.5;
    double goal_gain = 1.0;  // the move-to-goal k
    Vec2 command_lower{-2.0, -2.0};
    Vec2 command_upper{2.0, 2.0};
};

/// Deterministic midpoint-of-ranges instance (double integrator,
/// Conservative convention, risk-aware controller, seed 1).
Scenario scenario_ramp_merge(const RampParams& params = {});

/// Randomized instance for the trial suite: initial positions and speeds
/// drawn uniformly from the documented ranges, all keyed by the seed.
Scenario scenario_ramp_merge_randomized(const RampParams& params, std::uint64_t seed);

/// n agents evenly spaced on a circle, each targeting its antipode;
/// single integrator, move-to-goal nominal, deadlock heuristic on.
Scenario scenario_swap(int n = 6, const SwapParams& params = {});

}  // namespace cbfswarm::sim

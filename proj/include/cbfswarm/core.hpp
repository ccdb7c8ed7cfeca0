#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbfswarm {

// Thrown when a caller hands us values outside a type's documented domain.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown on file read/write failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Plane vector. Construction rejects NaN and infinity, so arithmetic on
/// Vec2 stays finite unless an operation itself overflows (which throws).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_);

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { return *this = *this + o; }
    Vec2& operator-=(const Vec2& o) { return *this = *this - o; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm_sq() const { return x * x + y * y; }
    double norm() const;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// 2x2 matrix, row major.
struct Mat2 {
    double m00 = 0.0, m01 = 0.0;
    double m10 = 0.0, m11 = 0.0;

    Mat2() = default;
    Mat2(double a, double b, double c, double d);

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diagonal(double a, double d) { return {a, 0.0, 0.0, d}; }

    Mat2 operator+(const Mat2& o) const {
        return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
    }
    Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }
    Vec2 operator*(const Vec2& v) const {
        return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
    }
};

/// d^T M d.
double quad_form(const Vec2& d, const Mat2& m);

/// Checks symmetry (|m01 - m10| <= 1e-12) and positive semidefiniteness
/// (smallest eigenvalue of the symmetrized matrix >= -1e-12). Throws
/// InvalidArgument otherwise.
void validate_covariance(const Mat2& sigma);

/// Lower-triangular L with L L^T = sigma. Small negative pivots from
/// roundoff are clamped to zero.
Mat2 cholesky_lower(const Mat2& sigma);

/// Additive Gaussian disturbance on an agent's motion.
struct NoiseModel {
    Vec2 mean;
    Mat2 covariance = Mat2::identity();

    NoiseModel() = default;
    NoiseModel(const Vec2& mean_, const Mat2& covariance_);
};

/// Snapshot of one agent. gamma is the barrier decay rate in the
/// admissibility condition hdot >= -gamma h; larger gamma tolerates
/// faster approach toward the safety boundary.
struct AgentState {
    int id = 0;
    Vec2 position;
    Vec2 velocity;
    double safety_radius = 1.0;
    double gamma = 1.0;
    NoiseModel noise;

    AgentState() = default;
    AgentState(int id_, const Vec2& position_, const Vec2& velocity_,
               double safety_radius_, double gamma_, const NoiseModel& noise_);
};

/// Effective clearance requirement for a pair: max of the two radii.
double pair_safety_radius(const AgentState& a, const AgentState& b);

/// A set of agents plus the shared risk parameters. alpha is the CVaR
/// confidence level; loss_offset_c shifts every pairwise loss so that the
/// responsibility ratio stays well defined (losses positive in practice).
struct Scene {
    std::vector<AgentState> agents;
    double alpha = 0.95;
    double loss_offset_c = 1.0;

    Scene() = default;
    Scene(std::vector<AgentState> agents_, double alpha_, double loss_offset_c_);

    /// 4 * gamma_max * D^2 where D is the diagonal of the bounding box of
    /// the agents' positions; floored at 1.0 so degenerate scenes (all
    /// agents coincident) still get a positive offset.
    static double default_loss_offset(const std::vector<AgentState>& agents);

    int index_of(int agent_id) const;  // -1 if absent
};

/// Half-plane a . u <= b on one agent's control. i and j record which
/// ordered pair produced it; j < 0 marks constraints without a partner.
struct LinearConstraint {
    Vec2 a;
    double b = 0.0;
    int i = -1;
    int j = -1;

    LinearConstraint() = default;
    LinearConstraint(const Vec2& a_, double b_, int i_ = -1, int j_ = -1);
};

}  // namespace cbfswarm

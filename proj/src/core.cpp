#include "cbfswarm/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace cbfswarm {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " must be finite");
    }
}

}  // namespace

Vec2::Vec2(double x_, double y_) : x(x_), y(y_) {
    require_finite(x_, "Vec2.x");
    require_finite(y_, "Vec2.y");
}

double Vec2::norm() const { return std::hypot(x, y); }

Mat2::Mat2(double a, double b, double c, double d) : m00(a), m01(b), m10(c), m11(d) {
    require_finite(a, "Mat2.m00");
    require_finite(b, "Mat2.m01");
    require_finite(c, "Mat2.m10");
    require_finite(d, "Mat2.m11");
}

double quad_form(const Vec2& d, const Mat2& m) {
    return d.x * (m.m00 * d.x + m.m01 * d.y) + d.y * (m.m10 * d.x + m.m11 * d.y);
}

void validate_covariance(const Mat2& sigma) {
    if (std::abs(sigma.m01 - sigma.m10) > 1e-12) {
        throw InvalidArgument("covariance must be symmetric");
    }
    const double off = 0.5 * (sigma.m01 + sigma.m10);
    const double tr = sigma.m00 + sigma.m11;
    const double det = sigma.m00 * sigma.m11 - off * off;
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    const double eig_min = 0.5 * (tr - disc);
    if (eig_min < -1e-12) {
        throw InvalidArgument("covariance must be positive semidefinite");
    }
}

Mat2 cholesky_lower(const Mat2& sigma) {
    validate_covariance(sigma);
    const double l00 = std::sqrt(std::max(0.0, sigma.m00));
    const double l10 = l00 > 0.0 ? 0.5 * (sigma.m01 + sigma.m10) / l00 : 0.0;
    const double l11 = std::sqrt(std::max(0.0, sigma.m11 - l10 * l10));
    return {l00, 0.0, l10, l11};
}

NoiseModel::NoiseModel(const Vec2& mean_, const Mat2& covariance_)
    : mean(mean_), covariance(covariance_) {
    validate_covariance(covariance_);
}

AgentState::AgentState(int id_, const Vec2& position_, const Vec2& velocity_,
                       double safety_radius_, double gamma_, const NoiseModel& noise_)
    : id(id_),
      position(position_),
      velocity(velocity_),
      safety_radius(safety_radius_),
      gamma(gamma_),
      noise(noise_) {
    require_finite(safety_radius_, "AgentState.safety_radius");
    require_finite(gamma_, "AgentState.gamma");
    if (safety_radius_ < 0.0) {
        throw InvalidArgument("AgentState.safety_radius must be >= 0");
    }
    if (gamma_ <= 0.0) {
        throw InvalidArgument("AgentState.gamma must be > 0");
    }
}

double pair_safety_radius(const AgentState& a, const AgentState& b) {
    return std::max(a.safety_radius, b.safety_radius);
}

Scene::Scene(std::vector<AgentState> agents_, double alpha_, double loss_offset_c_)
    : agents(std::move(agents_)), alpha(alpha_), loss_offset_c(loss_offset_c_) {
    if (agents.size() < 2) {
        throw InvalidArgument("Scene needs at least two agents");
    }
    std::unordered_set<int> ids;
    for (const AgentState& a : agents) {
        if (!ids.insert(a.id).second) {
            throw InvalidArgument("Scene agent ids must be unique");
        }
    }
    require_finite(alpha_, "Scene.alpha");
    if (!(alpha_ > 0.0 && alpha_ < 1.0)) {
        throw InvalidArgument("Scene.alpha must lie in (0, 1)");
    }
    require_finite(loss_offset_c_, "Scene.loss_offset_c");
    if (loss_offset_c_ <= 0.0) {
        throw InvalidArgument("Scene.loss_offset_c must be > 0");
    }
}

double Scene::default_loss_offset(const std::vector<AgentState>& agents) {
    double gamma_max = 0.0;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const AgentState& a : agents) {
        gamma_max = std::max(gamma_max, a.gamma);
        xmin = std::min(xmin, a.position.x);
        xmax = std::max(xmax, a.position.x);
        ymin = std::min(ymin, a.position.y);
        ymax = std::max(ymax, a.position.y);
    }
    if (agents.empty()) return 1.0;
    const double dx = xmax - xmin, dy = ymax - ymin;
    const double diag_sq = dx * dx + dy * dy;
    return std::max(1.0, 4.0 * gamma_max * diag_sq);
}

int Scene::index_of(int agent_id) const {
    for (std::size_t k = 0; k < agents.size(); ++k) {
        if (agents[k].id == agent_id) return static_cast<int>(k);
    }
    return -1;
}

LinearConstraint::LinearConstraint(const Vec2& a_, double b_, int i_, int j_)
    : a(a_), b(b_), i(i_), j(j_) {
    require_finite(b_, "LinearConstraint.b");
}

}  // namespace cbfswarm

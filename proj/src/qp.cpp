#include "cbfswarm/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace cbfswarm::qp {

namespace {

constexpr double kFeasTol = 1e-9;

struct HalfSpace {
    Vec2 a;
    double b = 0.0;
    int tag = 0;
    bool relaxable = false;
};

double rhs_tol(double b) { return kFeasTol * std::max(1.0, std::abs(b)); }

std::vector<HalfSpace> gather_half_spaces(const Problem& p) {
    std::vector<HalfSpace> hs;
    hs.reserve(p.constraints.size() + 4);
    for (std::size_t k = 0; k < p.constraints.size(); ++k) {
        hs.push_back({p.constraints[k].a, p.constraints[k].b, static_cast<int>(k), true});
    }
    hs.push_back({{1.0, 0.0}, p.upper.x, -1, false});
    hs.push_back({{-1.0, 0.0}, -p.lower.x, -2, false});
    hs.push_back({{0.0, 1.0}, p.upper.y, -3, false});
    hs.push_back({{0.0, -1.0}, -p.lower.y, -4, false});
    return hs;
}

bool feasible_at(const std::vector<HalfSpace>& hs, double x, double y, double slack) {
    for (const HalfSpace& h : hs) {
        const double rhs = h.b + (h.relaxable ? slack : 0.0);
        if (h.a.x * x + h.a.y * y > rhs + rhs_tol(h.b)) return false;
    }
    return true;
}

/// Projection of the nominal onto the intersection, by enumerating the
/// nominal itself, its projection on each constraint line, and every pair
/// intersection. Empty result means the (slack-shifted) set is empty.
std::optional<Vec2> project_enumerate(const std::vector<HalfSpace>& hs, const Vec2& nominal,
                                      double slack) {
    struct Cand {
        double x, y;
    };
    std::vector<Cand> cands;
    cands.reserve(2 + hs.size() + hs.size() * hs.size() / 2);
    cands.push_back({nominal.x, nominal.y});

    const auto shifted = [&](const HalfSpace& h) {
        return h.b + (h.relaxable ? slack : 0.0);
    };
    const auto push = [&](double x, double y) {
        if (std::isfinite(x) && std::isfinite(y)) cands.push_back({x, y});
    };

    for (const HalfSpace& h : hs) {
        const double nsq = h.a.norm_sq();
        if (nsq < 1e-30) continue;
        const double t = (shifted(h) - h.a.dot(nominal)) / nsq;
        push(nominal.x + t * h.a.x, nominal.y + t * h.a.y);
    }
    for (std::size_t i = 0; i < hs.size(); ++i) {
        for (std::size_t j = i + 1; j < hs.size(); ++j) {
            const Vec2& a1 = hs[i].a;
            const Vec2& a2 = hs[j].a;
            const double det = a1.x * a2.y - a1.y * a2.x;
            if (std::abs(det) <= 1e-12 * std::max(1.0, a1.norm() * a2.norm())) continue;
            const double b1 = shifted(hs[i]);
            const double b2 = shifted(hs[j]);
            push((b1 * a2.y - b2 * a1.y) / det, (a1.x * b2 - a2.x * b1) / det);
        }
    }

    bool found = false;
    double best_obj = std::numeric_limits<double>::infinity();
    double bx = 0.0, by = 0.0;
    for (const Cand& c : cands) {
        if (!feasible_at(hs, c.x, c.y, slack)) continue;
        const double dx = c.x - nominal.x;
        const double dy = c.y - nominal.y;
        const double obj = dx * dx + dy * dy;
        const bool better =
            obj < best_obj ||
            (obj == best_obj && (c.x < bx || (c.x == bx && c.y < by)));
        if (!found || better) {
            found = true;
            best_obj = obj;
            bx = c.x;
            by = c.y;
        }
    }
    if (!found) return std::nullopt;
    return Vec2{bx, by};
}

/// Smallest shared slack such that the relaxed half-spaces meet the box:
/// an LP in (x, y, s) solved exactly by enumerating vertices from every
/// triple of active constraints.
std::optional<double> min_shared_slack(const std::vector<HalfSpace>& hs) {
    struct Row {
        double cx, cy, cs, rhs;
    };
    std::vector<Row> rows;
    rows.reserve(hs.size() + 1);
    for (const HalfSpace& h : hs) {
        rows.push_back({h.a.x, h.a.y, h.relaxable ? -1.0 : 0.0, h.b});
    }
    rows.push_back({0.0, 0.0, -1.0, 0.0});  // s >= 0

    const auto row_scale = [](const Row& r) {
        return std::max({1.0, std::abs(r.cx), std::abs(r.cy), std::abs(r.cs)});
    };

    bool found = false;
    double best_s = std::numeric_limits<double>::infinity();
    double bx = 0.0, by = 0.0;
    const std::size_t m = rows.size();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            for (std::size_t k = j + 1; k < m; ++k) {
                const Row& r1 = rows[i];
                const Row& r2 = rows[j];
                const Row& r3 = rows[k];
                const double det = r1.cx * (r2.cy * r3.cs - r2.cs * r3.cy) -
                                   r1.cy * (r2.cx * r3.cs - r2.cs * r3.cx) +
                                   r1.cs * (r2.cx * r3.cy - r2.cy * r3.cx);
                const double scale = row_scale(r1) * row_scale(r2) * row_scale(r3);
                if (std::abs(det) <= 1e-12 * scale) continue;
                const double dx = r1.rhs * (r2.cy * r3.cs - r2.cs * r3.cy) -
                                  r1.cy * (r2.rhs * r3.cs - r2.cs * r3.rhs) +
                                  r1.cs * (r2.rhs * r3.cy - r2.cy * r3.rhs);
                const double dy = r1.cx * (r2.rhs * r3.cs - r2.cs * r3.rhs) -
                                  r1.rhs * (r2.cx * r3.cs - r2.cs * r3.cx) +
                                  r1.cs * (r2.cx * r3.rhs - r2.rhs * r3.cx);
                const double ds = r1.cx * (r2.cy * r3.rhs - r2.rhs * r3.cy) -
                                  r1.cy * (r2.cx * r3.rhs - r2.rhs * r3.cx) +
                                  r1.rhs * (r2.cx * r3.cy - r2.cy * r3.cx);
                const double x = dx / det;
                const double y = dy / det;
                const double s = ds / det;
                if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(s)) continue;
                if (std::max({std::abs(x), std::abs(y), std::abs(s)}) > 1e14) continue;
                if (s < -1e-9) continue;
                bool ok = true;
                for (const Row& r : rows) {
                    if (r.cx * x + r.cy * y + r.cs * s >
                        r.rhs + kFeasTol * std::max(1.0, std::abs(r.rhs))) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                const bool better =
                    s < best_s || (s == best_s && (x < bx || (x == bx && y < by)));
                if (!found || better) {
                    found = true;
                    best_s = s;
                    bx = x;
                    by = y;
                }
            }
        }
    }
    if (!found) return std::nullopt;
    return std::max(0.0, best_s);
}

Vec2 clamp_box(const Problem& p, const Vec2& v) {
    return {std::clamp(v.x, p.lower.x, p.upper.x), std::clamp(v.y, p.lower.y, p.upper.y)};
}

std::vector<int> tight_set(const std::vector<HalfSpace>& hs, const Vec2& u, double slack) {
    std::vector<int> tags;
    for (const HalfSpace& h : hs) {
        const double rhs = h.b + (h.relaxable ? slack : 0.0);
        if (std::abs(h.a.dot(u) - rhs) <= 1e-7 * std::max(1.0, std::abs(h.b))) {
            tags.push_back(h.tag);
        }
    }
    std::sort(tags.begin(), tags.end());
    return tags;
}

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::RelaxedFeasible: return "relaxed";
        case Status::Infeasible: return "infeasible";
    }
    return "?";
}

Problem::Problem(const Vec2& nominal_, const Vec2& lower_, const Vec2& upper_,
                 std::vector<LinearConstraint> constraints_)
    : nominal(nominal_), lower(lower_), upper(upper_), constraints(std::move(constraints_)) {
    if (!(lower.x <= upper.x && lower.y <= upper.y)) {
        throw InvalidArgument("Problem box needs lower <= upper componentwise");
    }
}

double objective_value(const Problem& problem, const Vec2& u) {
    return (u - problem.nominal).norm_sq();
}

double max_violation(const Problem& problem, const Vec2& u) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const HalfSpace& h : gather_half_spaces(problem)) {
        worst = std::max(worst, h.a.dot(u) - h.b);
    }
    return worst;
}

Solution solve(const Problem& problem) {
    const auto hs = gather_half_spaces(problem);
    Solution sol;
    if (auto u = project_enumerate(hs, problem.nominal, 0.0)) {
        sol.u = *u;
        sol.status = Status::Optimal;
        sol.slack_used = 0.0;
        sol.objective = objective_value(problem, *u);
        sol.active_set = tight_set(hs, *u, 0.0);
        return sol;
    }
    if (auto s = min_shared_slack(hs)) {
        // A hair of extra slack absorbs roundoff at the relaxed boundary.
        const double pad_unit = std::max(1.0, *s);
        for (double pad : {0.0, 1e-12, 1e-9, 1e-6}) {
            if (auto u = project_enumerate(hs, problem.nominal, *s + pad * pad_unit)) {
                sol.u = *u;
                sol.status = Status::RelaxedFeasible;
                sol.slack_used = *s;
                sol.objective = objective_value(problem, *u);
                sol.active_set = tight_set(hs, *u, *s + pad * pad_unit);
                return sol;
            }
        }
    }
    sol.u = clamp_box(problem, problem.nominal);
    sol.status = Status::Infeasible;
    sol.slack_used = 0.0;
    sol.objective = objective_value(problem, sol.u);
    return sol;
}

Solution brute_force_solve(const Problem& problem, int resolution) {
    if (resolution < 100) {
        throw InvalidArgument("brute_force_solve needs resolution >= 100");
    }
    const int res = resolution;
    const double hx = (problem.upper.x - problem.lower.x) / (res - 1);
    const double hy = (problem.upper.y - problem.lower.y) / (res - 1);

    const std::size_t m = problem.constraints.size();
    std::vector<double> ax(m), ay(m), bt(m), row_margin(m);
    for (std::size_t k = 0; k < m; ++k) {
        ax[k] = problem.constraints[k].a.x;
        ay[k] = problem.constraints[k].a.y;
        bt[k] = problem.constraints[k].b + rhs_tol(problem.constraints[k].b);
    }

    bool found = false;
    double best = std::numeric_limits<double>::infinity();
    double bx = 0.0, by = 0.0;
    for (int iy = 0; iy < res; ++iy) {
        const double y = (iy == res - 1) ? problem.upper.y : problem.lower.y + hy * iy;
        const double dy = y - problem.nominal.y;
        const double dy2 = dy * dy;
        if (found && dy2 >= best) continue;  // no point in this row can win
        for (std::size_t k = 0; k < m; ++k) row_margin[k] = bt[k] - ay[k] * y;
        for (int ix = 0; ix < res; ++ix) {
            const double x = (ix == res - 1) ? problem.upper.x : problem.lower.x + hx * ix;
            const double dx = x - problem.nominal.x;
            const double obj = dx * dx + dy2;
            if (found && obj >= best) continue;
            bool ok = true;
            for (std::size_t k = 0; k < m; ++k) {
                if (ax[k] * x > row_margin[k]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            found = true;
            best = obj;
            bx = x;
            by = y;
        }
    }

    Solution sol;
    if (found) {
        sol.u = Vec2{bx, by};
        sol.status = Status::Optimal;
        sol.objective = best;
    } else {
        sol.u = clamp_box(problem, problem.nominal);
        sol.status = Status::Infeasible;
        sol.objective = objective_value(problem, sol.u);
    }
    return sol;
}

}  // namespace cbfswarm::qp

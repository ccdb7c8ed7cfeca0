#include "cbfswarm/riskmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include "cbfswarm/csv.hpp"
#include "cbfswarm/risk.hpp"

namespace cbfswarm::riskmap {

double point_risk(std::span<const AgentState> agents, double alpha, double c, const Vec2& p,
                  double probe_radius) {
    if (agents.empty()) {
        throw InvalidArgument("point_risk needs at least one agent");
    }
    double gamma_max = 0.0;
    for (const AgentState& a : agents) gamma_max = std::max(gamma_max, a.gamma);
    for (const AgentState& a : agents) {
        if ((p - a.position).norm() <= 1e-9) {
            return std::numeric_limits<double>::infinity();
        }
    }
    // The probe is a hypothetical static object: zero velocity, zero noise.
    const AgentState probe(-1, p, {0.0, 0.0}, probe_radius, gamma_max,
                           NoiseModel({0.0, 0.0}, Mat2::diagonal(0.0, 0.0)));
    double sum = 0.0;
    for (const AgentState& a : agents) {
        sum += risk::safety_loss(probe, a, alpha, c);
    }
    return sum;
}

double point_risk(const Scene& scene, const Vec2& p, double probe_radius) {
    return point_risk(scene.agents, scene.alpha, scene.loss_offset_c, p, probe_radius);
}

namespace {

RiskGrid grid_impl(std::span<const AgentState> agents, double alpha, double c,
                   const Rect& bounds, int resolution, double probe_radius, bool parallel) {
    if (resolution < 2) {
        throw InvalidArgument("compute_grid needs resolution >= 2");
    }
    const double dx = bounds.max.x - bounds.min.x;
    const double dy = bounds.max.y - bounds.min.y;
    if (!(dx > 0.0 && dy > 0.0)) {
        throw InvalidArgument("compute_grid needs a non-degenerate rectangle");
    }
    RiskGrid grid;
    grid.origin = bounds.min;
    grid.cell_size = std::max(dx, dy) / resolution;
    grid.width = std::max(1, static_cast<int>(std::lround(dx / grid.cell_size)));
    grid.height = std::max(1, static_cast<int>(std::lround(dy / grid.cell_size)));
    grid.values.assign(static_cast<std::size_t>(grid.width) * grid.height, 0.0);

    const long long total = static_cast<long long>(grid.width) * grid.height;
    const auto eval_cell = [&](long long k) {
        const int row = static_cast<int>(k / grid.width);
        const int col = static_cast<int>(k % grid.width);
        grid.values[static_cast<std::size_t>(k)] =
            point_risk(agents, alpha, c, grid.cell_center(row, col), probe_radius);
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long k = 0; k < total; ++k) eval_cell(k);
    } else {
        for (long long k = 0; k < total; ++k) eval_cell(k);
    }

    // Second pass: the coincident-probe sentinel becomes the largest
    // finite value so downstream rasters never carry Inf.
    double max_finite = -std::numeric_limits<double>::infinity();
    for (double v : grid.values) {
        if (std::isfinite(v)) max_finite = std::max(max_finite, v);
    }
    if (!std::isfinite(max_finite)) max_finite = 0.0;
    for (double& v : grid.values) {
        if (!std::isfinite(v)) v = max_finite;
    }
    return grid;
}

}  // namespace

RiskGrid compute_grid(std::span<const AgentState> agents, double alpha, double c,
                      const Rect& bounds, int resolution, double probe_radius) {
    return grid_impl(agents, alpha, c, bounds, resolution, probe_radius, true);
}

RiskGrid compute_grid(const Scene& scene, const Rect& bounds, int resolution,
                      double probe_radius) {
    return compute_grid(scene.agents, scene.alpha, scene.loss_offset_c, bounds, resolution,
                        probe_radius);
}

RiskGrid compute_grid_serial(std::span<const AgentState> agents, double alpha, double c,
                             const Rect& bounds, int resolution, double probe_radius) {
    return grid_impl(agents, alpha, c, bounds, resolution, probe_radius, false);
}

std::pair<double, double> grid_min_max(const RiskGrid& grid) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : grid.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

void write_grid_csv(const RiskGrid& grid, std::ostream& out) {
    out << "row,col,x,y,risk\n";
    for (int row = 0; row < grid.height; ++row) {
        for (int col = 0; col < grid.width; ++col) {
            const Vec2 cc = grid.cell_center(row, col);
            out << row << ',' << col << ',' << fmt_double(cc.x) << ',' << fmt_double(cc.y)
                << ',' << fmt_double(grid.value(row, col)) << '\n';
        }
    }
}

void export_raster(const RiskGrid& grid, const std::filesystem::path& path) {
    const auto [lo, hi] = grid_min_max(grid);
    const double range = hi - lo;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open raster for writing: " + path.string());
    }
    out << "P5\n" << grid.width << ' ' << grid.height << "\n255\n";
    std::string bytes;
    bytes.reserve(grid.values.size());
    for (double v : grid.values) {
        const long pixel = range > 0.0 ? std::lround((v - lo) / range * 255.0) : 0;
        bytes.push_back(static_cast<char>(std::clamp(pixel, 0L, 255L)));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing raster: " + path.string());
    }
    const std::filesystem::path side = path.string() + ".minmax.txt";
    std::ofstream meta(side);
    if (!meta) {
        throw IoError("cannot open raster sidecar for writing: " + side.string());
    }
    meta << "min " << fmt_double(lo) << "\nmax " << fmt_double(hi) << '\n';
    if (!meta) {
        throw IoError("failed writing raster sidecar: " + side.string());
    }
}

std::uint64_t scene_fingerprint(std::span<const AgentState> agents, double alpha, double c) {
    std::string repr;
    for (const AgentState& a : agents) {
        repr += std::to_string(a.id) + ',' + fmt_double(a.position.x) + ',' +
                fmt_double(a.position.y) + ',' + fmt_double(a.velocity.x) + ',' +
                fmt_double(a.velocity.y) + ',' + fmt_double(a.safety_radius) + ',' +
                fmt_double(a.gamma) + ',' + fmt_double(a.noise.mean.x) + ',' +
                fmt_double(a.noise.mean.y) + ',' + fmt_double(a.noise.covariance.m00) + ',' +
                fmt_double(a.noise.covariance.m01) + ',' +
                fmt_double(a.noise.covariance.m10) + ',' +
                fmt_double(a.noise.covariance.m11) + ';';
    }
    repr += fmt_double(alpha) + '|' + fmt_double(c);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char ch : repr) {
        hash ^= ch;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

}  // namespace cbfswarm::riskmap

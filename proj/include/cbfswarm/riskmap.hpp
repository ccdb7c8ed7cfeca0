#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "cbfswarm/core.hpp"

namespace cbfswarm::riskmap {

/// Row-major grid of point risks. Row 0 covers the min-y strip of the
/// bounds; cell (row, col) is centered at origin + ((col+0.5), (row+0.5))
/// * cell_size.
struct RiskGrid {
    Vec2 origin;
    double cell_size = 1.0;
    int width = 0, height = 0;
    std::vector<double> values;

    double value(int row, int col) const {
        return values[static_cast<std::size_t>(row) * width + col];
    }
    Vec2 cell_center(int row, int col) const {
        return {origin.x + (col + 0.5) * cell_size, origin.y + (row + 0.5) * cell_size};
    }
};

struct Rect {
    Vec2 min;
    Vec2 max;
};

/// Risk the listed agents impose on a point: a virtual static, noise-free
/// agent (radius probe_radius, gamma = max over the agents' gammas so each
/// pair is judged by the real agent's own gamma) is placed at p and its
/// pairwise safety losses are summed. A probe within 1e-9 of an agent
/// position returns +infinity; grid rendering replaces that sentinel with
/// the largest finite cell value. The agent-list overload exists because a
/// Scene requires two agents while one-agent maps are meaningful.
double point_risk(std::span<const AgentState> agents, double alpha, double c, const Vec2& p,
                  double probe_radius = 0.0);
double point_risk(const Scene& scene, const Vec2& p, double probe_radius = 0.0);

/// Evaluates point_risk at every cell center. resolution counts cells
/// along the longer side of the bounds; cells are square. Parallel over
/// cells, bitwise identical to compute_grid_serial.
RiskGrid compute_grid(std::span<const AgentState> agents, double alpha, double c,
                      const Rect& bounds, int resolution, double probe_radius = 0.0);
RiskGrid compute_grid(const Scene& scene, const Rect& bounds, int resolution,
                      double probe_radius = 0.0);

/// Single-threaded reference implementation.
RiskGrid compute_grid_serial(std::span<const AgentState> agents, double alpha, double c,
                             const Rect& bounds, int resolution, double probe_radius = 0.0);

std::pair<double, double> grid_min_max(const RiskGrid& grid);

/// row,col,x,y,risk rows in row-major order, with a header.
void write_grid_csv(const RiskGrid& grid, std::ostream& out);

/// Binary P5 graymap, min-max normalized to 0..255 (a constant grid maps
/// to all zeros); rows written in storage order (row 0 = min y). A
/// sidecar <path>.minmax.txt records the normalization bounds.
void export_raster(const RiskGrid& grid, const std::filesystem::path& path);

/// FNV-1a over the canonical text form of the agents and parameters;
/// stamped into map metadata so a raster can be traced to its scene.
std::uint64_t scene_fingerprint(std::span<const AgentState> agents, double alpha, double c);

}  // namespace cbfswarm::riskmap

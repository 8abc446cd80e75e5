#include "sulphsim/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sulphsim {

Grid2D::Grid2D(int nx, int ny, EdgeTags tags) : nx_(nx), ny_(ny), tags_(tags) {
    if (nx < 3 || ny < 3) {
        std::ostringstream msg;
        msg << "grid needs at least 3 nodes per axis, got " << nx << "x" << ny;
        throw std::invalid_argument(msg.str());
    }
    hx_ = 1.0 / (nx - 1);
    hy_ = 1.0 / (ny - 1);
}

Grid2D build_grid(int nx, int ny, EdgeTags tags) {
    return Grid2D(nx, ny, tags);
}

BoundaryTrace edge_trace(const Grid2D& grid, Edge edge) {
    BoundaryTrace trace;
    const bool vertical = edge == Edge::Left || edge == Edge::Right;
    const int count = vertical ? grid.ny() : grid.nx();
    for (int k = 0; k < count; ++k) {
        int i = 0;
        int j = 0;
        switch (edge) {
        case Edge::Left: i = 0, j = k; break;
        case Edge::Right: i = grid.nx() - 1, j = k; break;
        case Edge::Bottom: i = k, j = 0; break;
        case Edge::Top: i = k, j = grid.ny() - 1; break;
        }
        trace.edge.push_back(edge);
        trace.nodes.push_back(grid.index(i, j));
        trace.weights.push_back(vertical ? grid.wy(j) : grid.wx(i));
        trace.x1.push_back(grid.x1(i));
        trace.x2.push_back(grid.x2(j));
    }
    return trace;
}

BoundaryTrace exposed_trace(const Grid2D& grid) {
    BoundaryTrace trace;
    for (Edge e : {Edge::Left, Edge::Right, Edge::Bottom, Edge::Top}) {
        if (grid.tags()[e] != EdgeTag::Exposed) continue;
        BoundaryTrace part = edge_trace(grid, e);
        trace.edge.insert(trace.edge.end(), part.edge.begin(), part.edge.end());
        trace.nodes.insert(trace.nodes.end(), part.nodes.begin(), part.nodes.end());
        trace.weights.insert(trace.weights.end(), part.weights.begin(), part.weights.end());
        trace.x1.insert(trace.x1.end(), part.x1.begin(), part.x1.end());
        trace.x2.insert(trace.x2.end(), part.x2.begin(), part.x2.end());
    }
    return trace;
}

int line_index(const Grid2D& grid, ProfileLine line) {
    constexpr double tol = 1e-12;
    const bool vertical = std::holds_alternative<VerticalLine>(line);
    const double coord = vertical ? std::get<VerticalLine>(line).x1 : std::get<HorizontalLine>(line).x2;
    const double h = vertical ? grid.hx() : grid.hy();
    const int n = vertical ? grid.nx() : grid.ny();
    const double pos = coord / h;
    const long k = std::lround(pos);
    if (k < 0 || k >= n || std::abs(k * h - coord) > tol) return -1;
    return static_cast<int>(k);
}

std::vector<std::pair<double, double>> extract_profile(std::span<const double> field,
                                                       const Grid2D& grid, ProfileLine line) {
    if (field.size() != grid.size()) {
        throw std::invalid_argument("extract_profile: field size does not match grid");
    }
    const int k = line_index(grid, line);
    if (k < 0) {
        throw std::invalid_argument("extract_profile: line is not aligned with a grid line");
    }
    std::vector<std::pair<double, double>> out;
    if (std::holds_alternative<VerticalLine>(line)) {
        out.reserve(grid.ny());
        for (int j = 0; j < grid.ny(); ++j) out.emplace_back(grid.x2(j), field[grid.index(k, j)]);
    } else {
        out.reserve(grid.nx());
        for (int i = 0; i < grid.nx(); ++i) out.emplace_back(grid.x1(i), field[grid.index(i, k)]);
    }
    return out;
}

}  // namespace sulphsim

#pragma once

/// @file grid.hpp
/// @brief Vertex-centered uniform grid on the unit square with tagged edges.

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace sulphsim {

enum class Edge { Left = 0, Right = 1, Bottom = 2, Top = 3 };
enum class EdgeTag { Exposed, Isolated };

struct EdgeTags {
    std::array<EdgeTag, 4> tag{EdgeTag::Exposed, EdgeTag::Isolated, EdgeTag::Isolated,
                               EdgeTag::Isolated};

    EdgeTag operator[](Edge e) const { return tag[static_cast<std::size_t>(e)]; }
    EdgeTag& operator[](Edge e) { return tag[static_cast<std::size_t>(e)]; }

    /// Left edge exposed, all others isolated.
    static EdgeTags left_exposed() { return {}; }
    static EdgeTags all_isolated() {
        return {{EdgeTag::Isolated, EdgeTag::Isolated, EdgeTag::Isolated, EdgeTag::Isolated}};
    }
};

class Grid2D {
public:
    Grid2D(int nx, int ny, EdgeTags tags);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
    const EdgeTags& tags() const { return tags_; }

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    int i_of(std::size_t k) const { return static_cast<int>(k % nx_); }
    int j_of(std::size_t k) const { return static_cast<int>(k / nx_); }
    double x1(int i) const { return i * hx_; }
    double x2(int j) const { return j * hy_; }

    /// Trapezoidal 1D weights: h/2 at the ends, h in the interior.
    double wx(int i) const { return (i == 0 || i == nx_ - 1) ? 0.5 * hx_ : hx_; }
    double wy(int j) const { return (j == 0 || j == ny_ - 1) ? 0.5 * hy_ : hy_; }
    /// Area of the dual cell around node (i, j); sums to 1 over the grid.
    double node_weight(int i, int j) const { return wx(i) * wy(j); }

private:
    int nx_;
    int ny_;
    double hx_;
    double hy_;
    EdgeTags tags_;
};

/// Throws std::invalid_argument if nx or ny is below 3.
Grid2D build_grid(int nx, int ny, EdgeTags tags = EdgeTags::left_exposed());

/// Boundary nodes of all exposed edges, edge by edge in the order
/// Left, Right, Bottom, Top; vertical edges run in increasing x2, horizontal
/// edges in increasing x1. A corner shared by two exposed edges appears once
/// per edge.
struct BoundaryTrace {
    std::vector<Edge> edge;
    std::vector<std::size_t> nodes;
    std::vector<double> weights;  ///< trapezoidal arc-length weights
    std::vector<double> x1;
    std::vector<double> x2;

    std::size_t size() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }
};

BoundaryTrace exposed_trace(const Grid2D& grid);

/// Trace of one edge regardless of its tag.
BoundaryTrace edge_trace(const Grid2D& grid, Edge edge);

struct VerticalLine {
    double x1;
};
struct HorizontalLine {
    double x2;
};
using ProfileLine = std::variant<VerticalLine, HorizontalLine>;

/// Nodal samples along a grid line as (free coordinate, value) pairs.
/// Throws std::invalid_argument if the line is not grid-aligned within 1e-12.
std::vector<std::pair<double, double>> extract_profile(std::span<const double> field,
                                                       const Grid2D& grid, ProfileLine line);

/// Grid column/row index of a line, or -1 when the line is not grid-aligned.
int line_index(const Grid2D& grid, ProfileLine line);

}  // namespace sulphsim

#pragma once

/// @file io.hpp
/// @brief Profile CSV and legacy VTK writers.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sulphsim/grid.hpp"

namespace sulphsim {

struct ProfileRow {
    double t = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
    std::string field;
    double value = 0.0;
};

/// Sorts rows by (t, field, x2, x1), drops exact duplicates of the sort key
/// and writes `t,x1,x2,field,value` with 17 significant digits.
void write_profile_csv(std::ostream& os, std::vector<ProfileRow> rows);

/// ASCII legacy VTK, STRUCTURED_POINTS, with POINT_DATA scalars `s` and `c`.
void write_vtk(std::ostream& os, const Grid2D& grid, std::span<const double> s,
               std::span<const double> c, const std::string& title);

}  // namespace sulphsim

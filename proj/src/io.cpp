#include "sulphsim/io.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "sulphsim/config.hpp"

namespace sulphsim {

void write_profile_csv(std::ostream& os, std::vector<ProfileRow> rows) {
    auto key = [](const ProfileRow& r) { return std::tie(r.t, r.field, r.x2, r.x1); };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const ProfileRow& a, const ProfileRow& b) { return key(a) < key(b); });
    rows.erase(std::unique(rows.begin(), rows.end(),
                           [&](const ProfileRow& a, const ProfileRow& b) { return key(a) == key(b); }),
               rows.end());
    os << "t,x1,x2,field,value\n";
    for (const ProfileRow& r : rows) {
        os << format_double(r.t) << ',' << format_double(r.x1) << ',' << format_double(r.x2) << ','
           << r.field << ',' << format_double(r.value) << '\n';
    }
}

void write_vtk(std::ostream& os, const Grid2D& grid, std::span<const double> s,
               std::span<const double> c, const std::string& title) {
    if (s.size() != grid.size() || c.size() != grid.size()) {
        throw std::invalid_argument("write_vtk: field size does not match grid");
    }
    os << "# vtk DataFile Version 3.0\n";
    os << title.substr(0, 255) << '\n';
    os << "ASCII\n";
    os << "DATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << grid.nx() << ' ' << grid.ny() << " 1\n";
    os << "ORIGIN 0 0 0\n";
    os << "SPACING " << format_double(grid.hx()) << ' ' << format_double(grid.hy()) << " 1\n";
    os << "POINT_DATA " << grid.size() << '\n';
    for (const auto& [name, field] : {std::pair{"s", s}, std::pair{"c", c}}) {
        os << "SCALARS " << name << " double 1\n";
        os << "LOOKUP_TABLE default\n";
        // x fastest, matching the lexicographic node index
        for (std::size_t k = 0; k < field.size(); ++k) os << format_double(field[k]) << '\n';
    }
}

}  // namespace sulphsim

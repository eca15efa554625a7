#pragma once

#include <iosfwd>
#include <string>

#include "hgf/sphere_grid.hpp"

namespace hgf {

// CSV serialization of a node field. Columns are (theta, phi, <name>) on S^2
// and (theta, <name>) on S^1, one row per node in grid order, values printed
// with 17 significant digits so a write/read round trip is bit-exact.
void write_field_csv(const ScalarField& f, const std::string& name, std::ostream& os);

// Reads a field written by write_field_csv back onto `grid`. The node angles
// in the file must match the grid (same dimension and resolution); any
// mismatch or malformed row raises ConfigError with the line number.
ScalarField read_field_csv(const GridPtr& grid, std::istream& is);

// Formats one double with 17 significant digits (shortest form that
// round-trips); shared by every writer in the project.
std::string format_g17(double x);

} // namespace hgf

#include "hgf/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace hgf {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_field_csv(const ScalarField& f, const std::string& name, std::ostream& os) {
    const SphereGrid& g = *f.grid;
    if (g.dim() == 2) {
        os << "theta,phi," << name << "\n";
        for (int k = 0; k < g.nodes(); ++k)
            os << format_g17(g.node_theta(k)) << ',' << format_g17(g.node_phi(k)) << ','
               << format_g17(f.v[k]) << "\n";
    } else {
        os << "theta," << name << "\n";
        for (int k = 0; k < g.nodes(); ++k)
            os << format_g17(g.node_theta(k)) << ',' << format_g17(f.v[k]) << "\n";
    }
}

ScalarField read_field_csv(const GridPtr& grid, std::istream& is) {
    ScalarField f(grid);
    std::string line;
    int lineno = 1;
    if (!std::getline(is, line))
        throw ConfigError("field CSV: missing header line");
    const int ncols = grid->dim() == 2 ? 3 : 2;
    for (int k = 0; k < grid->nodes(); ++k) {
        ++lineno;
        if (!std::getline(is, line))
            throw ConfigError("field CSV line " + std::to_string(lineno) +
                              ": file ends before all nodes are read");
        std::istringstream row(line);
        double col[3] = {0, 0, 0};
        std::string tok;
        for (int c = 0; c < ncols; ++c) {
            if (!std::getline(row, tok, ','))
                throw ConfigError("field CSV line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(ncols) + " columns");
            try {
                col[c] = std::stod(tok);
            } catch (const std::exception&) {
                throw ConfigError("field CSV line " + std::to_string(lineno) +
                                  ": not a number: " + tok);
            }
        }
        const double dt = std::abs(col[0] - grid->node_theta(k));
        const double dp = grid->dim() == 2 ? std::abs(col[1] - grid->node_phi(k)) : 0.0;
        if (dt > 1e-9 || dp > 1e-9)
            throw ConfigError("field CSV line " + std::to_string(lineno) +
                              ": node angles do not match the grid (wrong resolution?)");
        f.v[k] = col[ncols - 1];
    }
    return f;
}

} // namespace hgf

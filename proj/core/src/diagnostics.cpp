#include "hgf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "hgf/field_io.hpp"

namespace hgf {

namespace {

void validate_sphere(int n, double alpha, double rho_inf) {
    if (n != 1 && n != 2) throw ConfigError("linear rate: dimension must be 1 or 2");
    if (!(alpha > 0.0)) throw ConfigError("linear rate: alpha must be positive");
    if (!(rho_inf > 0.0)) throw ConfigError("linear rate: rho_inf must be positive");
}

// Fill t/lhs/rhs with centered differences of `value` against the recorded
// rate `rate`, plus the shared max/mismatch statistics.
template <typename Report, typename Value, typename Rate>
Report compare_rates(const FunctionalSeries& series, Value value, Rate rate) {
    const auto& rows = series.rows;
    if (rows.size() < 3)
        throw WindowError("identity check needs at least 3 series rows, got " +
                          std::to_string(rows.size()));
    Report rep;
    double vmax = 0.0;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        double dt = rows[i + 1].t - rows[i - 1].t;
        rep.t.push_back(rows[i].t);
        rep.lhs.push_back((value(rows[i + 1]) - value(rows[i - 1])) / dt);
        rep.rhs.push_back(rate(rows[i]));
        rep.max_lhs = std::max(rep.max_lhs, std::abs(rep.lhs.back()));
        rep.max_rhs = std::max(rep.max_rhs, std::abs(rep.rhs.back()));
        vmax = std::max(vmax, std::abs(value(rows[i])));
    }
    // A series whose rates sit at the roundoff floor of the functional is
    // stationary; a relative mismatch over pure noise would be meaningless.
    double scale = std::max(rep.max_lhs, rep.max_rhs);
    if (scale > 1e-12 * std::max(vmax, 1.0)) {
        for (std::size_t i = 0; i < rep.t.size(); ++i) {
            double gap = std::abs(rep.lhs[i] - rep.rhs[i]);
            rep.mismatch =
                std::max(rep.mismatch, gap / std::max(std::abs(rep.rhs[i]), 1e-3 * scale));
        }
    }
    return rep;
}

void write_array(std::ostream& os, const char* key, const std::vector<double>& v) {
    os << '"' << key << "\":[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << format_g17(v[i]);
    }
    os << ']';
}

} // namespace

double linear_rate(int n, double alpha, double rho_inf, int l) {
    validate_sphere(n, alpha, rho_inf);
    if (l < 0) throw ConfigError("linear rate: harmonic degree must be nonnegative");
    if (l < 2) return 0.0;
    double coth = std::cosh(rho_inf) / std::sinh(rho_inf);
    double c = alpha * std::pow(coth, n * alpha - 1.0) / (std::sinh(rho_inf) * std::sinh(rho_inf));
    return c * (l * (l + n - 1) - n);
}

LinearizedModel linearized_model(int n, double alpha, double rho_inf, int l_max) {
    validate_sphere(n, alpha, rho_inf);
    if (l_max < 0) throw ConfigError("linear rate: l_max must be nonnegative");
    LinearizedModel m;
    m.n = n;
    m.alpha = alpha;
    m.rho_inf = rho_inf;
    double coth = std::cosh(rho_inf) / std::sinh(rho_inf);
    m.c = alpha * std::pow(coth, n * alpha - 1.0) / (std::sinh(rho_inf) * std::sinh(rho_inf));
    m.rates.resize(l_max + 1, 0.0);
    for (int l = 2; l <= l_max; ++l) m.rates[l] = linear_rate(n, alpha, rho_inf, l);
    return m;
}

DissipationReport dissipation_identity(const FunctionalSeries& series) {
    std::size_t outer = series.rows.empty() ? 0 : series.rows.front().A.size() - 2;
    return compare_rates<DissipationReport>(
        series, [outer](const SeriesRow& r) { return r.A[outer]; },
        [](const SeriesRow& r) { return r.dissipation_rate; });
}

VariationalReport variational_identity(const FunctionalSeries& series, int k) {
    int n = series.rows.empty() ? 0 : (int)series.rows.front().area_rate.size();
    if (k < -1 || k >= n)
        throw ConfigError("variational identity: index must be between -1 and " +
                          std::to_string(n - 1));
    VariationalReport rep;
    if (k == -1) {
        rep = compare_rates<VariationalReport>(
            series, [](const SeriesRow& r) { return r.volume; },
            [](const SeriesRow& r) { return r.volume_rate; });
    } else {
        rep = compare_rates<VariationalReport>(
            series, [k](const SeriesRow& r) { return r.A[k]; },
            [k](const SeriesRow& r) { return r.area_rate[k]; });
    }
    rep.k = k;
    return rep;
}

DecayFit fit_decay(const FunctionalSeries& series, double t_begin, double t_end) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs, ys;
    for (const SeriesRow& r : series.rows) {
        if (r.t < t_begin || r.t > t_end) continue;
        if (!(r.osc > 0.0))
            throw WindowError("decay fit: non-positive oscillation at t = " + std::to_string(r.t));
        double y = std::log(r.osc);
        xs.push_back(r.t);
        ys.push_back(y);
        sx += r.t;
        sy += y;
        sxx += r.t * r.t;
        sxy += r.t * y;
    }
    int m = (int)xs.size();
    if (m < 3) throw WindowError("decay fit: window holds fewer than 3 rows");
    double denom = m * sxx - sx * sx;
    if (denom <= 0.0) throw WindowError("decay fit: degenerate time window");
    double slope = (m * sxy - sx * sy) / denom;
    double icept = (sy - slope * sx) / m;
    double ss = 0.0;
    for (int i = 0; i < m; ++i) {
        double e = ys[i] - (slope * xs[i] + icept);
        ss += e * e;
    }
    return DecayFit{-slope, std::sqrt(ss / m), m};
}

DecayFit fit_decay(const FunctionalSeries& series) {
    if (series.rows.size() < 3) throw WindowError("decay fit: series holds fewer than 3 rows");
    double t0 = series.rows.front().t;
    double t1 = series.rows.back().t;
    return fit_decay(series, t1 - 0.4 * (t1 - t0), t1);
}

BallDistance ball_distance(const RadialSurface& s) {
    BallDistance out;
    out.rho_star = ball_radius_for_volume(s.rho.grid->dim(), enclosed_volume(s));
    double star = out.rho_star;
    auto objective = [star](const std::vector<double>& radii) {
        double worst = 0.0;
        for (double r : radii) worst = std::max(worst, std::abs(r - star));
        return worst;
    };
    out.distance = objective(s.rho.v);
    std::array<double, 3> move = search_center(s, objective);
    double dist = std::sqrt(move[0] * move[0] + move[1] * move[1] + move[2] * move[2]);
    if (dist > 0.0) {
        double shifted = objective(
            shifted_radii(s, {move[0] / dist, move[1] / dist, move[2] / dist}, dist));
        if (shifted <= out.distance)
            out.distance = shifted;
        else
            out.search_ok = false;  // search proposal did not verify; kept original center
    }
    return out;
}

double af_threshold(int n, double volume) {
    if (!(volume > 0.0)) throw ConfigError("isoperimetric bound needs positive volume");
    if (n == 1) return std::sqrt(volume * volume + 4.0 * M_PI * volume);
    return ball_quermass(n, n - 1, ball_radius_for_volume(n, volume));
}

AFReport af_verify(const RadialSurface& s) {
    int n = s.rho.grid->dim();
    AFReport rep;
    rep.volume = enclosed_volume(s);
    Functionals f = quermassintegrals(geometry(s), rep.volume);
    rep.outer = f.A[n - 1];
    rep.psi = af_threshold(n, rep.volume);
    rep.gap = rep.outer - rep.psi;
    return rep;
}

void write_af_csv(const std::vector<AFRow>& rows, std::ostream& os) {
    os << "seed,volume,outer,psi,gap\n";
    for (const AFRow& r : rows)
        os << r.seed << ',' << format_g17(r.volume) << ',' << format_g17(r.outer) << ','
           << format_g17(r.psi) << ',' << format_g17(r.gap) << '\n';
}

void write_json(const DissipationReport& r, std::ostream& os) {
    os << '{';
    write_array(os, "t", r.t);
    os << ',';
    write_array(os, "lhs", r.lhs);
    os << ',';
    write_array(os, "rhs", r.rhs);
    os << ",\"max_lhs\":" << format_g17(r.max_lhs) << ",\"max_rhs\":" << format_g17(r.max_rhs)
       << ",\"mismatch\":" << format_g17(r.mismatch) << "}\n";
}

void write_json(const VariationalReport& r, std::ostream& os) {
    os << "{\"k\":" << r.k << ',';
    write_array(os, "t", r.t);
    os << ',';
    write_array(os, "lhs", r.lhs);
    os << ',';
    write_array(os, "rhs", r.rhs);
    os << ",\"max_lhs\":" << format_g17(r.max_lhs) << ",\"max_rhs\":" << format_g17(r.max_rhs)
       << ",\"mismatch\":" << format_g17(r.mismatch) << "}\n";
}

void write_json(const DecayFit& r, std::ostream& os) {
    os << "{\"rate\":" << format_g17(r.rate) << ",\"residual\":" << format_g17(r.residual)
       << ",\"samples\":" << r.samples << "}\n";
}

void write_json(const BallDistance& r, std::ostream& os) {
    os << "{\"rho_star\":" << format_g17(r.rho_star)
       << ",\"distance\":" << format_g17(r.distance)
       << ",\"search_ok\":" << (r.search_ok ? "true" : "false") << "}\n";
}

void write_json(const AFReport& r, std::ostream& os) {
    os << "{\"volume\":" << format_g17(r.volume) << ",\"outer\":" << format_g17(r.outer)
       << ",\"psi\":" << format_g17(r.psi) << ",\"gap\":" << format_g17(r.gap) << "}\n";
}

} // namespace hgf

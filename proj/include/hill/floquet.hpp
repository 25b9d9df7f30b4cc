#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <locale>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hill/error.hpp"
#include "hill/parallel.hpp"
#include "hill/potential.hpp"
#include "hill/propagator.hpp"
#include "hill/sl2.hpp"

namespace hill {

inline double discriminant(const Potential& V, double E, const PropagationSettings& cfg = {}) {
    return monodromy_scaled(V, E, 0.0, cfg).trace();
}

// (1/T) log of the spectral radius of a monodromy matrix given in scaled form.
inline double lyapunov_from_monodromy(const ScaledSL2& phi, double T) {
    double D = phi.trace();
    if (std::isfinite(D)) {
        double ad = std::abs(D);
        if (ad <= 2.0) return 0.0;
        if (ad < 1e150) return std::log(0.5 * (ad + std::sqrt(ad * ad - 4.0))) / T;
    }
    // |D| huge: log rho = log|D| + log((1 + sqrt(1 - 4/D^2)) / 2) ~ log|D|
    return phi.log_abs_trace() / T;
}

inline double lyapunov(const Potential& V, double E, const PropagationSettings& cfg = {}) {
    return lyapunov_from_monodromy(monodromy_scaled(V, E, 0.0, cfg), V.period());
}

inline long long band_count_bound(const Potential& V, double R) {
    if (!(R > 0.0)) throw InvalidArgument("floquet", "band_count_bound: R must be positive");
    double x = V.period() / std::numbers::pi * std::sqrt(R + V.sup_bound()) + 1.0;
    return static_cast<long long>(std::ceil(x - 1e-12));
}

// ---------------------------------------------------------------- Moebius

inline constexpr double default_ellip_margin = 1e-10;

// Fixed point in the upper half-plane of z -> (a z + b) / (c z + d).
inline std::complex<double> mobius_fixed_point(const SL2Matrix& M, double margin = default_ellip_margin) {
    double tr = M.trace();
    if (!(std::abs(tr) < 2.0 - margin)) throw NotElliptic(tr);
    double disc = 4.0 * M.det() - tr * tr;
    if (!(disc > 0.0) || M.c == 0.0) throw NotElliptic(tr);
    double im = std::sqrt(disc) / (2.0 * std::abs(M.c));
    double re = (M.a - M.d) / (2.0 * M.c);
    return {re, im};
}

inline double hs_norm_sq(std::complex<double> z) { return (1.0 + std::norm(z)) / z.imag(); }

// Im(z)^{-1/2} [[1, -Re z], [0, Im z]]; conjugates the matrix fixing z to a
// rotation.
inline SL2Matrix conjugator(std::complex<double> z) {
    double s = 1.0 / std::sqrt(z.imag());
    return {s, -s * z.real(), 0.0, s * z.imag()};
}

// Operator norm of a unit-determinant matrix with Hilbert-Schmidt norm
// squared hs_sq.
inline double operator_norm_from_hs(double hs_sq) {
    double a = std::sqrt(hs_sq + 2.0), b = std::sqrt(std::max(0.0, hs_sq - 2.0));
    return 0.5 * (a + b);
}

struct EllipticData {
    double energy = 0.0;
    std::complex<double> z;
    double conjugator_hs_sq = 0.0;
};

inline EllipticData elliptic_data(const Potential& V, double E, double t, const PropagationSettings& cfg = {},
                                  double margin = default_ellip_margin) {
    auto z = mobius_fixed_point(monodromy(V, E, t, cfg), margin);
    return {E, z, hs_norm_sq(z)};
}

inline double conjugator_hs_norm(const Potential& V, double E, double t, const PropagationSettings& cfg = {}) {
    return std::sqrt(elliptic_data(V, E, t, cfg).conjugator_hs_sq);
}

// ---------------------------------------------------------------- IDS

struct QuadratureSettings {
    int nq = 64;            // initial samples per period
    double rel_change = 1e-6;
    int max_nq = 1 << 14;
    double margin = 1e-9;   // |D| must stay below 2 - margin
    PropagationSettings propagation{};
};

namespace detail {

// Fixed points z(t_i) at t_i = i T / n. Phi(t) is obtained by conjugating
// Phi(0) with A(t, 0).
inline std::vector<std::complex<double>> fixed_points_on_grid(const Potential& V, double E, const SL2Matrix& phi0,
                                                             int n, const PropagationSettings& cfg) {
    const double T = V.period();
    std::vector<std::complex<double>> zs(static_cast<std::size_t>(n));
    SL2Matrix A = SL2Matrix::identity();
    for (int i = 0; i < n; ++i) {
        double t = T * i / n;
        if (i > 0) A = transfer_matrix(V, E, T * (i - 1) / n, t, cfg) * A;
        SL2Matrix phi = A * phi0 * A.inverse();
        zs[static_cast<std::size_t>(i)] = mobius_fixed_point(phi, 0.0);
    }
    return zs;
}

template <class F>
double periodic_trapezoid(const Potential& V, double E, const QuadratureSettings& qs, F&& integrand) {
    const double T = V.period();
    SL2Matrix phi0 = monodromy(V, E, 0.0, qs.propagation);
    double D = phi0.trace();
    if (!(std::abs(D) < 2.0 - qs.margin))
        throw NotElliptic(D);
    int n = std::max(2, qs.nq);
    double sum = 0.0;
    for (auto z : fixed_points_on_grid(V, E, phi0, n, qs.propagation)) sum += integrand(z);
    double prev = T * sum / n;
    while (2 * n <= qs.max_nq) {
        // add midpoints: z at t = (i + 1/2) T / n
        const PropagationSettings& cfg = qs.propagation;
        SL2Matrix A = transfer_matrix(V, E, 0.0, 0.5 * T / n, cfg);
        for (int i = 0; i < n; ++i) {
            double t = T * (i + 0.5) / n;
            if (i > 0) A = transfer_matrix(V, E, T * (i - 0.5) / n, t, cfg) * A;
            sum += integrand(mobius_fixed_point(A * phi0 * A.inverse(), 0.0));
        }
        n *= 2;
        double cur = T * sum / n;
        if (std::abs(cur - prev) <= qs.rel_change * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

} // namespace detail

// dk/dE = (1 / (2 pi T)) int_0^T dt / Im z_E(t)
inline double ids_derivative(const Potential& V, double E, const QuadratureSettings& qs = {}) {
    double I = detail::periodic_trapezoid(V, E, qs, [](std::complex<double> z) { return 1.0 / z.imag(); });
    return I / (2.0 * std::numbers::pi * V.period());
}

// (1/T) int_0^T ||M_E(t)||^2 dt with the operator norm (hs = false) or the
// Hilbert-Schmidt norm (hs = true).
inline double mean_conjugator_norm_sq(const Potential& V, double E, bool hs, const QuadratureSettings& qs = {}) {
    double I = detail::periodic_trapezoid(V, E, qs, [hs](std::complex<double> z) {
        double h = hs_norm_sq(z);
        if (hs) return h;
        double op = operator_norm_from_hs(h);
        return op * op;
    });
    return I / V.period();
}

// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double r = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = r;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * r * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (r * p1 - p0) / (r * r - 1.0);
            double dr = p1 / dp;
            r -= dr;
            if (std::abs(dr) < 1e-16) break;
        }
        x[static_cast<std::size_t>(i)] = r;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - r * r) * dp * dp);
    }
    return {x, w};
}

// ---------------------------------------------------------------- bands

enum class EdgeKind { periodic, antiperiodic, window };

inline const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::periodic: return "periodic";
        case EdgeKind::antiperiodic: return "antiperiodic";
        case EdgeKind::window: return "window";
    }
    return "?";
}

struct Band {
    double lo = 0.0, hi = 0.0;
    std::size_t index = 0;
    EdgeKind lo_kind = EdgeKind::periodic, hi_kind = EdgeKind::periodic;
    bool lo_degenerate = false, hi_degenerate = false;
    // set for bands narrower than the bisection resolution, measured from
    // the local slope of D instead of the edge positions
    double slope_length = -1.0;

    double length() const { return slope_length >= 0.0 ? slope_length : hi - lo; }
};

struct BandSettings {
    double edge_tol = 1e-10;
    double tangency_tol = 1e-11;  // on |D| - 2 per period; gap excess grows like the square of its width
    int points_per_bound = 16;
    int min_points = 64;
    int bisection_iterations = 60;
    int golden_iterations = 60;
    int max_refinements = 2;
    double thin_width = 1e-8;  // below this a band is measured through |D'|
    PropagationSettings propagation{};
};

struct BandStructure {
    double R = 0.0;
    double scan_lo = 0.0;  // lowest scanned energy; nothing lies below
    std::vector<Band> bands;
    std::vector<std::pair<double, double>> discriminant_samples;
    long long bound = 0;

    double measure() const {
        double s = 0.0;
        for (const auto& b : bands) s += b.length();
        return s;
    }
    // smallest gap strictly between two bands that is not degenerate
    double min_gap() const {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < bands.size(); ++i)
            if (!bands[i].lo_degenerate) g = std::min(g, bands[i].lo - bands[i - 1].hi);
        return g;
    }
};

namespace detail {

struct Sample {
    double E, D;
    bool edge = false;       // exact root of D -+ 2
    bool tangency = false;   // extremum with |D| within tangency_tol of 2
};

inline double bisect_level(const std::function<double(double)>& f, double level, double a, double fa, double b,
                           const BandSettings& bs) {
    double ga = fa - level;
    for (int it = 0; it < bs.bisection_iterations && (b - a) > bs.edge_tol; ++it) {
        double m = 0.5 * (a + b);
        double gm = f(m) - level;
        if ((gm > 0) == (ga > 0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Golden-section search for an extremum of f on [a, b]; sign = +1 for max.
inline std::pair<double, double> golden(const std::function<double(double)>& f, double a, double b, double sign,
                                        int iters) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = sign * f(x1), f2 = sign * f(x2);
    for (int it = 0; it < iters && (b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sign * f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sign * f(x2);
        }
    }
    return f1 > f2 ? std::pair{x1, sign * f1} : std::pair{x2, sign * f2};
}

inline bool inside(double D) { return std::abs(D) <= 2.0; }

inline EdgeKind kind_of(double level) { return level > 0 ? EdgeKind::periodic : EdgeKind::antiperiodic; }

inline BandStructure scan_bands(const Potential& V, double R, const BandSettings& bs, int points) {
    const double lo = std::max(-R, -V.sup_bound() - 1e-3);
    BandStructure out;
    out.R = R;
    out.scan_lo = lo;
    out.bound = band_count_bound(V, R);
    if (!(R > lo)) return out;
    std::function<double(double)> D = [&](double E) { return discriminant(V, E, bs.propagation); };

    std::vector<Sample> s(static_cast<std::size_t>(points));
    parallel_for(s.size(), [&](std::size_t i) {
        double E = i + 1 == s.size() ? R : lo + (R - lo) * static_cast<double>(i) / (points - 1);
        s[i] = {E, D(E)};
    });
    for (const auto& x : s) out.discriminant_samples.emplace_back(x.E, x.D);

    // discrete extrema, refined and inserted
    std::vector<std::size_t> ext;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        double a = s[i - 1].D, b = s[i].D, c = s[i + 1].D;
        if (!std::isfinite(b)) continue;
        if ((b >= a && b > c) || (b <= a && b < c)) ext.push_back(i);
    }
    // determinant drift compounds over the powered periods
    const double tangency_tol = bs.tangency_tol * std::max(1, V.repeat());
    std::vector<Sample> extra(ext.size());
    parallel_for(ext.size(), [&](std::size_t k) {
        std::size_t i = ext[k];
        double sign = s[i].D >= s[i - 1].D ? 1.0 : -1.0;
        auto [x, fx] = golden(D, s[i - 1].E, s[i + 1].E, sign, bs.golden_iterations);
        if (sign * fx < sign * s[i].D) {
            x = s[i].E;
            fx = s[i].D;
        }
        bool tang = std::abs(std::abs(fx) - 2.0) <= tangency_tol && sign * fx > 0;
        extra[k] = {x, fx, false, tang};
    });
    const double first = s.front().E, last = s.back().E;
    for (const auto& e : extra)
        if (e.E > first && e.E < last) s.push_back(e);
    std::sort(s.begin(), s.end(), [](const Sample& x, const Sample& y) { return x.E < y.E; });
    s.erase(std::unique(s.begin(), s.end(), [](const Sample& x, const Sample& y) { return x.E == y.E; }), s.end());

    // Near-touching gaps count as closed: lift the discriminant to +-2 at
    // the tangency so no crossing is reported around it.
    auto clamp_tangent = [](const Sample& x) {
        return x.tangency ? std::copysign(2.0, x.D) : x.D;
    };

    // roots of D -+ 2 between consecutive samples
    struct Cell {
        std::size_t i;
        double level;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        double a = clamp_tangent(s[i]), b = clamp_tangent(s[i + 1]);
        for (double level : {2.0, -2.0}) {
            auto beyond = [level](double v) { return level > 0 ? v > level : v < level; };
            if (beyond(a) != beyond(b)) cells.push_back({i, level});
        }
    }
    std::vector<Sample> roots(cells.size());
    parallel_for(cells.size(), [&](std::size_t k) {
        const auto& c = cells[k];
        double E = bisect_level(D, c.level, s[c.i].E, s[c.i].D, s[c.i + 1].E, bs);
        roots[k] = {E, c.level, true, false};
    });
    std::vector<Sample> pts = s;
    for (const auto& r : roots) pts.push_back(r);
    std::stable_sort(pts.begin(), pts.end(), [](const Sample& x, const Sample& y) { return x.E < y.E; });

    // decide membership of each open interval between consecutive points
    const std::size_t n = pts.size();
    std::vector<int> in(n > 0 ? n - 1 : 0, 0);
    std::vector<std::size_t> need_mid;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Sample& a = pts[i];
        const Sample& b = pts[i + 1];
        if (a.edge && b.edge && a.D != b.D) in[i] = 1;  // D runs from one level to the other
        else if (!a.edge && !a.tangency) in[i] = inside(a.D);
        else if (!b.edge && !b.tangency) in[i] = inside(b.D);
        else need_mid.push_back(i);
    }
    std::vector<double> mids(need_mid.size());
    parallel_for(need_mid.size(), [&](std::size_t k) {
        std::size_t i = need_mid[k];
        mids[k] = D(0.5 * (pts[i].E + pts[i + 1].E));
    });
    for (std::size_t k = 0; k < need_mid.size(); ++k) in[need_mid[k]] = inside(mids[k]);

    // a sample exactly at |D| = 2 that is not a root is treated as inside
    auto edge_kind = [&](const Sample& p, bool at_window) {
        if (at_window) return EdgeKind::window;
        return kind_of(p.D);
    };
    std::size_t i = 0;
    while (i + 1 < n) {
        if (!in[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && in[j]) {
            ++j;
            if (pts[j].tangency && j + 1 < n) break;  // split at a closed gap
        }
        Band b;
        b.lo = pts[i].E;
        b.hi = pts[j].E;
        b.lo_kind = edge_kind(pts[i], i == 0 && !pts[i].edge);
        b.hi_kind = edge_kind(pts[j], j + 1 == n && !pts[j].edge);
        b.lo_degenerate = pts[i].tangency;
        b.hi_degenerate = pts[j].tangency;
        bool crossing = pts[i].edge && pts[j].edge && pts[i].D != pts[j].D;
        if (b.hi > b.lo || crossing) out.bands.push_back(b);
        i = j;
    }
    for (std::size_t k = 0; k < out.bands.size(); ++k) out.bands[k].index = k;

    // Bands from one level to the other that bisection cannot resolve:
    // length = 4 / |D'| with D' from a difference quotient taken in log
    // space, since |D| on either side may overflow.
    const double cell = (R - lo) / (points - 1);
    std::vector<std::size_t> thin;
    for (std::size_t k = 0; k < out.bands.size(); ++k) {
        const Band& b = out.bands[k];
        if (b.lo_kind != EdgeKind::window && b.hi_kind != EdgeKind::window && b.lo_kind != b.hi_kind &&
            !b.lo_degenerate && !b.hi_degenerate && b.hi - b.lo < bs.thin_width)
            thin.push_back(k);
    }
    parallel_for(thin.size(), [&](std::size_t t) {
        Band& b = out.bands[thin[t]];
        double c = 0.5 * (b.lo + b.hi);
        double h = std::min(1e-6 * std::max(1.0, std::abs(c)), cell / 16.0);
        ScaledSL2 up = monodromy_scaled(V, c + h, 0.0, bs.propagation);
        ScaledSL2 dn = monodromy_scaled(V, c - h, 0.0, bs.propagation);
        double su = up.m.trace(), sd = dn.m.trace();
        if (!(su * sd < 0.0)) return;  // not bracketed at this scale, keep the bisected edges
        double lu = up.log_abs_trace(), ld = dn.log_abs_trace();
        double top = std::max(lu, ld);
        double log_sum = top + std::log(std::exp(lu - top) + std::exp(ld - top));
        // |D(c+h) - D(c-h)| / 2h is the slope; the band spans a change of 4 in D
        double len = std::exp(std::log(8.0 * h) - log_sum);
        if (len < 2.0 * h) b.slope_length = len;
    });
    return out;
}

} // namespace detail

// Bands of sigma(H_V) within [-R, R]. Bands separated only by a closed gap
// (|D| touching 2 without crossing) are reported as neighbours sharing a
// degenerate edge.
inline BandStructure band_structure(const Potential& V, double R, const BandSettings& bs = {}) {
    if (!(R > 0.0)) throw InvalidArgument("floquet", "band_structure: R must be positive");
    long long bound = band_count_bound(V, R);
    int points = static_cast<int>(std::max<long long>(bs.min_points, bs.points_per_bound * bound));
    for (int attempt = 0; attempt <= bs.max_refinements; ++attempt) {
        BandStructure out = detail::scan_bands(V, R, bs, points);
        if (static_cast<long long>(out.bands.size()) <= bound) return out;
        points *= 2;
    }
    throw Error("floquet", "band_structure: detected more bands than the band count bound " + std::to_string(bound) +
                               " after grid refinement");
}

inline double spectrum_measure(const Potential& V, double lambda, double R, const BandSettings& bs = {}) {
    return band_structure(scale(V, lambda), R, bs).measure();
}

// int_J dk/dE dE over a band, after E = lo + (hi - lo)(1 - cos theta)/2,
// which removes the inverse square-root singularities at the edges.
inline double ids_mass(const Potential& V, const Band& band, int nodes = 24, const QuadratureSettings& qs = {}) {
    auto [x, w] = gauss_legendre(nodes);
    double sum = 0.0;
    const double width = band.hi - band.lo;
    QuadratureSettings q = qs;
    q.margin = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double theta = 0.5 * std::numbers::pi * (x[i] + 1.0);
        double E = band.lo + width * 0.5 * (1.0 - std::cos(theta));
        double jac = 0.5 * width * std::sin(theta) * 0.5 * std::numbers::pi;
        sum += w[i] * jac * ids_derivative(V, E, q);
    }
    return sum;
}

// ---------------------------------------------------------------- CSV

inline void write_discriminant_csv(std::ostream& os, const std::vector<std::pair<double, double>>& samples) {
    os.imbue(std::locale::classic());
    os << "E,D\n" << std::setprecision(17);
    for (const auto& [E, D] : samples) os << E << ',' << D << '\n';
}

inline void write_band_csv(std::ostream& os, const std::vector<Band>& bands, const std::vector<double>& ids_masses) {
    os.imbue(std::locale::classic());
    os << "index,lo,hi,length,ids_mass\n" << std::setprecision(17);
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& b = bands[i];
        os << b.index << ',' << b.lo << ',' << b.hi << ',' << b.length() << ',';
        if (i < ids_masses.size() && !std::isnan(ids_masses[i])) os << ids_masses[i];  // empty when not computed
        os << '\n';
    }
}

} // namespace hill

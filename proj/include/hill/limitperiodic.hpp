#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hill/error.hpp"
#include "hill/floquet.hpp"
#include "hill/parallel.hpp"
#include "hill/potential.hpp"
#include "hill/thinspec.hpp"

namespace hill {

struct Hd0Level {
    int n = 0;
    Potential V;
    double T = 0.0;
    long long N = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double Lambda = 0.0, r = 0.0;
    std::vector<double> lambdas;
    std::vector<double> measures;
    // construction diagnostics
    int Nprime = 0;
    std::size_t ell = 0;
    double eta = 0.0;
};

struct Hd0Schedule {
    Potential V0;
    double epsilon0 = 0.0;
    std::vector<Hd0Level> levels;
    bool complete = false;
    std::string stop_reason;     // empty when complete
    double pending_epsilon = 0.0;  // epsilon of the level that was not completed

    const Hd0Level& level(int n) const {
        for (const auto& l : levels)
            if (l.n == n) return l;
        throw InvalidArgument("limitperiodic", "level " + std::to_string(n) + " missing from schedule");
    }
};

struct Hd0Settings {
    int lambda_points = 9;
    double underflow = 1e-14;
    bool keep_partial = false;  // record a failing level instead of throwing
    std::function<double(int)> Lambda_of = [](int n) { return std::ldexp(1.0, n); };
    std::function<double(int)> r_of = [](int n) { return std::ldexp(1.0, n); };
    ThinSpecSettings thin{};
};

// epsilon_n = min(epsilon_{n-1}/2, n^{-T_{n-1}} / 2, delta_{n-1} / (4 Lambda_{n-1}))
inline double next_epsilon(int n, double eps_prev, double T_prev, double delta_prev, double Lambda_prev) {
    double power_term = 0.5 * std::pow(static_cast<double>(n), -T_prev);
    return std::min({eps_prev / 2.0, power_term, delta_prev / (4.0 * Lambda_prev)});
}

inline double level_delta(const Potential& V, double Lambda, double r, int points, std::vector<double>& lambdas,
                          std::vector<double>& measures, const BandSettings& bs) {
    lambdas = log_spaced(1.0 / Lambda, Lambda, points);
    measures.assign(lambdas.size(), 0.0);
    parallel_for(lambdas.size(), [&](std::size_t i) { measures[i] = spectrum_measure(V, lambdas[i], r, bs); });
    return *std::max_element(measures.begin(), measures.end());
}

// An N_schedule entry of 0 selects the smallest admissible N for that level.
inline Hd0Schedule hd0_sequence(const Potential& V0, double epsilon0, int depth, const std::vector<long long>& N_schedule,
                                const Hd0Settings& hs = {}) {
    if (depth < 1) throw InvalidArgument("limitperiodic", "depth must be at least 1");
    if (!(epsilon0 > 0.0)) throw InvalidArgument("limitperiodic", "epsilon0 must be positive");
    for (long long N : N_schedule)
        if (N < 0) throw InvalidArgument("limitperiodic", "negative entry in N schedule");
    if (static_cast<int>(N_schedule.size()) < depth)
        throw InvalidArgument("limitperiodic", "N schedule shorter than depth");
    Hd0Schedule s;
    s.V0 = V0;
    s.epsilon0 = epsilon0;
    Potential prev = V0;
    double T_prev = V0.period();
    double eps = epsilon0 / 2.0;
    for (int n = 1; n <= depth; ++n) {
        if (n > 1) {
            const auto& p = s.levels.back();
            eps = next_epsilon(n, p.epsilon, p.T, p.delta, p.Lambda);
        }
        if (!(eps >= hs.underflow)) {
            std::ostringstream msg;
            msg << "epsilon_" << n << " = " << std::setprecision(6) << eps << " is below the underflow threshold "
                << hs.underflow;
            s.stop_reason = msg.str();
            s.pending_epsilon = eps;
            return s;
        }
        Hd0Level L;
        L.n = n;
        L.N = N_schedule[static_cast<std::size_t>(n - 1)];
        L.epsilon = eps;
        L.Lambda = hs.Lambda_of(n);
        L.r = hs.r_of(n);
        try {
            ThinSpecSettings ts = hs.thin;
            ts.seed = hs.thin.seed + 104729ULL * static_cast<unsigned long long>(n);
            ThinSpecCover cov = prepare_thin_cover(prev, eps, L.r, L.Lambda, ts);
            if (L.N == 0) L.N = cov.minimal_N();
            ThinSpecPlan plan = assemble_thin_plan(cov, L.N, ts);
            L.V = plan.result;
            L.Nprime = plan.cover.Nprime;
            L.ell = plan.ell();
            L.eta = plan.eta();
            L.T = static_cast<double>(L.N) * T_prev;
            L.delta = level_delta(L.V, L.Lambda, L.r, hs.lambda_points, L.lambdas, L.measures, hs.thin.bands);
        } catch (const Error& e) {
            std::string msg = "level " + std::to_string(n) + ": " + e.what();
            if (!hs.keep_partial) throw Error("limitperiodic", msg);
            s.stop_reason = msg;
            s.pending_epsilon = eps;
            return s;
        }
        s.levels.push_back(L);
        prev = L.V;
        T_prev = L.T;
    }
    s.complete = true;
    return s;
}

// sum_{j > n} epsilon_j over the computed levels, including the epsilon of
// a level that was attempted but not completed.
inline double tail_sum(const Hd0Schedule& s, int n) {
    double sum = s.pending_epsilon;
    for (const auto& l : s.levels)
        if (l.n > n) sum += l.epsilon;
    return sum;
}

inline bool tail_inequality_holds(const Hd0Schedule& s, int n) {
    const auto& l = s.level(n);
    return l.Lambda * tail_sum(s, n) < l.delta / 2.0;
}

// ---------------------------------------------------------------- covers

struct CoverSum {
    double alpha = 1.0;
    double r = 0.0;  // window [-r, r]
    double delta = 0.0;
    std::vector<Interval> intervals;
    double sum = 0.0;
    double comparison_bound = 0.0;
};

// Cover made of the delta/2-neighbourhoods of the bands that reach
// [-r_window, r_window], plus [-r_n, -r_n + 2 delta] and [r_n - 2 delta, r_n].
inline CoverSum cover_sum(const std::vector<Interval>& bands, double delta, double r_n, double r_window,
                          double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("limitperiodic", "alpha must lie in (0, 1]");
    CoverSum c;
    c.alpha = alpha;
    c.r = r_window;
    c.delta = delta;
    for (const auto& [lo, hi] : bands) {
        Interval I{lo - delta / 2.0, hi + delta / 2.0};
        if (I.second < -r_window || I.first > r_window) continue;
        c.intervals.push_back(I);
    }
    c.intervals.push_back({-r_n, -r_n + 2.0 * delta});
    c.intervals.push_back({r_n - 2.0 * delta, r_n});
    for (const auto& [lo, hi] : c.intervals) {
        double len = hi - lo;
        c.sum += len > 0.0 ? std::pow(len, alpha) : 0.0;
    }
    return c;
}

inline CoverSum hausdorff_upper_bound(const Hd0Schedule& s, int n, double alpha, double lambda, int j,
                                      const BandSettings& bs = {}) {
    if (j > n) throw InvalidArgument("limitperiodic", "window index exceeds level");
    const Hd0Level& L = s.level(n);
    if (!(lambda >= 1.0 / L.Lambda * (1.0 - 1e-12) && lambda <= L.Lambda * (1.0 + 1e-12)))
        throw InvalidArgument("limitperiodic", "lambda outside [1/Lambda_n, Lambda_n]");
    double r_j = j >= 1 ? s.level(j).r : 1.0;
    BandStructure b = band_structure(scale(L.V, lambda), L.r, bs);
    CoverSum c = cover_sum(band_intervals(b), L.delta, L.r, r_j, alpha);
    double count = L.T / std::numbers::pi * std::sqrt(L.Lambda * (s.V0.sup_bound() + L.epsilon) + L.r) + 3.0;
    c.comparison_bound = count * std::pow(2.0, alpha) * std::pow(L.delta, alpha);
    return c;
}

// ---------------------------------------------------------------- Gordon

struct GordonReport {
    double test_period = 0.0;
    double defect = 0.0;
    double bound = 0.0;
    double ratio = 0.0;  // defect / bound (inf when bound is 0)
    long long points = 0;
};

inline GordonReport gordon_defect(const Potential& V, double T_test, int grid_density, double bound = 0.0) {
    if (!(T_test > 0.0) || grid_density < 1) throw InvalidArgument("limitperiodic", "gordon: need T > 0, density >= 1");
    GordonReport g;
    g.test_period = T_test;
    g.bound = bound;
    g.points = static_cast<long long>(std::ceil(2.0 * T_test * grid_density)) + 1;
    std::vector<double> d(static_cast<std::size_t>(g.points));
    parallel_for(d.size(), [&](std::size_t i) {
        double x = -T_test + 2.0 * T_test * static_cast<double>(i) / static_cast<double>(g.points - 1);
        d[i] = std::abs(V(x) - V(x + T_test));
    });
    g.defect = *std::max_element(d.begin(), d.end());
    g.ratio = bound > 0.0 ? g.defect / bound : std::numeric_limits<double>::infinity();
    return g;
}

// max |V(x) - W(x)| for |x| <= T_test on the same grid as gordon_defect.
inline double level_distance(const Potential& V, const Potential& W, double T_test, int grid_density) {
    long long n = static_cast<long long>(std::ceil(2.0 * T_test * grid_density)) + 1;
    std::vector<double> d(static_cast<std::size_t>(n));
    parallel_for(d.size(), [&](std::size_t i) {
        double x = -T_test + 2.0 * T_test * static_cast<double>(i) / static_cast<double>(n - 1);
        d[i] = std::abs(V(x) - W(x));
    });
    return *std::max_element(d.begin(), d.end());
}

} // namespace hill

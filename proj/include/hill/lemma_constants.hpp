#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hill/error.hpp"
#include "hill/floquet.hpp"
#include "hill/parallel.hpp"
#include "hill/potential.hpp"
#include "hill/propagator.hpp"

namespace hill {

struct LemmaConstants {
    double Q = 0.0;
    double R = 1.0;
    double C1 = 1.0;
    double C0 = 1.0 / 9.0;

    static LemmaConstants from_C1(double Q, double R, double C1) {
        if (!(Q >= 0.0) || !(R > 0.0) || !(C1 > 0.0))
            throw InvalidArgument("floquet", "lemma constants need Q >= 0, R > 0, C1 > 0");
        return {Q, R, C1, 1.0 / (6.0 * C1 + 3.0)};
    }
};

struct C1EstimateSettings {
    int trials = 400;
    int random_series = 8;
    int half_intervals = 64;  // Simpson panels on each side of x
    double safety = 2.0;
    PropagationSettings propagation{};
};

namespace detail {

// max over initial data of |u'(x)|^2 / int_{x-1}^{x+1} u^2 for fixed W, E, x.
// The ratio is a quotient of quadratic forms in (u'(x), u(x)); its maximum
// is the (1,1) entry of the inverse Gram matrix.
inline double c1_ratio(const Potential& W, double E, double x, int half, const PropagationSettings& cfg) {
    const int n = 2 * half;
    const double h = 1.0 / half;
    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
    auto accumulate = [&](const SL2Matrix& A, double w) {
        g11 += w * A.c * A.c;
        g12 += w * A.c * A.d;
        g22 += w * A.d * A.d;
    };
    for (int side : {-1, 1}) {
        SL2Matrix A = SL2Matrix::identity();
        for (int k = 0; k <= half; ++k) {
            if (k > 0) A = transfer_matrix(W, E, x + side * (k - 1) * h, x + side * k * h, cfg) * A;
            // Simpson weights over the full [-1, 1] grid of n + 1 points,
            // the centre point shared by both sides
            int idx = half + side * k;
            double w = (idx == 0 || idx == n) ? 1.0 : (idx % 2 ? 4.0 : 2.0);
            if (k == 0) w *= 0.5;
            accumulate(A, w * h / 3.0);
        }
    }
    double det = g11 * g22 - g12 * g12;
    if (!(det > 0.0)) throw Error("floquet", "degenerate Gram matrix in C1 estimate");
    return g22 / det;
}

} // namespace detail

// Brute-force estimate of the solution-estimate constant C1(Q, R): the
// largest ratio found over random energies in [-R, R], random points x and
// a test set of potentials bounded by Q (V itself if given, the constants
// 0 and +-Q, random cosine series), times a safety factor.
inline double estimate_C1(const Potential* V, double Q, double R, std::uint64_t seed,
                          const C1EstimateSettings& cs = {}) {
    if (!(Q >= 0.0) || !(R > 0.0)) throw InvalidArgument("floquet", "estimate_C1: need Q >= 0 and R > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Potential> family;
    if (V) {
        if (V->sup_bound() > Q * (1.0 + 1e-12))
            throw InvalidArgument("floquet", "estimate_C1: potential exceeds the bound Q");
        family.push_back(*V);
    }
    family.push_back(Potential::constant(0.0));
    family.push_back(Potential::constant(Q));
    family.push_back(Potential::constant(-Q));
    for (int r = 0; r < cs.random_series; ++r) {
        int K = 1 + static_cast<int>(unit(rng) * 4.0);
        double period = 0.5 + 3.5 * unit(rng);
        std::vector<double> c(static_cast<std::size_t>(K)), s(static_cast<std::size_t>(K));
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
            c[static_cast<std::size_t>(k)] = 2.0 * unit(rng) - 1.0;
            s[static_cast<std::size_t>(k)] = 2.0 * unit(rng) - 1.0;
            total += std::abs(c[static_cast<std::size_t>(k)]) + std::abs(s[static_cast<std::size_t>(k)]);
        }
        double mean = 2.0 * unit(rng) - 1.0;
        total += std::abs(mean);
        double f = Q * unit(rng) / total;
        for (auto& v : c) v *= f;
        for (auto& v : s) v *= f;
        family.push_back(Potential::cosine_series(period, c, mean * f, s));
    }
    struct Trial {
        std::size_t w;
        double E, x;
    };
    std::vector<Trial> trials(static_cast<std::size_t>(cs.trials));
    for (std::size_t i = 0; i < trials.size(); ++i) {
        std::size_t w = i % family.size();
        double E = -R + 2.0 * R * unit(rng);
        double x = family[w].period() * unit(rng);
        trials[i] = {w, E, x};
    }
    // the energy extremes are where the ratio is largest for constants
    for (std::size_t w = 0; w < family.size(); ++w) {
        trials.push_back({w, -R, 0.0});
        trials.push_back({w, R, 0.0});
    }
    std::vector<double> ratios(trials.size());
    parallel_for(trials.size(), [&](std::size_t i) {
        ratios[i] = detail::c1_ratio(family[trials[i].w], trials[i].E, trials[i].x, cs.half_intervals, cs.propagation);
    });
    return cs.safety * *std::max_element(ratios.begin(), ratios.end());
}

struct IdsBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// dk/dE(E) >= (C0 / T) int_0^T ||M_E(t)||^2 dt with the operator norm.
inline IdsBoundCheck verify_ids_bound(const Potential& V, double E, const LemmaConstants& k,
                                      const QuadratureSettings& qs = {}, double num_tol = 1e-12) {
    if (V.period() < 1.0) throw InvalidArgument("floquet", "verify_ids_bound: period must be at least 1");
    if (V.sup_bound() > k.Q * (1.0 + 1e-12))
        throw InvalidArgument("floquet", "verify_ids_bound: sup bound exceeds Q");
    if (std::abs(E) > k.R) throw InvalidArgument("floquet", "verify_ids_bound: |E| exceeds R");
    IdsBoundCheck out;
    out.lhs = ids_derivative(V, E, qs);
    out.rhs = k.C0 * mean_conjugator_norm_sq(V, E, false, qs);
    out.holds = out.lhs >= out.rhs - num_tol;
    return out;
}

} // namespace hill

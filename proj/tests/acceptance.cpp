// One PASS/FAIL line per acceptance criterion. Usage: acceptance [--criterion k]

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fd_oracle.hpp"
#include "hill/hill.hpp"

using namespace hill;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

Potential random_cosine(std::mt19937_64& rng, double period, double max_sup, int max_terms = 4) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int K = 1 + static_cast<int>(std::uniform_int_distribution<int>(0, max_terms - 1)(rng));
    std::vector<double> c(K), s(K);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        c[k] = u(rng);
        s[k] = u(rng);
        total += std::abs(c[k]) + std::abs(s[k]);
    }
    double mean = u(rng);
    total += std::abs(mean);
    double f = max_sup * std::abs(u(rng)) / total;
    for (auto& x : c) x *= f;
    for (auto& x : s) x *= f;
    return Potential::cosine_series(period, c, mean * f, s);
}

// 1. free operator closed forms
Outcome criterion1() {
    const Potential V = Potential::constant(0.0, 1.0);
    double worst_D = 0.0, worst_L = 0.0, worst_k = 0.0;
    for (double E : log_spaced(0.01, 100.0, 200)) worst_D = std::max(worst_D, std::abs(discriminant(V, E) - 2.0 * std::cos(std::sqrt(E))));
    for (int i = 0; i < 50; ++i) {
        double E = -25.0 + (25.0 - 0.01) * i / 49.0;
        worst_L = std::max(worst_L, std::abs(lyapunov(V, E) - std::sqrt(-E)));
    }
    // band interiors of the free operator with T = 1: ((n + 1/4) pi)^2 and ((n + 3/4) pi)^2
    for (int i = 0; i < 20; ++i) {
        double r = (i / 2 + (i % 2 ? 0.75 : 0.25)) * std::numbers::pi;
        double E = r * r;
        worst_k = std::max(worst_k, std::abs(ids_derivative(V, E) - 1.0 / (2.0 * std::numbers::pi * std::sqrt(E))));
    }
    bool ok = worst_D < 1e-8 && worst_L < 1e-8 && worst_k < 1e-8;
    return {ok, "max|D-2cos sqrt E| " + num(worst_D) + ", max|L-sqrt(-E)| " + num(worst_L) + ", max|dk/dE - 1/(2pi sqrt E)| " +
                    num(worst_k) + " (tol 1e-8)"};
}

// 2. cocycle and determinant suite
Outcome criterion2() {
    std::mt19937_64 rng(20260417);
    std::vector<Potential> pots;
    for (int i = 0; i < 10; ++i) pots.push_back(random_cosine(rng, 1.0, 5.0));
    std::uniform_real_distribution<double> uE(-10.0, 10.0), ux(0.0, 1.0);  // split points within one period
    double worst_res = 0.0, worst_det = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const Potential& V = pots[trial % pots.size()];
        double E = uE(rng);
        double p[3] = {ux(rng), ux(rng), ux(rng)};
        std::sort(p, p + 3);
        double s = p[0], u = p[1], t = p[2];
        SL2Matrix ts = transfer_matrix(V, E, s, t), tu = transfer_matrix(V, E, u, t), us = transfer_matrix(V, E, s, u);
        double scale = std::max(1.0, tu.max_abs() * us.max_abs());
        worst_res = std::max(worst_res, distance(ts, tu * us) / scale);
        for (const auto& M : {ts, tu, us}) worst_det = std::max(worst_det, std::abs(M.det() - 1.0));
    }
    bool ok = worst_res < 1e-8 && worst_det < 1e-9;
    return {ok, "max relative cocycle residual " + num(worst_res) + " (tol 1e-8), max |det-1| " + num(worst_det) + " (tol 1e-9)"};
}

// 3. band edges against the finite-difference oracle; band counts
Outcome criterion3() {
    const double T = 2.0 * std::numbers::pi;
    double worst = 0.0;
    std::size_t edges = 0;
    bool counts_ok = true;
    std::string why;
    for (double lambda : {0.5, 1.0, 2.0}) {
        auto V = [lambda](double x) { return 2.0 * lambda * std::cos(x); };
        auto per = oracle::fd_hill_eigenvalues(V, T, 2048, 1.0);
        auto anti = oracle::fd_hill_eigenvalues(V, T, 2048, -1.0);
        Potential W = Potential::cosine_series(T, {2.0 * lambda});
        BandStructure b = band_structure(W, 2.0);
        if (static_cast<long long>(b.bands.size()) > b.bound) counts_ok = false;
        for (const auto& band : b.bands)
            for (auto [E, k] : {std::pair{band.lo, band.lo_kind}, std::pair{band.hi, band.hi_kind}}) {
                if (k == EdgeKind::window) continue;
                worst = std::max(worst, oracle::nearest_distance(k == EdgeKind::periodic ? per : anti, E));
                ++edges;
            }
    }
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        Potential V = random_cosine(rng, 0.5 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng), 5.0);
        try {
            BandStructure b = band_structure(V, 10.0);
            if (static_cast<long long>(b.bands.size()) > b.bound) counts_ok = false;
        } catch (const Error& e) {
            counts_ok = false;
            why = std::string(" (") + e.what() + ")";
        }
    }
    bool ok = worst < 1e-4 && counts_ok && edges > 0;
    return {ok, std::to_string(edges) + " edges, max distance to FD eigenvalue " + num(worst) +
                    " (tol 1e-4); band counts within bound: " + (counts_ok ? "yes" : "no") + why};
}

// 4. IDS mass of the first three bands
Outcome criterion4() {
    const double T = 2.0 * std::numbers::pi;
    Potential V = Potential::cosine_series(T, {2.0});
    BandStructure b = band_structure(V, 10.0);
    if (b.bands.size() < 3) return {false, "fewer than three bands found"};
    bool ok = true;
    std::string d = "T * mass:";
    for (int i = 0; i < 3; ++i) {
        double m = ids_mass(V, b.bands[i]);
        ok = ok && m >= 0.99 / T && m <= 1.01 / T;
        d += " " + num(m * T);
    }
    return {ok, d + " (window [0.99, 1.01])"};
}

// 5. IDS lower bound with the brute-force C1
Outcome criterion5() {
    const double T = 2.0 * std::numbers::pi;
    Potential V = Potential::cosine_series(T, {2.0});
    const double Q = 2.0, R = 2.0;
    double C1 = estimate_C1(&V, Q, R, 12345);
    LemmaConstants k = LemmaConstants::from_C1(Q, R, C1);
    BandStructure b = band_structure(V, R);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    int held = 0;
    double worst_ratio = 1e300;
    for (int i = 0; i < 25; ++i) {
        const Band& band = b.bands[i % b.bands.size()];
        double E = band.lo + u(rng) * (band.hi - band.lo);
        IdsBoundCheck c = verify_ids_bound(V, E, k);
        held += c.holds;
        worst_ratio = std::min(worst_ratio, c.lhs / c.rhs);
    }
    return {held == 25, "C1 = " + num(C1) + ", C0 = " + num(k.C0) + ", held at " + std::to_string(held) +
                            "/25, min lhs/rhs " + num(worst_ratio)};
}

// 6. thin-spectrum decay
Outcome criterion6() {
    Potential V = Potential::cosine_series(1.0, {2.0});
    const double eps = 0.25, R = 2.0, Lambda = 2.0;
    ThinSpecSettings ts;
    ThinSpecCover cov;
    try {
        cov = prepare_thin_cover(V, eps, R, Lambda, ts);
    } catch (const Error& e) {
        return {false, std::string("construction infeasible at desk scale: ") + e.what()};
    }
    auto lambdas = log_spaced(1.0 / Lambda, Lambda, 9);
    const long long N0 = cov.minimal_N();
    std::vector<ThinSpecReport> reps;
    std::vector<ThinSpecPlan> plans;
    for (long long N : {N0, 2 * N0, 4 * N0}) {
        try {
            plans.push_back(assemble_thin_plan(cov, N, ts));
            reps.push_back(verify_thin(plans.back(), lambdas));
        } catch (const Error& e) {
            return {false, "N = " + std::to_string(N) + ": " + e.what()};
        }
    }
    bool decreasing = reps[0].max_measure > reps[1].max_measure && reps[1].max_measure > reps[2].max_measure;
    double base = spectrum_measure(V, reps[2].argmax_lambda, R);
    bool small = reps[2].max_measure < 0.2 * base;
    auto growth = check_local_growth(plans.back(), lambdas, 10, ts.seed);
    std::size_t ok_growth = 0;
    for (const auto& g : growth) ok_growth += g.growth_ok;
    bool ok = decreasing && small && growth.size() == 10 && ok_growth == 10;
    return {ok, "max measures " + num(reps[0].max_measure) + " > " + num(reps[1].max_measure) + " > " +
                    num(reps[2].max_measure) + ": " + (decreasing ? "yes" : "no") + "; base " + num(base) +
                    "; growth " + std::to_string(ok_growth) + "/" + std::to_string(growth.size()) +
                    "; target exp(-sqrt T~) " + num(reps[2].target)};
}

// 7. hd0 schedule coherence
Outcome criterion7() {
    Potential V0 = Potential::cosine_series(2.0 * std::numbers::pi, {8.0});
    Hd0Settings hs;
    hs.keep_partial = true;
    Hd0Schedule s;
    try {
        s = hd0_sequence(V0, 0.5, 2, {0, 0}, hs);
    } catch (const Error& e) {
        return {false, e.what()};
    }
    std::string d;
    bool ok = true;
    if (s.levels.empty()) return {false, "level 1 failed: " + s.stop_reason};
    const Hd0Level& L1 = s.levels[0];
    bool eps1 = L1.epsilon == 0.25;
    double eps2 = std::min({L1.epsilon / 2.0, 0.5 * std::pow(2.0, -L1.T), L1.delta / (4.0 * L1.Lambda)});
    double eps2_recorded = s.levels.size() > 1 ? s.levels[1].epsilon : s.pending_epsilon;
    bool eps_exact = eps1 && eps2 == eps2_recorded;
    bool tail = tail_inequality_holds(s, 1);
    d += "eps1 " + num(L1.epsilon) + ", eps2 " + num(eps2_recorded) + " (recomputed " + num(eps2) +
         ", exact: " + (eps_exact ? "yes" : "no") + "); delta1 " + num(L1.delta) + ", tail inequality: " +
         (tail ? "yes" : "no");
    ok = eps_exact && tail;
    if (s.levels.size() < 2) {
        ok = false;
        d += "; level 2 not built: " + s.stop_reason;
    } else {
        const Hd0Level& L2 = s.levels[1];
        CoverSum c1 = hausdorff_upper_bound(s, 1, 0.5, 1.0, 1);
        CoverSum c2 = hausdorff_upper_bound(s, 2, 0.5, 1.0, 1);
        bool dec = c2.sum < c1.sum;
        double defect = level_distance(L1.V, L2.V, L1.T, 16);
        bool gordon = defect < tail_sum(s, 1);
        d += "; cover sums " + num(c1.sum) + " -> " + num(c2.sum) + ", level distance " + num(defect);
        ok = ok && dec && gordon;
    }
    return {ok, d};
}

// 8. Moebius fixed points and conjugators
Outcome criterion8() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0), th(0.05, std::numbers::pi - 0.05);
    double worst_fix = 0.0, worst_hs = 0.0, worst_orth = 0.0;
    for (int i = 0; i < 100; ++i) {
        SL2Matrix B{u(rng), u(rng), u(rng), u(rng)};
        double det = B.det();
        if (std::abs(det) < 0.2) {
            --i;
            continue;
        }
        double s = 1.0 / std::sqrt(std::abs(det));
        B = s * B;
        if (B.det() < 0) std::swap(B.a, B.b), std::swap(B.c, B.d);
        SL2Matrix M = B * rotation(th(rng)) * B.inverse();
        auto z = mobius_fixed_point(M);
        std::complex<double> Mz = (M.a * z + M.b) / (M.c * z + M.d);
        worst_fix = std::max(worst_fix, std::abs(Mz - z));
        SL2Matrix C = conjugator(z);
        SL2Matrix K = C * M * C.inverse();
        SL2Matrix KKt = K * SL2Matrix{K.a, K.c, K.b, K.d};
        worst_orth = std::max(worst_orth, distance(KKt, SL2Matrix::identity()));
        double hs_explicit = C.frobenius() * C.frobenius();
        worst_hs = std::max(worst_hs, std::abs(hs_explicit - hs_norm_sq(z)) / hs_norm_sq(z));
    }
    bool ok = worst_fix < 1e-10 && worst_hs < 1e-8 && worst_orth < 1e-8;
    return {ok, "max fixed-point residual " + num(worst_fix) + " (tol 1e-10), max HS mismatch " + num(worst_hs) +
                    ", max orthonormality defect " + num(worst_orth) + " (tol 1e-8)"};
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: acceptance [--criterion k]\n");
            return 2;
        }
    }
    std::vector<std::function<Outcome()>> all = {criterion1, criterion2, criterion3, criterion4,
                                                 criterion5, criterion6, criterion7, criterion8};
    if (only < 0 || only > 8) {
        std::fprintf(stderr, "criterion must be 1..8\n");
        return 2;
    }
    bool every = true;
    for (int k = 1; k <= 8; ++k) {
        if (only && k != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[k - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s  %s  [%.1f s]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        every = every && o.pass;
    }
    return every ? 0 : 1;
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hill/error.hpp"
#include "hill/floquet.hpp"
#include "hill/lemma_constants.hpp"
#include "hill/parallel.hpp"
#include "hill/potential.hpp"
#include "hill/propagator.hpp"

namespace hill {

using Interval = std::pair<double, double>;

// ---------------------------------------------------------------- intervals

namespace detail {

inline std::vector<Interval> merge_intervals(std::vector<Interval> v) {
    std::sort(v.begin(), v.end());
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (iv.second < iv.first) continue;
        if (!out.empty() && iv.first <= out.back().second) out.back().second = std::max(out.back().second, iv.second);
        else out.push_back(iv);
    }
    return out;
}

inline std::vector<Interval> intersect_intervals(const std::vector<Interval>& a, const std::vector<Interval>& b) {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double lo = std::max(a[i].first, b[j].first), hi = std::min(a[i].second, b[j].second);
        if (lo <= hi) out.emplace_back(lo, hi);
        if (a[i].second < b[j].second) ++i;
        else ++j;
    }
    return out;
}

} // namespace detail

// Points of [-R, R] lying within distance m of every shifted copy
// sigma + shift. Empty means the gaps of the copies cover the window with
// margin m.
inline std::vector<Interval> common_spectrum(const std::vector<Interval>& sigma, const std::vector<double>& shifts,
                                             double R, double m = 0.0) {
    std::vector<Interval> acc{{-R, R}};
    for (double s : shifts) {
        std::vector<Interval> moved;
        moved.reserve(sigma.size());
        for (const auto& [lo, hi] : sigma) moved.emplace_back(lo + s - m, hi + s + m);
        acc = detail::intersect_intervals(acc, detail::merge_intervals(std::move(moved)));
        if (acc.empty()) break;
    }
    return acc;
}

// Largest m such that every E in [-R, R] is at distance >= m from at least
// one shifted copy; 0 if the copies do not cover.
inline double cover_margin(const std::vector<Interval>& sigma, const std::vector<double>& shifts, double R) {
    if (!common_spectrum(sigma, shifts, R, 0.0).empty()) return 0.0;
    double lo = 0.0, hi = 2.0 * R + 1.0;
    if (common_spectrum(sigma, shifts, R, hi).empty()) return hi;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (common_spectrum(sigma, shifts, R, mid).empty()) lo = mid;
        else hi = mid;
    }
    return lo;
}

inline std::vector<Interval> band_intervals(const BandStructure& bs) {
    std::vector<Interval> v;
    for (const auto& b : bs.bands) v.emplace_back(b.lo, b.hi);
    return detail::merge_intervals(std::move(v));
}

// Lengths of gaps between consecutive bands that meet [-R, R]; closed gaps
// count as length 0.
inline std::vector<double> gaps_in_window(const BandStructure& bs, double R) {
    std::vector<double> g;
    for (std::size_t i = 1; i < bs.bands.size(); ++i) {
        double a = bs.bands[i - 1].hi, b = bs.bands[i].lo;
        if (b < -R || a > R) continue;
        g.push_back(bs.bands[i].lo_degenerate ? 0.0 : b - a);
    }
    return g;
}

// ---------------------------------------------------------------- break points

// N'-break points of lambda V in [-R, R]: band edges of the T-periodic
// operator together with the solutions of D_T(E) = 2 cos(pi m / N'), which
// are the band edges of the same operator viewed as N'T-periodic.
inline std::vector<double> break_points(const Potential& V, double lambda, int Nprime, double R,
                                        const BandSettings& bs = {}) {
    if (Nprime < 1) throw InvalidArgument("thinspec", "break points: N' must be positive");
    Potential W = scale(V, lambda);
    BandStructure bands = band_structure(W, R, bs);
    std::function<double(double)> D = [&](double E) { return discriminant(W, E, bs.propagation); };
    std::vector<double> pts;
    for (const auto& b : bands.bands) {
        double dlo = b.lo_kind == EdgeKind::window ? D(b.lo) : (b.lo_kind == EdgeKind::periodic ? 2.0 : -2.0);
        double dhi = b.hi_kind == EdgeKind::window ? D(b.hi) : (b.hi_kind == EdgeKind::periodic ? 2.0 : -2.0);
        if (b.lo_kind != EdgeKind::window) pts.push_back(b.lo);
        if (b.hi_kind != EdgeKind::window) pts.push_back(b.hi);
        double lo_v = std::min(dlo, dhi), hi_v = std::max(dlo, dhi);
        for (int m = 1; m < Nprime; ++m) {
            double level = 2.0 * std::cos(std::numbers::pi * m / Nprime);
            if (!(level > lo_v && level < hi_v)) continue;
            pts.push_back(detail::bisect_level(D, level, b.lo, dlo, b.hi, bs));
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// Longest stretch of sigma(H_{lambda V}) within [-R, R] between consecutive
// N'-break points (window ends act as cuts).
inline double break_point_spacing(const Potential& V, double lambda, int Nprime, double R,
                                  const BandSettings& bs = {}) {
    Potential W = scale(V, lambda);
    BandStructure bands = band_structure(W, R, bs);
    std::vector<double> pts = break_points(V, lambda, Nprime, R, bs);
    double best = 0.0;
    for (const auto& b : bands.bands) {
        std::vector<double> cuts{b.lo, b.hi};
        for (double p : pts)
            if (p > b.lo && p < b.hi) cuts.push_back(p);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 1; i < cuts.size(); ++i) best = std::max(best, cuts[i] - cuts[i - 1]);
    }
    return best;
}

// ---------------------------------------------------------------- gaps

struct GapSearchSettings {
    double Lambda = 1.0;     // the perturbation must stay below epsilon / (9 Lambda)
    double gap_min = 1e-7;
    int max_tries = 8;
    double window_pad = 0.5;
    std::uint64_t seed = 1;
    BandSettings bands{};
};

struct GapSearchResult {
    Potential potential;
    double min_gap = 0.0;
    double distance = 0.0;  // certified bound on |V' - V|
    int tries = 0;
    bool unchanged = false;
};

class GapSearchFailed : public Error {
public:
    GapSearchFailed(const std::string& what, GapSearchResult best) : Error("thinspec/gaps", what), best_(std::move(best)) {}
    const GapSearchResult& best() const noexcept { return best_; }

private:
    GapSearchResult best_;
};

inline double min_gap_in_window(const Potential& V, double lambda, double R, const GapSearchSettings& gs) {
    BandStructure bs = band_structure(scale(V, lambda), R + gs.window_pad, gs.bands);
    auto g = gaps_in_window(bs, R);
    return g.empty() ? std::numeric_limits<double>::infinity() : *std::min_element(g.begin(), g.end());
}

// V' close to V (V regarded with its declared period T') such that every gap
// of sigma(H_{lambda V'}) meeting [-R, R] has length >= gap_min. Random
// cosine perturbations at the frequencies m / T' are tried.
inline GapSearchResult open_gaps_perturbation(const Potential& V, double lambda, double R, double epsilon,
                                              const GapSearchSettings& gs = {}) {
    if (!(epsilon > 0.0)) throw InvalidArgument("thinspec/gaps", "epsilon must be positive");
    if (!(lambda > 0.0) || !(R > 0.0) || !(gs.Lambda > 0.0))
        throw InvalidArgument("thinspec/gaps", "lambda, R and Lambda must be positive");
    const double budget = epsilon / (9.0 * gs.Lambda);
    GapSearchResult best{V, min_gap_in_window(V, lambda, R, gs), 0.0, 0, true};
    if (best.min_gap >= gs.gap_min) return best;

    const double Tp = V.period();
    const long long M = band_count_bound(scale(V, lambda), R + gs.window_pad) + 2;
    std::mt19937_64 rng(gs.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int attempt = 1; attempt <= gs.max_tries; ++attempt) {
        std::vector<double> c(static_cast<std::size_t>(M)), s(static_cast<std::size_t>(M));
        for (long long m = 0; m < M; ++m) {
            c[static_cast<std::size_t>(m)] = unit(rng);
            s[static_cast<std::size_t>(m)] = unit(rng);
        }
        Potential q = tighten_sup_bound(Potential::cosine_series(Tp, c, 0.0, s));
        double f = 0.9 * budget / q.sup_bound();
        for (auto& v : c) v *= f;
        for (auto& v : s) v *= f;
        q = tighten_sup_bound(Potential::cosine_series(Tp, c, 0.0, s));
        if (!(q.sup_bound() < budget)) continue;
        Potential cand = add(V, q);
        double g = min_gap_in_window(cand, lambda, R, gs);
        if (g > best.min_gap || best.unchanged) best = {cand, g, q.sup_bound(), attempt, false};
        best.tries = attempt;
        if (best.min_gap >= gs.gap_min) return best;
    }
    throw GapSearchFailed("no perturbation below " + std::to_string(budget) + " opened all gaps to " +
                              std::to_string(gs.gap_min) + "; best minimal gap " + std::to_string(best.min_gap),
                          best);
}

// ---------------------------------------------------------------- cover

struct CoverFamily {
    std::vector<Potential> members;  // U_{-k}, ..., U_k
    double lambda0 = 1.0;
    double gamma = 0.0;
    double gamma0 = 0.0;
    int k = 0;
    double margin = 0.0;  // cover margin at lambda0
    Potential vprime;
};

class CoverFailure : public Error {
public:
    CoverFailure(const std::string& what, Interval uncovered)
        : Error("thinspec/cover", what), uncovered_(uncovered) {}
    Interval uncovered() const noexcept { return uncovered_; }

private:
    Interval uncovered_;
};

inline std::vector<double> family_shifts(const CoverFamily& f, double lambda) {
    std::vector<double> s;
    for (int i = -f.k; i <= f.k; ++i) s.push_back(lambda * i * f.gamma);
    return s;
}

// Cover margin of the family at coupling lambda, using
// sigma(lambda U_i) = sigma(lambda V') + lambda i gamma.
inline double family_margin(const CoverFamily& f, double lambda, double R, const BandSettings& bs) {
    double reach = lambda * f.k * f.gamma;
    BandStructure b = band_structure(scale(f.vprime, lambda), R + reach + 1e-6, bs);
    return cover_margin(band_intervals(b), family_shifts(f, lambda), R);
}

inline CoverFamily resolvent_cover_family(const Potential& Vprime, double lambda0, double R, double epsilon,
                                          double Lambda, const BandSettings& bs = {}, int grid_points = 10000) {
    if (!(epsilon > 0.0) || !(Lambda > 0.0) || !(lambda0 > 0.0))
        throw InvalidArgument("thinspec/cover", "epsilon, Lambda and lambda0 must be positive");
    const double Rw = R + lambda0 * epsilon;  // |lambda0 i gamma| <= lambda0 (epsilon/3 + gamma) < Rw - R
    BandStructure b0 = band_structure(scale(Vprime, lambda0), Rw, bs);
    auto gaps = gaps_in_window(b0, R);
    double gamma0 = gaps.empty() ? std::numeric_limits<double>::infinity() : *std::min_element(gaps.begin(), gaps.end());
    if (!(gamma0 > 0.0)) throw InvalidArgument("thinspec/cover", "a gap meeting the window is closed (gamma0 = 0)");
    CoverFamily f;
    f.vprime = Vprime;
    f.lambda0 = lambda0;
    f.gamma0 = gamma0;
    f.gamma = std::min(epsilon / 3.0, gamma0 / (2.0 * Lambda));
    f.k = static_cast<int>(std::ceil(epsilon / (3.0 * f.gamma) - 1e-12));
    for (int i = -f.k; i <= f.k; ++i) f.members.push_back(shift(Vprime, i * f.gamma));

    auto sigma = band_intervals(b0);
    auto shifts = family_shifts(f, lambda0);
    auto common = common_spectrum(sigma, shifts, R);
    if (!common.empty())
        throw CoverFailure("resolvent sets do not cover the window at lambda " + std::to_string(lambda0) + " near [" +
                               std::to_string(common.front().first) + ", " + std::to_string(common.front().second) + "]",
                           common.front());
    // pointwise confirmation on a uniform grid
    for (int i = 0; i < grid_points; ++i) {
        double E = -R + 2.0 * R * i / std::max(1, grid_points - 1);
        bool covered = false;
        for (double s : shifts) {
            bool in_spec = false;
            for (const auto& [lo, hi] : sigma)
                if (E - s >= lo && E - s <= hi) {
                    in_spec = true;
                    break;
                }
            if (!in_spec) {
                covered = true;
                break;
            }
        }
        if (!covered) throw CoverFailure("grid point not covered at E = " + std::to_string(E), {E, E});
    }
    f.margin = cover_margin(sigma, shifts, R);
    return f;
}

// ---------------------------------------------------------------- Lyapunov floor

struct LyapunovFloor {
    double eta = 0.0;        // safety * grid minimum
    double grid_min = 0.0;
    double argmin_E = 0.0, argmin_lambda = 0.0;
    int E_points = 0, lambda_points = 0;
    double safety = 0.9;
};

inline std::vector<double> log_spaced(double a, double b, int n) {
    std::vector<double> v;
    if (n == 1 || a == b) return {a};
    for (int i = 0; i < n; ++i) v.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
    return v;
}

inline LyapunovFloor min_max_lyapunov(const std::vector<Potential>& family, double Lambda, double R, int E_points = 201,
                                      int lambda_points = 9, double safety = 0.9,
                                      const PropagationSettings& cfg = {}) {
    if (family.empty()) throw InvalidArgument("thinspec/lyapunov", "empty family");
    if (!(Lambda >= 1.0)) throw InvalidArgument("thinspec/lyapunov", "Lambda must be at least 1");
    auto lambdas = log_spaced(1.0 / Lambda, Lambda, Lambda == 1.0 ? 1 : lambda_points);
    std::vector<double> Es;
    for (int i = 0; i < E_points; ++i) Es.push_back(-R + 2.0 * R * i / std::max(1, E_points - 1));
    std::vector<double> best(lambdas.size() * Es.size(), 0.0);
    std::vector<std::vector<Potential>> scaled(lambdas.size());
    for (std::size_t a = 0; a < lambdas.size(); ++a)
        for (const auto& W : family) scaled[a].push_back(scale(W, lambdas[a]));
    parallel_for(best.size(), [&](std::size_t idx) {
        std::size_t a = idx / Es.size(), e = idx % Es.size();
        double mx = 0.0;
        for (const auto& W : scaled[a]) mx = std::max(mx, lyapunov(W, Es[e], cfg));
        best[idx] = mx;
    });
    auto it = std::min_element(best.begin(), best.end());
    std::size_t idx = static_cast<std::size_t>(it - best.begin());
    LyapunovFloor out;
    out.grid_min = *it;
    out.eta = safety * *it;
    out.argmin_lambda = lambdas[idx / Es.size()];
    out.argmin_E = Es[idx % Es.size()];
    out.E_points = E_points;
    out.lambda_points = static_cast<int>(lambdas.size());
    out.safety = safety;
    if (!(out.eta > 0.0))
        throw Error("thinspec/lyapunov", "cover does not yield a positive Lyapunov floor (zero at E = " +
                                             std::to_string(out.argmin_E) + ", lambda = " +
                                             std::to_string(out.argmin_lambda) + ")");
    return out;
}

// ---------------------------------------------------------------- pipeline

struct ThinSpecSettings {
    std::uint64_t seed = 1;
    int spacing_lambda_points = 9;
    int max_Nprime = 512;
    double gap_min = 1e-7;
    int max_tries = 8;
    std::size_t max_family = 64;
    std::size_t max_segments = 8;
    std::size_t max_lambda_steps = 4000;
    int cover_grid = 10000;
    int eta_E_points = 201;
    int eta_lambda_points = 9;
    double eta_safety = 0.9;
    double max_total_period = 2000.0;
    BandSettings bands{};
};

// One lambda-interval of the compactness argument: a gaps-open V' at
// lambda0 and its shift family, certified on [lambda_lo, lambda_hi].
struct CoverSegment {
    CoverFamily family;
    double lambda_lo = 0.0, lambda_hi = 0.0;
    double min_gap = 0.0;
    double perturbation = 0.0;
    std::size_t lambda_steps = 0;
};

struct ThinSpecCover {
    Potential base;
    double epsilon = 0.0, R = 0.0, Lambda = 1.0;
    int Nprime = 1;
    double Tprime = 0.0;
    double max_spacing = 0.0;
    std::vector<CoverSegment> segments;
    std::vector<Potential> cover;  // W_1..W_l
    LyapunovFloor floor;
    double gamma = 0.0, gamma0 = 0.0;
    int k = 0;
    std::uint64_t seed = 1;

    std::size_t ell() const { return cover.size(); }
    long long minimal_N() const { return 5LL * static_cast<long long>(ell()) * Nprime; }
};

struct ThinSpecPlan {
    ThinSpecCover cover;
    long long N = 0;
    long long Ntilde = 0;
    BlockLayout layout;
    Potential result;

    const Potential& base() const { return cover.base; }
    double eta() const { return cover.floor.eta; }
    double total_period() const { return layout.total_period; }
    std::size_t ell() const { return cover.ell(); }
};

namespace detail {

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const BudgetExceeded&) {
        throw;
    } catch (const GapSearchFailed&) {
        throw;
    } catch (const CoverFailure&) {
        throw;
    } catch (const Error& e) {
        if (e.stage().rfind("thinspec", 0) == 0) throw;
        throw Error(stage, e.what());
    }
}

} // namespace detail

// Smallest N' (doubling, then bisection) whose break-point spacing is below
// epsilon / 9 at every grid coupling.
inline std::pair<int, double> choose_Nprime(const Potential& V, double epsilon, double R, double Lambda,
                                            const ThinSpecSettings& ts) {
    auto lambdas = log_spaced(1.0 / Lambda, Lambda, Lambda == 1.0 ? 1 : ts.spacing_lambda_points);
    auto worst = [&](int Np) {
        std::vector<double> s(lambdas.size());
        parallel_for(lambdas.size(), [&](std::size_t i) { s[i] = break_point_spacing(V, lambdas[i], Np, R, ts.bands); });
        return *std::max_element(s.begin(), s.end());
    };
    const double target = epsilon / 9.0;
    int hi = 1;
    double whi = worst(hi);
    while (!(whi < target)) {
        if (2 * hi > ts.max_Nprime)
            throw BudgetExceeded("thinspec/break-points", "break-point spacing " + std::to_string(whi) + " at N' = " +
                                                              std::to_string(hi) + " is still above epsilon/9 = " +
                                                              std::to_string(target) + "; N' budget " +
                                                              std::to_string(ts.max_Nprime));
        hi *= 2;
        whi = worst(hi);
    }
    int lo = hi / 2;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        double w = worst(mid);
        if (w < target) {
            hi = mid;
            whi = w;
        } else {
            lo = mid;
        }
    }
    return {hi, whi};
}

// Stages 1-3: N', gaps-open perturbations, shift families certified over
// [1/Lambda, Lambda], Lyapunov floor.
inline ThinSpecCover prepare_thin_cover(const Potential& V, double epsilon, double R, double Lambda,
                                        const ThinSpecSettings& ts = {}) {
    if (!(epsilon > 0.0)) throw InvalidArgument("thinspec", "epsilon must be positive");
    if (!(R >= 1.0) || !(Lambda >= 1.0)) throw InvalidArgument("thinspec", "R and Lambda must be at least 1");
    ThinSpecCover c;
    c.base = V;
    c.epsilon = epsilon;
    c.R = R;
    c.Lambda = Lambda;
    c.seed = ts.seed;

    auto [Np, spacing] = detail::staged("thinspec/break-points", [&] { return choose_Nprime(V, epsilon, R, Lambda, ts); });
    c.Nprime = Np;
    c.max_spacing = spacing;
    c.Tprime = Np * V.period();
    // a family has at least 3 members, so N >= 15 N' whatever the cover turns out to be
    const double shortest = 15.0 * c.Tprime;
    if (shortest > ts.max_total_period)
        throw BudgetExceeded("thinspec/break-points", "N' = " + std::to_string(Np) + " forces a total period of at least " +
                                                          std::to_string(shortest) + ", above the budget " +
                                                          std::to_string(ts.max_total_period));
    const Potential Vext = extend_period(V, Np);

    double lambda = 1.0 / Lambda;
    c.gamma = std::numeric_limits<double>::infinity();
    c.gamma0 = std::numeric_limits<double>::infinity();
    std::size_t steps = 0;
    while (true) {
        if (c.segments.size() >= ts.max_segments)
            throw BudgetExceeded("thinspec/cover", "more than " + std::to_string(ts.max_segments) +
                                                       " coupling segments needed");
        CoverSegment seg;
        GapSearchSettings gs;
        gs.Lambda = Lambda;
        gs.gap_min = ts.gap_min;
        gs.max_tries = ts.max_tries;
        gs.seed = ts.seed + 7919ULL * c.segments.size();
        gs.bands = ts.bands;
        auto found = detail::staged("thinspec/gaps", [&] { return open_gaps_perturbation(Vext, lambda, R, epsilon, gs); });
        seg.min_gap = found.min_gap;
        seg.perturbation = found.distance;
        seg.family = detail::staged("thinspec/cover", [&] {
            return resolvent_cover_family(found.potential, lambda, R, epsilon, Lambda, ts.bands, ts.cover_grid);
        });
        if (c.cover.size() + seg.family.members.size() > ts.max_family)
            throw BudgetExceeded("thinspec/cover",
                                 "family size " + std::to_string(c.cover.size() + seg.family.members.size()) +
                                     " exceeds budget " + std::to_string(ts.max_family) + " (gamma0 = " +
                                     std::to_string(seg.family.gamma0) + ", k = " + std::to_string(seg.family.k) +
                                     ", N' = " + std::to_string(Np) + ", minimal N would be " +
                                     std::to_string(5LL * static_cast<long long>(c.cover.size() +
                                                                                 seg.family.members.size()) * Np) +
                                     ")");
        double norm = 0.0;
        for (const auto& U : seg.family.members) norm = std::max(norm, tighten_sup_bound(U).sup_bound());
        norm = std::max(norm, 1e-300);
        // certified neighbourhoods (lambda - m/|U|, lambda + m/|U|)
        seg.lambda_lo = lambda;
        double at = lambda, margin = seg.family.margin;
        double reach = at + margin / norm;
        while (reach < Lambda) {
            if (++steps > ts.max_lambda_steps)
                throw BudgetExceeded("thinspec/cover", "coupling certification exceeded " +
                                                           std::to_string(ts.max_lambda_steps) + " steps");
            double m = detail::staged("thinspec/cover",
                                      [&] { return family_margin(seg.family, reach, R, ts.bands); });
            if (!(m > 1e-12)) break;
            at = reach;
            reach = at + m / norm;
            ++seg.lambda_steps;
        }
        seg.lambda_hi = std::min(reach, Lambda);
        c.gamma = std::min(c.gamma, seg.family.gamma);
        c.gamma0 = std::min(c.gamma0, seg.family.gamma0);
        c.k = std::max(c.k, seg.family.k);
        for (const auto& U : seg.family.members) c.cover.push_back(U);
        c.segments.push_back(seg);
        if (reach >= Lambda) break;
        if (!(reach > lambda))
            throw CoverFailure("cover margin vanishes at lambda " + std::to_string(lambda), {lambda, lambda});
        lambda = reach;
    }
    c.floor = detail::staged("thinspec/lyapunov", [&] {
        return min_max_lyapunov(c.cover, Lambda, R, ts.eta_E_points, ts.eta_lambda_points, ts.eta_safety,
                                ts.bands.propagation);
    });
    return c;
}

// Stages 4-5 for a given family: block layout and the assembled potential.
inline ThinSpecPlan assemble_thin_plan(const ThinSpecCover& c, long long N, const ThinSpecSettings& ts = {}) {
    const long long ell = static_cast<long long>(c.ell());
    if (ell < 1) throw InvalidArgument("thinspec/layout", "empty cover family");
    const long long unit = ell * c.Nprime;
    long long Ntilde = N / unit - 2;
    if (Ntilde < 3)
        throw InvalidArgument("thinspec/layout", "N too small: N = " + std::to_string(N) + " gives Ntilde = " +
                                                     std::to_string(std::max(Ntilde, 0LL)) + "; minimal usable N is " +
                                                     std::to_string(c.minimal_N()) + " for l = " + std::to_string(ell) +
                                                     ", N' = " + std::to_string(c.Nprime));
    const double total = static_cast<double>(N) * c.base.period();
    if (total > ts.max_total_period)
        throw BudgetExceeded("thinspec/layout", "total period " + std::to_string(total) + " exceeds budget " +
                                                    std::to_string(ts.max_total_period));
    ThinSpecPlan p;
    p.cover = c;
    p.N = N;
    p.Ntilde = Ntilde;
    p.layout = make_block_layout(c.cover, c.Tprime, static_cast<int>(Ntilde + 1), total);
    p.result = detail::staged("thinspec/assemble", [&] { return concatenate_blocks(p.layout, c.base, c.epsilon); });
    return p;
}

inline ThinSpecPlan build_thin_potential(const Potential& V, double epsilon, double R, double Lambda, long long N,
                                         const ThinSpecSettings& ts = {}) {
    if (N < 1) throw InvalidArgument("thinspec/layout", "N too small");
    return assemble_thin_plan(prepare_thin_cover(V, epsilon, R, Lambda, ts), N, ts);
}

// A cover assembled from a caller-supplied family (no search).
inline ThinSpecCover cover_from_family(const Potential& V, std::vector<Potential> family, int Nprime, double epsilon,
                                       double R, double Lambda, const ThinSpecSettings& ts = {}) {
    ThinSpecCover c;
    c.base = V;
    c.epsilon = epsilon;
    c.R = R;
    c.Lambda = Lambda;
    c.Nprime = Nprime;
    c.Tprime = Nprime * V.period();
    c.cover = std::move(family);
    c.seed = ts.seed;
    try {
        c.floor = min_max_lyapunov(c.cover, Lambda, R, ts.eta_E_points, ts.eta_lambda_points, ts.eta_safety,
                                   ts.bands.propagation);
    } catch (const Error&) {
        c.floor = {};  // a family with spectrum in the window has no floor
    }
    return c;
}

// ---------------------------------------------------------------- verification

struct ThinSpecReport {
    std::vector<double> lambdas;
    std::vector<double> measures;
    double max_measure = 0.0;
    double argmax_lambda = 0.0;
    double target = 0.0;     // exp(-sqrt(T~))
    double bound_rhs = 0.0;  // C T~ exp(-eta T~ / (4 l))
    double C = 0.0;
    double total_period = 0.0;
};

// C = (sqrt(R + Q) / pi + 1 / T~) / (C0 T') with Q = Lambda (|V| + epsilon):
// band count times the per-band bound from the IDS inequality.
inline double thin_bound_constant(const ThinSpecPlan& p, const LemmaConstants& k) {
    double T = p.total_period();
    return (std::sqrt(p.cover.R + k.Q) / std::numbers::pi + 1.0 / T) / (k.C0 * p.cover.Tprime);
}

inline ThinSpecReport verify_thin(const ThinSpecPlan& p, const std::vector<double>& lambdas,
                                  const std::optional<LemmaConstants>& constants = std::nullopt,
                                  const BandSettings& bs = {}) {
    const double L = p.cover.Lambda;
    for (double l : lambdas)
        if (!(l >= 1.0 / L * (1.0 - 1e-12) && l <= L * (1.0 + 1e-12)))
            throw InvalidArgument("thinspec/verify", "lambda " + std::to_string(l) + " outside [1/Lambda, Lambda]");
    ThinSpecReport r;
    r.lambdas = lambdas;
    r.measures.resize(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        r.measures[i] = spectrum_measure(p.result, lambdas[i], p.cover.R, bs);
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        if (i == 0 || r.measures[i] > r.max_measure) {
            r.max_measure = r.measures[i];
            r.argmax_lambda = lambdas[i];
        }
    r.total_period = p.total_period();
    r.target = std::exp(-std::sqrt(r.total_period));
    if (constants) {
        r.C = thin_bound_constant(p, *constants);
        r.bound_rhs = r.C * r.total_period * std::exp(-p.eta() * r.total_period / (4.0 * static_cast<double>(p.ell())));
    }
    return r;
}

struct GrowthSample {
    double E = 0.0, lambda = 0.0, t = 0.0;
    std::size_t block = 0;  // 1-based j
    double L = 0.0;
    double log_norm = 0.0;        // log |A(s_j + t - 2T', s_{j-1} + t)|
    double log_required = 0.0;    // Ntilde T' L
    double log_conj = 0.0;        // log of the larger conjugator norm
    double log_conj_required = 0.0;  // T~ eta / (4 l)
    bool elliptic = false;
    bool growth_ok = false;
    bool conj_ok = false;
};

// Samples in-band energies of lambda V~ (band midpoints) and checks the
// growth of block transfer matrices and of the conjugators.
inline std::vector<GrowthSample> check_local_growth(const ThinSpecPlan& p, const std::vector<double>& lambdas,
                                                    std::size_t count, std::uint64_t seed, double tol = 1e-6,
                                                    const BandSettings& bs = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& L = p.layout;
    const double Tp = p.cover.Tprime;
    std::vector<std::pair<double, double>> candidates;  // (lambda, E)
    for (double lam : lambdas) {
        BandStructure b = band_structure(scale(p.result, lam), p.cover.R, bs);
        for (const auto& band : b.bands)
            if (band.lo_kind != EdgeKind::window && band.hi_kind != EdgeKind::window)
                candidates.emplace_back(lam, 0.5 * (band.lo + band.hi));
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<GrowthSample> out;
    for (const auto& [lam, E] : candidates) {
        if (out.size() >= count) break;
        GrowthSample g;
        g.E = E;
        g.lambda = lam;
        g.t = Tp * unit(rng);
        for (std::size_t j = 0; j < p.ell(); ++j) {
            double Lj = lyapunov(scale(L.blocks[j], lam), E, bs.propagation);
            if (Lj > g.L) {
                g.L = Lj;
                g.block = j + 1;
            }
        }
        if (!(g.L >= p.eta())) continue;
        Potential W = scale(p.result, lam);
        double a = L.anchors[g.block - 1] + g.t;
        double b = L.anchors[g.block] + g.t - 2.0 * Tp;
        g.log_norm = transfer_matrix_scaled(W, E, a, b, bs.propagation).log_norm();
        g.log_required = static_cast<double>(p.Ntilde) * Tp * g.L;
        g.growth_ok = g.log_norm >= g.log_required + std::log1p(-tol);
        g.log_conj_required = p.total_period() * p.eta() / (4.0 * static_cast<double>(p.ell()));
        try {
            double best = 0.0;
            for (double base : {a, b}) {
                auto z = mobius_fixed_point(monodromy(W, E, base, bs.propagation), 0.0);
                best = std::max(best, std::log(operator_norm_from_hs(hs_norm_sq(z))));
            }
            g.elliptic = true;
            g.log_conj = best;
            g.conj_ok = best >= g.log_conj_required + std::log1p(-tol);
        } catch (const NotElliptic&) {
            g.elliptic = false;
        }
        out.push_back(g);
    }
    return out;
}

} // namespace hill

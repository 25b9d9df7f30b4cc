#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hill/error.hpp"
#include "hill/potential.hpp"
#include "hill/sl2.hpp"

namespace hill {

struct PropagationSettings {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double max_step = 1.0;
    double det_tol = 1e-9;
    std::size_t max_steps = 20'000'000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) || !(det_tol > 0.0) || max_steps == 0)
            throw InvalidArgument("propagator", "settings must be positive");
    }
};

namespace rk {

// Dormand-Prince 8(5,3) coefficients (Hairer, Norsett, Wanner).
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double bhh1 = 0.244094488188976377952755905512e+00;
constexpr double bhh2 = 0.733846688281611857341361741547e+00;
constexpr double bhh3 = 0.220588235294117647058823529412e-01;

constexpr double er1 = 0.1312004499419488073250102996e-01;
constexpr double er6 = -0.1225156446376204440720569753e+01;
constexpr double er7 = -0.4957589496572501915214079952e+00;
constexpr double er8 = 0.1664377182454986536961530415e+01;
constexpr double er9 = -0.3503288487499736816886487290e+00;
constexpr double er10 = 0.3341791187130174790297318841e+00;
constexpr double er11 = 0.8192320648511571246570742613e-01;
constexpr double er12 = -0.2235530786388629525884427845e-01;

} // namespace rk

namespace detail {

using State = std::array<double, 4>;  // a, b, c, d

// Y' = [[0, q], [1, 0]] Y with q = V - E.
inline State rhs(double q, const State& y) { return {q * y[2], q * y[3], y[0], y[1]}; }

template <class... Ts>
inline State combine(const State& y, double h, const Ts&... terms) {
    State out = y;
    auto add = [&](double w, const State& k) {
        for (int i = 0; i < 4; ++i) out[i] += h * w * k[i];
    };
    (add(terms.first, *terms.second), ...);
    return out;
}

struct Term {
    double first;
    const State* second;
};

inline double state_max(const State& y) {
    return std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2]), std::abs(y[3])});
}

struct IntegratorState {
    State y;
    double log_scale = 0.0;
    double h = 0.0;  // last accepted step magnitude, reused across segments
    std::size_t steps = 0;
};

// Adaptive DOP853 from x0 to x1 (either direction); q(x) = V(x) - E must be
// smooth on the open segment.
template <class Q>
void dop853_segment(const Q& q, double x0, double x1, IntegratorState& st, const PropagationSettings& cfg) {
    using namespace rk;
    const double span = x1 - x0;
    if (span == 0.0) return;
    const double dir = span > 0 ? 1.0 : -1.0;
    double x = x0;
    double h = st.h > 0.0 ? st.h : std::min(cfg.max_step, 0.1 / (1.0 + std::sqrt(std::abs(q(x0)))));
    h = std::min({h, cfg.max_step, std::abs(span)});
    State& y = st.y;
    bool last_rejected = false;
    while (dir * (x1 - x) > 0.0) {
        if (st.steps++ >= cfg.max_steps) throw PropagationError("step budget exhausted", x0, x1);
        bool final_step = false;
        if (h >= dir * (x1 - x)) {
            h = dir * (x1 - x);
            final_step = true;
        }
        const double hs = dir * h;
        State k1 = rhs(q(x), y);
        State k2 = rhs(q(x + c2 * hs), combine(y, hs, Term{a21, &k1}));
        State k3 = rhs(q(x + c3 * hs), combine(y, hs, Term{a31, &k1}, Term{a32, &k2}));
        State k4 = rhs(q(x + c4 * hs), combine(y, hs, Term{a41, &k1}, Term{a43, &k3}));
        State k5 = rhs(q(x + c5 * hs), combine(y, hs, Term{a51, &k1}, Term{a53, &k3}, Term{a54, &k4}));
        State k6 = rhs(q(x + c6 * hs), combine(y, hs, Term{a61, &k1}, Term{a64, &k4}, Term{a65, &k5}));
        State k7 = rhs(q(x + c7 * hs),
                       combine(y, hs, Term{a71, &k1}, Term{a74, &k4}, Term{a75, &k5}, Term{a76, &k6}));
        State k8 = rhs(q(x + c8 * hs), combine(y, hs, Term{a81, &k1}, Term{a84, &k4}, Term{a85, &k5},
                                               Term{a86, &k6}, Term{a87, &k7}));
        State k9 = rhs(q(x + c9 * hs), combine(y, hs, Term{a91, &k1}, Term{a94, &k4}, Term{a95, &k5},
                                               Term{a96, &k6}, Term{a97, &k7}, Term{a98, &k8}));
        State k10 = rhs(q(x + c10 * hs), combine(y, hs, Term{a101, &k1}, Term{a104, &k4}, Term{a105, &k5},
                                                 Term{a106, &k6}, Term{a107, &k7}, Term{a108, &k8},
                                                 Term{a109, &k9}));
        State k11 = rhs(q(x + c11 * hs), combine(y, hs, Term{a111, &k1}, Term{a114, &k4}, Term{a115, &k5},
                                                 Term{a116, &k6}, Term{a117, &k7}, Term{a118, &k8},
                                                 Term{a119, &k9}, Term{a1110, &k10}));
        const double xe = final_step ? x1 : x + hs;
        State k12 = rhs(q(xe), combine(y, hs, Term{a121, &k1}, Term{a124, &k4}, Term{a125, &k5}, Term{a126, &k6},
                                       Term{a127, &k7}, Term{a128, &k8}, Term{a129, &k9}, Term{a1210, &k10},
                                       Term{a1211, &k11}));
        State incr{};
        for (int i = 0; i < 4; ++i)
            incr[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] +
                      b11 * k11[i] + b12 * k12[i];
        State ynew{};
        for (int i = 0; i < 4; ++i) ynew[i] = y[i] + hs * incr[i];

        const double sk = cfg.abs_tol + cfg.rel_tol * std::max(state_max(y), state_max(ynew));
        double err5 = 0.0, err3 = 0.0;
        for (int i = 0; i < 4; ++i) {
            double e3 = incr[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i];
            double e5 = er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] + er10 * k10[i] +
                        er11 * k11[i] + er12 * k12[i];
            err3 += (e3 / sk) * (e3 / sk);
            err5 += (e5 / sk) * (e5 / sk);
        }
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0) deno = 1.0;
        double err = h * err5 * std::sqrt(1.0 / (4.0 * deno));
        if (!std::isfinite(err)) throw PropagationError("non-finite error estimate", x0, x1);

        double fac11 = std::pow(err, 0.125);
        if (err <= 1.0) {
            y = ynew;
            x = xe;
            double fac = std::clamp(fac11 / 0.9, 1.0 / 6.0, 3.0);
            double hnew = h / fac;
            if (last_rejected) hnew = std::min(hnew, h);
            if (!final_step || st.h == 0.0) st.h = std::min(hnew, cfg.max_step);
            h = std::min(hnew, cfg.max_step);
            last_rejected = false;
            double mx = state_max(y);
            if (mx > 1e64) {
                for (double& v : y) v /= mx;
                st.log_scale += std::log(mx);
            }
        } else {
            h = h / std::min(3.0, fac11 / 0.9);
            last_rejected = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(x)))
            throw PropagationError("step size underflow near x = " + std::to_string(x), x0, x1);
    }
}

// Direct integration of Y' = [[0, q],[1, 0]] Y from s to t, splitting at
// the given kinks.
template <class Q>
ScaledSL2 integrate_callable(const Q& q, double s, double t, std::vector<double> kinks,
                             const PropagationSettings& cfg, const ScaledSL2& start = ScaledSL2::identity()) {
    IntegratorState st;
    st.y = {start.m.a, start.m.b, start.m.c, start.m.d};
    st.log_scale = start.log_scale;
    if (t < s) std::reverse(kinks.begin(), kinks.end());
    double x = s;
    for (double k : kinks) {
        dop853_segment(q, x, k, st, cfg);
        x = k;
    }
    dop853_segment(q, x, t, st, cfg);
    ScaledSL2 out{{st.y[0], st.y[1], st.y[2], st.y[3]}, st.log_scale};
    if (out.log_scale != 0.0) out.normalize();
    return out;
}

} // namespace detail

// Transfer matrix by integrating the whole interval directly, with no use of
// periodicity. Reference path for the decomposed propagator.
inline ScaledSL2 integrate_scaled(const Potential& V, double E, double s, double t,
                                  const PropagationSettings& cfg = {}) {
    cfg.validate();
    if (!std::isfinite(s) || !std::isfinite(t) || !std::isfinite(E))
        throw InvalidArgument("propagator", "non-finite endpoint or energy");
    auto q = [&](double x) { return V(x) - E; };
    double lo = std::min(s, t), hi = std::max(s, t);
    return detail::integrate_callable(q, s, t, V.breakpoints(lo, hi), cfg);
}

inline SL2Matrix integrate(const Potential& V, double E, double s, double t, const PropagationSettings& cfg = {}) {
    return integrate_scaled(V, E, s, t, cfg).value();
}

namespace detail {

inline ScaledSL2 transfer_piece(const Potential& V, double E, double s, double t, const PropagationSettings& cfg);

// Transfer matrix over [s, t] (either direction) assuming |t - s| is less
// than one natural period; concatenations are split at region boundaries
// and each block is handed to its own periodic propagator.
inline ScaledSL2 transfer_short(const Potential& V, double E, double s, double t, const PropagationSettings& cfg) {
    const auto* cat = std::get_if<detail::Concatenation>(&V.node().payload);
    if (!cat) return integrate_scaled(V, E, s, t, cfg);
    const BlockLayout& L = cat->layout;
    const double P = V.natural_period();
    const double dir = t > s ? 1.0 : -1.0;
    double lo = std::min(s, t), hi = std::max(s, t);
    std::vector<double> cuts{lo, hi};
    double k0 = std::floor(lo / P), k1 = std::floor(hi / P);
    for (double k = k0; k <= k1; k += 1.0) {
        for (std::size_t j = 0; j < L.size(); ++j) {
            double x1 = k * P + L.anchors[j];
            double x2 = k * P + L.anchors[j + 1] - L.connector_width;
            double x3 = k * P + connector_interval(L, j).second;
            for (double x : {x1, x2, x3})
                if (x > lo && x < hi) cuts.push_back(x);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    if (dir < 0) std::reverse(cuts.begin(), cuts.end());
    ScaledSL2 acc = ScaledSL2::identity();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        if (a == b) continue;
        double mid = 0.5 * (a + b);
        double r = wrap(mid, 0.0, P);
        auto [j, in_connector] = locate(L, r);
        ScaledSL2 piece = in_connector ? integrate_scaled(V, E, a, b, cfg) : transfer_piece(L.blocks[j], E, a, b, cfg);
        acc = piece * acc;
    }
    return acc;
}

// General transfer matrix: whole natural periods are taken as powers of the
// one-period matrix at the starting point, the remainder is integrated.
inline ScaledSL2 transfer_piece(const Potential& V, double E, double s, double t, const PropagationSettings& cfg) {
    if (s == t) return ScaledSL2::identity();
    const double P = V.natural_period();
    const double len = std::abs(t - s);
    const double dir = t > s ? 1.0 : -1.0;
    const double ratio = len / P;
    long long m = std::llround(ratio);
    if (std::abs(ratio - static_cast<double>(m)) > 1e-12 * std::max(1.0, ratio))
        m = static_cast<long long>(std::floor(ratio));
    if (m == 0) return transfer_short(V, E, s, t, cfg);
    ScaledSL2 one = transfer_short(V, E, s, s + dir * P, cfg);
    ScaledSL2 acc = power(one, m);
    double mid = s + dir * static_cast<double>(m) * P;
    if (std::abs(t - mid) > 1e-12 * std::max(1.0, len)) acc = transfer_short(V, E, mid, t, cfg) * acc;
    return acc;
}

} // namespace detail

// A_E(t, s): maps (y'(s), y(s)) to (y'(t), y(t)). Works for t < s by
// integrating backward.
inline ScaledSL2 transfer_matrix_scaled(const Potential& V, double E, double s, double t,
                                        const PropagationSettings& cfg = {}) {
    cfg.validate();
    if (!std::isfinite(s) || !std::isfinite(t) || !std::isfinite(E))
        throw InvalidArgument("propagator", "non-finite endpoint or energy");
    return detail::transfer_piece(V, E, s, t, cfg);
}

inline SL2Matrix transfer_matrix(const Potential& V, double E, double s, double t,
                                 const PropagationSettings& cfg = {}) {
    return transfer_matrix_scaled(V, E, s, t, cfg).value();
}

// Phi_E(base) = A_E(base + T, base) for the declared period T.
inline ScaledSL2 monodromy_scaled(const Potential& V, double E, double base = 0.0,
                                  const PropagationSettings& cfg = {}) {
    return transfer_matrix_scaled(V, E, base, base + V.period(), cfg);
}

inline SL2Matrix monodromy(const Potential& V, double E, double base = 0.0, const PropagationSettings& cfg = {}) {
    return monodromy_scaled(V, E, base, cfg).value();
}

} // namespace hill

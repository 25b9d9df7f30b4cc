#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hill/error.hpp"

namespace hill {

enum class PotentialKind { cosine_series, samples, constant, concatenation, sum };

inline const char* to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::cosine_series: return "cosine_series";
        case PotentialKind::samples: return "samples";
        case PotentialKind::constant: return "constant";
        case PotentialKind::concatenation: return "concatenation";
        case PotentialKind::sum: return "sum";
    }
    return "?";
}

namespace detail {
struct PotentialNode;
}

// Continuous periodic potential. Immutable value type; copies share the
// underlying payload. `period()` is the declared period, which may be an
// integer multiple (`repeat()`) of the natural period of the payload. The
// propagator exploits that structure.
class Potential {
public:
    Potential();  // V = 0 with period 1

    static Potential constant(double value, double period = 1.0);
    // V(x) = mean + sum_k cos_coeffs[k-1] cos(2 pi k x / T) + sin_coeffs[k-1] sin(2 pi k x / T)
    static Potential cosine_series(double period, std::vector<double> cos_coeffs, double mean = 0.0,
                                   std::vector<double> sin_coeffs = {});
    // Periodic piecewise-linear interpolation of (xs, vs); xs strictly
    // ascending with xs.back() - xs.front() < period. The last sample is
    // joined to the first one shifted by one period.
    static Potential samples(double period, std::vector<double> xs, std::vector<double> vs);
    // Pointwise sum; `period` must be a common multiple of the term periods.
    static Potential sum(std::vector<Potential> terms, double period);

    PotentialKind kind() const;
    double period() const { return natural_period() * repeat_; }
    double natural_period() const;
    int repeat() const noexcept { return repeat_; }
    double sup_bound() const;

    double operator()(double x) const;

    // Points in (a, b) where V may fail to be smooth.
    std::vector<double> breakpoints(double a, double b) const;

    const detail::PotentialNode& node() const { return *node_; }

    // Same payload viewed with period multiplied by m.
    Potential with_repeat(int m) const;

    explicit Potential(std::shared_ptr<const detail::PotentialNode> node, int repeat = 1)
        : node_(std::move(node)), repeat_(repeat) {}

private:
    std::shared_ptr<const detail::PotentialNode> node_;
    int repeat_ = 1;
};

// Layout of a block concatenation. Anchors are s_j = j (repeats + 1) T' for
// j = 0..l; block j occupies [s_{j-1}, s_j - T'] and the connector after it
// occupies [s_j - T', s_j] (the last one runs to total_period).
struct BlockLayout {
    double block_period = 1.0;
    int repeats = 1;
    std::vector<Potential> blocks;
    double connector_width = 1.0;
    std::vector<double> anchors;
    double total_period = 1.0;

    std::size_t size() const { return blocks.size(); }
};

inline BlockLayout make_block_layout(std::vector<Potential> blocks, double block_period, int repeats,
                                     double total_period) {
    BlockLayout layout;
    layout.block_period = block_period;
    layout.repeats = repeats;
    layout.connector_width = block_period;
    layout.total_period = total_period;
    for (std::size_t j = 0; j <= blocks.size(); ++j)
        layout.anchors.push_back(static_cast<double>(j) * (repeats + 1) * block_period);
    layout.blocks = std::move(blocks);
    return layout;
}

namespace detail {

struct CosineSeries {
    double mean = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
};

struct SampledCurve {
    std::vector<double> xs;
    std::vector<double> vs;
};

struct ConstantValue {
    double value = 0.0;
};

struct Concatenation {
    BlockLayout layout;
    std::vector<Potential> base;  // exactly one element
    // Connector j (0-based) ramps from left_mismatch[j] to right_mismatch[j]
    // on top of the base potential.
    std::vector<double> left_mismatch;
    std::vector<double> right_mismatch;
};

struct SumOf {
    std::vector<Potential> terms;
};

using Payload = std::variant<CosineSeries, SampledCurve, ConstantValue, Concatenation, SumOf>;

struct PotentialNode {
    double period = 1.0;
    double sup_bound = 0.0;
    Payload payload;
};

inline double wrap(double x, double origin, double period) {
    double r = x - origin;
    r -= period * std::floor(r / period);
    if (r >= period) r -= period;
    return origin + r;
}

inline double eval_cosine(const CosineSeries& c, double period, double x) {
    double r = wrap(x, 0.0, period);
    double theta = 2.0 * std::numbers::pi * r / period;
    double cr = std::cos(theta), sr = std::sin(theta);
    double ck = 1.0, sk = 0.0;
    double acc = c.mean;
    std::size_t n = std::max(c.cos_coeffs.size(), c.sin_coeffs.size());
    for (std::size_t k = 0; k < n; ++k) {
        double nc = ck * cr - sk * sr;
        double ns = sk * cr + ck * sr;
        ck = nc;
        sk = ns;
        if (k < c.cos_coeffs.size()) acc += c.cos_coeffs[k] * ck;
        if (k < c.sin_coeffs.size()) acc += c.sin_coeffs[k] * sk;
    }
    return acc;
}

inline double eval_samples(const SampledCurve& s, double period, double x) {
    const auto& xs = s.xs;
    const auto& vs = s.vs;
    if (xs.size() == 1) return vs[0];
    double r = wrap(x, xs.front(), period);
    auto it = std::upper_bound(xs.begin(), xs.end(), r);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    double x0 = xs[i], v0 = vs[i], x1, v1;
    if (i + 1 < xs.size()) {
        x1 = xs[i + 1];
        v1 = vs[i + 1];
    } else {
        x1 = xs.front() + period;
        v1 = vs.front();
    }
    return v0 + (v1 - v0) * (r - x0) / (x1 - x0);
}

inline double concatenation_eval(const Concatenation& c, double x);

inline double eval_node(const PotentialNode& n, double x) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CosineSeries>) {
                return eval_cosine(p, n.period, x);
            } else if constexpr (std::is_same_v<T, SampledCurve>) {
                return eval_samples(p, n.period, x);
            } else if constexpr (std::is_same_v<T, ConstantValue>) {
                return p.value;
            } else if constexpr (std::is_same_v<T, Concatenation>) {
                return concatenation_eval(p, x);
            } else {
                double acc = 0.0;
                for (const auto& t : p.terms) acc += t(x);
                return acc;
            }
        },
        n.payload);
}

// Index j (0-based block number) and whether x (already reduced to
// [0, total_period)) lies in the connector following block j.
inline std::pair<std::size_t, bool> locate(const BlockLayout& L, double r) {
    auto it = std::upper_bound(L.anchors.begin(), L.anchors.end(), r);
    std::size_t j = it == L.anchors.begin() ? 0 : static_cast<std::size_t>(it - L.anchors.begin()) - 1;
    if (j >= L.size()) j = L.size() - 1;
    double block_end = L.anchors[j + 1] - L.connector_width;
    return {j, r > block_end};
}

inline std::pair<double, double> connector_interval(const BlockLayout& L, std::size_t j) {
    double a = L.anchors[j + 1] - L.connector_width;
    double b = (j + 1 == L.size()) ? L.total_period : L.anchors[j + 1];
    return {a, b};
}

inline double concatenation_eval(const Concatenation& c, double x) {
    const BlockLayout& L = c.layout;
    double r = wrap(x, 0.0, L.total_period);
    auto [j, in_connector] = locate(L, r);
    if (!in_connector) return L.blocks[j](r);
    auto [a, b] = connector_interval(L, j);
    double t = (r - a) / (b - a);
    return c.base[0](r) + c.left_mismatch[j] + (c.right_mismatch[j] - c.left_mismatch[j]) * t;
}

inline double cosine_sup_bound(const CosineSeries& c) {
    double s = std::abs(c.mean);
    for (double a : c.cos_coeffs) s += std::abs(a);
    for (double b : c.sin_coeffs) s += std::abs(b);
    return s;
}

inline void require_positive_period(double period, const char* what) {
    if (!(period > 0.0) || !std::isfinite(period))
        throw InvalidArgument("potential", std::string(what) + ": period must be positive and finite");
}

inline std::shared_ptr<const PotentialNode> make_node(double period, double sup, Payload payload) {
    auto n = std::make_shared<PotentialNode>();
    n->period = period;
    n->sup_bound = sup;
    n->payload = std::move(payload);
    return n;
}

inline Potential make_concatenation(BlockLayout layout, Potential base);

} // namespace detail

inline Potential::Potential() : Potential(constant(0.0, 1.0)) {}

inline Potential Potential::constant(double value, double period) {
    detail::require_positive_period(period, "constant");
    return Potential(detail::make_node(period, std::abs(value), detail::ConstantValue{value}));
}

inline Potential Potential::cosine_series(double period, std::vector<double> cos_coeffs, double mean,
                                          std::vector<double> sin_coeffs) {
    detail::require_positive_period(period, "cosine_series");
    detail::CosineSeries c{mean, std::move(cos_coeffs), std::move(sin_coeffs)};
    double sup = detail::cosine_sup_bound(c);
    return Potential(detail::make_node(period, sup, std::move(c)));
}

inline Potential Potential::samples(double period, std::vector<double> xs, std::vector<double> vs) {
    detail::require_positive_period(period, "samples");
    if (xs.empty() || xs.size() != vs.size())
        throw InvalidArgument("potential", "samples: xs and vs must be nonempty and of equal length");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw InvalidArgument("potential", "samples: xs must be strictly ascending");
    if (!(xs.back() - xs.front() < period))
        throw InvalidArgument("potential", "samples: sample span must be shorter than the period");
    double sup = 0.0;
    for (double v : vs) sup = std::max(sup, std::abs(v));
    return Potential(detail::make_node(period, sup, detail::SampledCurve{std::move(xs), std::move(vs)}));
}

inline Potential Potential::sum(std::vector<Potential> terms, double period) {
    detail::require_positive_period(period, "sum");
    if (terms.empty()) throw InvalidArgument("potential", "sum: no terms");
    double sup = 0.0;
    for (const auto& t : terms) {
        double ratio = period / t.period();
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1)
            throw InvalidArgument("potential", "sum: period is not a multiple of every term period");
        sup += t.sup_bound();
    }
    return Potential(detail::make_node(period, sup, detail::SumOf{std::move(terms)}));
}

inline PotentialKind Potential::kind() const {
    return static_cast<PotentialKind>(node_->payload.index());
}

inline double Potential::natural_period() const { return node_->period; }

inline double Potential::sup_bound() const { return node_->sup_bound; }

inline double Potential::operator()(double x) const { return detail::eval_node(*node_, x); }

inline Potential Potential::with_repeat(int m) const {
    if (m < 1) throw InvalidArgument("potential", "repeat count must be positive");
    return Potential(node_, repeat_ * m);
}

inline std::vector<double> Potential::breakpoints(double a, double b) const {
    std::vector<double> out;
    if (!(b > a)) return out;
    const double P = natural_period();
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, detail::SampledCurve>) {
                if (p.xs.size() < 2) return;
                double k0 = std::floor((a - p.xs.front()) / P) - 1;
                double k1 = std::ceil((b - p.xs.front()) / P) + 1;
                for (double k = k0; k <= k1; k += 1.0)
                    for (double xi : p.xs) {
                        double x = xi + k * P;
                        if (x > a && x < b) out.push_back(x);
                    }
            } else if constexpr (std::is_same_v<T, detail::Concatenation>) {
                const BlockLayout& L = p.layout;
                double k0 = std::floor(a / P), k1 = std::floor(b / P);
                for (double k = k0; k <= k1; k += 1.0) {
                    double off = k * P;
                    for (std::size_t j = 0; j < L.size(); ++j) {
                        double lo = off + L.anchors[j];
                        double hi = off + L.anchors[j + 1] - L.connector_width;
                        auto [ca, cb] = detail::connector_interval(L, j);
                        ca += off;
                        cb += off;
                        for (double x : {lo, hi, cb})
                            if (x > a && x < b) out.push_back(x);
                        for (double x : L.blocks[j].breakpoints(std::max(a, lo), std::min(b, hi))) out.push_back(x);
                        for (double x : p.base[0].breakpoints(std::max(a, ca), std::min(b, cb))) out.push_back(x);
                    }
                }
            } else if constexpr (std::is_same_v<T, detail::SumOf>) {
                for (const auto& t : p.terms)
                    for (double x : t.breakpoints(a, b)) out.push_back(x);
            }
        },
        node_->payload);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double u, double v) { return std::abs(u - v) <= 1e-12 * std::max(1.0, std::abs(u)); }),
              out.end());
    return out;
}

inline double eval(const Potential& V, double x) { return V(x); }

// lambda V. Same kind and period; every payload value is multiplied.
inline Potential scale(const Potential& V, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("potential", "scale: coupling must be positive");
    if (lambda == 1.0) return V;
    const double P = V.natural_period();
    Potential out = std::visit(
        [&](const auto& p) -> Potential {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, detail::CosineSeries>) {
                auto c = p.cos_coeffs, s = p.sin_coeffs;
                for (double& a : c) a *= lambda;
                for (double& b : s) b *= lambda;
                return Potential::cosine_series(P, std::move(c), lambda * p.mean, std::move(s));
            } else if constexpr (std::is_same_v<T, detail::SampledCurve>) {
                auto vs = p.vs;
                for (double& v : vs) v *= lambda;
                return Potential::samples(P, p.xs, std::move(vs));
            } else if constexpr (std::is_same_v<T, detail::ConstantValue>) {
                return Potential::constant(lambda * p.value, P);
            } else if constexpr (std::is_same_v<T, detail::Concatenation>) {
                BlockLayout L = p.layout;
                for (auto& b : L.blocks) b = scale(b, lambda);
                return detail::make_concatenation(std::move(L), scale(p.base[0], lambda));
            } else {
                std::vector<Potential> terms;
                for (const auto& t : p.terms) terms.push_back(scale(t, lambda));
                return Potential::sum(std::move(terms), P);
            }
        },
        V.node().payload);
    return out.with_repeat(V.repeat());
}

// V + c.
inline Potential shift(const Potential& V, double c) {
    if (c == 0.0) return V;
    const double P = V.natural_period();
    Potential out = std::visit(
        [&](const auto& p) -> Potential {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, detail::CosineSeries>) {
                return Potential::cosine_series(P, p.cos_coeffs, p.mean + c, p.sin_coeffs);
            } else if constexpr (std::is_same_v<T, detail::SampledCurve>) {
                auto vs = p.vs;
                for (double& v : vs) v += c;
                return Potential::samples(P, p.xs, std::move(vs));
            } else if constexpr (std::is_same_v<T, detail::ConstantValue>) {
                return Potential::constant(p.value + c, P);
            } else if constexpr (std::is_same_v<T, detail::Concatenation>) {
                BlockLayout L = p.layout;
                for (auto& b : L.blocks) b = shift(b, c);
                return detail::make_concatenation(std::move(L), shift(p.base[0], c));
            } else {
                std::vector<Potential> terms = p.terms;
                terms[0] = shift(terms[0], c);
                return Potential::sum(std::move(terms), P);
            }
        },
        V.node().payload);
    return out.with_repeat(V.repeat());
}

// V regarded as an (m T)-periodic potential.
inline Potential extend_period(const Potential& V, int m) { return V.with_repeat(m); }

// Sup-norm bound for a cosine series refined on a uniform grid, made safe
// by adding the Lipschitz constant times half the grid spacing. Never larger
// than the coefficient-sum bound. Other kinds keep their bound.
inline Potential tighten_sup_bound(const Potential& V, int grid_points = 0) {
    const auto* c = std::get_if<detail::CosineSeries>(&V.node().payload);
    if (!c) return V;
    const double P = V.natural_period();
    std::size_t n = std::max(c->cos_coeffs.size(), c->sin_coeffs.size());
    double lip = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double a = k < c->cos_coeffs.size() ? std::abs(c->cos_coeffs[k]) : 0.0;
        double b = k < c->sin_coeffs.size() ? std::abs(c->sin_coeffs[k]) : 0.0;
        lip += 2.0 * std::numbers::pi * static_cast<double>(k + 1) / P * (a + b);
    }
    if (grid_points <= 0) grid_points = static_cast<int>(std::max<std::size_t>(1024, 64 * n));
    double h = P / grid_points, mx = 0.0;
    for (int i = 0; i < grid_points; ++i) mx = std::max(mx, std::abs(detail::eval_cosine(*c, P, i * h)));
    double bound = std::min(V.sup_bound(), mx + 0.5 * lip * h);
    auto node = std::make_shared<detail::PotentialNode>(V.node());
    node->sup_bound = bound;
    return Potential(std::move(node), V.repeat());
}

// V + W as one potential. Cosine series with commensurate periods are
// merged into a single series; anything else becomes a sum node.
inline Potential add(const Potential& V, const Potential& W) {
    double P = std::max(V.period(), W.period());
    const auto* cv = std::get_if<detail::CosineSeries>(&V.node().payload);
    const auto* cw = std::get_if<detail::CosineSeries>(&W.node().payload);
    if (cv && cw) {
        double rv = P / V.natural_period(), rw = P / W.natural_period();
        long mv = std::lround(rv), mw = std::lround(rw);
        if (std::abs(rv - mv) < 1e-9 * rv && std::abs(rw - mw) < 1e-9 * rw && mv >= 1 && mw >= 1) {
            std::size_t n = std::max((std::max(cv->cos_coeffs.size(), cv->sin_coeffs.size())) * mv,
                                     (std::max(cw->cos_coeffs.size(), cw->sin_coeffs.size())) * mw);
            std::vector<double> cc(n, 0.0), ss(n, 0.0);
            auto merge = [&](const detail::CosineSeries& c, long m) {
                for (std::size_t k = 0; k < c.cos_coeffs.size(); ++k) cc[(k + 1) * m - 1] += c.cos_coeffs[k];
                for (std::size_t k = 0; k < c.sin_coeffs.size(); ++k) ss[(k + 1) * m - 1] += c.sin_coeffs[k];
            };
            merge(*cv, mv);
            merge(*cw, mw);
            return Potential::cosine_series(P, std::move(cc), cv->mean + cw->mean, std::move(ss));
        }
    }
    if (V.kind() == PotentialKind::constant) return shift(W, V(0.0)).with_repeat(1);
    if (W.kind() == PotentialKind::constant) return shift(V, W(0.0));
    return Potential::sum({V, W}, P);
}

// max |V(x) - W(x)| over a uniform grid of n points on [a, b].
inline double sampled_distance(const Potential& V, const Potential& W, double a, double b, int n) {
    double mx = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = a + (b - a) * i / std::max(1, n - 1);
        mx = std::max(mx, std::abs(V(x) - W(x)));
    }
    return mx;
}

// Continuous bridge on [a, b] between two prescribed values that stays
// within epsilon of the base: base plus a linear ramp of the endpoint
// mismatches.
struct Connector {
    Potential base;
    double a = 0.0, b = 1.0;
    double left_mismatch = 0.0, right_mismatch = 0.0;

    double operator()(double x) const {
        double t = (x - a) / (b - a);
        return base(x) + left_mismatch + (right_mismatch - left_mismatch) * t;
    }
    double deviation() const { return std::max(std::abs(left_mismatch), std::abs(right_mismatch)); }
};

inline Connector make_connector(double left_value, double right_value, const Potential& base, double a, double b,
                                double epsilon) {
    if (!(b > a)) throw InvalidArgument("potential", "make_connector: empty interval");
    if (!(epsilon > 0.0)) throw InvalidArgument("potential", "make_connector: epsilon must be positive");
    Connector c{base, a, b, left_value - base(a), right_value - base(b)};
    if (!(c.deviation() < epsilon))
        throw InvalidArgument("potential", "make_connector: endpoint mismatch " + std::to_string(c.deviation()) +
                                               " is not below epsilon " + std::to_string(epsilon));
    return c;
}

namespace detail {

inline void validate_layout(const BlockLayout& L) {
    const double tol = 1e-9 * std::max(1.0, L.total_period);
    if (L.blocks.empty()) throw InvalidArgument("potential", "concatenate_blocks: no blocks");
    if (!(L.block_period > 0.0) || L.repeats < 1 || !(L.connector_width > 0.0))
        throw InvalidArgument("potential", "concatenate_blocks: block period, repeats and connector width must be positive");
    if (L.anchors.size() != L.blocks.size() + 1)
        throw InvalidArgument("potential", "concatenate_blocks: need one more anchor than blocks");
    for (std::size_t j = 0; j < L.anchors.size(); ++j) {
        double expect = static_cast<double>(j) * (L.repeats + 1) * L.block_period;
        if (std::abs(L.anchors[j] - expect) > tol)
            throw InvalidArgument("potential", "concatenate_blocks: inconsistent anchor s_" + std::to_string(j));
    }
    for (std::size_t j = 0; j + 1 < L.anchors.size(); ++j) {
        double room = L.anchors[j + 1] - L.anchors[j];
        if (room + tol < L.repeats * L.block_period + L.connector_width)
            throw InvalidArgument("potential", "concatenate_blocks: overlapping blocks");
    }
    if (L.total_period + tol < L.anchors.back())
        throw InvalidArgument("potential", "concatenate_blocks: total period shorter than last anchor");
    for (const auto& W : L.blocks) {
        double r = L.block_period / W.period();
        if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r) || std::round(r) < 1)
            throw InvalidArgument("potential", "concatenate_blocks: block period is not a multiple of a block's period");
    }
}

inline Potential make_concatenation(BlockLayout layout, Potential base) {
    const std::size_t l = layout.size();
    Concatenation c;
    c.left_mismatch.resize(l);
    c.right_mismatch.resize(l);
    double sup = 0.0, dev = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
        auto [a, b] = connector_interval(layout, j);
        double left = layout.blocks[j](a);
        double right = (j + 1 < l) ? layout.blocks[j + 1](b) : layout.blocks[0](0.0);
        c.left_mismatch[j] = left - base(a);
        c.right_mismatch[j] = right - base(b);
        dev = std::max({dev, std::abs(c.left_mismatch[j]), std::abs(c.right_mismatch[j])});
        sup = std::max(sup, layout.blocks[j].sup_bound());
    }
    sup = std::max(sup, base.sup_bound() + dev);
    double T = layout.total_period;
    c.layout = std::move(layout);
    c.base.push_back(std::move(base));
    return Potential(make_node(T, sup, std::move(c)));
}

} // namespace detail

// Assembles the total_period-periodic potential equal to block j on
// [s_{j-1}, s_j - T'] and to a connector on the remaining stretches. Each
// block must lie within epsilon of `base`; the check samples one block
// period of W_j - base densely (the difference is block-periodic).
inline Potential concatenate_blocks(const BlockLayout& layout, const Potential& base, double epsilon,
                                    int samples_per_unit = 64) {
    if (!(epsilon > 0.0)) throw InvalidArgument("potential", "concatenate_blocks: epsilon must be positive");
    detail::validate_layout(layout);
    for (std::size_t j = 0; j < layout.size(); ++j) {
        double a = layout.anchors[j];
        int n = std::max(2048, static_cast<int>(samples_per_unit * layout.block_period));
        double d = sampled_distance(layout.blocks[j], base, a, a + layout.block_period, n);
        if (!(d < epsilon))
            throw InvalidArgument("potential", "concatenate_blocks: block " + std::to_string(j + 1) + " is " +
                                                   std::to_string(d) + " from the base, not below epsilon " +
                                                   std::to_string(epsilon));
    }
    for (std::size_t j = 0; j < layout.size(); ++j) {
        auto [a, b] = detail::connector_interval(layout, j);
        double right = (j + 1 < layout.size()) ? layout.blocks[j + 1](b) : layout.blocks[0](0.0);
        make_connector(layout.blocks[j](a), right, base, a, b, epsilon);
    }
    return detail::make_concatenation(layout, base);
}

inline const BlockLayout* layout_of(const Potential& V) {
    const auto* c = std::get_if<detail::Concatenation>(&V.node().payload);
    return c ? &c->layout : nullptr;
}

inline const Potential* concatenation_base(const Potential& V) {
    const auto* c = std::get_if<detail::Concatenation>(&V.node().payload);
    return c ? &c->base[0] : nullptr;
}

} // namespace hill

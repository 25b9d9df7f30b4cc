#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace hill {

// Real 2x2 matrix [[a, b], [c, d]] acting on the state (y', y). Transfer
// matrices have unit determinant up to integration error; det() exposes the
// drift instead of projecting it away.
struct SL2Matrix {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static SL2Matrix identity() { return {}; }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    double max_abs() const { return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}); }
    double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }

    // Largest singular value from the Frobenius norm and |det|.
    double operator_norm() const {
        double f2 = a * a + b * b + c * c + d * d;
        double dt = std::abs(det());
        double disc = std::max(0.0, f2 * f2 - 4.0 * dt * dt);
        return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
    }

    // Adjugate; the exact inverse when det = 1.
    SL2Matrix adjugate() const { return {d, -b, -c, a}; }
    SL2Matrix inverse() const {
        double D = det();
        return {d / D, -b / D, -c / D, a / D};
    }

    friend SL2Matrix operator*(const SL2Matrix& x, const SL2Matrix& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend SL2Matrix operator*(double s, const SL2Matrix& x) { return {s * x.a, s * x.b, s * x.c, s * x.d}; }
    friend SL2Matrix operator-(const SL2Matrix& x, const SL2Matrix& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }
    friend SL2Matrix operator+(const SL2Matrix& x, const SL2Matrix& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
};

// max entrywise difference
inline double distance(const SL2Matrix& x, const SL2Matrix& y) { return (x - y).max_abs(); }

// Matrix stored as exp(log_scale) * m, so that long products of hyperbolic
// matrices stay representable. m is kept with max entry near 1 whenever the
// scale is nonzero.
struct ScaledSL2 {
    SL2Matrix m;
    double log_scale = 0.0;

    static ScaledSL2 identity() { return {}; }
    static ScaledSL2 from(const SL2Matrix& x) {
        ScaledSL2 s{x, 0.0};
        s.normalize_if_large();
        return s;
    }

    void normalize() {
        double mx = m.max_abs();
        if (mx > 0.0 && std::isfinite(mx)) {
            m = (1.0 / mx) * m;
            log_scale += std::log(mx);
        }
    }
    void normalize_if_large() {
        double mx = m.max_abs();
        if (mx > 1e64 || (log_scale != 0.0 && (mx < 1e-64 || mx > 1e8))) normalize();
    }

    double log_norm() const { return std::log(m.operator_norm()) + log_scale; }
    double log_abs_trace() const { return std::log(std::abs(m.trace())) + log_scale; }

    // Unscaled value; entries overflow to +-inf rather than NaN.
    SL2Matrix value() const {
        if (log_scale == 0.0) return m;
        auto f = [&](double v) {
            if (v == 0.0) return 0.0;
            double lg = std::log(std::abs(v)) + log_scale;
            if (lg > 709.0) return std::copysign(std::numeric_limits<double>::infinity(), v);
            return std::copysign(std::exp(lg), v);
        };
        return {f(m.a), f(m.b), f(m.c), f(m.d)};
    }
    double trace() const {
        double t = m.trace();
        if (log_scale == 0.0 || t == 0.0) return t;
        double lg = std::log(std::abs(t)) + log_scale;
        if (lg > 709.0) return std::copysign(std::numeric_limits<double>::infinity(), t);
        return std::copysign(std::exp(lg), t);
    }
    // log|det| of the represented matrix.
    double log_abs_det() const { return std::log(std::abs(m.det())) + 2.0 * log_scale; }

    friend ScaledSL2 operator*(const ScaledSL2& x, const ScaledSL2& y) {
        ScaledSL2 r{x.m * y.m, x.log_scale + y.log_scale};
        r.normalize_if_large();
        return r;
    }
};

// x^n by repeated squaring, n >= 0.
inline ScaledSL2 power(const ScaledSL2& x, long long n) {
    ScaledSL2 result = ScaledSL2::identity();
    ScaledSL2 base = x;
    while (n > 0) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return result;
}

inline SL2Matrix rotation(double theta) {
    return {std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)};
}

} // namespace hill

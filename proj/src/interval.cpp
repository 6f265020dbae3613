// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include "hyra/interval.hpp"

#include <cassert>
#include <sstream>

namespace hyra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double down(double x) {
    if (std::isinf(x) || std::isnan(x)) return x;
    return std::nextafter(x, -kInf);
}
double up(double x) {
    if (std::isinf(x) || std::isnan(x)) return x;
    return std::nextafter(x, kInf);
}

Interval outward(double lo, double hi) { return Interval(down(lo), up(hi)); }

}  // namespace

double Interval::mid() const {
    if (is_empty()) return std::numeric_limits<double>::quiet_NaN();
    if (lo == -kInf && hi == kInf) return 0.0;
    if (lo == -kInf) return hi - 1.0;
    if (hi == kInf) return lo + 1.0;
    double m = 0.5 * (lo + hi);
    // Guard against midpoint escaping through rounding.
    return std::clamp(m, lo, hi);
}

std::string Interval::str() const {
    if (is_empty()) return "[empty]";
    std::ostringstream os;
    os.precision(17);
    os << "[" << lo << ", " << hi << "]";
    return os.str();
}

Interval intersect(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    Interval r(std::max(a.lo, b.lo), std::min(a.hi, b.hi));
    return r;
}

Interval hull(const Interval& a, const Interval& b) {
    if (a.is_empty()) return b;
    if (b.is_empty()) return a;
    return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

Interval iadd(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    return outward(a.lo + b.lo, a.hi + b.hi);
}

Interval isub(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    return outward(a.lo - b.hi, a.hi - b.lo);
}

Interval imul(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    double lo = kInf, hi = -kInf;
    for (double v : c) {
        if (std::isnan(v)) v = 0.0;  // 0 * inf at a bound
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return outward(lo, hi);
}

Interval idiv(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    if (b.lo == 0.0 && b.hi == 0.0) return Interval::empty();
    if (b.lo < 0.0 && b.hi > 0.0) return Interval::whole();
    // Denominator touching zero on one side: treat as open toward infinity.
    if (b.lo == 0.0) {
        Interval bb(std::nextafter(0.0, kInf), b.hi);
        return hull(idiv(a, bb), Interval::empty());
    }
    if (b.hi == 0.0) {
        Interval bb(b.lo, std::nextafter(0.0, -kInf));
        return idiv(a, bb);
    }
    double c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
    double lo = kInf, hi = -kInf;
    for (double v : c) {
        if (std::isnan(v)) v = 0.0;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return outward(lo, hi);
}

Interval ineg(const Interval& a) {
    if (a.is_empty()) return a;
    return Interval(-a.hi, -a.lo);  // exact
}

Interval isquare(const Interval& a) {
    if (a.is_empty()) return a;
    double m = std::max(std::abs(a.lo), std::abs(a.hi));
    double lo = 0.0;
    if (a.lo > 0.0) lo = a.lo * a.lo;
    if (a.hi < 0.0) lo = a.hi * a.hi;
    Interval r = outward(lo, m * m);
    if (r.lo < 0.0) r.lo = 0.0;
    return r;
}

Interval ipow(const Interval& a, int n) {
    assert(n >= 0);
    if (a.is_empty()) return a;
    if (n == 0) return Interval(1.0, 1.0);
    if (n == 1) return a;
    if (n % 2 == 0) {
        Interval abs_part(a.lo > 0 ? a.lo : (a.hi < 0 ? -a.hi : 0.0),
                          std::max(std::abs(a.lo), std::abs(a.hi)));
        Interval r = outward(std::pow(abs_part.lo, n), std::pow(abs_part.hi, n));
        if (r.lo < 0.0) r.lo = 0.0;
        return r;
    }
    return outward(std::pow(a.lo, n), std::pow(a.hi, n));
}

Interval isqrt(const Interval& a) {
    if (a.is_empty() || a.hi < 0.0) return Interval::empty();
    double lo = a.lo < 0.0 ? 0.0 : a.lo;
    Interval r = outward(std::sqrt(lo), std::sqrt(a.hi));
    if (r.lo < 0.0) r.lo = 0.0;
    return r;
}

Interval iexp(const Interval& a) {
    if (a.is_empty()) return a;
    Interval r = outward(std::exp(a.lo), std::exp(a.hi));
    if (r.lo < 0.0) r.lo = 0.0;
    return r;
}

namespace {

// Enclosure for sin over [lo,hi] by endpoint evaluation plus critical points.
Interval trig_range(const Interval& a, bool cosine) {
    constexpr double kPi = 3.14159265358979323846;
    if (a.width() >= 2.0 * kPi || std::isinf(a.lo) || std::isinf(a.hi))
        return Interval(-1.0, 1.0);
    double f_lo = cosine ? std::cos(a.lo) : std::sin(a.lo);
    double f_hi = cosine ? std::cos(a.hi) : std::sin(a.hi);
    double lo = std::min(f_lo, f_hi), hi = std::max(f_lo, f_hi);
    // Critical points: sin peaks at pi/2 + k*pi, cos at k*pi.
    double base = cosine ? 0.0 : kPi / 2.0;
    double k0 = std::floor((a.lo - base) / kPi);
    for (double k = k0; k <= k0 + 3.0; k += 1.0) {
        double c = base + k * kPi;
        if (c >= a.lo && c <= a.hi) {
            // Maximum at even k multiples alternates; just evaluate.
            double v = cosine ? std::cos(c) : std::sin(c);
            // Evaluate exactly at the analytic extremum (+-1).
            v = v >= 0.0 ? 1.0 : -1.0;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    Interval r = outward(lo, hi);
    r.lo = std::max(r.lo, -1.0);
    r.hi = std::min(r.hi, 1.0);
    return r;
}

}  // namespace

Interval isin(const Interval& a) {
    if (a.is_empty()) return a;
    return trig_range(a, false);
}

Interval icos(const Interval& a) {
    if (a.is_empty()) return a;
    return trig_range(a, true);
}

Interval imin(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    return Interval(std::min(a.lo, b.lo), std::min(a.hi, b.hi));
}

Interval imax(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    return Interval(std::max(a.lo, b.lo), std::max(a.hi, b.hi));
}

Interval inflate(const Interval& a, double amount) {
    if (a.is_empty()) return a;
    return Interval(a.lo - amount, a.hi + amount);
}

}  // namespace hyra

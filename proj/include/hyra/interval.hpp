// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hyra {

/// Closed interval over the reals.  An interval with lo > hi denotes the
/// empty set.  All arithmetic is outward rounded: each primitive operation
/// widens its result by one ulp per bound, so the result always encloses
/// the exact real-valued image.
struct Interval {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    Interval() = default;
    Interval(double point) : lo(point), hi(point) {}
    Interval(double l, double h) : lo(l), hi(h) {}

    static Interval empty() { return Interval(); }
    static Interval whole() {
        return Interval(-std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity());
    }

    bool is_empty() const { return lo > hi; }
    bool is_point() const { return lo == hi; }
    double width() const { return is_empty() ? 0.0 : hi - lo; }
    double mid() const;
    bool contains(double x) const { return !is_empty() && lo <= x && x <= hi; }
    bool contains(const Interval& o) const {
        return o.is_empty() || (!is_empty() && lo <= o.lo && o.hi <= hi);
    }
    bool intersects(const Interval& o) const {
        return !is_empty() && !o.is_empty() && lo <= o.hi && o.lo <= hi;
    }
    bool operator==(const Interval& o) const = default;

    std::string str() const;
};

Interval intersect(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

// Outward-rounded primitives.
Interval iadd(const Interval& a, const Interval& b);
Interval isub(const Interval& a, const Interval& b);
Interval imul(const Interval& a, const Interval& b);
// Division; a denominator straddling zero yields the whole line (a valid,
// if loose, enclosure).  Denominator identically [0,0] yields empty.
Interval idiv(const Interval& a, const Interval& b);
Interval ineg(const Interval& a);
Interval ipow(const Interval& a, int n);  // n >= 0
Interval isqrt(const Interval& a);        // empty when a.hi < 0
Interval iexp(const Interval& a);
Interval isin(const Interval& a);
Interval icos(const Interval& a);
Interval imin(const Interval& a, const Interval& b);
Interval imax(const Interval& a, const Interval& b);
// Tight square (image of x*x over a), used when both factors of a product
// are syntactically the same term.
Interval isquare(const Interval& a);

// Inflate both bounds outward by `amount` (absolute).
Interval inflate(const Interval& a, double amount);

}  // namespace hyra

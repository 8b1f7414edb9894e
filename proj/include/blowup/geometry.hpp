#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace blowup {

// Supported geometries: 1D intervals and radially symmetric balls/annuli.
// Every domain is described by a single coordinate x: the position for an
// interval, the radius for a ball or annulus.  The blow-up boundary is the
// full topological boundary (both interval endpoints; the sphere r = R for
// a ball; both spheres for an annulus).

struct Domain {
    enum class Kind { interval, ball, annulus };

    Kind kind = Kind::interval;
    int N = 1;            // space dimension (1 for intervals)
    double lo = 0.0;      // left end / inner radius (0 for balls)
    double hi = 1.0;      // right end / outer radius

    static Domain interval(double l, double r) {
        if (!(r > l)) throw validation_error("interval: need r > l");
        Domain d;
        d.kind = Kind::interval;
        d.N = 1;
        d.lo = l;
        d.hi = r;
        return d;
    }
    static Domain ball(int N, double R) {
        if (N < 2) throw validation_error("ball: need dimension N >= 2 (use interval for 1D)");
        if (!(R > 0.0)) throw validation_error("ball: need radius R > 0");
        Domain d;
        d.kind = Kind::ball;
        d.N = N;
        d.lo = 0.0;
        d.hi = R;
        return d;
    }
    static Domain annulus(int N, double R0, double R1) {
        if (N < 2) throw validation_error("annulus: need dimension N >= 2");
        if (!(R0 > 0.0 && R1 > R0)) throw validation_error("annulus: need 0 < R0 < R1");
        Domain d;
        d.kind = Kind::annulus;
        d.N = N;
        d.lo = R0;
        d.hi = R1;
        return d;
    }

    bool radial() const { return kind != Kind::interval; }

    // Interior test in the coordinate (r = 0 is interior for a ball).
    bool contains(double x) const {
        if (kind == Kind::ball) return x >= 0.0 && x < hi;
        return x > lo && x < hi;
    }

    // Distance to the blow-up boundary.
    double distance(double x) const {
        if (!contains(x))
            throw domain_error("coordinate " + std::to_string(x) + " is outside the domain");
        if (kind == Kind::ball) return hi - x;
        return std::min(x - lo, hi - x);
    }

    // Laplacian of the distance function at x (a.e. defined; the midpoint
    // kink of two-sided domains takes the outer-side value).
    double laplace_distance(double x) const {
        if (!contains(x))
            throw domain_error("coordinate " + std::to_string(x) + " is outside the domain");
        switch (kind) {
            case Kind::interval: return 0.0;
            case Kind::ball: return -(N - 1) / x; // d = R - r
            case Kind::annulus:
                return (x - lo < hi - x) ? (N - 1) / x : -(N - 1) / x;
        }
        return 0.0;
    }
};

// Interior zero set of the coefficient b: a strictly interior subinterval,
// a concentric ball (lo = 0), or a concentric shell of an annulus.
struct Omega0 {
    bool present = false;
    double lo = 0.0, hi = 0.0;

    static Omega0 none() { return {}; }
    static Omega0 range(double l, double r) {
        if (!(r > l)) throw validation_error("omega0: need r > l");
        Omega0 o;
        o.present = true;
        o.lo = l;
        o.hi = r;
        return o;
    }

    void validate_inside(const Domain& dom) const {
        if (!present) return;
        if (dom.kind == Domain::Kind::ball) {
            if (lo != 0.0)
                throw validation_error("omega0 in a ball must be concentric (lo = 0)");
            if (!(hi < dom.hi))
                throw validation_error("omega0 must be strictly inside the domain");
        } else {
            if (!(lo > dom.lo && hi < dom.hi))
                throw validation_error("omega0 must be strictly inside the domain");
        }
    }

    double diameter() const { return hi - lo; }
    bool covers(double x) const { return present && x >= lo && x <= hi; }

    // Distance from x to the set (0 inside).
    double distance_to(double x) const {
        if (!present) return std::numeric_limits<double>::infinity();
        if (x < lo) return lo - x;
        if (x > hi) return x - hi;
        return 0.0;
    }

    // The set as a domain of its own, for eigenvalue computations.
    Domain as_domain(const Domain& parent) const {
        if (!present) throw precondition_error("omega0 is empty");
        if (parent.kind == Domain::Kind::interval) return Domain::interval(lo, hi);
        if (lo == 0.0) return Domain::ball(parent.N, hi);
        return Domain::annulus(parent.N, lo, hi);
    }
};

// C^1 cubic ramp: 0 at s <= 0, 1 at s >= 1, 3s^2 - 2s^3 between.
inline double smoothstep01(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * (3.0 - 2.0 * s);
}

} // namespace blowup

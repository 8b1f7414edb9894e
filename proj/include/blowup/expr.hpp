#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "errors.hpp"

namespace blowup {

// A composable scalar function of one variable, represented as an expression
// tree.  Supported node kinds: constants, the identity, real powers, exp,
// log, sin, cos, sinh, cosh, sums, products, quotients, composition, and
// opaque callables.  Derivatives are propagated analytically through the
// tree (forward mode, up to second order); opaque nodes without a supplied
// derivative fall back to centred finite differences with step
// h = max(|u|, 1) * eps^(1/3).
//
// Instances are immutable and cheap to copy (shared subtrees).

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class NodeKind {
    constant,
    identity,
    power,     // a^p, real exponent p
    exp_,
    log_,
    sin_,
    cos_,
    sinh_,
    cosh_,
    sum,       // a + b
    product,   // a * b
    quotient,  // a / b
    compose,   // a(b(u))
    opaque
};

struct Node {
    NodeKind kind;
    double value = 0.0; // constant value or power exponent
    NodePtr a, b;
    std::function<double(double)> fn;  // opaque eval
    std::function<double(double)> dfn; // opaque derivative (optional)
    std::string label;                 // opaque diagnostic label
};

// (value, d/du, d2/du2) triple for second-order forward propagation.
struct Jet2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

inline double fd_step(double u) {
    static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
    return std::max(std::fabs(u), 1.0) * cbrt_eps;
}

inline void check_log_arg(double x, const char* what) {
    if (!(x > 0.0))
        throw domain_error(std::string(what) + ": argument " + std::to_string(x) +
                           " is outside the validity range (must be > 0)");
}

inline double node_eval(const Node& n, double u);

inline double powr(double base, double p, const Node& n) {
    if (base < 0.0 && p != std::floor(p))
        throw domain_error("power: negative base " + std::to_string(base) +
                           " with non-integer exponent " + std::to_string(p));
    if (base == 0.0 && p < 0.0)
        throw domain_error("power: zero base with negative exponent");
    (void)n;
    return std::pow(base, p);
}

inline double node_eval(const Node& n, double u) {
    switch (n.kind) {
        case NodeKind::constant: return n.value;
        case NodeKind::identity: return u;
        case NodeKind::power:    return powr(node_eval(*n.a, u), n.value, n);
        case NodeKind::exp_:     return std::exp(node_eval(*n.a, u));
        case NodeKind::log_: {
            double x = node_eval(*n.a, u);
            check_log_arg(x, "log");
            return std::log(x);
        }
        case NodeKind::sin_:  return std::sin(node_eval(*n.a, u));
        case NodeKind::cos_:  return std::cos(node_eval(*n.a, u));
        case NodeKind::sinh_: return std::sinh(node_eval(*n.a, u));
        case NodeKind::cosh_: return std::cosh(node_eval(*n.a, u));
        case NodeKind::sum:      return node_eval(*n.a, u) + node_eval(*n.b, u);
        case NodeKind::product:  return node_eval(*n.a, u) * node_eval(*n.b, u);
        case NodeKind::quotient: return node_eval(*n.a, u) / node_eval(*n.b, u);
        case NodeKind::compose:  return node_eval(*n.a, node_eval(*n.b, u));
        case NodeKind::opaque:   return n.fn(u);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Structural logarithm: log of the node's value, pushed through exp /
// product / quotient / power structure so that log(f(u)) stays finite even
// when f(u) itself overflows.
inline double node_log_eval(const Node& n, double u) {
    switch (n.kind) {
        case NodeKind::exp_:     return node_eval(*n.a, u);
        case NodeKind::product:  return node_log_eval(*n.a, u) + node_log_eval(*n.b, u);
        case NodeKind::quotient: return node_log_eval(*n.a, u) - node_log_eval(*n.b, u);
        case NodeKind::power:    return n.value * node_log_eval(*n.a, u);
        case NodeKind::compose:  return node_log_eval(*n.a, node_eval(*n.b, u));
        default: {
            double v = node_eval(n, u);
            check_log_arg(v, "log_eval");
            return std::log(v);
        }
    }
}

inline Jet2 node_jet(const Node& n, double u);

// Chain rule through a primitive g applied to inner jet x:
// (g(x), g'(x) x', g''(x) x'^2 + g'(x) x'').
inline Jet2 chain(double g, double gp, double gpp, const Jet2& x) {
    return {g, gp * x.d1, gpp * x.d1 * x.d1 + gp * x.d2};
}

inline Jet2 node_jet(const Node& n, double u) {
    switch (n.kind) {
        case NodeKind::constant: return {n.value, 0.0, 0.0};
        case NodeKind::identity: return {u, 1.0, 0.0};
        case NodeKind::power: {
            Jet2 x = node_jet(*n.a, u);
            double p = n.value;
            double v = powr(x.v, p, n);
            double vp1 = (p == 0.0) ? 0.0 : p * powr(x.v, p - 1.0, n);
            double vp2 = (p == 0.0 || p == 1.0) ? 0.0 : p * (p - 1.0) * powr(x.v, p - 2.0, n);
            return chain(v, vp1, vp2, x);
        }
        case NodeKind::exp_: {
            Jet2 x = node_jet(*n.a, u);
            double e = std::exp(x.v);
            return chain(e, e, e, x);
        }
        case NodeKind::log_: {
            Jet2 x = node_jet(*n.a, u);
            check_log_arg(x.v, "log");
            return chain(std::log(x.v), 1.0 / x.v, -1.0 / (x.v * x.v), x);
        }
        case NodeKind::sin_: {
            Jet2 x = node_jet(*n.a, u);
            double s = std::sin(x.v), c = std::cos(x.v);
            return chain(s, c, -s, x);
        }
        case NodeKind::cos_: {
            Jet2 x = node_jet(*n.a, u);
            double s = std::sin(x.v), c = std::cos(x.v);
            return chain(c, -s, -c, x);
        }
        case NodeKind::sinh_: {
            Jet2 x = node_jet(*n.a, u);
            double s = std::sinh(x.v), c = std::cosh(x.v);
            return chain(s, c, s, x);
        }
        case NodeKind::cosh_: {
            Jet2 x = node_jet(*n.a, u);
            double s = std::sinh(x.v), c = std::cosh(x.v);
            return chain(c, s, c, x);
        }
        case NodeKind::sum: {
            Jet2 x = node_jet(*n.a, u), y = node_jet(*n.b, u);
            return {x.v + y.v, x.d1 + y.d1, x.d2 + y.d2};
        }
        case NodeKind::product: {
            Jet2 x = node_jet(*n.a, u), y = node_jet(*n.b, u);
            return {x.v * y.v, x.d1 * y.v + x.v * y.d1,
                    x.d2 * y.v + 2.0 * x.d1 * y.d1 + x.v * y.d2};
        }
        case NodeKind::quotient: {
            Jet2 x = node_jet(*n.a, u), y = node_jet(*n.b, u);
            double v = x.v / y.v;
            double d1 = (x.d1 - v * y.d1) / y.v;
            double d2 = (x.d2 - 2.0 * d1 * y.d1 - v * y.d2) / y.v;
            return {v, d1, d2};
        }
        case NodeKind::compose: {
            Jet2 inner = node_jet(*n.b, u);
            Jet2 outer = node_jet(*n.a, inner.v);
            return chain(outer.v, outer.d1, outer.d2, inner);
        }
        case NodeKind::opaque: {
            double v = n.fn(u);
            double h = fd_step(u);
            if (n.dfn) {
                double d1 = n.dfn(u);
                double d2 = (n.dfn(u + h) - n.dfn(u - h)) / (2.0 * h);
                return {v, d1, d2};
            }
            double fp = n.fn(u + h), fm = n.fn(u - h);
            return {v, (fp - fm) / (2.0 * h), (fp - 2.0 * v + fm) / (h * h)};
        }
    }
    return {};
}

inline bool node_analytic(const Node& n) {
    if (n.kind == NodeKind::opaque) return static_cast<bool>(n.dfn);
    bool ok = true;
    if (n.a) ok = ok && node_analytic(*n.a);
    if (n.b) ok = ok && node_analytic(*n.b);
    return ok;
}

} // namespace detail

class ScalarFunction {
public:
    ScalarFunction() : node_(constant_node(0.0)) {}

    double eval(double u) const { return detail::node_eval(*node_, u); }
    double operator()(double u) const { return eval(u); }

    // First and second derivatives via analytic forward propagation
    // (finite differences only inside opaque nodes without a derivative).
    double deriv(double u) const { return detail::node_jet(*node_, u).d1; }
    double deriv2(double u) const { return detail::node_jet(*node_, u).d2; }

    // log(f(u)), using structure to avoid overflow where possible.
    double log_eval(double u) const { return detail::node_log_eval(*node_, u); }

    bool has_analytic_derivative() const { return detail::node_analytic(*node_); }

    // Lower end of the validity range; evaluation below it is the caller's
    // risk (tree-level guards still reject invalid arguments).
    double domain_lo() const { return domain_lo_; }
    ScalarFunction with_domain_lo(double lo) const {
        ScalarFunction f = *this;
        f.domain_lo_ = lo;
        return f;
    }

    // The derivative as a ScalarFunction in its own right.
    ScalarFunction derivative() const;

    // --- factories ---------------------------------------------------------
    static ScalarFunction constant(double c) { return ScalarFunction(constant_node(c)); }
    static ScalarFunction identity() { return ScalarFunction(make(detail::NodeKind::identity)); }
    static ScalarFunction opaque(std::function<double(double)> fn, std::string label,
                                 std::function<double(double)> dfn = nullptr) {
        auto n = std::make_shared<detail::Node>();
        n->kind = detail::NodeKind::opaque;
        n->fn = std::move(fn);
        n->dfn = std::move(dfn);
        n->label = std::move(label);
        return ScalarFunction(n);
    }

    friend ScalarFunction operator+(const ScalarFunction& a, const ScalarFunction& b) {
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        if (both_const(a, b)) return constant(a.cval() + b.cval());
        return ScalarFunction(make(detail::NodeKind::sum, a.node_, b.node_));
    }
    friend ScalarFunction operator-(const ScalarFunction& a, const ScalarFunction& b) {
        return a + constant(-1.0) * b;
    }
    friend ScalarFunction operator-(const ScalarFunction& a) { return constant(-1.0) * a; }
    friend ScalarFunction operator*(const ScalarFunction& a, const ScalarFunction& b) {
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
        if (both_const(a, b)) return constant(a.cval() * b.cval());
        return ScalarFunction(make(detail::NodeKind::product, a.node_, b.node_));
    }
    friend ScalarFunction operator/(const ScalarFunction& a, const ScalarFunction& b) {
        if (is_const(b, 1.0)) return a;
        if (both_const(a, b)) return constant(a.cval() / b.cval());
        return ScalarFunction(make(detail::NodeKind::quotient, a.node_, b.node_));
    }
    friend ScalarFunction operator+(const ScalarFunction& a, double c) { return a + constant(c); }
    friend ScalarFunction operator+(double c, const ScalarFunction& a) { return constant(c) + a; }
    friend ScalarFunction operator-(const ScalarFunction& a, double c) { return a + constant(-c); }
    friend ScalarFunction operator-(double c, const ScalarFunction& a) { return constant(c) - a; }
    friend ScalarFunction operator*(const ScalarFunction& a, double c) { return a * constant(c); }
    friend ScalarFunction operator*(double c, const ScalarFunction& a) { return constant(c) * a; }
    friend ScalarFunction operator/(const ScalarFunction& a, double c) { return a / constant(c); }
    friend ScalarFunction operator/(double c, const ScalarFunction& a) { return constant(c) / a; }

    friend ScalarFunction pow_of(const ScalarFunction& a, double p) {
        if (p == 1.0) return a;
        if (p == 0.0) return constant(1.0);
        if (a.node_->kind == detail::NodeKind::constant) return constant(std::pow(a.cval(), p));
        auto n = make(detail::NodeKind::power, a.node_);
        const_cast<detail::Node&>(*n).value = p;
        return ScalarFunction(n);
    }
    friend ScalarFunction exp_of(const ScalarFunction& a) {
        return ScalarFunction(make(detail::NodeKind::exp_, a.node_));
    }
    friend ScalarFunction log_of(const ScalarFunction& a) {
        return ScalarFunction(make(detail::NodeKind::log_, a.node_));
    }
    friend ScalarFunction sin_of(const ScalarFunction& a) {
        return ScalarFunction(make(detail::NodeKind::sin_, a.node_));
    }
    friend ScalarFunction cos_of(const ScalarFunction& a) {
        return ScalarFunction(make(detail::NodeKind::cos_, a.node_));
    }
    friend ScalarFunction sinh_of(const ScalarFunction& a) {
        return ScalarFunction(make(detail::NodeKind::sinh_, a.node_));
    }
    friend ScalarFunction cosh_of(const ScalarFunction& a) {
        return ScalarFunction(make(detail::NodeKind::cosh_, a.node_));
    }
    // f(g(u))
    friend ScalarFunction compose(const ScalarFunction& f, const ScalarFunction& g) {
        return ScalarFunction(make(detail::NodeKind::compose, f.node_, g.node_));
    }

private:
    explicit ScalarFunction(detail::NodePtr n) : node_(std::move(n)) {}

    static detail::NodePtr constant_node(double c) {
        auto n = std::make_shared<detail::Node>();
        n->kind = detail::NodeKind::constant;
        n->value = c;
        return n;
    }
    static detail::NodePtr make(detail::NodeKind k, detail::NodePtr a = nullptr,
                                detail::NodePtr b = nullptr) {
        auto n = std::make_shared<detail::Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }
    static bool is_const(const ScalarFunction& f, double c) {
        return f.node_->kind == detail::NodeKind::constant && f.node_->value == c;
    }
    static bool both_const(const ScalarFunction& a, const ScalarFunction& b) {
        return a.node_->kind == detail::NodeKind::constant &&
               b.node_->kind == detail::NodeKind::constant;
    }
    double cval() const { return node_->value; }

    static ScalarFunction diff(const detail::NodePtr& n);

    detail::NodePtr node_;
    double domain_lo_ = -std::numeric_limits<double>::infinity();
};

inline ScalarFunction ScalarFunction::diff(const detail::NodePtr& n) {
    using K = detail::NodeKind;
    ScalarFunction a = n->a ? ScalarFunction(n->a) : ScalarFunction();
    ScalarFunction b = n->b ? ScalarFunction(n->b) : ScalarFunction();
    switch (n->kind) {
        case K::constant: return constant(0.0);
        case K::identity: return constant(1.0);
        case K::power:    return constant(n->value) * pow_of(a, n->value - 1.0) * diff(n->a);
        case K::exp_:     return exp_of(a) * diff(n->a);
        case K::log_:     return diff(n->a) / a;
        case K::sin_:     return cos_of(a) * diff(n->a);
        case K::cos_:     return -sin_of(a) * diff(n->a);
        case K::sinh_:    return cosh_of(a) * diff(n->a);
        case K::cosh_:    return sinh_of(a) * diff(n->a);
        case K::sum:      return diff(n->a) + diff(n->b);
        case K::product:  return diff(n->a) * b + a * diff(n->b);
        case K::quotient: return (diff(n->a) * b - a * diff(n->b)) / (b * b);
        case K::compose:  return compose(diff(n->a), b) * diff(n->b);
        case K::opaque: {
            if (n->dfn) return opaque(n->dfn, n->label + "'");
            auto fn = n->fn;
            return opaque(
                [fn](double u) {
                    double h = detail::fd_step(u);
                    return (fn(u + h) - fn(u - h)) / (2.0 * h);
                },
                n->label + "'");
        }
    }
    return constant(0.0);
}

inline ScalarFunction ScalarFunction::derivative() const { return diff(node_); }

// --- common building blocks -----------------------------------------------

// m-fold iterated logarithm of the identity: log log ... log u.
inline ScalarFunction iterated_log(int m) {
    ScalarFunction f = ScalarFunction::identity();
    for (int i = 0; i < m; ++i) f = log_of(f);
    return f;
}

// m-fold iterated exponential of the identity.
inline ScalarFunction iterated_exp(int m) {
    ScalarFunction f = ScalarFunction::identity();
    for (int i = 0; i < m; ++i) f = exp_of(f);
    return f;
}

// Plain-value guarded iterated logarithm (not a tree).
inline double iterated_log_value(double x, int m) {
    for (int i = 0; i < m; ++i) {
        detail::check_log_arg(x, "iterated log");
        x = std::log(x);
    }
    return x;
}

inline double iterated_exp_value(double x, int m) {
    for (int i = 0; i < m; ++i) x = std::exp(x);
    return x;
}

} // namespace blowup

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qframe/error.hpp"
#include "qframe/state.hpp"
#include "qframe/superposition.hpp"

namespace qframe {

// Arithmetic on canonical string states. Every operation works on the qubit
// bits directly (ripple carry, shift-and-add, restoring long division); none
// of it goes through DyadicValue, which the tests use as the reference.

namespace detail {

/// Unsigned bit string: d[i] is the bit of weight 2^(low + i). May carry
/// leading zeros.
struct Bits {
    std::int64_t low = 0;
    std::vector<std::uint8_t> d;

    std::int64_t high() const { return low + static_cast<std::int64_t>(d.size()) - 1; }
    std::uint8_t at(std::int64_t j) const {
        if (j < low || j > high()) return 0;
        return d[static_cast<std::size_t>(j - low)];
    }
};

inline Bits magnitude(const StringRational& x) { return Bits{x.lower(), x.state().bits()}; }

/// -1, 0, +1 comparing two magnitudes, most significant bit first.
inline int compare(const Bits& a, const Bits& b) {
    auto top = std::max(a.high(), b.high());
    auto bottom = std::min(a.low, b.low);
    for (auto j = top; j >= bottom; --j) {
        auto x = a.at(j), y = b.at(j);
        if (x != y) return x < y ? -1 : 1;
    }
    return 0;
}

inline Bits add(const Bits& a, const Bits& b) {
    Bits r;
    r.low = std::min(a.low, b.low);
    auto top = std::max(a.high(), b.high());
    r.d.reserve(static_cast<std::size_t>(top - r.low + 2));
    std::uint8_t carry = 0;
    for (auto j = r.low; j <= top; ++j) {
        std::uint8_t s = a.at(j) + b.at(j) + carry;
        r.d.push_back(s & 1U);
        carry = s >> 1U;
    }
    if (carry) r.d.push_back(1);
    return r;
}

/// a - b, requires a >= b.
inline Bits subtract(const Bits& a, const Bits& b) {
    Bits r;
    r.low = std::min(a.low, b.low);
    auto top = std::max(a.high(), b.high());
    r.d.reserve(static_cast<std::size_t>(top - r.low + 1));
    int borrow = 0;
    for (auto j = r.low; j <= top; ++j) {
        int s = int{a.at(j)} - int{b.at(j)} - borrow;
        borrow = s < 0 ? 1 : 0;
        r.d.push_back(static_cast<std::uint8_t>(s & 1));
    }
    return r;
}

inline Bits multiply(const Bits& a, const Bits& b) {
    Bits r;
    r.low = a.low + b.low;
    r.d.assign(a.d.size() + b.d.size() + 1, 0);
    for (std::size_t i = 0; i < b.d.size(); ++i) {
        if (!b.d[i]) continue;
        std::uint8_t carry = 0;
        std::size_t k = i;
        for (std::size_t t = 0; t < a.d.size(); ++t, ++k) {
            std::uint8_t s = r.d[k] + a.d[t] + carry;
            r.d[k] = s & 1U;
            carry = s >> 1U;
        }
        while (carry) {
            std::uint8_t s = r.d[k] + carry;
            r.d[k] = s & 1U;
            carry = s >> 1U;
            ++k;
        }
    }
    return r;
}

inline void trim(Bits& x) {
    while (!x.d.empty() && x.d.back() == 0) x.d.pop_back();
}

/// floor(n / d) for integer bit strings (low == 0), restoring division.
inline Bits divide_integer(const Bits& n, const Bits& d) {
    Bits q{0, std::vector<std::uint8_t>(n.d.size(), 0)};
    Bits rem{0, {}};
    for (auto j = n.high(); j >= 0; --j) {
        rem.d.insert(rem.d.begin(), n.at(j));  // rem = 2 rem + bit
        trim(rem);
        if (compare(rem, d) >= 0) {
            rem = subtract(rem, d);
            trim(rem);
            q.d[static_cast<std::size_t>(j)] = 1;
        }
    }
    return q;
}

inline Bits shifted(Bits x, std::int64_t by) {
    x.low += by;
    return x;
}

/// Re-bases an unsigned string so that low == 0 (value times 2^-low).
inline Bits as_integer(Bits x) {
    if (x.low > 0) x.d.insert(x.d.begin(), static_cast<std::size_t>(x.low), 0);
    x.low = 0;
    return x;
}

inline StringRational assemble(Sign sign, const Bits& m) {
    auto lo = std::min<std::int64_t>(0, m.low);
    auto hi = std::max<std::int64_t>(0, m.high());
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(hi - lo + 1), 0);
    for (auto j = lo; j <= hi; ++j) bits[static_cast<std::size_t>(j - lo)] = m.at(j);
    return canonicalize(BasisState(sign, lo, hi, std::move(bits)));
}

inline Sign product_sign(Sign a, Sign b) { return a == b ? Sign::plus : Sign::minus; }

}  // namespace detail

/// |+,-l>: the canonical state with a single 1 at site -l; value 2^-l.
inline StringRational accuracy_state(std::int64_t ell) {
    if (ell < 1) throw DomainError("accuracy state needs l >= 1");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(ell + 1), 0);
    bits[0] = 1;
    return canonicalize(BasisState(Sign::plus, -ell, 0, std::move(bits)));
}

/// Arithmetic equality: same sign, interval and 1-set of canonical forms.
inline bool eq_A(const StringRational& x, const StringRational& y) {
    return x.sign() == y.sign() && x.lower() == y.lower() && x.upper() == y.upper() &&
           x.state().bits() == y.state().bits();
}

/// Arithmetic ordering. Positives compare by the most significant site where
/// their 1-sets differ; zero lies below every positive and above every
/// negative; on negatives the order of magnitudes is reversed.
inline bool le_A(const StringRational& x, const StringRational& y) {
    bool xz = x.is_zero(), yz = y.is_zero();
    if (xz || yz) {
        if (xz && yz) return true;
        return xz ? y.sign() == Sign::plus : x.sign() == Sign::minus;
    }
    if (x.sign() != y.sign()) return x.sign() == Sign::minus;
    int c = detail::compare(detail::magnitude(x), detail::magnitude(y));
    return x.sign() == Sign::plus ? c <= 0 : c >= 0;
}

inline bool lt_A(const StringRational& x, const StringRational& y) { return le_A(x, y) && !eq_A(x, y); }

inline StringRational abs_A(const StringRational& x) {
    if (x.sign() == Sign::plus) return x;
    return canonicalize(BasisState(Sign::plus, x.lower(), x.upper(), x.state().bits()));
}

inline StringRational negate_A(const StringRational& x) {
    if (x.is_zero()) return x;
    return canonicalize(BasisState(flip(x.sign()), x.lower(), x.upper(), x.state().bits()));
}

inline StringRational add_A(const StringRational& x, const StringRational& y) {
    if (x.is_zero()) return y;
    if (y.is_zero()) return x;
    auto a = detail::magnitude(x), b = detail::magnitude(y);
    if (x.sign() == y.sign()) return detail::assemble(x.sign(), detail::add(a, b));
    int c = detail::compare(a, b);
    if (c == 0) return StringRational();
    return c > 0 ? detail::assemble(x.sign(), detail::subtract(a, b))
                 : detail::assemble(y.sign(), detail::subtract(b, a));
}

inline StringRational sub_A(const StringRational& x, const StringRational& y) { return add_A(x, negate_A(y)); }

inline StringRational mul_A(const StringRational& x, const StringRational& y) {
    if (x.is_zero() || y.is_zero()) return StringRational();
    return detail::assemble(detail::product_sign(x.sign(), y.sign()),
                            detail::multiply(detail::magnitude(x), detail::magnitude(y)));
}

/// Quotient x / y truncated toward zero at site -ell, so the error is below 2^-ell.
inline StringRational div_A(const StringRational& x, const StringRational& y, std::int64_t ell) {
    if (y.is_zero()) throw DomainError("division by the zero state");
    if (ell < 1) throw DomainError("division accuracy needs l >= 1");
    if (x.is_zero()) return StringRational();
    auto a = detail::magnitude(x), b = detail::magnitude(y);
    // |x| / |y| * 2^ell = A 2^(la - lb + ell) / B with A, B integers.
    std::int64_t e = a.low - b.low + ell;
    auto n = detail::as_integer(detail::Bits{e >= 0 ? e : 0, a.d});
    auto d = detail::as_integer(detail::Bits{e >= 0 ? 0 : -e, b.d});
    detail::trim(d);
    auto q = detail::divide_integer(n, d);
    detail::trim(q);
    if (q.d.empty()) return StringRational();
    return detail::assemble(detail::product_sign(x.sign(), y.sign()), detail::shifted(q, -ell));
}

// --- relations and operations as values --------------------------------------

enum class Relation { eq, ne, le, lt, ge, gt };
enum class Operation { add, sub, mul };

inline bool holds(Relation r, const StringRational& x, const StringRational& y) {
    switch (r) {
        case Relation::eq: return eq_A(x, y);
        case Relation::ne: return !eq_A(x, y);
        case Relation::le: return le_A(x, y);
        case Relation::lt: return lt_A(x, y);
        case Relation::ge: return le_A(y, x);
        case Relation::gt: return lt_A(y, x);
    }
    return false;
}

inline StringRational apply(Operation op, const StringRational& x, const StringRational& y) {
    switch (op) {
        case Operation::add: return add_A(x, y);
        case Operation::sub: return sub_A(x, y);
        case Operation::mul: return mul_A(x, y);
    }
    return StringRational();
}

inline Relation parse_relation(std::string_view name) {
    if (name == "eq") return Relation::eq;
    if (name == "ne") return Relation::ne;
    if (name == "le") return Relation::le;
    if (name == "lt") return Relation::lt;
    if (name == "ge") return Relation::ge;
    if (name == "gt") return Relation::gt;
    throw DomainError("unknown relation '" + std::string(name) + "'");
}

/// Two-register form of a binary operation: |x>|y> -> |x>|y op x>, the
/// addend register receiving the result.
using RegisterPair = std::pair<BasisState, BasisState>;

inline RegisterPair register_op(Operation op, const RegisterPair& in) {
    auto x = canonicalize(in.first), y = canonicalize(in.second);
    return {in.first, apply(op, y, x).state()};
}

/// Probability that rel(x, y) holds for x drawn from psi and y from phi.
inline double prob_rel(const StateSuperposition& psi, const StateSuperposition& phi, Relation rel) {
    psi.require_normalized("prob_rel");
    phi.require_normalized("prob_rel");
    std::vector<std::pair<StringRational, double>> ys;
    ys.reserve(phi.size());
    for (const auto& [y, b] : phi) ys.emplace_back(canonicalize(y), std::norm(b));
    double p = 0.0;
    for (const auto& [xk, a] : psi) {
        auto x = canonicalize(xk);
        double pa = std::norm(a);
        for (const auto& [y, pb] : ys)
            if (holds(rel, x, y)) p += pa * pb;
    }
    return p;
}

}  // namespace qframe

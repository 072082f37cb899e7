#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>

#include "qframe/error.hpp"

namespace qframe {

using BigInt = boost::multiprecision::cpp_int;

/// An exact signed rational numerator / 2^exponent.
///
/// Stored canonically: exponent == 0, or the numerator is odd. Zero is (0, 0).
/// This is the currency the value map produces and the reference the
/// bit-string arithmetic is checked against.
class DyadicValue {
public:
    DyadicValue() = default;
    DyadicValue(std::int64_t integer) : num_(integer) {}  // NOLINT(google-explicit-constructor)
    DyadicValue(BigInt numerator, std::uint64_t exponent) : num_(std::move(numerator)), exp_(exponent) {
        normalize();
    }

    /// 2^e for any integer e.
    static DyadicValue pow2(std::int64_t e) {
        if (e >= 0) {
            BigInt n = 1;
            n <<= static_cast<unsigned>(e);
            return DyadicValue(std::move(n), 0);
        }
        return DyadicValue(BigInt(1), static_cast<std::uint64_t>(-e));
    }

    const BigInt& numerator() const noexcept { return num_; }
    std::uint64_t exponent() const noexcept { return exp_; }

    bool is_zero() const noexcept { return num_.is_zero(); }
    int sign() const noexcept { return num_.sign(); }

    DyadicValue operator-() const { return DyadicValue(BigInt(-num_), exp_); }

    friend DyadicValue operator+(const DyadicValue& a, const DyadicValue& b) {
        auto k = std::max(a.exp_, b.exp_);
        return DyadicValue(a.scaled(k) + b.scaled(k), k);
    }
    friend DyadicValue operator-(const DyadicValue& a, const DyadicValue& b) { return a + (-b); }
    friend DyadicValue operator*(const DyadicValue& a, const DyadicValue& b) {
        return DyadicValue(a.num_ * b.num_, a.exp_ + b.exp_);
    }

    DyadicValue& operator+=(const DyadicValue& o) { return *this = *this + o; }
    DyadicValue& operator-=(const DyadicValue& o) { return *this = *this - o; }
    DyadicValue& operator*=(const DyadicValue& o) { return *this = *this * o; }

    friend bool operator==(const DyadicValue& a, const DyadicValue& b) {
        return a.exp_ == b.exp_ && a.num_ == b.num_;
    }
    friend std::strong_ordering operator<=>(const DyadicValue& a, const DyadicValue& b) {
        auto k = std::max(a.exp_, b.exp_);
        auto c = a.scaled(k).compare(b.scaled(k));
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend DyadicValue abs(const DyadicValue& v) { return v.sign() < 0 ? -v : v; }

    /// Numerator after rescaling to denominator 2^k (k >= exponent()).
    BigInt scaled(std::uint64_t k) const {
        BigInt n = num_;
        n <<= static_cast<unsigned>(k - exp_);
        return n;
    }

    double to_double() const {
        if (num_.is_zero()) return 0.0;
        BigInt n = abs_big(num_);
        std::int64_t e = -static_cast<std::int64_t>(exp_);
        auto top = static_cast<std::int64_t>(boost::multiprecision::msb(n));
        if (top > 62) {  // keep 63 significant bits
            n >>= static_cast<unsigned>(top - 62);
            e += top - 62;
        }
        double d = std::ldexp(n.convert_to<double>(), static_cast<int>(std::clamp<std::int64_t>(e, -100000, 100000)));
        return num_.sign() < 0 ? -d : d;
    }

    /// Exact decimal expansion; every dyadic rational terminates in base ten.
    std::string to_decimal() const {
        if (exp_ == 0) return num_.str();
        BigInt n = abs_big(num_);
        BigInt five = 1;
        for (std::uint64_t i = 0; i < exp_; ++i) five *= 5;
        BigInt scaled = n * five;  // value * 10^exp_
        std::string digits = scaled.str();
        if (digits.size() <= exp_) digits.insert(0, exp_ - digits.size() + 1, '0');
        std::string out = digits.substr(0, digits.size() - exp_) + "." + digits.substr(digits.size() - exp_);
        while (!out.empty() && out.back() == '0') out.pop_back();
        if (!out.empty() && out.back() == '.') out.pop_back();
        return (num_.sign() < 0 ? "-" : "") + out;
    }

    friend std::ostream& operator<<(std::ostream& os, const DyadicValue& v) { return os << v.to_decimal(); }

private:
    static BigInt abs_big(const BigInt& n) { return n.sign() < 0 ? BigInt(-n) : n; }

    void normalize() {
        if (num_.is_zero()) {
            exp_ = 0;
            return;
        }
        if (exp_ == 0) return;
        auto tz = boost::multiprecision::lsb(abs_big(num_));
        auto shift = std::min<std::uint64_t>(tz, exp_);
        bool neg = num_.sign() < 0;
        num_ = abs_big(num_) >> static_cast<unsigned>(shift);
        if (neg) num_ = -num_;
        exp_ -= shift;
    }

    BigInt num_ = 0;
    std::uint64_t exp_ = 0;
};

}  // namespace qframe

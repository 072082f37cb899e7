#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qframe/dyadic.hpp"
#include "qframe/error.hpp"

namespace qframe {

/// Sign qubit basis. The ordering (+, -) is paired with (0, 1) whenever a
/// 2x2 matrix acts on the sign qubit.
enum class Sign : std::uint8_t { plus = 0, minus = 1 };

inline char sign_char(Sign s) { return s == Sign::plus ? '+' : '-'; }
inline Sign flip(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }

/// A qubit string with the sign qubit at an arbitrary lattice position.
///
/// `bits[i]` is the 0-1 qubit at site `lower + i`; the string covers exactly
/// [lower, upper] and lower <= position <= upper.
struct RawStringState {
    Sign sign = Sign::plus;
    std::int64_t position = 0;
    std::int64_t lower = 0;
    std::int64_t upper = 0;
    std::vector<std::uint8_t> bits{0};

    void validate() const {
        if (lower > position || position > upper)
            throw DomainError("raw state requires lower <= sign position <= upper");
        if (bits.size() != static_cast<std::size_t>(upper - lower + 1))
            throw DomainError("raw state bit count does not match its interval");
        for (auto b : bits)
            if (b > 1) throw DomainError("raw state bits must be 0 or 1");
    }
};

/// Shift a raw string along the lattice. Arithmetic meaning is unchanged.
inline RawStringState translate(RawStringState raw, std::int64_t d) {
    raw.position += d;
    raw.lower += d;
    raw.upper += d;
    return raw;
}

/// A string state with the sign at site 0 on an interval [lower, upper]
/// containing 0. Leading and trailing zeros are allowed; gauge outcomes keep
/// their full interval, so superpositions are keyed by this type.
class BasisState {
public:
    BasisState() = default;

    BasisState(Sign sign, std::int64_t lower, std::int64_t upper, std::vector<std::uint8_t> bits)
        : sign_(sign), lower_(lower), upper_(upper), bits_(std::move(bits)) {
        if (lower_ > 0 || upper_ < 0) throw DomainError("basis state interval must contain site 0");
        if (bits_.size() != static_cast<std::size_t>(upper_ - lower_ + 1))
            throw DomainError("basis state bit count does not match its interval");
        for (auto b : bits_)
            if (b > 1) throw DomainError("basis state bits must be 0 or 1");
    }

    Sign sign() const noexcept { return sign_; }
    std::int64_t lower() const noexcept { return lower_; }
    std::int64_t upper() const noexcept { return upper_; }
    std::size_t sites() const noexcept { return bits_.size(); }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    /// s(j); zero outside the interval.
    std::uint8_t bit(std::int64_t site) const noexcept {
        if (site < lower_ || site > upper_) return 0;
        return bits_[static_cast<std::size_t>(site - lower_)];
    }

    bool all_zero() const noexcept {
        return std::none_of(bits_.begin(), bits_.end(), [](auto b) { return b != 0; });
    }

    bool is_canonical() const noexcept {
        if (all_zero()) return sign_ == Sign::plus && lower_ == 0 && upper_ == 0;
        if (upper_ > 0 && bit(upper_) != 1) return false;
        if (lower_ < 0 && bit(lower_) != 1) return false;
        return true;
    }

    RawStringState raw() const { return RawStringState{sign_, 0, lower_, upper_, bits_}; }

    friend bool operator==(const BasisState&, const BasisState&) = default;
    friend std::strong_ordering operator<=>(const BasisState& a, const BasisState& b) {
        if (auto c = a.sign_ <=> b.sign_; c != 0) return c;
        if (auto c = a.lower_ <=> b.lower_; c != 0) return c;
        if (auto c = a.upper_ <=> b.upper_; c != 0) return c;
        return a.bits_ <=> b.bits_;
    }

private:
    Sign sign_ = Sign::plus;
    std::int64_t lower_ = 0;
    std::int64_t upper_ = 0;
    std::vector<std::uint8_t> bits_{0};
};

/// Exact value sign * sum_j s(j) 2^j.
inline DyadicValue value(const BasisState& x) {
    BigInt n = 0;
    const auto& bits = x.bits();
    for (auto it = bits.rbegin(); it != bits.rend(); ++it) {
        n <<= 1;
        if (*it) n += 1;
    }
    if (x.sign() == Sign::minus) n = -n;
    return DyadicValue(std::move(n), static_cast<std::uint64_t>(-x.lower()));
}

/// Canonical representative of a rational string state: sign at 0, no
/// leading zeros above max(0, top 1) nor trailing zeros below min(0, lowest 1),
/// and zero is always "+0".
class StringRational {
public:
    /// The zero state.
    StringRational() = default;

    static StringRational canonical(const BasisState& x) {
        const auto& bits = x.bits();
        auto first = std::find(bits.begin(), bits.end(), std::uint8_t{1});
        if (first == bits.end()) return StringRational();
        auto last = std::find(bits.rbegin(), bits.rend(), std::uint8_t{1});
        std::int64_t lowest = x.lower() + (first - bits.begin());
        std::int64_t highest = x.upper() - (last - bits.rbegin());
        std::int64_t lo = std::min<std::int64_t>(0, lowest);
        std::int64_t hi = std::max<std::int64_t>(0, highest);
        std::vector<std::uint8_t> out(bits.begin() + (lo - x.lower()), bits.begin() + (hi - x.lower() + 1));
        return StringRational(BasisState(x.sign(), lo, hi, std::move(out)));
    }

    const BasisState& state() const noexcept { return state_; }
    operator const BasisState&() const noexcept { return state_; }  // NOLINT(google-explicit-constructor)

    Sign sign() const noexcept { return state_.sign(); }
    std::int64_t lower() const noexcept { return state_.lower(); }
    std::int64_t upper() const noexcept { return state_.upper(); }
    std::uint8_t bit(std::int64_t site) const noexcept { return state_.bit(site); }
    bool is_zero() const noexcept { return state_.all_zero(); }

    friend bool operator==(const StringRational&, const StringRational&) = default;
    friend std::strong_ordering operator<=>(const StringRational& a, const StringRational& b) {
        return a.state_ <=> b.state_;
    }

private:
    explicit StringRational(BasisState s) : state_(std::move(s)) {}

    BasisState state_;
};

inline StringRational canonicalize(const BasisState& x) { return StringRational::canonical(x); }

inline StringRational canonicalize(const RawStringState& raw) {
    raw.validate();
    auto moved = translate(raw, -raw.position);
    return StringRational::canonical(BasisState(moved.sign, moved.lower, moved.upper, moved.bits));
}

inline DyadicValue value(const StringRational& x) { return value(x.state()); }

/// Inverse of value(): the canonical state carrying v.
inline StringRational from_value(const DyadicValue& v) {
    if (v.is_zero()) return StringRational();
    BigInt n = v.numerator();
    Sign sign = Sign::plus;
    if (n.sign() < 0) {
        sign = Sign::minus;
        n = -n;
    }
    std::vector<std::uint8_t> bits;  // least significant first
    while (!n.is_zero()) {
        bits.push_back(static_cast<std::uint8_t>(boost::multiprecision::bit_test(n, 0) ? 1 : 0));
        n >>= 1;
    }
    auto lower = -static_cast<std::int64_t>(v.exponent());
    auto upper = lower + static_cast<std::int64_t>(bits.size()) - 1;
    if (upper < 0) {
        bits.resize(bits.size() + static_cast<std::size_t>(-upper), 0);
        upper = 0;
    }
    return canonicalize(BasisState(sign, lower, upper, std::move(bits)));
}

// --- text form -------------------------------------------------------------
//
// Compact form: <integer bits><sign><fraction bits>, e.g. "1001-0111" for
// -9.4375 and "0+" for zero. The sign sits at the binal point. A signed
// positional form "+1.01" / "-10" is also accepted on input.

namespace detail {

inline void read_bits(std::string_view text, std::size_t from, std::size_t to, std::string_view whole,
                      std::vector<std::uint8_t>& out) {
    for (std::size_t i = from; i < to; ++i) {
        char c = text[i];
        if (c != '0' && c != '1')
            throw ParseError(std::string(whole), i, std::string("unexpected character '") + c + "'");
        out.push_back(static_cast<std::uint8_t>(c - '0'));
    }
}

inline RawStringState assemble(Sign sign, std::vector<std::uint8_t> int_bits, std::vector<std::uint8_t> frac_bits) {
    // int_bits / frac_bits are in reading order (most significant first).
    RawStringState raw;
    raw.sign = sign;
    raw.position = 0;
    raw.upper = static_cast<std::int64_t>(int_bits.size()) - 1;
    raw.lower = -static_cast<std::int64_t>(frac_bits.size());
    raw.bits.clear();
    for (auto it = frac_bits.rbegin(); it != frac_bits.rend(); ++it) raw.bits.push_back(*it);
    for (auto it = int_bits.rbegin(); it != int_bits.rend(); ++it) raw.bits.push_back(*it);
    return raw;
}

}  // namespace detail

inline RawStringState parse(std::string_view text) {
    if (text.empty()) throw ParseError("", 0, "empty state text");
    std::vector<std::uint8_t> int_bits, frac_bits;
    if (text[0] == '+' || text[0] == '-') {
        Sign sign = text[0] == '+' ? Sign::plus : Sign::minus;
        auto dot = text.find('.');
        auto int_end = dot == std::string_view::npos ? text.size() : dot;
        if (int_end == 1) throw ParseError(std::string(text), 1, "missing integer bits");
        detail::read_bits(text, 1, int_end, text, int_bits);
        if (dot != std::string_view::npos) {
            if (dot + 1 == text.size()) throw ParseError(std::string(text), dot + 1, "missing fraction bits");
            detail::read_bits(text, dot + 1, text.size(), text, frac_bits);
        }
        return detail::assemble(sign, std::move(int_bits), std::move(frac_bits));
    }
    auto pos = text.find_first_of("+-");
    if (pos == std::string_view::npos) {
        detail::read_bits(text, 0, text.size(), text, int_bits);  // reports stray characters first
        throw ParseError(std::string(text), text.size(), "missing sign character");
    }
    detail::read_bits(text, 0, pos, text, int_bits);
    detail::read_bits(text, pos + 1, text.size(), text, frac_bits);
    return detail::assemble(text[pos] == '+' ? Sign::plus : Sign::minus, std::move(int_bits), std::move(frac_bits));
}

/// Parse keeping the written interval (no zero stripping).
inline BasisState parse_basis(std::string_view text) {
    auto raw = parse(text);
    return BasisState(raw.sign, raw.lower, raw.upper, std::move(raw.bits));
}

inline StringRational parse_canonical(std::string_view text) { return canonicalize(parse(text)); }

inline std::string format(const BasisState& x) {
    std::string out;
    out.reserve(x.sites() + 1);
    for (auto j = x.upper(); j >= 0; --j) out.push_back(static_cast<char>('0' + x.bit(j)));
    out.push_back(sign_char(x.sign()));
    for (auto j = std::int64_t{-1}; j >= x.lower(); --j) out.push_back(static_cast<char>('0' + x.bit(j)));
    return out;
}

inline std::string format(const StringRational& x) { return format(x.state()); }

inline std::ostream& operator<<(std::ostream& os, const BasisState& x) { return os << format(x); }
inline std::ostream& operator<<(std::ostream& os, const StringRational& x) { return os << format(x); }

/// The state of a natural number: sign +, lower bound 0.
class NaturalState {
public:
    explicit NaturalState(std::uint64_t n) : n_(n), state_(from_value(DyadicValue(BigInt(n), 0))) {}

    /// Accepts a canonical state only if it is a natural-number state.
    static std::optional<NaturalState> from_state(const StringRational& x) {
        if (x.sign() != Sign::plus || x.lower() != 0 || x.upper() > 63) return std::nullopt;
        return NaturalState(value(x).numerator().convert_to<std::uint64_t>());
    }

    std::uint64_t index() const noexcept { return n_; }
    const StringRational& state() const noexcept { return state_; }

private:
    std::uint64_t n_;
    StringRational state_;
};

inline NaturalState nat_state(std::uint64_t n) { return NaturalState(n); }

// --- JSON --------------------------------------------------------------------

namespace detail {

inline std::string bits_high_to_low(const BasisState& x) {
    std::string out;
    for (auto j = x.upper(); j >= x.lower(); --j) out.push_back(static_cast<char>('0' + x.bit(j)));
    return out;
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const BasisState& x) {
    j = nlohmann::json{{"sign", std::string(1, sign_char(x.sign()))},
                       {"l", x.lower()},
                       {"u", x.upper()},
                       {"bits", detail::bits_high_to_low(x)}};
}

inline void from_json(const nlohmann::json& j, BasisState& x) {
    auto sign_text = j.at("sign").get<std::string>();
    if (sign_text != "+" && sign_text != "-") throw DomainError("state JSON: sign must be \"+\" or \"-\"");
    auto l = j.at("l").get<std::int64_t>();
    auto u = j.at("u").get<std::int64_t>();
    auto text = j.at("bits").get<std::string>();
    if (u < l || text.size() != static_cast<std::size_t>(u - l + 1))
        throw DomainError("state JSON: bits length does not match [l, u]");
    std::vector<std::uint8_t> bits(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '0' && text[i] != '1') throw DomainError("state JSON: bits must be 0/1");
        bits[text.size() - 1 - i] = static_cast<std::uint8_t>(text[i] - '0');
    }
    x = BasisState(sign_text == "+" ? Sign::plus : Sign::minus, l, u, std::move(bits));
}

inline void to_json(nlohmann::json& j, const StringRational& x) { to_json(j, x.state()); }

}  // namespace qframe

#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "qframe/error.hpp"
#include "qframe/state.hpp"

namespace qframe {

using Amplitude = std::complex<double>;

/// Amplitudes smaller than this are dropped after every merge.
inline constexpr double kPruneEpsilon = 1e-15;
/// Tolerance behind is_normalized().
inline constexpr double kNormTolerance = 1e-9;

/// A finite sparse superposition of orthonormal basis keys.
///
/// Keys are kept sorted, so every reduction over the terms runs in the same
/// order and results are reproducible bit for bit.
template <class Key>
class Superposition {
public:
    using key_type = Key;
    using map_type = std::map<Key, Amplitude>;

    Superposition() = default;

    static Superposition basis(Key k) {
        Superposition s;
        s.add(std::move(k), Amplitude{1.0, 0.0});
        return s;
    }

    /// Adds `a` to the amplitude of `k`; the entry disappears if it falls
    /// below the pruning epsilon.
    void add(const Key& k, Amplitude a) {
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            if (std::abs(a) >= kPruneEpsilon) terms_.emplace(k, a);
            return;
        }
        it->second += a;
        if (std::abs(it->second) < kPruneEpsilon) terms_.erase(it);
    }

    const map_type& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    Amplitude amplitude(const Key& k) const {
        auto it = terms_.find(k);
        return it == terms_.end() ? Amplitude{} : it->second;
    }

    double norm_squared() const {
        double n = 0.0;
        for (const auto& [k, a] : terms_) n += std::norm(a);
        return n;
    }

    bool is_normalized() const { return std::abs(norm_squared() - 1.0) <= kNormTolerance; }

    void require_normalized(std::string_view what) const {
        if (!is_normalized())
            throw ContractViolation(std::string(what) + ": state is not normalized (|psi|^2 = " +
                                    std::to_string(norm_squared()) + ")");
    }

    Superposition scaled(Amplitude c) const {
        Superposition out;
        for (const auto& [k, a] : terms_) out.add(k, c * a);
        return out;
    }

    friend Superposition operator+(const Superposition& x, const Superposition& y) {
        Superposition out = x;
        for (const auto& [k, a] : y.terms_) out.add(k, a);
        return out;
    }

    friend Superposition operator*(Amplitude c, const Superposition& x) { return x.scaled(c); }

    /// Largest amplitude difference over the union of supports.
    friend double max_abs_diff(const Superposition& x, const Superposition& y) {
        double d = 0.0;
        for (const auto& [k, a] : x.terms_) d = std::max(d, std::abs(a - y.amplitude(k)));
        for (const auto& [k, a] : y.terms_) d = std::max(d, std::abs(a - x.amplitude(k)));
        return d;
    }

private:
    map_type terms_;
};

using StateSuperposition = Superposition<BasisState>;

/// <psi|phi>, conjugate-linear in the first argument.
template <class Key>
Amplitude inner_product(const Superposition<Key>& psi, const Superposition<Key>& phi) {
    Amplitude sum{};
    for (const auto& [k, a] : psi) sum += std::conj(a) * phi.amplitude(k);
    return sum;
}

/// Linear extension of a map on basis keys.
template <class Key, class F>
auto lift(F&& f, const Superposition<Key>& psi) {
    using Out = std::decay_t<std::invoke_result_t<F&, const Key&>>;
    Superposition<Out> out;
    for (const auto& [k, a] : psi) out.add(f(k), a);
    return out;
}

/// Bilinear extension of a map on basis-key pairs: sum psi(x) phi(y) |f(x, y)>.
template <class K1, class K2, class F>
auto lift(F&& f, const Superposition<K1>& psi, const Superposition<K2>& phi) {
    using Out = std::decay_t<std::invoke_result_t<F&, const K1&, const K2&>>;
    Superposition<Out> out;
    for (const auto& [x, a] : psi)
        for (const auto& [y, b] : phi) out.add(f(x, y), a * b);
    return out;
}

template <class K1, class K2>
Superposition<std::pair<K1, K2>> tensor(const Superposition<K1>& psi, const Superposition<K2>& phi) {
    return lift([](const K1& x, const K2& y) { return std::pair<K1, K2>(x, y); }, psi, phi);
}

inline StateSuperposition basis(const BasisState& x) { return StateSuperposition::basis(x); }
inline StateSuperposition basis(const StringRational& x) { return StateSuperposition::basis(x.state()); }

// --- JSON lines: {"state":"1001-0111","re":0.5,"im":-0.5} --------------------

inline void write_json_lines(std::ostream& os, const StateSuperposition& psi) {
    for (const auto& [k, a] : psi) {
        nlohmann::json line{{"state", format(k)}, {"re", a.real()}, {"im", a.imag()}};
        os << line.dump() << '\n';
    }
}

inline StateSuperposition read_json_lines(std::istream& is) {
    StateSuperposition psi;
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line);
        psi.add(parse_basis(j.at("state").get<std::string>()),
                Amplitude{j.value("re", 0.0), j.value("im", 0.0)});
    }
    return psi;
}

}  // namespace qframe

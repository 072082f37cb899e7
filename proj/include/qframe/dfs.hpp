#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qframe/error.hpp"
#include "qframe/gauge.hpp"
#include "qframe/state.hpp"
#include "qframe/superposition.hpp"

namespace qframe::dfs {

// Logical qubits carried by pairs of physical qubits (2j-1, 2j): logical 0 is
// a state of the isospin-1 triplet, logical 1 the singlet. Physical qubits
// are numbered from 1 and are independent of the string-rational lattice.

/// Dense state vector of 2n physical qubits; qubit 1 is the most significant
/// bit of the index, so index bits read like the qubit string "q1 q2 ...".
class PhysicalState {
public:
    explicit PhysicalState(std::size_t qubits) : qubits_(qubits), amp_(std::size_t{1} << qubits) {
        if (qubits == 0 || qubits > 24) throw DomainError("physical state needs 1..24 qubits");
    }

    static PhysicalState from_superposition(const Superposition<std::string>& psi) {
        if (psi.empty()) throw DomainError("empty physical superposition");
        auto n = psi.begin()->first.size();
        PhysicalState s(n);
        for (const auto& [k, a] : psi) {
            if (k.size() != n) throw DomainError("physical keys must all have the same length");
            s.amp_[index_of(k)] += a;
        }
        return s;
    }

    std::size_t qubits() const noexcept { return qubits_; }
    Amplitude& operator[](std::size_t i) { return amp_[i]; }
    const Amplitude& operator[](std::size_t i) const { return amp_[i]; }
    Amplitude amplitude(std::string_view bits) const { return amp_[index_of(bits)]; }

    double norm_squared() const {
        double n = 0.0;
        for (const auto& a : amp_) n += std::norm(a);
        return n;
    }

    /// u acting on physical qubit q (1-based).
    void apply(std::size_t q, const Mat2& u) {
        if (q < 1 || q > qubits_) throw DomainError("physical qubit index out of range");
        std::size_t mask = std::size_t{1} << (qubits_ - q);
        for (std::size_t i = 0; i < amp_.size(); ++i) {
            if (i & mask) continue;
            auto a0 = amp_[i], a1 = amp_[i | mask];
            amp_[i] = u(0, 0) * a0 + u(0, 1) * a1;
            amp_[i | mask] = u(1, 0) * a0 + u(1, 1) * a1;
        }
    }

    /// Every physical qubit q transformed by the gauge's matrix at site q.
    PhysicalState gauged(const GaugeTransform& g) const {
        PhysicalState s = *this;
        for (std::size_t q = 1; q <= qubits_; ++q) s.apply(q, g.at(static_cast<std::int64_t>(q)));
        return s;
    }

    Superposition<std::string> to_superposition() const {
        Superposition<std::string> psi;
        for (std::size_t i = 0; i < amp_.size(); ++i)
            if (std::abs(amp_[i]) >= kPruneEpsilon) psi.add(key_of(i), amp_[i]);
        return psi;
    }

    std::string key_of(std::size_t index) const {
        std::string k(qubits_, '0');
        for (std::size_t q = 0; q < qubits_; ++q)
            if (index & (std::size_t{1} << (qubits_ - 1 - q))) k[q] = '1';
        return k;
    }

private:
    static std::size_t index_of(std::string_view bits) {
        std::size_t i = 0;
        for (std::size_t q = 0; q < bits.size(); ++q) {
            if (bits[q] != '0' && bits[q] != '1') throw ParseError(std::string(bits), q, "physical qubit must be 0/1");
            i = (i << 1U) | static_cast<std::size_t>(bits[q] - '0');
        }
        return i;
    }

    std::size_t qubits_;
    std::vector<Amplitude> amp_;
};

/// Two-qubit amplitudes (|00>, |01>, |10>, |11>).
using PairState = std::array<Amplitude, 4>;

inline PairState singlet() {
    const double r = 1.0 / std::sqrt(2.0);
    return {0.0, r, -r, 0.0};
}

/// Weight of a pair state in the triplet (I = 1) and singlet (I = 0) subspaces.
inline std::pair<double, double> pair_weights(const PairState& p) {
    double t = std::norm(p[0]) + std::norm(p[3]) + 0.5 * std::norm(p[1] + p[2]);
    double s = 0.5 * std::norm(p[1] - p[2]);
    return {t, s};
}

/// Per-pair representatives of logical 0 and 1.
class LogicalEncoding {
public:
    /// Logical 0 = |00>.
    LogicalEncoding() : zero_{1.0, 0.0, 0.0, 0.0} {}

    /// Any normalized triplet state may stand for logical 0.
    explicit LogicalEncoding(PairState zero) : zero_(zero) {
        auto [t, s] = pair_weights(zero_);
        if (std::abs(t + s - 1.0) > 1e-12) throw DomainError("logical-0 representative must be normalized");
        if (s > 1e-12) throw DomainError("logical-0 representative must lie in the triplet subspace");
    }

    const PairState& zero() const noexcept { return zero_; }
    PairState one() const { return singlet(); }

    PhysicalState encode(std::string_view bits) const {
        if (bits.empty()) throw DomainError("encode needs at least one logical bit");
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i] != '0' && bits[i] != '1') throw ParseError(std::string(bits), i, "logical bit must be 0/1");
        std::vector<Amplitude> amp{1.0};
        for (char b : bits) {
            auto rep = b == '0' ? zero_ : one();
            std::vector<Amplitude> next(amp.size() * 4);
            for (std::size_t i = 0; i < amp.size(); ++i)
                for (std::size_t k = 0; k < 4; ++k) next[i * 4 + k] = amp[i] * rep[k];
            amp = std::move(next);
        }
        PhysicalState s(bits.size() * 2);
        for (std::size_t i = 0; i < amp.size(); ++i) s[i] = amp[i];
        return s;
    }

private:
    PairState zero_;
};

inline PhysicalState encode(std::string_view bits) { return LogicalEncoding().encode(bits); }

struct PairProbabilities {
    double triplet = 0.0;
    double singlet = 0.0;
};

/// Projector probabilities for every pair (2j-1, 2j).
inline std::vector<PairProbabilities> logical_probs(const PhysicalState& s) {
    if (s.qubits() % 2 != 0) throw DomainError("logical_probs needs an even number of physical qubits");
    if (std::abs(s.norm_squared() - 1.0) > kNormTolerance) throw ContractViolation("logical_probs: state is not normalized");
    auto n = s.qubits();
    std::vector<PairProbabilities> out(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        std::size_t hi = std::size_t{1} << (n - 1 - 2 * j);  // qubit 2j+1 (1-based 2j-1)
        std::size_t lo = std::size_t{1} << (n - 2 - 2 * j);
        for (std::size_t i = 0; i < (std::size_t{1} << n); ++i) {
            if (i & (hi | lo)) continue;
            auto [t, sg] = pair_weights({s[i], s[i | lo], s[i | hi], s[i | hi | lo]});
            out[j].triplet += t;
            out[j].singlet += sg;
        }
    }
    return out;
}

inline std::vector<PairProbabilities> logical_probs(const Superposition<std::string>& psi) {
    return logical_probs(PhysicalState::from_superposition(psi));
}

/// U_{2j-1} = U_{2j} for every pair j <= pairs (within tol).
inline bool is_pairwise_equal(const GaugeTransform& u, std::size_t pairs, double tol = kGroupTolerance) {
    for (std::size_t j = 1; j <= pairs; ++j)
        if (distance(u.at(static_cast<std::int64_t>(2 * j - 1)), u.at(static_cast<std::int64_t>(2 * j))) > tol) return false;
    return true;
}

/// Largest change of any pair's logical probabilities when u acts on
/// encode(bits). No precondition on u.
inline double invariance_deviation(const GaugeTransform& u, std::string_view bits,
                                   const LogicalEncoding& enc = LogicalEncoding()) {
    auto before = enc.encode(bits);
    auto p0 = logical_probs(before);
    auto p1 = logical_probs(before.gauged(u));
    double d = 0.0;
    for (std::size_t j = 0; j < p0.size(); ++j)
        d = std::max({d, std::abs(p0[j].triplet - p1[j].triplet), std::abs(p0[j].singlet - p1[j].singlet)});
    return d;
}

/// As invariance_deviation, but u must be global or pairwise equal.
inline double check_invariance(const GaugeTransform& u, std::string_view bits,
                               const LogicalEncoding& enc = LogicalEncoding()) {
    if (!u.is_global() && !is_pairwise_equal(u, bits.size()))
        throw PreconditionError("local gauge violates U_{2j-1} = U_{2j}; encoded pairs are not protected");
    return invariance_deviation(u, bits, enc);
}

enum class GaugeFamily { global, local_paired, local_unpaired };

inline std::string family_name(GaugeFamily f) {
    switch (f) {
        case GaugeFamily::global: return "global";
        case GaugeFamily::local_paired: return "local-paired";
        case GaugeFamily::local_unpaired: return "local-unpaired";
    }
    return "global";
}

template <class Rng>
GaugeTransform random_physical_gauge(Rng& rng, GaugeFamily family, std::size_t pairs) {
    if (family == GaugeFamily::global) return GaugeTransform::global(random_su2(rng));
    std::map<std::int64_t, Mat2> sites;
    for (std::size_t j = 1; j <= pairs; ++j) {
        auto a = random_su2(rng);
        sites[static_cast<std::int64_t>(2 * j - 1)] = a;
        sites[static_cast<std::int64_t>(2 * j)] = family == GaugeFamily::local_paired ? a : random_su2(rng);
    }
    return GaugeTransform::local(std::move(sites));
}

struct FuzzReport {
    std::string bits;
    GaugeFamily family = GaugeFamily::global;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    double max_deviation = 0.0;
    std::size_t above_threshold = 0;  ///< trials with deviation > threshold
    double threshold = 0.1;
};

/// Draws `trials` gauges of one family; trial t uses its own generator seeded
/// from the master seed, so any single trial can be replayed.
inline FuzzReport fuzz_invariance(std::string_view bits, std::size_t trials, std::uint64_t seed, GaugeFamily family,
                                  double threshold = 0.1) {
    FuzzReport r{std::string(bits), family, seed, trials, 0.0, 0, threshold};
    std::mt19937_64 master(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(master());
        auto u = random_physical_gauge(rng, family, bits.size());
        double d = invariance_deviation(u, bits);
        r.max_deviation = std::max(r.max_deviation, d);
        if (d > threshold) ++r.above_threshold;
    }
    return r;
}

/// Logical bits by dominant projector; every pair must be within `threshold`
/// of a definite value.
inline std::string decode(const PhysicalState& s, double threshold = 1e-9) {
    auto probs = logical_probs(s);
    std::string bits;
    std::vector<std::size_t> bad;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        if (probs[j].triplet >= 1.0 - threshold)
            bits.push_back('0');
        else if (probs[j].singlet >= 1.0 - threshold)
            bits.push_back('1');
        else
            bad.push_back(j + 1);
    }
    if (!bad.empty()) throw DecodeError(std::move(bad));
    return bits;
}

/// Logical bits read as a natural number (first bit most significant).
inline StringRational logical_to_state(std::string_view bits) {
    std::vector<std::uint8_t> v;
    for (auto it = bits.rbegin(); it != bits.rend(); ++it) {
        if (*it != '0' && *it != '1') throw ParseError(std::string(bits), 0, "logical bit must be 0/1");
        v.push_back(static_cast<std::uint8_t>(*it - '0'));
    }
    if (v.empty()) return StringRational();
    auto hi = static_cast<std::int64_t>(v.size()) - 1;
    return canonicalize(BasisState(Sign::plus, 0, hi, std::move(v)));
}

inline nlohmann::json fuzz_to_json(const FuzzReport& r) {
    return {{"bits", r.bits},
            {"family", family_name(r.family)},
            {"seed", r.seed},
            {"trials", r.trials},
            {"max_deviation", r.max_deviation},
            {"threshold", r.threshold},
            {"above_threshold", r.above_threshold}};
}

}  // namespace qframe::dfs

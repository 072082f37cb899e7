#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qframe/arithmetic.hpp"
#include "qframe/error.hpp"
#include "qframe/gauge.hpp"
#include "qframe/state.hpp"
#include "qframe/superposition.hpp"

namespace qframe {

/// Claims that for accuracy `ell`, every threshold h has indices j, k >= h
/// with |term_j - term_k| > 2^-ell. Only closed-form sequences provide one;
/// the checker re-verifies every pair it is handed.
using Refuter = std::function<std::optional<std::pair<std::int64_t, std::int64_t>>(std::int64_t ell, std::int64_t h)>;

/// A sequence of states indexed from 1, tagged with the gauge of the frame it
/// lives in (identity for the original frame).
///
/// Basis-state sequences are generated as canonical states and memoized;
/// copies share the memo table.
class StateSequence {
public:
    using BasisGenerator = std::function<StringRational(std::int64_t)>;
    using Generator = std::function<StateSuperposition(std::int64_t)>;

    static StateSequence from_basis(BasisGenerator gen, std::optional<std::int64_t> length, std::string kind) {
        StateSequence s;
        s.basis_ = std::make_shared<BasisMemo>(std::move(gen));
        s.length_ = length;
        s.kind_ = std::move(kind);
        return s;
    }

    static StateSequence from_superpositions(Generator gen, std::optional<std::int64_t> length, std::string kind) {
        StateSequence s;
        s.super_ = std::make_shared<Generator>(std::move(gen));
        s.length_ = length;
        s.kind_ = std::move(kind);
        return s;
    }

    bool is_basis() const noexcept { return basis_ != nullptr; }
    std::optional<std::int64_t> length() const noexcept { return length_; }
    const std::string& kind() const noexcept { return kind_; }
    const GaugeTransform& frame() const noexcept { return frame_; }
    bool in_original_frame() const { return frame_.is_identity(0.0); }

    /// Number of terms available up to `budget`.
    std::int64_t horizon(std::int64_t budget) const { return length_ ? std::min(*length_, budget) : budget; }

    /// The n-th basis term before any frame gauge.
    StringRational basis_term(std::int64_t n) const {
        check_index(n);
        if (!basis_) throw DomainError("sequence '" + kind_ + "' is not a basis-state sequence");
        return basis_->get(n);
    }

    /// The n-th term in this sequence's frame, as a product state.
    ProductState product_term(std::int64_t n) const {
        return apply_gauge_product(frame_, basis_term(n).state());
    }

    /// The n-th term in this sequence's frame, expanded.
    StateSuperposition term(std::int64_t n, std::size_t cap = kDefaultSupportCap) const {
        check_index(n);
        if (basis_) {
            auto x = basis_->get(n);
            if (in_original_frame()) return basis(x);
            return apply_gauge(frame_, x.state(), cap);
        }
        auto psi = (*super_)(n);
        if (in_original_frame()) return psi;
        return apply_gauge(frame_, psi, cap);
    }

    /// The same sequence seen through one more gauge: frame becomes U * frame.
    StateSequence gauged(const GaugeTransform& u) const {
        StateSequence s = *this;
        s.frame_ = compose(u, frame_);
        return s;
    }

    StateSequence with_refuter(Refuter r) const {
        StateSequence s = *this;
        s.refuter_ = std::move(r);
        return s;
    }

    /// Marks the sequence as purely periodic: term(n) = cycle[(n - 1) mod p].
    StateSequence with_cycle(std::vector<StringRational> cycle) const {
        StateSequence s = *this;
        s.cycle_ = std::move(cycle);
        return s;
    }

    const Refuter& refuter() const noexcept { return refuter_; }
    const std::optional<std::vector<StringRational>>& cycle() const noexcept { return cycle_; }

private:
    struct BasisMemo {
        explicit BasisMemo(BasisGenerator g) : gen(std::move(g)) {}

        StringRational get(std::int64_t n) {
            {
                std::lock_guard lock(mu);
                if (auto it = cache.find(n); it != cache.end()) return it->second;
            }
            auto x = gen(n);
            std::lock_guard lock(mu);
            return cache.emplace(n, std::move(x)).first->second;  // first insertion wins
        }

        BasisGenerator gen;
        std::mutex mu;
        std::map<std::int64_t, StringRational> cache;
    };

    void check_index(std::int64_t n) const {
        if (n < 1) throw DomainError("sequence indices start at 1");
        if (length_ && n > *length_)
            throw DomainError("index " + std::to_string(n) + " beyond sequence length " + std::to_string(*length_));
    }

    std::shared_ptr<BasisMemo> basis_;
    std::shared_ptr<Generator> super_;
    std::optional<std::int64_t> length_;
    std::string kind_;
    GaugeTransform frame_;
    Refuter refuter_;
    std::optional<std::vector<StringRational>> cycle_;
};

// --- sequence constructors -------------------------------------------------------

inline StateSequence constant_sequence(const StringRational& x) {
    return StateSequence::from_basis([x](std::int64_t) { return x; }, std::nullopt, "constant").with_cycle({x});
}

/// Purely periodic basis sequence.
inline StateSequence periodic_sequence(std::vector<StringRational> cycle) {
    if (cycle.empty()) throw DomainError("periodic sequence needs at least one state");
    auto c = cycle;
    return StateSequence::from_basis(
               [c](std::int64_t n) { return c[static_cast<std::size_t>((n - 1) % static_cast<std::int64_t>(c.size()))]; },
               std::nullopt, "periodic")
        .with_cycle(std::move(cycle));
}

/// n -> the natural-number state of n. Diverges: terms h and h + 1 differ by 1.
inline StateSequence naturals_sequence() {
    return StateSequence::from_basis([](std::int64_t n) { return nat_state(static_cast<std::uint64_t>(n)).state(); },
                                     std::nullopt, "naturals")
        .with_refuter([](std::int64_t ell, std::int64_t h) -> std::optional<std::pair<std::int64_t, std::int64_t>> {
            if (ell < 1) return std::nullopt;
            return std::pair{h, h + 1};
        });
}

/// A 0-1 function on the sites <= top with f(top) = 1.
struct BitFunction {
    std::int64_t top = 0;
    std::function<std::uint8_t(std::int64_t)> f;

    /// f(top - i) = pattern[i mod |pattern|].
    static BitFunction periodic(std::int64_t top, const std::string& pattern) {
        if (pattern.empty() || pattern[0] != '1') throw DomainError("fseq pattern must start with 1 (f(top) = 1)");
        for (std::size_t i = 0; i < pattern.size(); ++i)
            if (pattern[i] != '0' && pattern[i] != '1')
                throw ParseError(pattern, i, "pattern must be 0/1");
        return {top, [top, pattern](std::int64_t site) {
                    auto i = static_cast<std::size_t>((top - site) % static_cast<std::int64_t>(pattern.size()));
                    return static_cast<std::uint8_t>(pattern[i] - '0');
                }};
    }

    /// f(top - i) = bits[i] for listed i, 0 below the list.
    static BitFunction listed(std::int64_t top, const std::string& bits) {
        if (bits.empty() || bits[0] != '1') throw DomainError("fseq bits must start with 1 (f(top) = 1)");
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i] != '0' && bits[i] != '1') throw ParseError(bits, i, "bits must be 0/1");
        return {top, [top, bits](std::int64_t site) {
                    auto i = static_cast<std::size_t>(top - site);
                    return i < bits.size() ? static_cast<std::uint8_t>(bits[i] - '0') : std::uint8_t{0};
                }};
    }
};

/// The raw prefix |f>_m: sites top down to -m, sign + at 0. All zero while -m is above top.
inline BasisState fseq_prefix(const BitFunction& f, std::int64_t m) {
    std::int64_t lo = std::min<std::int64_t>(-m, 0);
    std::int64_t hi = std::max<std::int64_t>(f.top, 0);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(hi - lo + 1), 0);
    for (auto j = lo; j <= f.top; ++j) bits[static_cast<std::size_t>(j - lo)] = f.f(j);
    return BasisState(Sign::plus, lo, hi, std::move(bits));
}

/// m -> |f>_m, canonicalized. Cauchy: terms beyond index l agree to 2^-l.
inline StateSequence fseq_sequence(BitFunction f) {
    return StateSequence::from_basis([f](std::int64_t m) { return canonicalize(fseq_prefix(f, m)); }, std::nullopt,
                                     "fseq");
}

inline StateSequence explicit_sequence(std::vector<StateSuperposition> terms) {
    bool all_basis = std::all_of(terms.begin(), terms.end(), [](const auto& t) {
        return t.size() == 1 && std::abs(t.begin()->second - Amplitude{1.0, 0.0}) < 1e-15;
    });
    auto n = static_cast<std::int64_t>(terms.size());
    if (all_basis) {
        std::vector<StringRational> xs;
        for (const auto& t : terms) xs.push_back(canonicalize(t.begin()->first));
        return StateSequence::from_basis([xs](std::int64_t k) { return xs[static_cast<std::size_t>(k - 1)]; }, n,
                                         "explicit");
    }
    return StateSequence::from_superpositions(
        [terms](std::int64_t k) { return terms[static_cast<std::size_t>(k - 1)]; }, n, "explicit");
}

// --- reports ---------------------------------------------------------------------

enum class Verdict { holds, refuted, inconclusive };

struct Refutation {
    std::int64_t ell = 0;
    std::int64_t j = 0;
    std::int64_t k = 0;
    DyadicValue gap;  ///< certified lower bound: |term_j - term_k| > 2^-ell
};

struct WitnessRow {
    std::int64_t ell = 0;
    std::optional<std::int64_t> h;  ///< smallest h with the bound for all j, k >= h
};

struct ProbabilityRow {
    std::int64_t ell = 0;
    std::int64_t h = 0;
    double min_p = 0.0;  ///< min over j, k in (h, h + window]
};

struct CauchyReport {
    std::string condition = "cauchy";  ///< "cauchy" or "equivalence"
    Verdict verdict = Verdict::inconclusive;
    std::vector<WitnessRow> witnesses;
    std::vector<ProbabilityRow> table;
    std::vector<double> per_ell;  ///< max over h of the table, per ell (probabilistic check)
    std::optional<double> estimate;
    std::optional<Refutation> counterexample;
    std::int64_t horizon = 0;
};

inline std::string verdict_name(const CauchyReport& r) {
    bool eq = r.condition == "equivalence";
    switch (r.verdict) {
        case Verdict::holds: return eq ? "equivalent" : "cauchy";
        case Verdict::refuted: return eq ? "not-equivalent" : "not-cauchy";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline bool same_witnesses(const CauchyReport& a, const CauchyReport& b) {
    if (a.witnesses.size() != b.witnesses.size()) return false;
    for (std::size_t i = 0; i < a.witnesses.size(); ++i)
        if (a.witnesses[i].ell != b.witnesses[i].ell || a.witnesses[i].h != b.witnesses[i].h) return false;
    return true;
}

namespace detail {

/// A witness must leave at least half of the probed horizon after it.
inline std::int64_t witness_limit(std::int64_t horizon) { return std::max<std::int64_t>(1, (horizon + 1) / 2); }

/// Smallest h in [1, limit] with spread(h) <= eps, where spread is
/// non-increasing in h.
template <class Spread>
std::optional<std::int64_t> first_witness(std::int64_t limit, const DyadicValue& eps, Spread&& spread) {
    for (std::int64_t h = 1; h <= limit; ++h)
        if (spread(h) <= eps) return h;
    return std::nullopt;
}

inline std::optional<Refutation> verify_refuter(const Refuter& refuter, std::int64_t ell, std::int64_t horizon,
                                                const std::function<DyadicValue(std::int64_t)>& value_at) {
    if (!refuter) return std::nullopt;
    auto eps = DyadicValue::pow2(-ell);
    std::optional<Refutation> first;
    for (std::int64_t h = 1; h <= horizon; ++h) {
        auto pair = refuter(ell, h);
        if (!pair || pair->first < h || pair->second < h) return std::nullopt;
        auto gap = abs(value_at(pair->first) - value_at(pair->second));
        if (!(gap > eps)) return std::nullopt;
        if (!first) first = Refutation{ell, pair->first, pair->second, gap};
    }
    return first;
}

/// Refuter for a purely periodic sequence: the tail from any h runs through
/// the whole cycle.
inline Refuter cycle_refuter(const std::vector<StringRational>& cycle) {
    return [cycle](std::int64_t ell, std::int64_t h) -> std::optional<std::pair<std::int64_t, std::int64_t>> {
        auto p = static_cast<std::int64_t>(cycle.size());
        auto eps = DyadicValue::pow2(-ell);
        for (std::int64_t a = 0; a < p; ++a)
            for (std::int64_t b = a + 1; b < p; ++b)
                if (abs(value(cycle[static_cast<std::size_t>(a)]) - value(cycle[static_cast<std::size_t>(b)])) > eps) {
                    // first index >= h congruent to a (resp. b) modulo p
                    auto at = [&](std::int64_t r) { return h + ((r - (h - 1)) % p + p) % p; };
                    return std::pair{at(a), at(b)};
                }
        return std::nullopt;
    };
}

inline Refuter effective_refuter(const StateSequence& s) {
    if (s.refuter()) return s.refuter();
    if (s.cycle()) return cycle_refuter(*s.cycle());
    return nullptr;
}

}  // namespace detail

/// Cauchy condition on a basis-state sequence: for each l <= ell_max, the
/// smallest h with |term_j - term_k| <= 2^-l for all probed j, k >= h.
///
/// Values are exact. Since the condition over a tail is max - min <= 2^-l,
/// the search runs on suffix extrema.
inline CauchyReport check_cauchy_basis(const StateSequence& seq, std::int64_t ell_max, std::int64_t h_budget) {
    if (ell_max < 1 || h_budget < 1) throw DomainError("cauchy check needs ell_max >= 1 and budget >= 1");
    CauchyReport r;
    r.horizon = seq.horizon(h_budget);
    std::vector<DyadicValue> v(static_cast<std::size_t>(r.horizon + 1));
    for (std::int64_t n = 1; n <= r.horizon; ++n) v[static_cast<std::size_t>(n)] = value(seq.basis_term(n));
    std::vector<DyadicValue> hi(v.size()), lo(v.size());
    for (auto n = r.horizon; n >= 1; --n) {
        auto i = static_cast<std::size_t>(n);
        hi[i] = (n == r.horizon) ? v[i] : std::max(v[i], hi[i + 1]);
        lo[i] = (n == r.horizon) ? v[i] : std::min(v[i], lo[i + 1]);
    }
    auto limit = detail::witness_limit(r.horizon);
    std::optional<std::int64_t> failing;
    for (std::int64_t ell = 1; ell <= ell_max; ++ell) {
        auto eps = DyadicValue::pow2(-ell);
        auto h = detail::first_witness(limit, eps, [&](std::int64_t k) {
            return hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)];
        });
        r.witnesses.push_back({ell, h});
        if (!h && !failing) failing = ell;
    }
    if (!failing) {
        r.verdict = Verdict::holds;
        return r;
    }
    auto value_at = [&seq](std::int64_t n) { return value(seq.basis_term(n)); };
    if (auto ref = detail::verify_refuter(detail::effective_refuter(seq), *failing, r.horizon, value_at)) {
        r.verdict = Verdict::refuted;
        r.counterexample = ref;
    }
    return r;
}

/// Cross-difference condition: sequences A and B are equivalent when for each
/// l there is h with |a_j - b_k| <= 2^-l for all j, k >= h.
inline CauchyReport equivalent(const StateSequence& a, const StateSequence& b, std::int64_t ell_max,
                               std::int64_t budget) {
    if (ell_max < 1 || budget < 1) throw DomainError("equivalence check needs ell_max >= 1 and budget >= 1");
    CauchyReport r;
    r.condition = "equivalence";
    r.horizon = std::min(a.horizon(budget), b.horizon(budget));
    auto n = static_cast<std::size_t>(r.horizon);
    std::vector<DyadicValue> ahi(n + 2), alo(n + 2), bhi(n + 2), blo(n + 2);
    for (auto k = r.horizon; k >= 1; --k) {
        auto i = static_cast<std::size_t>(k);
        auto va = value(a.basis_term(k)), vb = value(b.basis_term(k));
        bool last = k == r.horizon;
        ahi[i] = last ? va : std::max(va, ahi[i + 1]);
        alo[i] = last ? va : std::min(va, alo[i + 1]);
        bhi[i] = last ? vb : std::max(vb, bhi[i + 1]);
        blo[i] = last ? vb : std::min(vb, blo[i + 1]);
    }
    auto limit = detail::witness_limit(r.horizon);
    std::optional<std::int64_t> failing;
    for (std::int64_t ell = 1; ell <= ell_max; ++ell) {
        auto eps = DyadicValue::pow2(-ell);
        auto h = detail::first_witness(limit, eps, [&](std::int64_t k) {
            auto i = static_cast<std::size_t>(k);
            return std::max(ahi[i] - blo[i], bhi[i] - alo[i]);
        });
        r.witnesses.push_back({ell, h});
        if (!h && !failing) failing = ell;
    }
    if (!failing) {
        r.verdict = Verdict::holds;
        return r;
    }
    // Certified only when both tails are known exactly (purely periodic).
    if (a.cycle() && b.cycle()) {
        auto eps = DyadicValue::pow2(-*failing);
        const auto& ca = *a.cycle();
        const auto& cb = *b.cycle();
        for (std::size_t i = 0; i < ca.size() && !r.counterexample; ++i)
            for (std::size_t k = 0; k < cb.size(); ++k) {
                auto gap = abs(value(ca[i]) - value(cb[k]));
                if (gap > eps) {
                    r.counterexample = Refutation{*failing, static_cast<std::int64_t>(i) + 1,
                                                  static_cast<std::int64_t>(k) + 1, gap};
                    break;
                }
            }
        if (r.counterexample) r.verdict = Verdict::refuted;
    }
    return r;
}

// --- probabilistic condition -------------------------------------------------------

namespace detail {

/// Outcome distribution of a superposition by exact value, sorted.
struct ValueDistribution {
    std::vector<DyadicValue> values;
    std::vector<double> cumulative;  ///< cumulative[i] = P(value < values[i]), one extra entry

    explicit ValueDistribution(const StateSuperposition& psi) {
        std::map<DyadicValue, double> grouped;
        for (const auto& [x, a] : psi) grouped[value(x)] += std::norm(a);
        cumulative.push_back(0.0);
        for (const auto& [v, p] : grouped) {
            values.push_back(v);
            cumulative.push_back(cumulative.back() + p);
        }
    }

    double mass(std::size_t i) const { return cumulative[i + 1] - cumulative[i]; }

    /// Probability of a value in [lo, hi].
    double within(const DyadicValue& lo, const DyadicValue& hi) const {
        auto first = std::lower_bound(values.begin(), values.end(), lo);
        auto last = std::upper_bound(values.begin(), values.end(), hi);
        return cumulative[static_cast<std::size_t>(last - values.begin())] -
               cumulative[static_cast<std::size_t>(first - values.begin())];
    }
};

}  // namespace detail

/// P_{j,m,l} for l = 1..ell_max: probability that |x - y| <= 2^-l with x drawn
/// from psi_j and y from psi_m. Entry [l - 1].
inline std::vector<double> prob_pair_table(const StateSuperposition& psi_j, const StateSuperposition& psi_m,
                                           std::int64_t ell_max) {
    psi_j.require_normalized("prob_pair");
    psi_m.require_normalized("prob_pair");
    detail::ValueDistribution dj(psi_j), dm(psi_m);
    std::vector<double> out;
    for (std::int64_t ell = 1; ell <= ell_max; ++ell) {
        auto eps = DyadicValue::pow2(-ell);
        double p = 0.0;
        for (std::size_t i = 0; i < dj.values.size(); ++i)
            p += dj.mass(i) * dm.within(dj.values[i] - eps, dj.values[i] + eps);
        out.push_back(p);
    }
    return out;
}

inline double prob_pair(const StateSuperposition& psi_j, const StateSuperposition& psi_m, std::int64_t ell) {
    if (ell < 1) throw DomainError("prob_pair needs l >= 1");
    return prob_pair_table(psi_j, psi_m, ell).back();
}

/// Finite surrogate of liminf_l limsup_h liminf_{j,k>h} P_{j,k,l}: for each
/// l, min of P over j, k in (h, h + window], max over h in [0, h_max], then
/// min over l. Every cell is kept in the report.
inline CauchyReport prob_cauchy(const StateSequence& seq, std::int64_t ell_max, std::int64_t window,
                                std::int64_t h_max, std::size_t cap = kDefaultSupportCap) {
    if (ell_max < 1 || window < 1 || h_max < 0) throw DomainError("prob_cauchy needs l_max >= 1, window >= 1, h_max >= 0");
    CauchyReport r;
    auto want = h_max + window;
    r.horizon = seq.horizon(want);
    if (r.horizon < want) h_max = std::max<std::int64_t>(0, r.horizon - window);
    auto top = std::min(r.horizon, h_max + window);

    std::vector<StateSuperposition> terms(static_cast<std::size_t>(top + 1));
    for (std::int64_t n = 1; n <= top; ++n) terms[static_cast<std::size_t>(n)] = seq.term(n, cap);

    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<double>> p;
    auto cell = [&](std::int64_t j, std::int64_t k) -> const std::vector<double>& {
        auto key = std::minmax(j, k);
        auto it = p.find(key);
        if (it == p.end())
            it = p.emplace(key, prob_pair_table(terms[static_cast<std::size_t>(key.first)],
                                                terms[static_cast<std::size_t>(key.second)], ell_max))
                     .first;
        return it->second;
    };

    double estimate = 1.0;
    for (std::int64_t ell = 1; ell <= ell_max; ++ell) {
        double best = 0.0;
        for (std::int64_t h = 0; h <= h_max; ++h) {
            double worst = 1.0;
            auto last = std::min(top, h + window);
            for (auto j = h + 1; j <= last; ++j)
                for (auto k = j; k <= last; ++k) worst = std::min(worst, cell(j, k)[static_cast<std::size_t>(ell - 1)]);
            r.table.push_back({ell, h, worst});
            best = std::max(best, worst);
        }
        r.per_ell.push_back(best);
        estimate = std::min(estimate, best);
        // witness: first h reaching probability one at this l
        std::optional<std::int64_t> w;
        for (const auto& row : r.table)
            if (row.ell == ell && row.min_p >= 1.0 - 1e-12) {
                w = row.h;
                break;
            }
        r.witnesses.push_back({ell, w});
    }
    r.estimate = estimate;

    bool monotone = true;
    for (std::size_t i = 1; i < r.witnesses.size(); ++i)
        if (r.witnesses[i].h && r.witnesses[i - 1].h && *r.witnesses[i].h < *r.witnesses[i - 1].h) monotone = false;
    if (estimate >= 1.0 - 1e-12 && monotone) {
        r.verdict = Verdict::holds;
    } else if (seq.is_basis() && seq.in_original_frame()) {
        // basis terms: refutation can be certified exactly
        auto exact = check_cauchy_basis(seq, ell_max, r.horizon);
        if (exact.verdict == Verdict::refuted) {
            r.verdict = Verdict::refuted;
            r.counterexample = exact.counterexample;
        }
    }
    return r;
}

/// |<psi_n|psi_{n+1}>| for n = 1..count-1: arithmetic convergence does not make
/// consecutive terms approach each other as vectors.
inline std::vector<double> consecutive_overlaps(const StateSequence& seq, std::int64_t count,
                                                std::size_t cap = kDefaultSupportCap) {
    std::vector<double> out;
    auto n = seq.horizon(count);
    for (std::int64_t k = 1; k < n; ++k) out.push_back(std::abs(inner_product(seq.term(k, cap), seq.term(k + 1, cap))));
    return out;
}

// --- Cauchy operators ---------------------------------------------------------------

/// Maps the natural-number state |+, s> with value n >= 1 to the n-th term.
class CauchyOperator {
public:
    explicit CauchyOperator(StateSequence seq) : seq_(std::move(seq)) {
        if (!seq_.is_basis()) throw DomainError("Cauchy operators act on basis-state sequences");
    }

    StringRational apply(const NaturalState& n) const {
        if (n.index() < 1) throw DomainError("Cauchy operator is defined on natural states n >= 1");
        return seq_.basis_term(static_cast<std::int64_t>(n.index()));
    }

    StringRational apply(const StringRational& x) const {
        auto n = NaturalState::from_state(x);
        if (!n) throw DomainError("operand " + format(x) + " is not a natural-number state");
        return apply(*n);
    }

    /// O_U = U O U^dagger on a gauged natural state: undo U, apply O, redo U.
    ProductState apply_conjugated(const GaugedArithmetic& frame, const ProductState& gauged_natural) const {
        return frame.embed(apply(frame.pull_back(gauged_natural)));
    }

    /// n -> O|n>.
    StateSequence sequence() const {
        auto self = *this;
        auto s = StateSequence::from_basis([self](std::int64_t n) { return self.apply(nat_state(static_cast<std::uint64_t>(n))); },
                                           seq_.length(), seq_.kind());
        if (seq_.refuter()) s = s.with_refuter(seq_.refuter());
        if (seq_.cycle()) s = s.with_cycle(*seq_.cycle());
        return s;
    }

    const StateSequence& source() const noexcept { return seq_; }

private:
    StateSequence seq_;
};

inline CauchyOperator operator_from_sequence(const StateSequence& seq) { return CauchyOperator(seq); }
inline StateSequence sequence_from_operator(const CauchyOperator& op) { return op.sequence(); }

inline CauchyReport check_cauchy_operator(const CauchyOperator& op, std::int64_t ell_max, std::int64_t budget) {
    return check_cauchy_basis(op.sequence(), ell_max, budget);
}

// --- gauged (U-Cauchy) condition ----------------------------------------------------

namespace detail {

/// U-Cauchy witnesses from U-frame terms, all arithmetic through the
/// conjugated relations and operations.
inline std::vector<WitnessRow> gauged_witnesses(const GaugedArithmetic& frame, const std::vector<ProductState>& terms,
                                                std::int64_t ell_max) {
    auto n = static_cast<std::int64_t>(terms.size());
    std::vector<ProductState> acc;
    for (std::int64_t ell = 1; ell <= ell_max; ++ell) acc.push_back(frame.embed(accuracy_state(ell)));
    // worst[ell - 1] = largest min(j, k) over failing pairs
    std::vector<std::int64_t> worst(static_cast<std::size_t>(ell_max), 0);
    for (std::int64_t j = 1; j <= n; ++j)
        for (std::int64_t k = j + 1; k <= n; ++k) {
            const auto& a = terms[static_cast<std::size_t>(j - 1)];
            const auto& b = terms[static_cast<std::size_t>(k - 1)];
            auto d = frame.abs(frame.apply(Operation::sub, a, b));
            for (std::int64_t ell = 1; ell <= ell_max; ++ell)
                if (!frame.holds(Relation::le, d, acc[static_cast<std::size_t>(ell - 1)]))
                    worst[static_cast<std::size_t>(ell - 1)] = std::max(worst[static_cast<std::size_t>(ell - 1)], j);
        }
    auto limit = witness_limit(n);
    std::vector<WitnessRow> rows;
    for (std::int64_t ell = 1; ell <= ell_max; ++ell) {
        auto h = worst[static_cast<std::size_t>(ell - 1)] + 1;
        rows.push_back({ell, h <= limit ? std::optional<std::int64_t>(h) : std::nullopt});
    }
    return rows;
}

inline CauchyReport judge_gauged(const StateSequence& seq, const GaugedArithmetic& frame,
                                 const std::vector<ProductState>& terms, std::int64_t ell_max, std::int64_t budget) {
    CauchyReport gauged;
    gauged.horizon = static_cast<std::int64_t>(terms.size());
    gauged.witnesses = gauged_witnesses(frame, terms, ell_max);
    bool all = std::all_of(gauged.witnesses.begin(), gauged.witnesses.end(), [](const auto& w) { return w.h.has_value(); });

    // pull-back route: the plain check on the original terms
    auto plain = check_cauchy_basis(seq, ell_max, budget);
    if (all) {
        gauged.verdict = Verdict::holds;
    } else {
        // a refutation is a statement about values, which U preserves
        gauged.verdict = plain.verdict;
        gauged.counterexample = plain.counterexample;
    }
    if (!same_witnesses(gauged, plain) || gauged.verdict != plain.verdict)
        throw ConsistencyError("U-Cauchy judgement disagrees with the pulled-back Cauchy judgement");
    return gauged;
}

}  // namespace detail

/// Judges {U term_n} with the conjugated relations and operations, and
/// cross-checks against the plain check on the un-gauged terms. The two must
/// agree exactly; otherwise ConsistencyError.
inline CauchyReport check_cauchy_gauged(const StateSequence& seq, const GaugeTransform& u, std::int64_t ell_max,
                                        std::int64_t h_budget) {
    if (!seq.in_original_frame()) throw PreconditionError("check_cauchy_gauged expects a sequence in the original frame");
    GaugedArithmetic frame(u);
    auto n = seq.horizon(h_budget);
    std::vector<ProductState> terms;
    terms.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k <= n; ++k) terms.push_back(frame.embed(seq.basis_term(k)));
    return detail::judge_gauged(seq, frame, terms, ell_max, h_budget);
}

/// U-Cauchy check of O_U = U O U^dagger through its action on the gauged
/// natural states U|n>.
inline CauchyReport check_cauchy_operator_gauged(const CauchyOperator& op, const GaugeTransform& u, std::int64_t ell_max,
                                                 std::int64_t budget) {
    GaugedArithmetic frame(u);
    auto seq = op.sequence();
    auto n = seq.horizon(budget);
    std::vector<ProductState> terms;
    for (std::int64_t k = 1; k <= n; ++k)
        terms.push_back(op.apply_conjugated(frame, frame.embed(nat_state(static_cast<std::uint64_t>(k)).state())));
    return detail::judge_gauged(seq, frame, terms, ell_max, budget);
}

// --- JSON sequence specs ---------------------------------------------------------------

namespace detail {

inline StateSuperposition term_from_json(const nlohmann::json& t) {
    if (t.is_string()) return basis(parse_basis(t.get<std::string>()));
    if (t.is_object()) return basis(t.get<BasisState>());
    StateSuperposition psi;
    for (const auto& e : t)
        psi.add(parse_basis(e.at("state").get<std::string>()), Amplitude{e.value("re", 0.0), e.value("im", 0.0)});
    return psi;
}

}  // namespace detail

/// Builds a sequence from a spec object. Kinds: "constant" {"state"},
/// "fseq" {"top", "pattern" | "bits"}, "naturals", "periodic" {"cycle"},
/// "explicit" {"terms"}, "file" {"path"} (one term per line, relative to
/// `base`). Terms are state strings, state objects, or arrays of
/// {"state","re","im"}.
inline StateSequence sequence_from_json(const nlohmann::json& spec, const std::filesystem::path& base = {}) {
    auto kind = spec.at("kind").get<std::string>();
    if (kind == "constant") return constant_sequence(parse_canonical(spec.at("state").get<std::string>()));
    if (kind == "naturals") return naturals_sequence();
    if (kind == "fseq") {
        auto top = spec.value("top", std::int64_t{0});
        if (spec.contains("pattern")) return fseq_sequence(BitFunction::periodic(top, spec.at("pattern").get<std::string>()));
        if (spec.contains("bits")) return fseq_sequence(BitFunction::listed(top, spec.at("bits").get<std::string>()));
        throw DomainError("fseq spec needs \"pattern\" or \"bits\"");
    }
    if (kind == "periodic") {
        std::vector<StringRational> cycle;
        for (const auto& t : spec.at("cycle")) cycle.push_back(parse_canonical(t.get<std::string>()));
        return periodic_sequence(std::move(cycle));
    }
    if (kind == "explicit") {
        std::vector<StateSuperposition> terms;
        for (const auto& t : spec.at("terms")) terms.push_back(detail::term_from_json(t));
        return explicit_sequence(std::move(terms));
    }
    if (kind == "file") {
        auto path = std::filesystem::path(spec.at("path").get<std::string>());
        if (path.is_relative()) path = base / path;
        std::ifstream in(path);
        if (!in) throw DomainError("cannot open sequence file " + path.string());
        std::vector<StateSuperposition> terms;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto first = line.find_first_not_of(" \t");
            if (line[first] == '[' || line[first] == '{' || line[first] == '"')
                terms.push_back(detail::term_from_json(nlohmann::json::parse(line)));
            else
                terms.push_back(basis(parse_basis(line.substr(first, line.find_last_not_of(" \t\r") - first + 1))));
        }
        auto s = explicit_sequence(std::move(terms));
        return s;
    }
    throw DomainError("unknown sequence kind '" + kind + "'");
}

inline nlohmann::json report_to_json(const CauchyReport& r) {
    nlohmann::json j;
    j["condition"] = r.condition;
    j["verdict"] = verdict_name(r);
    j["horizon"] = r.horizon;
    auto w = nlohmann::json::array();
    for (const auto& row : r.witnesses)
        w.push_back({{"ell", row.ell}, {"h", row.h ? nlohmann::json(*row.h) : nlohmann::json("none within budget")}});
    j["witnesses"] = w;
    if (r.estimate) {
        j["estimate"] = *r.estimate;
        j["per_ell"] = r.per_ell;
        auto t = nlohmann::json::array();
        for (const auto& row : r.table) t.push_back({{"ell", row.ell}, {"h", row.h}, {"min_p", row.min_p}});
        j["table"] = t;
    }
    if (r.counterexample)
        j["counterexample"] = {{"ell", r.counterexample->ell},
                               {"j", r.counterexample->j},
                               {"k", r.counterexample->k},
                               {"gap", r.counterexample->gap.to_decimal()}};
    return j;
}

}  // namespace qframe

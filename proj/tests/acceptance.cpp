// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "qframe/qframe.hpp"

using namespace qframe;

namespace {

// pinned tolerances
constexpr double kAmpTol = 1e-12;
constexpr double kUnequalDeviation = 0.1;
constexpr double kUnequalRate = 0.95;
constexpr double kCriterion1Seconds = 1e-3;
constexpr double kCriterion2Seconds = 10.0;
// 1 - estimate for the Hadamard-gauged ones-sequence, l_max = 2, window 2;
// fixed from the brute-force enumeration below, then locked
constexpr double kLockedMargin = 0.7109375;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(int n, const std::string& name, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s (%.3fs) %s\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Value times 2^scale from the bits, as a plain integer.
std::int64_t scaled_value(const BasisState& x, int scale) {
    std::int64_t v = 0;
    for (auto j = x.lower(); j <= x.upper(); ++j)
        if (x.bit(j)) v += std::int64_t{1} << (j + scale);
    return x.sign() == Sign::minus ? -v : v;
}

Outcome paper_value() {
    auto t0 = std::chrono::steady_clock::now();
    auto x = parse_canonical("1001-0111");
    auto v = value(x);
    auto text = format(x);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool exact = oracle::rational(v) == oracle::Rational(-151, 16) && v.to_decimal() == "-9.4375";
    bool ok = exact && text == "1001-0111" && secs < kCriterion1Seconds;
    return {ok, "value " + v.to_decimal() + ", round trip " + text + ", " + fmt(secs * 1e6) + " us"};
}

Outcome exhaustive_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    auto states = oracle::canonical_states(-4, 4);
    std::vector<StringRational> xs;
    std::vector<std::int64_t> v;
    for (const auto& s : states) {
        xs.push_back(canonicalize(s));
        v.push_back(scaled_value(s, 4));
    }
    std::size_t pairs = 0, bad = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t k = 0; k < xs.size(); ++k) {
            ++pairs;
            const auto &x = xs[i], &y = xs[k];
            bool ok = eq_A(x, y) == (v[i] == v[k]) && le_A(x, y) == (v[i] <= v[k]) &&
                      scaled_value(add_A(x, y), 4) == v[i] + v[k] && scaled_value(sub_A(x, y), 4) == v[i] - v[k] &&
                      scaled_value(mul_A(x, y), 8) == v[i] * v[k];
            if (!ok) ++bad;
        }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {bad == 0 && secs < kCriterion2Seconds,
            std::to_string(states.size()) + " states, " + std::to_string(pairs) + " pairs, " + std::to_string(bad) +
                " mismatches"};
}

Outcome accuracy_values() {
    int bad = 0;
    for (std::int64_t ell = 1; ell <= 64; ++ell)
        if (oracle::value(accuracy_state(ell)) != oracle::pow2(-ell) || oracle::rational(value(accuracy_state(ell))) != oracle::pow2(-ell))
            ++bad;
    return {bad == 0, "l = 1..64, " + std::to_string(bad) + " mismatches"};
}

Outcome division_bound() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::int64_t> dl(1, 32);
    int triples = 0, bound_bad = 0, oracle_bad = 0, repro_bad = 0;
    while (triples < 10000) {
        auto x = oracle::random_canonical(rng, -12, 12), y = oracle::random_canonical(rng, -12, 12);
        if (y.is_zero()) continue;
        auto ell = dl(rng);
        ++triples;
        auto q = div_A(x, y, ell);
        oracle::Rational exact = oracle::value(x) / oracle::value(y);
        oracle::Rational err = oracle::value(q) - exact;
        if (err < 0) err = -err;
        if (err > oracle::pow2(-ell)) ++bound_bad;
        if (oracle::value(q) != oracle::truncated_quotient(oracle::value(x), oracle::value(y), ell)) ++oracle_bad;
        if (format(div_A(x, y, ell)) != format(q)) ++repro_bad;
    }
    return {bound_bad + oracle_bad + repro_bad == 0,
            std::to_string(triples) + " triples; bound/oracle/repro failures " + std::to_string(bound_bad) + "/" +
                std::to_string(oracle_bad) + "/" + std::to_string(repro_bad)};
}

Outcome gauge_unitarity() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> sites(1, 12);
    double worst_norm = 0.0, worst_compose = 0.0;
    for (int i = 0; i < 100; ++i) {
        int n = sites(rng);
        std::uniform_int_distribution<int> split(0, n - 1);
        std::int64_t lo = -split(rng), hi = lo + n - 1;
        std::bernoulli_distribution coin(0.5);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
        for (auto& b : bits) b = coin(rng);
        BasisState x(coin(rng) ? Sign::minus : Sign::plus, lo, hi, bits);
        auto u1 = random_local_gauge(rng, lo, hi), u2 = random_local_gauge(rng, lo, hi);
        auto psi = apply_gauge(u1, x);
        worst_norm = std::max(worst_norm, std::abs(psi.norm_squared() - 1.0));
        auto composed = apply_gauge(compose(u2, u1), x);
        worst_norm = std::max(worst_norm, std::abs(composed.norm_squared() - 1.0));
        auto stepped = n <= 6 ? apply_gauge(u2, psi) : apply_gauge_product(u1, x).transformed(u2).expand();
        worst_compose = std::max(worst_compose, max_abs_diff(composed, stepped));
    }
    return {worst_norm <= kAmpTol && worst_compose <= kAmpTol,
            "max norm error " + fmt(worst_norm) + ", max compose error " + fmt(worst_compose)};
}

Outcome conjugation_identities() {
    std::mt19937_64 rng(6);
    double worst_rel = 0.0, worst_add = 0.0;
    int frame_bad = 0;
    for (int i = 0; i < 100; ++i) {
        auto x = oracle::random_state(rng, -1, 1), y = oracle::random_state(rng, -1, 1);
        auto cx = canonicalize(x), cy = canonicalize(y);
        auto u = random_local_gauge(rng, -4, 4);
        for (auto rel : {Relation::eq, Relation::le}) {
            double p = prob_rel_gauged(u, apply_gauge(u, x), apply_gauge(u, y), rel);
            worst_rel = std::max(worst_rel, std::abs(p - (holds(rel, cx, cy) ? 1.0 : 0.0)));
        }
        auto pair = Superposition<RegisterPair>::basis({x, y});
        auto lhs = conjugated_op(u, Operation::add, apply_gauge(u, pair));
        auto rhs = apply_gauge(u, lift([](const RegisterPair& p) { return register_op(Operation::add, p); }, pair));
        worst_add = std::max(worst_add, max_abs_diff(lhs, rhs));
        GaugedArithmetic frame(u);
        if (frame.holds(Relation::eq, frame.embed(cx), frame.embed(cy)) != eq_A(cx, cy)) ++frame_bad;
    }
    return {worst_rel <= kAmpTol && worst_add <= kAmpTol && frame_bad == 0,
            "max relation error " + fmt(worst_rel) + ", max addition-identity error " + fmt(worst_add)};
}

Outcome cauchy_detection() {
    int sequences = 0, bad = 0;
    for (int len = 1; len <= 4; ++len)
        for (int m = 0; m < (1 << (len - 1)); ++m) {
            std::string pattern = "1";
            for (int i = len - 2; i >= 0; --i) pattern += (m >> i) & 1 ? '1' : '0';
            for (std::int64_t top : {-3, 0, 2}) {
                ++sequences;
                auto r = check_cauchy_basis(fseq_sequence(BitFunction::periodic(top, pattern)), 10, 40);
                bool ok = r.verdict == Verdict::holds;
                for (const auto& w : r.witnesses) ok = ok && w.h && *w.h <= w.ell;
                if (!ok) ++bad;
            }
        }
    auto n = check_cauchy_basis(naturals_sequence(), 6, 40);
    bool refuted = n.verdict == Verdict::refuted && n.counterexample &&
                   oracle::value(nat_state(static_cast<std::uint64_t>(n.counterexample->k)).state()) -
                           oracle::value(nat_state(static_cast<std::uint64_t>(n.counterexample->j)).state()) ==
                       1;
    std::string ce = n.counterexample ? "(" + std::to_string(n.counterexample->j) + ", " +
                                            std::to_string(n.counterexample->k) + ")"
                                      : "none";
    return {bad == 0 && refuted, std::to_string(sequences) + " periodic sequences, " + std::to_string(bad) +
                                     " failures; naturals " + verdict_name(n) + " with pair " + ce};
}

/// The same min/max/min surrogate, every P from the enumeration oracle.
double brute_estimate(const std::vector<StateSuperposition>& terms, std::int64_t ell_max, std::int64_t window,
                      std::int64_t h_max) {
    auto n = static_cast<std::int64_t>(terms.size());
    double est = 1.0;
    for (std::int64_t ell = 1; ell <= ell_max; ++ell) {
        double best = 0.0;
        for (std::int64_t h = 0; h <= h_max; ++h) {
            double worst = 1.0;
            for (auto j = h + 1; j <= std::min(n, h + window); ++j)
                for (auto k = j; k <= std::min(n, h + window); ++k)
                    worst = std::min(worst, oracle::prob_pair(terms[static_cast<std::size_t>(j - 1)],
                                                              terms[static_cast<std::size_t>(k - 1)], ell));
            best = std::max(best, worst);
        }
        est = std::min(est, best);
    }
    return est;
}

Outcome gauge_divergence() {
    auto u = GaugeTransform::global(Mat2::hadamard_su2()).with_identity_sign();
    auto f = fseq_sequence(BitFunction::periodic(0, "1"));
    std::ostringstream margins;
    bool ok = true;
    double prev = -1.0;
    for (std::int64_t sites = 4; sites <= 10; ++sites) {
        // terms 1 .. sites-1; term m spans sites 0 down to -m
        auto seq = f.gauged(u);
        std::vector<StateSuperposition> terms;
        for (std::int64_t m = 1; m < sites; ++m) terms.push_back(seq.term(m));
        auto finite = explicit_sequence(terms);
        auto r = prob_cauchy(finite, 2, 2, sites - 3);
        double margin = 1.0 - *r.estimate;
        double brute = 1.0 - brute_estimate(terms, 2, 2, sites - 3);
        ok = ok && std::abs(margin - brute) <= kAmpTol && margin >= kLockedMargin - kAmpTol;
        if (prev >= 0) ok = ok && margin >= prev - kAmpTol;
        prev = margin;
        margins << (sites > 4 ? " " : "") << fmt(margin);
    }
    return {ok, "margins for 4..10 sites: " + margins.str() + " (locked " + fmt(kLockedMargin) + ")"};
}

Outcome preservation() {
    std::mt19937_64 rng(9);
    std::vector<StateSequence> seqs{fseq_sequence(BitFunction::periodic(0, "1")),
                                    fseq_sequence(BitFunction::periodic(2, "10")),
                                    fseq_sequence(BitFunction::periodic(-1, "1101")),
                                    fseq_sequence(BitFunction::listed(1, "1100101")), constant_sequence(parse_canonical("101-011"))};
    int runs = 0, mismatch = 0, fired = 0;
    for (int g = 0; g < 20; ++g) {
        auto u = g % 2 ? random_global_gauge(rng) : random_local_gauge(rng, -34, 3);
        for (const auto& s : seqs) {
            ++runs;
            try {
                auto gauged = check_cauchy_gauged(s, u, 8, 32);
                auto plain = check_cauchy_basis(s, 8, 32);
                if (gauged.verdict != plain.verdict || !same_witnesses(gauged, plain)) ++mismatch;
            } catch (const ConsistencyError&) {
                ++fired;
            }
        }
    }
    return {mismatch == 0 && fired == 0, std::to_string(runs) + " runs, " + std::to_string(mismatch) +
                                             " table mismatches, consistency check fired " + std::to_string(fired) + "x"};
}

Outcome orthogonality() {
    auto u = GaugeTransform::global(Mat2::hadamard_su2()).with_identity_sign();
    auto f = BitFunction::periodic(0, "1");
    double worst = 0.0, prev = 2.0;
    bool decreasing = true;
    for (std::int64_t n = 1; n <= 40; ++n) {
        auto x = fseq_prefix(f, n - 1);
        double m = std::abs(overlap_after_gauge(u, x));
        worst = std::max(worst, std::abs(m - std::pow(std::sqrt(0.5), static_cast<double>(n))));
        decreasing = decreasing && m < prev;
        prev = m;
    }
    return {worst <= kAmpTol && decreasing, "max error " + fmt(worst) + ", |overlap| at 40 sites " + fmt(prev)};
}

Outcome prob_formula() {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> sup(1, 8);
    std::uniform_int_distribution<std::int64_t> dl(1, 6);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto a = oracle::random_superposition(rng, sup(rng), -4, 3), b = oracle::random_superposition(rng, sup(rng), -4, 3);
        auto ell = dl(rng);
        worst = std::max(worst, std::abs(prob_pair(a, b, ell) - oracle::prob_pair(a, b, ell)));
    }
    return {worst <= kAmpTol, "1000 pairs, max error " + fmt(worst)};
}

Outcome dfs_invariance() {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> len(1, 6), bit(0, 1);
    auto word = [&](int n) {
        std::string w;
        for (int i = 0; i < n; ++i) w += static_cast<char>('0' + bit(rng));
        return w;
    };
    double worst_global = 0.0, worst_paired = 0.0;
    for (int t = 0; t < 1000; ++t) {
        auto w = word(len(rng));
        worst_global = std::max(worst_global, dfs::check_invariance(dfs::random_physical_gauge(rng, dfs::GaugeFamily::global, w.size()), w));
        auto v = word(len(rng));
        worst_paired = std::max(worst_paired, dfs::check_invariance(dfs::random_physical_gauge(rng, dfs::GaugeFamily::local_paired, v.size()), v));
    }
    int above = 0;
    for (int t = 0; t < 1000; ++t) {
        auto w = word(6);
        if (dfs::invariance_deviation(dfs::random_physical_gauge(rng, dfs::GaugeFamily::local_unpaired, 6), w) > kUnequalDeviation)
            ++above;
    }
    bool ok = worst_global <= kAmpTol && worst_paired <= kAmpTol && above >= static_cast<int>(kUnequalRate * 1000);
    return {ok, "global " + fmt(worst_global) + ", paired " + fmt(worst_paired) + ", unequal above " +
                    fmt(kUnequalDeviation) + " in " + std::to_string(above) + "/1000"};
}

Outcome frame_composition() {
    std::mt19937_64 rng(13);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        FrameField f(Topology::one_way());
        auto root = f.anchor();
        auto u1 = random_local_gauge(rng, -3, 3), u2 = random_local_gauge(rng, -3, 3);
        auto u_dd = compose(u2, inverse(u1));
        auto f1 = f.spawn(root.id, u1);
        auto f2 = f.spawn(f1.id, u_dd);
        auto x = oracle::random_state(rng, -3, 3);
        auto seen = f.view_state(root.id, f2.id, x);
        worst = std::max(worst, max_abs_diff(seen, apply_gauge(compose(u_dd, u1), x)));
        worst = std::max(worst, max_abs_diff(seen, apply_gauge(u2, x)));
    }
    int rule_bad = 0;
    for (auto t : {Topology::finite(3), Topology::one_way(), Topology::two_way(), Topology::cyclic(3)}) {
        FrameField f(t);
        auto a = f.anchor();
        auto s1 = f.spawn(a.id, random_global_gauge(rng));
        auto s2 = f.spawn(s1.id, random_global_gauge(rng));
        std::vector<std::pair<std::string, std::string>> hidden{{s1.id, a.id}, {s2.id, a.id}, {s2.id, s1.id}};
        if (t.kind == TopologyKind::two_way) hidden.push_back({a.id, f.parent_of(a.id).id});
        if (t.kind == TopologyKind::cyclic) f.spawn(s2.id, random_global_gauge(rng));  // close the cycle
        for (const auto& [obs, own] : hidden) {
            try {
                f.view_state(obs, own, parse_basis("1+"));
                ++rule_bad;
            } catch (const VisibilityError&) {
            }
        }
        try {
            f.view_state(a.id, s2.id, parse_basis("1+"));
        } catch (const Error&) {
            ++rule_bad;
        }
    }
    FrameField fin(Topology::finite(3));
    auto s1 = fin.spawn(fin.anchor().id, GaugeTransform::identity());
    auto s2 = fin.spawn(s1.id, GaugeTransform::identity());
    bool overflow = false;
    try {
        fin.spawn(s2.id, GaugeTransform::identity());
    } catch (const TopologyError&) {
        overflow = true;
    }
    return {worst <= kAmpTol && rule_bad == 0 && overflow,
            "max view error " + fmt(worst) + ", visibility violations " + std::to_string(rule_bad) +
                ", finite overflow " + (overflow ? "raised" : "missing")};
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    criterion(1, "value of 1001-0111 and round trip", paper_value);
    criterion(2, "exhaustive arithmetic vs exact oracle", exhaustive_oracle);
    criterion(3, "accuracy states", accuracy_values);
    criterion(4, "division bound and truncation", division_bound);
    criterion(5, "gauge unitarity and composition", gauge_unitarity);
    criterion(6, "conjugated relations and addition", conjugation_identities);
    criterion(7, "Cauchy detection", cauchy_detection);
    criterion(8, "gauge divergence margin", gauge_divergence);
    criterion(9, "Cauchy preservation under gauges", preservation);
    criterion(10, "orthogonality decay", orthogonality);
    criterion(11, "pair probability formula", prob_formula);
    criterion(12, "DFS invariance", dfs_invariance);
    criterion(13, "frame composition and visibility", frame_composition);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 13 criteria failed; total %.2fs\n", failures, secs);
    return failures == 0 ? 0 : 1;
}

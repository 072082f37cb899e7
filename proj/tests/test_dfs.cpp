#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qframe/qframe.hpp"

using namespace qframe;
using namespace qframe::dfs;

namespace {

std::vector<std::string> all_strings(std::size_t max_len) {
    std::vector<std::string> out;
    for (std::size_t n = 1; n <= max_len; ++n)
        for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
            std::string s;
            for (std::size_t i = 0; i < n; ++i) s += (m >> (n - 1 - i)) & 1U ? '1' : '0';
            out.push_back(s);
        }
    return out;
}

}  // namespace

TEST(Encode, Examples) {
    auto zero = encode("0").to_superposition();
    EXPECT_EQ(zero.size(), 1u);
    EXPECT_EQ(zero.amplitude("00"), Amplitude(1.0));
    auto one = encode("1").to_superposition();
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(one.amplitude("01") - r), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(one.amplitude("10") + r), 0.0, 1e-15);
    auto ten = encode("10");
    EXPECT_NEAR(ten.norm_squared(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(ten.amplitude("0100") - r), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(ten.amplitude("1000") + r), 0.0, 1e-15);
    EXPECT_THROW(encode(""), DomainError);
    EXPECT_THROW(encode("012"), ParseError);
}

TEST(LogicalProbs, Examples) {
    auto p0 = logical_probs(encode("0"));
    EXPECT_DOUBLE_EQ(p0[0].triplet, 1.0);
    EXPECT_DOUBLE_EQ(p0[0].singlet, 0.0);
    auto p1 = logical_probs(encode("1"));
    EXPECT_NEAR(p1[0].triplet, 0.0, 1e-15);
    EXPECT_NEAR(p1[0].singlet, 1.0, 1e-15);
    const double r = 1.0 / std::sqrt(2.0);
    Superposition<std::string> half;
    half.add("00", r);
    half.add("01", 0.5);
    half.add("10", -0.5);
    auto ph = logical_probs(half);
    EXPECT_NEAR(ph[0].triplet, 0.5, 1e-15);
    EXPECT_NEAR(ph[0].singlet, 0.5, 1e-15);
    Superposition<std::string> odd;
    odd.add("010", 1.0);
    EXPECT_THROW(logical_probs(odd), DomainError);
}

TEST(LogicalProbs, AgreeWithProjectorOracle) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
        auto a = random_su2(rng), b = random_su2(rng);
        for (const char* bit : {"0", "1"}) {
            auto s = encode(bit);
            std::array<oracle::C, 4> v{s[0], s[1], s[2], s[3]};
            s.apply(1, a);
            s.apply(2, b);
            auto w = oracle::pair_apply(a, b, v);
            auto p = logical_probs(s)[0];
            EXPECT_NEAR(p.triplet, oracle::triplet_prob(w), 1e-12);
            EXPECT_NEAR(p.singlet, oracle::singlet_prob(w), 1e-12);
            EXPECT_NEAR(p.triplet + p.singlet, 1.0, 1e-12);
        }
    }
}

TEST(Invariance, TripletSubspaceAndSingletPhase) {
    std::mt19937_64 rng(32);
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<std::array<oracle::C, 4>> triplet{{1, 0, 0, 0}, {0, 0, 0, 1}, {0, r, r, 0}};
    std::array<oracle::C, 4> singlet_v{0, r, -r, 0};
    for (int i = 0; i < 200; ++i) {
        auto u = random_su2(rng);
        for (const auto& t : triplet) EXPECT_LT(oracle::singlet_prob(oracle::pair_apply(u, u, t)), 1e-12);
        auto s = oracle::pair_apply(u, u, singlet_v);
        for (int k = 0; k < 4; ++k) EXPECT_LT(std::abs(s[k] - singlet_v[k]), 1e-12);
    }
}

TEST(Invariance, IdentityAndPreconditions) {
    EXPECT_EQ(check_invariance(GaugeTransform::identity(), "0110"), 0.0);
    std::mt19937_64 rng(33);
    auto unpaired = random_physical_gauge(rng, GaugeFamily::local_unpaired, 4);
    EXPECT_THROW(check_invariance(unpaired, "0110"), PreconditionError);
    EXPECT_GT(invariance_deviation(unpaired, "0110"), 0.0);
    auto paired = random_physical_gauge(rng, GaugeFamily::local_paired, 4);
    EXPECT_TRUE(is_pairwise_equal(paired, 4));
    EXPECT_LT(check_invariance(paired, "0110"), 1e-12);
}

TEST(Invariance, AlternateLogicalZero) {
    const double r = 1.0 / std::sqrt(2.0);
    LogicalEncoding enc(PairState{0.0, r, r, 0.0});
    std::mt19937_64 rng(34);
    for (int i = 0; i < 50; ++i) EXPECT_LT(check_invariance(GaugeTransform::global(random_su2(rng)), "0101", enc), 1e-12);
    EXPECT_THROW(LogicalEncoding(PairState{0.0, r, -r, 0.0}), DomainError);
    EXPECT_THROW(LogicalEncoding(PairState{1.0, 1.0, 0.0, 0.0}), DomainError);
}

TEST(Fuzz, DeterministicPerSeed) {
    auto a = fuzz_invariance("0110", 50, 42, GaugeFamily::local_unpaired);
    auto b = fuzz_invariance("0110", 50, 42, GaugeFamily::local_unpaired);
    EXPECT_EQ(a.max_deviation, b.max_deviation);
    EXPECT_EQ(a.above_threshold, b.above_threshold);
    EXPECT_EQ(fuzz_to_json(a).dump(), fuzz_to_json(b).dump());
    auto g = fuzz_invariance("01", 10, 1, GaugeFamily::global);
    EXPECT_LE(g.max_deviation, 1e-12);
}

TEST(Decode, RoundTripsAndFailures) {
    std::mt19937_64 rng(35);
    for (const auto& w : all_strings(6)) {
        EXPECT_EQ(decode(encode(w)), w);
        auto u = GaugeTransform::global(random_su2(rng));
        EXPECT_EQ(decode(encode(w).gauged(u)), w);
        auto p = random_physical_gauge(rng, GaugeFamily::local_paired, w.size());
        EXPECT_EQ(decode(encode(w).gauged(p)), w);
    }
    const double r = 1.0 / std::sqrt(2.0);
    Superposition<std::string> half;
    half.add("0000", r);
    half.add("0001", 0.5);
    half.add("0010", -0.5);
    try {
        decode(PhysicalState::from_superposition(half));
        FAIL() << "expected a decode failure";
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.pairs(), std::vector<std::size_t>{2});
    }
}

TEST(Bridge, LogicalStringToState) {
    EXPECT_EQ(format(logical_to_state("0110")), "110+");
    EXPECT_EQ(format(logical_to_state("0")), "0+");
    EXPECT_EQ(oracle::value(logical_to_state("1011")), 11);
}

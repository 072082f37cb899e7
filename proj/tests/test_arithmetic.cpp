#include <gtest/gtest.h>

#include <atomic>
#include <set>

#include "oracles.hpp"
#include "qframe/qframe.hpp"

using namespace qframe;

namespace {

StringRational c(const char* s) { return parse_canonical(s); }

}  // namespace

TEST(Relations, Examples) {
    EXPECT_TRUE(eq_A(c("1+1"), c("1+1")));
    EXPECT_FALSE(eq_A(c("1+1"), c("1-1")));
    EXPECT_TRUE(eq_A(c("+01.10"), c("+1.1")));
    EXPECT_TRUE(le_A(c("+1.1"), c("10+")));
    EXPECT_TRUE(le_A(c("0+"), c("1+")));
    EXPECT_TRUE(le_A(c("0+"), c("+0.0001")));
    EXPECT_TRUE(le_A(c("10-"), c("1-1")));
    EXPECT_FALSE(le_A(c("1-1"), c("10-")));
    EXPECT_TRUE(lt_A(c("1-"), c("0+")));
}

TEST(Operations, Examples) {
    EXPECT_EQ(format(add_A(c("+1.1"), c("+0.01"))), "1+11");
    EXPECT_TRUE(add_A(c("+1.1"), c("1-1")).is_zero());
    EXPECT_EQ(format(abs_A(c("1-1"))), "1+1");
    EXPECT_EQ(format(abs_A(c("0+"))), "0+");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        auto x = oracle::random_canonical(rng, -5, 5);
        EXPECT_EQ(add_A(x, StringRational()), x);
        auto y = oracle::random_canonical(rng, -5, 5);
        EXPECT_EQ(abs_A(sub_A(x, y)), abs_A(sub_A(y, x)));
    }
}

TEST(Division, Examples) {
    EXPECT_EQ(format(div_A(c("1+"), c("11+"), 4)), "0+0101");
    EXPECT_EQ(format(div_A(c("1+"), c("10+"), 1)), "0+1");
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        auto x = oracle::random_canonical(rng, -4, 4);
        auto ell = std::max<std::int64_t>(1, -x.lower());
        EXPECT_EQ(div_A(x, c("1+"), ell), x) << format(x);
    }
    EXPECT_THROW(div_A(c("1+"), c("0+"), 3), DomainError);
    EXPECT_THROW(div_A(c("1+"), c("1+"), 0), DomainError);
}

TEST(Division, TighterAccuracyNeverWorse) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 300; ++i) {
        auto x = oracle::random_canonical(rng, -6, 6), y = oracle::random_canonical(rng, -6, 6);
        if (y.is_zero()) continue;
        oracle::Rational exact = oracle::value(x) / oracle::value(y);
        oracle::Rational prev = -1;
        for (std::int64_t ell = 1; ell <= 20; ++ell) {
            auto q = div_A(x, y, ell);
            oracle::Rational err = abs(oracle::value(q) - exact);
            EXPECT_LE(err, oracle::pow2(-ell));
            EXPECT_EQ(oracle::value(q), oracle::truncated_quotient(oracle::value(x), oracle::value(y), ell));
            if (prev >= 0) { EXPECT_LE(err, prev); }
            prev = err;
        }
    }
}

TEST(AccuracyState, Values) {
    EXPECT_EQ(format(accuracy_state(3)), "0+001");
    for (std::int64_t ell = 1; ell <= 64; ++ell) EXPECT_EQ(oracle::value(accuracy_state(ell)), oracle::pow2(-ell));
    EXPECT_THROW(accuracy_state(0), DomainError);
}

TEST(Order, TotalOnSmallStates) {
    auto all = oracle::canonical_states(-2, 2);
    for (const auto& a : all)
        for (const auto& b : all) {
            auto x = canonicalize(a), y = canonicalize(b);
            EXPECT_TRUE(le_A(x, y) || le_A(y, x));
            if (le_A(x, y) && le_A(y, x)) { EXPECT_TRUE(eq_A(x, y)); }
            for (const auto& d : {c("1+"), c("0+01")})
                if (le_A(x, y)) { EXPECT_TRUE(le_A(add_A(x, d), add_A(y, d))); }
        }
}

TEST(ProbRel, Examples) {
    auto x = basis(c("1+1"));
    EXPECT_DOUBLE_EQ(prob_rel(x, x, Relation::eq), 1.0);
    const double r = 1.0 / std::sqrt(2.0);
    auto mix = r * basis(c("1+")) + r * basis(c("10+"));
    EXPECT_NEAR(prob_rel(mix, basis(c("1+")), Relation::eq), 0.5, 1e-15);
    EXPECT_DOUBLE_EQ(prob_rel(basis(c("0+")), basis(c("+0.001")), Relation::le), 1.0);
    StateSuperposition bad;
    bad.add(c("1+").state(), 2.0);
    EXPECT_THROW(prob_rel(bad, x, Relation::eq), ContractViolation);
}

TEST(ProbRel, RelationAndStrictComplementPartition) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        auto p = oracle::random_superposition(rng, 6, -3, 3), q = oracle::random_superposition(rng, 6, -3, 3);
        EXPECT_NEAR(prob_rel(p, q, Relation::le) + prob_rel(p, q, Relation::gt), 1.0, 1e-12);
        EXPECT_NEAR(prob_rel(p, q, Relation::eq) + prob_rel(p, q, Relation::ne), 1.0, 1e-12);
    }
}

TEST(RegisterOp, ValueLevelInjective) {
    auto all = oracle::canonical_states(-2, 2);
    std::set<std::pair<std::string, std::string>> images;
    for (const auto& a : all)
        for (const auto& b : all) {
            auto out = register_op(Operation::add, {a, b});
            EXPECT_EQ(out.first, a);
            EXPECT_EQ(oracle::value(out.second), oracle::value(a) + oracle::value(b));
            EXPECT_TRUE(images.insert({format(out.first), format(out.second)}).second);
        }
}

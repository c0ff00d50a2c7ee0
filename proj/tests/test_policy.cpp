#include <gtest/gtest.h>

#include <sstream>

#include "bomber/policy.hpp"

using namespace bomber;

namespace {

ValueField solved_raw(const ModelKind& kind, const AmmoFunction& f, const GridSpec& g) {
    const auto sol = solve(kind, f, g);
    EXPECT_TRUE(sol.report.converged);
    return rescale(sol.field, Scaling::Raw);
}

// One column of spends over x, nt = 2 with both columns equal.
PolicyField column_policy(std::vector<std::size_t> k, std::vector<std::size_t> lo, std::vector<std::size_t> hi) {
    const GridSpec g{1.0, 1.0, k.size(), 2};
    auto twice = [](const std::vector<std::size_t>& v) {
        std::vector<std::size_t> out;
        for (auto x : v) out.insert(out.end(), {x, x});
        return out;
    };
    return PolicyField(g, twice(k), twice(lo), twice(hi));
}

}  // namespace

TEST(PolicyField, ConstructorValidates) {
    const GridSpec g{1.0, 1.0, 2, 2};
    EXPECT_THROW(PolicyField(g, {0, 0, 2, 0}), DomainError);
    EXPECT_THROW(PolicyField(g, {0, 0, 0}), DimensionError);
    EXPECT_THROW(PolicyField(g, {0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 0, 1}), DomainError);
    const PolicyField p(g, {0, 0, 1, 0});
    EXPECT_DOUBLE_EQ(p.k_value(1, 0), 1.0);
    EXPECT_TRUE(p.near_optimal(1, 0, 1));
    EXPECT_FALSE(p.near_optimal(1, 0, 0));
}

TEST(Extract, RequiresRawField) {
    const GridSpec g{1.0, 1.0, 3, 3};
    EXPECT_THROW(extract_policy(ModelKind::bomber(), AmmoFunction::bomber(0.0),
                                ValueField::filled(g, Scaling::ExpRescaled, 1.0)),
                 UsageError);
}

TEST(Extract, TinyBomberAgainstBruteForce) {
    const GridSpec g{2.0, 2.0, 3, 3};
    const auto f = AmmoFunction::bomber(0.0);
    const auto raw = solved_raw(ModelKind::bomber(), f, g);
    const auto pol = extract_policy(ModelKind::bomber(), f, raw);
    for (std::size_t j = 0; j < g.nt; ++j) {
        EXPECT_EQ(pol.k_index(0, j), 0u);
        for (std::size_t i = 0; i < g.nx; ++i) {
            std::size_t arg = 0;
            double best = f(0.0) * raw(i, j);
            for (std::size_t k = 1; k <= i; ++k) {
                const double c = f(g.x(k)) * raw(i - k, j);
                if (c > best * (1.0 + 1e-12) + 1e-12) {
                    best = c;
                    arg = k;
                }
            }
            EXPECT_EQ(pol.k_index(i, j), arg) << i << "," << j;
        }
    }
}

TEST(Extract, InvincibleMaximizerIsIsolated) {
    const GridSpec g{4.0, 4.0, 41, 41};
    const auto f = AmmoFunction::fighter();
    const auto pol = extract_policy(ModelKind::invincible(), f, solved_raw(ModelKind::invincible(), f, g));
    for (std::size_t i = 1; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.nt; ++j) {
            EXPECT_EQ(pol.near_lo(i, j), pol.k_index(i, j));
            EXPECT_EQ(pol.near_hi(i, j), pol.k_index(i, j));
        }
    EXPECT_EQ(pol.tie_slack(), kTieSlack);
}

TEST(Extract, BomberArgmaxInvariantUnderColumnScaling) {
    // a P and a e^t P differ by a positive factor per column.
    const GridSpec g{4.0, 4.0, 41, 41};
    const auto f = AmmoFunction::bomber(0.2);
    const auto sol = solve(ModelKind::bomber(), f, g);
    const auto pol = extract_policy(ModelKind::bomber(), f, rescale(sol.field, Scaling::Raw));
    const auto a = sample_ammo(f, g);
    for (std::size_t j = 0; j < g.nt; ++j) {
        const auto col = apply_otimes(ModelKind::bomber(), a, sol.field, j);
        for (std::size_t i = 0; i < g.nx; ++i) EXPECT_EQ(col.argmax[i], pol.k_index(i, j));
    }
}

TEST(Conjectures, MonotonePoliciesPass) {
    const GridSpec g{5.0, 5.0, 6, 6};
    // k = max(0, i - j): nonincreasing in t, nondecreasing in x; held-back min(i, j) nondecreasing.
    const auto p = PolicyField::from_rule(g, [](std::size_t i, std::size_t j) { return i > j ? i - j : 0; });
    EXPECT_TRUE(check_A(p).holds);
    EXPECT_TRUE(check_B(p).holds);
    EXPECT_TRUE(check_C(p).holds);
    EXPECT_TRUE(check_A(p).violations.empty());
}

TEST(Conjectures, AViolationDetected) {
    const GridSpec g{2.0, 2.0, 3, 3};
    const auto p = PolicyField::from_rule(g, [](std::size_t i, std::size_t j) { return std::min(i, j); });
    const auto rep = check_A(p);
    EXPECT_FALSE(rep.holds);
    EXPECT_EQ(rep.worst_cells, 1u);
    ASSERT_FALSE(rep.violations.empty());
    EXPECT_EQ(rep.violations.front().i, 1u);
    EXPECT_EQ(rep.violations.front().j, 0u);
}

TEST(Conjectures, BSingleCellExcusedByNearTie) {
    // k drops from 1 to 0 between x-nodes 1 and 2, but node 2 could also spend 1.
    const auto excused = column_policy({0, 1, 0, 2}, {0, 1, 0, 2}, {0, 1, 1, 2});
    const auto rep = check_B(excused);
    EXPECT_TRUE(rep.holds);
    ASSERT_EQ(rep.violations.size(), 2u);
    EXPECT_TRUE(rep.violations.front().excused);

    const auto strict = column_policy({0, 1, 0, 2}, {0, 1, 0, 2}, {0, 1, 0, 2});
    EXPECT_FALSE(check_B(strict).holds);
    EXPECT_EQ(check_B(strict).unexcused, 2u);
}

TEST(Conjectures, MultiCellNeverExcused) {
    const auto p = column_policy({0, 1, 2, 0}, {0, 0, 0, 0}, {0, 1, 2, 3});
    const auto rep = check_B(p);
    EXPECT_FALSE(rep.holds);
    EXPECT_EQ(rep.worst_cells, 2u);
}

TEST(Conjectures, CViolationDetected) {
    // Holdings 0,0,2,0: drops by 2 between x-nodes 2 and 3.
    const auto p = column_policy({0, 1, 0, 3}, {0, 1, 0, 3}, {0, 1, 0, 3});
    const auto rep = check_C(p);
    EXPECT_FALSE(rep.holds);
    EXPECT_EQ(rep.worst_cells, 2u);
}

TEST(Conjectures, SolvedBomberAndFrail) {
    const GridSpec g{4.0, 4.0, 41, 41};
    for (const auto& kind : {ModelKind::bomber(), ModelKind::frail()}) {
        const auto f = kind.is_bomber() ? AmmoFunction::bomber(0.0) : AmmoFunction::fighter();
        const auto pol = extract_policy(kind, f, solved_raw(kind, f, g));
        EXPECT_TRUE(check_A(pol).holds) << to_string(kind);
        EXPECT_TRUE(check_C(pol).holds) << to_string(kind);
    }
}

TEST(Conjectures, SolvedInvincible) {
    const GridSpec g{4.0, 4.0, 41, 41};
    const auto f = AmmoFunction::fighter();
    const auto pol = extract_policy(ModelKind::invincible(), f, solved_raw(ModelKind::invincible(), f, g));
    EXPECT_TRUE(check_B(pol).holds);
    EXPECT_TRUE(check_C(pol).holds);
}

TEST(PolicyCsv, Format) {
    const GridSpec g{1.0, 1.0, 2, 2};
    const PolicyField p(g, {0, 0, 1, 0});
    std::ostringstream os;
    write_csv(os, p);
    EXPECT_EQ(os.str(), "x,t,k\n0,0,0\n0,1,0\n1,0,1\n1,1,0\n");
}

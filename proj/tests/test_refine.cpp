#include "lms/errors.hpp"
#include "lms/group_orbits.hpp"
#include "lms/refine.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lms;
using lms::testing::naive_difference;
using lms::testing::naive_energy;
using lms::testing::naive_sumset;
using lms::testing::orbit_scheme;
using lms::testing::pt;
using lms::testing::R;
using lms::testing::recheck_mismatches;
using lms::testing::union_of;

namespace {

LinearMScheme singer7(int m) { return orbit_scheme(singer_group(FieldSpec(2, 3)), PointSet(FieldSpec(2, 3), {1}), m); }
LinearMScheme gl2(int m) { return orbit_scheme(gl_group(FieldSpec(2, 2)), PointSet(FieldSpec(2, 2), {1}), m); }
LinearMScheme semilinear16(int m) {
    return orbit_scheme(semilinear_group(FieldSpec(2, 4)), PointSet(FieldSpec(2, 4), {1}), m);
}
LinearMScheme semilinear32(int m) {
    return orbit_scheme(semilinear_group(FieldSpec(2, 5)), PointSet(FieldSpec(2, 5), {1}), m);
}
LinearMScheme finest22(int m) { return finest_scheme(SchemeInstance(PointSet(FieldSpec(2, 2), {1, 2, 3})), m); }

// B' inside B, a union of level-1 blocks of the scheme fibered at the prefix,
// and min{|B'|, |B|/|B'|} >= sqrt(K) by integer squares.
void expect_shrink_sound(const LinearMScheme& sch, int b, const Rational& K, const ShrinkOutcome& o) {
    const auto& B = sch.level(1).blocks[b];
    EXPECT_EQ(o.block_size, B.size());
    EXPECT_EQ(o.result_size, o.points.size());
    for (Code y : o.points) EXPECT_TRUE(std::binary_search(B.begin(), B.end(), y));
    EXPECT_EQ(union_of(fiber_restrict(sch, o.prefix), o.result_set), o.points);
    Rational n = R(o.points.size()), N = R(B.size());
    EXPECT_GE(n * n, K);
    EXPECT_GE(N * N, K * n * n);
}

}  // namespace

// ---- nu_plus and sigma ----------------------------------------------------------

TEST(NuPlus, Examples) {
    FieldSpec f(2, 2);
    PointSet a(f, {pt(f, {1, 0})}), b(f, {pt(f, {1, 0})});
    EXPECT_EQ(nu_plus(a, b, pt(f, {1, 1})), 0u);
    PointSet s(f, {1, 2, 3});
    EXPECT_EQ(nu_plus(s, s, 0), 3u);
    EXPECT_EQ(nu_plus(s, s, pt(f, {1, 1})), 2u);
}

TEST(NuPlus, MassAndDirectCount) {
    std::mt19937_64 rng(5);
    FieldSpec f(3, 3);
    auto all = full_space(f).members;
    for (int trial = 0; trial < 20; ++trial) {
        PointSet a(f, lms::testing::random_subset(rng, all, 0.3));
        PointSet b(f, lms::testing::random_subset(rng, all, 0.3));
        std::uint64_t mass = 0;
        for (Code z : all) {
            std::uint64_t direct = 0;
            for (Code x : a.members)
                for (Code y : b.members) direct += f.add(x, y) == z;
            ASSERT_EQ(nu_plus(a, b, z), direct);
            mass += direct;
        }
        EXPECT_EQ(mass, a.size() * b.size());
    }
}

TEST(Sigma, ImageAndInjectivity) {
    FieldSpec f(2, 2);
    std::vector<Code> tuples{encode_tuple(f, Tuple{{1, 2}}), encode_tuple(f, Tuple{{2, 1}})};
    EXPECT_EQ(sigma_image(f, tuples, 2), PointSet(f, {3}));
    EXPECT_FALSE(sigma_injective(f, tuples, 2));
    tuples.pop_back();
    EXPECT_TRUE(sigma_injective(f, tuples, 2));
}

// ---- shrink_weak -----------------------------------------------------------------

TEST(ShrinkWeak, GateLowerSideNamed) {
    auto sch = singer7(3);
    // |B+B| = 8 < 4|B|.
    try {
        shrink_weak(sch, 0, {1, 0}, Rational(4), true);
        FAIL() << "gate not enforced";
    } catch (const GateUnmet& e) {
        EXPECT_EQ(e.inequality(), "K|A'|<=|A'+B|");
    }
}

TEST(ShrinkWeak, GateUpperSideNamed) {
    // Cosets of the order-21 subgroup of F_169^*: |B+B| exceeds |B|^2/4.
    auto g = lms::testing::singer_subgroup(FieldSpec(13, 2), 21);
    auto sch = build_orbit_scheme(g, set_difference(full_space(g.field), PointSet(g.field, {0})), 3, false).scheme;
    int checked = 0;
    for (int b = 0; b < static_cast<int>(sch.level(1).num_blocks()); ++b) {
        const auto& B = sch.level(1).blocks[b];
        size_t ss = naive_sumset(sch.field(), B, B).size();
        if (4 * B.size() > ss || 4 * ss <= B.size() * B.size()) continue;
        ++checked;
        try {
            shrink_weak(sch, b, {1, b}, Rational(4), true);
            ADD_FAILURE() << "gate not enforced on block " << b;
        } catch (const GateUnmet& e) {
            EXPECT_EQ(e.inequality(), "|A'+B|<=|A'||B|/K");
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(ShrinkWeak, StrictPreconditions) {
    auto schemes = lms::testing::shrink_gate_schemes();
    const auto& sch = schemes.front().sch;
    try {
        shrink_weak(sch, 0, {1, 0}, Rational(2), false);
        FAIL();
    } catch (const PreconditionUnmet& e) {
        EXPECT_EQ(e.inequality(), "K>=4");
    }
    // m = 3 < 2k+2.
    EXPECT_THROW(shrink_weak(sch, 0, {1, 0}, Rational(4), false), DepthExhausted);
    EXPECT_THROW(shrink_weak(singer7(2), 0, {1, 0}, Rational(4), true), DepthExhausted);
}

// Every gate-satisfying block of the desk schemes: the gate is recomputed
// from a direct sumset, and the output is checked against the raw scheme.
TEST(ShrinkWeak, DeskInstancesSound) {
    const Rational K(4);
    int instances = 0;
    for (const auto& [name, sch] : lms::testing::shrink_gate_schemes()) {
        const FieldSpec& f = sch.field();
        for (int b = 0; b < static_cast<int>(sch.level(1).num_blocks()); ++b) {
            const auto& B = sch.level(1).blocks[b];
            Rational n = R(B.size()), ss = R(naive_sumset(f, B, B).size());
            if (!(K * n <= ss && ss <= n * n / K)) continue;
            ++instances;
            ShrinkOutcome o = shrink_weak(sch, b, {1, b}, K, true);
            SCOPED_TRACE(name + " block " + std::to_string(b));
            expect_shrink_sound(sch, b, K, o);
            EXPECT_FALSE(any_conclusion_fails(o.trace));
            EXPECT_EQ(recheck_mismatches(o.trace), 0u);
            if (o.case_tag == "middle_sum") {
                // B' = {y in B : z - y in A'} with z the prefix sum.
                ASSERT_EQ(o.prefix.arity(), 2);
                Code z = f.add(o.prefix.pts[0], o.prefix.pts[1]);
                std::vector<Code> expect;
                for (Code y : B)
                    if (std::binary_search(B.begin(), B.end(), f.sub(z, y))) expect.push_back(y);
                EXPECT_EQ(o.points, expect);
            }
        }
    }
    EXPECT_GE(instances, 50);
}

// ---- bijectivity ----------------------------------------------------------------------

TEST(Bijectivity, LevelOneIsTrivial) {
    auto sch = singer7(2);
    EXPECT_TRUE(bijectivity_check(sch, {1, 0}, strong_antisym_check(sch)));
}

TEST(Bijectivity, FinestSchemeInjective) {
    auto sch = finest22(4);
    auto v = strong_antisym_check(sch);
    ASSERT_EQ(v.outcome, Outcome::Antisymmetric);
    for (int b = 0; b < static_cast<int>(sch.level(2).num_blocks()); ++b)
        EXPECT_TRUE(bijectivity_check(sch, {2, b}, v));
}

TEST(Bijectivity, PreconditionsNamed) {
    auto expect_label = [](auto&& call, const std::string& label) {
        try {
            call();
            ADD_FAILURE() << "expected " << label;
        } catch (const PreconditionUnmet& e) {
            EXPECT_EQ(e.inequality(), label);
        }
    };
    auto s3 = singer7(3);
    expect_label([&] { bijectivity_check(s3, {2, 0}, strong_antisym_check(s3)); }, "m>=2k");
    // Singer at m=4: the diagonal level-2 block sums to 0, |A|/|A'| = 7 >= 2^(m-k).
    auto s4 = singer7(4);
    FieldSpec f = s4.field();
    int diag = s4.level(2).block(encode_tuple(f, Tuple{{1, 1}}));
    expect_label([&] { bijectivity_check(s4, {2, diag}, strong_antisym_check(s4)); }, "m>k+log(|A|/|A'|)");
    // GL_2(F_2) at m=4: |A| = 3 < 4|A'| passes the log condition, then the verdict fails.
    auto g4 = gl2(4);
    int gdiag = g4.level(2).block(encode_tuple(g4.field(), Tuple{{1, 1}}));
    expect_label([&] { bijectivity_check(g4, {2, gdiag}, strong_antisym_check(g4)); }, "strongly antisymmetric");
}

// ---- partial sumset search ------------------------------------------------------------

TEST(PartialSumset, Case1OnGateSchemes) {
    const Rational K(4);
    int case1 = 0;
    for (const auto& [name, sch] : lms::testing::shrink_gate_schemes()) {
        for (int b = 0; b < static_cast<int>(sch.level(1).num_blocks()); ++b) {
            auto out = partial_sumset_search(sch, b, K, true);
            SCOPED_TRACE(name + " block " + std::to_string(b));
            ASSERT_TRUE(out.status == "case1" || out.status == "case2" || out.status == "stopped") << out.status;
            EXPECT_EQ(recheck_mismatches(out.trace), 0u);
            if (out.status == "case1") {
                ++case1;
                ASSERT_TRUE(out.shrink.has_value());
                expect_shrink_sound(sch, b, K, *out.shrink);
            }
            if (out.status == "case2") {
                Rational a = R(out.a_prime.size());
                Rational ss = R(naive_sumset(sch.field(), out.a_prime, out.a_prime).size());
                EXPECT_EQ(R(out.a_prime_sumset), ss);
                EXPECT_LE(ss, rpow(K, static_cast<unsigned>(2 * out.k)) * a);
            }
        }
    }
    EXPECT_GT(case1, 0);
}

TEST(PartialSumset, Case2Invariants) {
    const Rational K(4);
    for (const auto& sch : {singer7(4), semilinear16(4), gl2(4), semilinear32(3)}) {
        auto out = partial_sumset_search(sch, 0, K, true);
        ASSERT_EQ(out.status, "case2");
        const FieldSpec& f = sch.field();
        const auto& B = sch.level(1).blocks[0];
        const auto& A = block_members(sch, out.a);
        // A inside B^k, sigma_k injective, |A|^2 K^(k-1) >= |B|^(2k).
        for (Code c : A)
            for (Code p : decode_tuple(f, c, out.k).pts) EXPECT_TRUE(std::binary_search(B.begin(), B.end(), p));
        EXPECT_EQ(sigma_image(f, A, out.k).size(), A.size());
        EXPECT_GE(R(A.size()) * R(A.size()) * rpow(K, static_cast<unsigned>(out.k - 1)),
                  rpow(R(B.size()), static_cast<unsigned>(2 * out.k)));
        Rational ss = R(naive_sumset(f, out.a_prime, out.a_prime).size());
        EXPECT_LE(ss, rpow(K, static_cast<unsigned>(2 * out.k)) * R(out.a_prime.size()));
        Rational sb = R(naive_sumset(f, out.a_prime, B).size());
        EXPECT_LT(sb, K * R(out.a_prime.size()));
        EXPECT_EQ(recheck_mismatches(out.trace), 0u);
    }
}

TEST(PartialSumset, StrictPreconditionsNamed) {
    auto sch = singer7(4);
    try {
        partial_sumset_search(sch, 0, Rational(2), false);
        FAIL();
    } catch (const PreconditionUnmet& e) {
        EXPECT_EQ(e.inequality(), "K>=4");
    }
    try {
        partial_sumset_search(sch, 0, Rational(4), false);
        FAIL();
    } catch (const PreconditionUnmet& e) {
        EXPECT_EQ(e.inequality(), "|B|>=2K^2");
    }
}

// ---- scheme powers and lifting -------------------------------------------------------

TEST(SchemePower, LevelOneIsTruncation) {
    for (const auto& sch : {singer7(4), semilinear32(2), gl2(4)})
        for (int mp = 1; 2 * mp <= sch.m; ++mp) {
            auto p = scheme_power(sch, {1, 0}, mp);
            auto cut = truncate_scheme(sch, mp);
            // Same support only when the level-1 block is all of S.
            if (cut.inst.S.members != sch.level(1).blocks[0]) continue;
            for (int i = 1; i <= mp; ++i) EXPECT_EQ(p.scheme.level(i), cut.level(i));
        }
}

TEST(SchemePower, LevelTwoBlocksValidateAndBiject) {
    int built = 0;
    for (const auto& sch : {singer7(4), semilinear16(4), finest22(4)}) {
        const FieldSpec& f = sch.field();
        for (int b = 0; b < static_cast<int>(sch.level(2).num_blocks()); ++b) {
            const auto& A = sch.level(2).blocks[b];
            if (!sigma_injective(f, A, 2)) {
                try {
                    scheme_power(sch, {2, b}, 1);
                    ADD_FAILURE() << "non-injective block accepted";
                } catch (const PreconditionUnmet& e) {
                    EXPECT_EQ(e.inequality(), "sigma_k bijective on A");
                }
                continue;
            }
            auto p = scheme_power(sch, {2, b}, 1);
            ++built;
            EXPECT_TRUE(validate_axioms(p.scheme).valid());
            EXPECT_EQ(p.scheme.inst.S, sigma_image(f, A, 2));
            // Each power block is sigma_2 of its source block, bijectively.
            for (size_t i = 0; i < p.scheme.level(1).num_blocks(); ++i) {
                const auto& src = sch.level(2).blocks[p.source_blocks[0][i]];
                PointSet img = sigma_image(f, src, 2);
                EXPECT_EQ(img.size(), src.size());
                EXPECT_EQ(img.members, p.scheme.level(1).blocks[i]);
            }
        }
    }
    EXPECT_GT(built, 0);
}

TEST(SchemePower, PreservesAntisymmetry) {
    for (const auto& [sch, a, mp] : {std::tuple{semilinear32(2), BlockRef{1, 0}, 1}, std::tuple{finest22(4), BlockRef{1, 0}, 2},
                                     std::tuple{finest22(4), BlockRef{2, 0}, 1}, std::tuple{finest22(4), BlockRef{2, 3}, 1}}) {
        ASSERT_EQ(strong_antisym_check(sch).outcome, Outcome::Antisymmetric);
        auto p = scheme_power(sch, a, mp);
        EXPECT_EQ(strong_antisym_check(p.scheme).outcome, Outcome::Antisymmetric);
    }
}

TEST(SchemePower, DepthPreconditionNamed) {
    try {
        scheme_power(singer7(3), {2, 0}, 1);
        FAIL();
    } catch (const PreconditionUnmet& e) {
        EXPECT_EQ(e.inequality(), "m>=2km'");
    }
}

TEST(LiftBlock, FiberBlocksLiftBack) {
    for (const auto& sch : {singer7(4), gl2(4), semilinear16(4)}) {
        const FieldSpec& f = sch.field();
        auto power = scheme_power(sch, {1, 0}, 2);
        for (Code x : power.scheme.inst.S.members) {
            LinearMScheme fib = fiber_restrict(power.scheme, Tuple{{x}});
            for (int id = 0; id < static_cast<int>(fib.level(1).num_blocks()); ++id) {
                BlockSet a2{1, {id}};
                auto lifted = lift_block(sch, power, Tuple{{x}}, a2);
                EXPECT_EQ(lifted.y, Tuple{{x}});
                // T inside A and sigma(T) = A''.
                const auto& A = sch.level(1).blocks[0];
                for (Code z : lifted.tuples) EXPECT_TRUE(std::binary_search(A.begin(), A.end(), z));
                EXPECT_EQ(sigma_image(f, lifted.tuples, 1).members, fib.level(1).blocks[id]);
                EXPECT_EQ(union_of(fiber_restrict(sch, lifted.y), lifted.t), lifted.tuples);
            }
        }
    }
}

TEST(LiftBlock, PreconditionsNamed) {
    auto sch = gl2(4);
    auto power = scheme_power(sch, {1, 0}, 2);
    auto expect_label = [&](const Tuple& x, const std::string& label) {
        try {
            lift_block(sch, power, x, BlockSet{1, {0}});
            ADD_FAILURE() << "expected " << label;
        } catch (const PreconditionUnmet& e) {
            EXPECT_EQ(e.inequality(), label);
        }
    };
    expect_label(Tuple{}, "r>=1");
    expect_label(Tuple{{0}}, "x in A'^r");
    expect_label(Tuple{{1, 2, 3, 1}}, "k(r+1)<=m");
}

// ---- BSG ---------------------------------------------------------------------------------

TEST(Bsg, EnergyGateNamed) {
    auto sch = singer7(4);
    // V\{0} in F_2^3 is not a coset, so E(B) < |B|^3.
    try {
        bsg_extract(sch, 0, Rational(1));
        FAIL();
    } catch (const EnergyTooLow& e) {
        EXPECT_EQ(e.inequality(), "E(B)>=gamma|B|^3");
    }
    try {
        bsg_extract(singer7(3), 0, Rational(1, 2));
        FAIL();
    } catch (const PreconditionUnmet& e) {
        EXPECT_EQ(e.inequality(), "m>=4");
    }
}

TEST(Bsg, OutputsVerifiedDirectly) {
    int runs = 0;
    for (const auto& sch : {singer7(4), semilinear16(4), gl2(4), singer7(5)}) {
        const FieldSpec& f = sch.field();
        for (int b = 0; b < static_cast<int>(sch.level(1).num_blocks()); ++b) {
            const auto& B = sch.level(1).blocks[b];
            for (Rational gamma : {Rational(1, 2), Rational(1, 4)}) {
                Rational n = R(B.size());
                if (Rational(BigInt(naive_energy(f, B))) < gamma * n * n * n) continue;
                auto o = bsg_extract(sch, b, gamma);
                ++runs;
                EXPECT_EQ(o.energy, naive_energy(f, B));
                for (Code y : o.points) EXPECT_TRUE(std::binary_search(B.begin(), B.end(), y));
                EXPECT_EQ(union_of(fiber_restrict(sch, Tuple{{o.x0}}), o.result_set), o.points);
                Rational np = R(o.points.size());
                EXPECT_GE(3 * np, gamma * n);
                auto diff = naive_difference(f, o.points, o.points);
                EXPECT_EQ(o.difference_size, diff.size());
                EXPECT_LT(R(diff.size()) * rpow(gamma, 9), rpow(Rational(2), 17) * n);
                ASSERT_TRUE(o.min_representations.has_value());
                BigInt least = -1;
                for (Code d : diff) {
                    BigInt c = lms::testing::four_fold(f, B, d);
                    if (least < 0 || c < least) least = c;
                }
                EXPECT_EQ(*o.min_representations, least);
                EXPECT_GT(Rational(least) * rpow(Rational(2), 17), rpow(gamma, 9) * rpow(n, 7));
                EXPECT_EQ(recheck_mismatches(o.trace), 0u);
            }
        }
    }
    EXPECT_GT(runs, 0);
}

// ---- decomposition ---------------------------------------------------------------

namespace {

void expect_decomposition(const LinearMScheme& sch, int b, int k_prime, const Rational& eps, int k_test) {
    DecomposeOptions opts;
    opts.full_property7 = true;
    opts.relaxed = true;
    opts.k_test = k_test;
    auto d = decompose(sch, b, k_prime, eps, opts);
    EXPECT_FALSE(d.special.chars.empty());
    auto bad = lms::testing::decomposition_failures(sch, b, k_prime, eps, k_test, d);
    EXPECT_TRUE(bad.empty()) << bad.front();
}

}  // namespace

TEST(Decompose, HyperplaneConcentratedSets) {
    FieldSpec f2(2, 4), f3(3, 3);
    auto s2 = orbit_scheme(lms::testing::parabolic_group(f2, 2), full_space(f2), 2);
    auto s3 = orbit_scheme(lms::testing::parabolic_group(f3, 2), full_space(f3), 2);
    for (int b = 0; b < 2; ++b) {
        SCOPED_TRACE("F_2^4 block " + std::to_string(b));
        expect_decomposition(s2, b, 1, Rational(1, 4), 1);
    }
    for (int b = 0; b < 2; ++b) {
        SCOPED_TRACE("F_3^3 block " + std::to_string(b));
        expect_decomposition(s3, b, 1, Rational(1, 9), 1);
    }
}

TEST(Decompose, TrivialGateOnFlatSets) {
    FieldSpec f(2, 4);
    auto sch = orbit_scheme(gl_group(f), PointSet(f, {1}), 2);
    PointSet B(f, sch.level(1).blocks[0]);
    DecomposeOptions opts;
    opts.relaxed = true;
    const Rational eps(1, 4);
    auto d = decompose(sch, 0, 1, eps, opts);
    EXPECT_TRUE(d.trivial_gate);
    // Every W in the family, found by enumeration, stays within eps of mu(B).
    Rational mu = lms::testing::density_of(B, SubgroupBasis::span_of(B).elements());
    auto family = lms::testing::constructible_family(sch, B, 1);
    for (const PointSet& w : family) {
        Rational gap = lms::testing::density_of(B, w) - mu;
        if (gap < 0) gap = -gap;
        EXPECT_LE(gap, eps);
    }
    EXPECT_EQ(constructible_subspaces(sch, B, 1).size(), family.size());
    EXPECT_LE(max_density_gap(B, constructible_subspaces(sch, B, 1)), eps);
}

TEST(Decompose, LargeEpsIsTrivial) {
    FieldSpec f(2, 4);
    auto sch = orbit_scheme(lms::testing::parabolic_group(f, 2), full_space(f), 2);
    DecomposeOptions opts;
    opts.relaxed = true;
    EXPECT_TRUE(decompose(sch, 1, 1, Rational(1), opts).trivial_gate);
    EXPECT_TRUE(decompose(sch, 1, 1, Rational(3, 2), opts).trivial_gate);
}

TEST(Decompose, StrictDepthPrecondition) {
    FieldSpec f(2, 4);
    auto sch = orbit_scheme(lms::testing::parabolic_group(f, 2), full_space(f), 2);
    try {
        decompose(sch, 1, 1, Rational(1, 4));
        FAIL();
    } catch (const PreconditionUnmet& e) {
        EXPECT_EQ(e.inequality(), "m>=2t+2");
    }
}

// ---- density reduction ---------------------------------------------------------------

TEST(DensityReduce, BadParametersNameTheInequality) {
    auto s16 = semilinear16(4);  // |B| = 15, mu = 15/16
    auto g6 = gl2(6);            // |B| = 3, mu = 3/4
    struct Bad {
        const LinearMScheme* sch;
        RefineParams p;
        std::string label;
    };
    auto P = [](Rational K, int k, int t, Rational eps, int kp) {
        RefineParams p;
        p.K = K;
        p.k = k;
        p.t = t;
        p.eps = eps;
        p.k_prime = kp;
        return p;
    };
    std::vector<Bad> matrix{
        {&s16, P(1, 1, 0, Rational(1, 4), 0), "K>1"},
        {&s16, P(4, 1, 0, Rational(1), 0), "0<eps<1"},
        {&s16, P(4, 1, 0, Rational(3, 2), 0), "0<eps<1"},
        // t = floor(3K/(2mu)) + 1 = 7
        {&s16, P(4, 1, 0, Rational(1, 4), 0), "k>=2t"},
        // 2^2 < (64/15)^2
        {&s16, P(4, 2, 1, Rational(1, 4), 0), "k>=(t+1)log_ell(K/mu(B))"},
        {&s16, P(4, 5, 1, Rational(1, 4), 0), "m>=4k'+2"},
        {&g6, P(4, 5, 1, Rational(1, 4), 1), "|B|>K"},
        {&g6, P(2, 3, 1, Rational(1, 4), 1), "strongly antisymmetric"},
    };
    for (const auto& bad : matrix) {
        try {
            density_reduce(*bad.sch, 0, bad.p);
            ADD_FAILURE() << "accepted parameters meant to fail " << bad.label;
        } catch (const PreconditionUnmet& e) {
            EXPECT_EQ(e.inequality(), bad.label);
        }
    }
}

TEST(DensityReduce, RelaxedRecordsLaterPreconditions) {
    auto sch = semilinear16(4);
    RefineParams p;
    p.relaxed = true;
    auto res = density_reduce(sch, 0, p);
    std::map<std::string, bool> pre;
    for (const auto& q : res.trace.front().inequalities) pre[q.label] = q.holds;
    // |B| = 15, |<B>| = 16, K = 4, r = 1, m = 4, verdict Witness.
    EXPECT_FALSE(pre.at("|B|>K^2"));
    EXPECT_TRUE(pre.at("|B|>=|<B>|/K"));
    EXPECT_TRUE(pre.at("K>=4"));
    EXPECT_TRUE(pre.at("|B|>K"));
    EXPECT_FALSE(pre.at("m>=120K^7+3r"));
    EXPECT_FALSE(pre.at("strongly antisymmetric"));
}

// Relaxed runs across the instance suite: every printed inequality re-derives
// to the recorded truth value, and the returned set satisfies its bounds.
TEST(DensityReduce, RoundInequalitiesVerify) {
    std::map<std::string, int> branches;
    size_t checked = 0;
    for (const auto& sch : {semilinear16(4), semilinear32(3), singer7(4), singer7(5), gl2(4)}) {
        const FieldSpec& f = sch.field();
        const auto& B = sch.level(1).blocks[0];
        for (int r : {1, 2})
            for (Rational K : {Rational(2), Rational(4)}) {
                RefineParams p;
                p.relaxed = true;
                p.r = r;
                p.K = K;
                auto res = density_reduce(sch, 0, p);
                EXPECT_EQ(recheck_mismatches(res.trace, &checked), 0u);
                EXPECT_FALSE(any_conclusion_fails(res.trace));
                for (const auto& st : res.trace) ++branches[st.branch];
                if (res.status == "stopped") continue;
                ASSERT_TRUE(res.outcome.has_value());
                const auto& o = *res.outcome;
                for (Code y : o.points) EXPECT_TRUE(std::binary_search(B.begin(), B.end(), y));
                EXPECT_EQ(union_of(fiber_restrict(sch, o.prefix), o.result_set), o.points);
                Rational n = R(o.points.size()), N = R(B.size());
                // eps' = eps / ell^k = 1/8, so ell^(1/eps'^2) = 2^64.
                Rational lift(ipow(BigInt(f.ell()), 64));
                if (res.status == "completed") {
                    EXPECT_GE(n * lift * K * K * K, N);
                    Rational inv_k = 1 / K;
                    Rational cap = std::max(inv_k, rpow(2 * p.gamma, static_cast<unsigned>(r)));
                    EXPECT_LE(n, cap * N);
                } else {
                    EXPECT_EQ(res.status, "case_exit");
                    EXPECT_LE(n * K, N);
                    EXPECT_GE(n * lift * K * K, N);
                }
            }
    }
    EXPECT_GT(checked, 0u);
    EXPECT_GT(branches["halving"], 0);
    EXPECT_GT(branches["density_split"], 0);
}

TEST(DensityReduce, HalvingRoundDirect) {
    auto sch = semilinear16(4);
    RefineParams p;
    p.relaxed = true;
    auto res = density_reduce(sch, 0, p);
    ASSERT_EQ(res.status, "completed");
    bool saw = false;
    for (const auto& st : res.trace) {
        if (st.branch != "halving") continue;
        saw = true;
        for (const auto& q : st.inequalities)
            if (q.asserted) EXPECT_TRUE(q.holds) << q.label;
    }
    EXPECT_TRUE(saw);
}

// ---- key lemma and depth ---------------------------------------------------------------

TEST(KeyLemma, SingerPrefixLengthOne) {
    auto sch = singer7(2);
    KeyLemmaOptions opts;
    opts.require_antisymmetric = false;
    auto res = key_lemma_search(sch, 0, opts);
    ASSERT_EQ(res.levels.size(), 2u);
    const auto& B = sch.level(1).blocks[0];
    // Brute force: every x in B and every union of fiber blocks inside B.
    Rational best = 0;
    for (Code x : B) {
        LinearMScheme fib = fiber_restrict(sch, Tuple{{x}});
        std::vector<size_t> sizes;
        for (const auto& blk : fib.level(1).blocks)
            if (std::binary_search(B.begin(), B.end(), blk.front())) sizes.push_back(blk.size());
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << sizes.size()); ++mask) {
            size_t s = 0;
            for (size_t j = 0; j < sizes.size(); ++j)
                if (mask >> j & 1) s += sizes[j];
            Rational v = std::min(R(s), R(B.size()) / R(s));
            best = std::max(best, v);
        }
    }
    EXPECT_EQ(res.levels[1].best, best);
    EXPECT_EQ(best, Rational(7, 3));
    ASSERT_TRUE(res.best.has_value());
    EXPECT_EQ(res.best->prefix.arity(), 1);
    EXPECT_EQ(res.best->min_ratio(), best);
    EXPECT_EQ(union_of(fiber_restrict(sch, res.best->prefix), res.best->result_set), res.best->points);
}

TEST(KeyLemma, Preconditions) {
    auto sch = singer7(2);
    try {
        key_lemma_search(sch, 0);
        FAIL();
    } catch (const PreconditionUnmet& e) {
        EXPECT_EQ(e.inequality(), "strongly antisymmetric");
    }
    try {
        key_lemma_search(finest22(2), 0);
        FAIL();
    } catch (const PreconditionUnmet& e) {
        EXPECT_EQ(e.inequality(), "|B|>1");
    }
}

TEST(DepthMeasure, BoundsOnAntisymmetricScheme) {
    auto sch = semilinear32(2);
    auto v = strong_antisym_check(sch);
    ASSERT_EQ(v.outcome, Outcome::Antisymmetric);
    auto d = depth_measure(sch, 0, v);
    const size_t n = sch.level(1).blocks[0].size();
    EXPECT_GE(d.count, 1);
    EXPECT_LE(d.count, static_cast<int>(std::floor(std::log2(static_cast<double>(n)))));
    EXPECT_LT(d.count, span_dim(sch.field(), sch.inst.S.members));
    EXPECT_TRUE(d.log_bound);
    EXPECT_TRUE(d.dim_bound);
    for (const auto& st : d.steps) {
        EXPECT_GT(st.size_after, 1u);
        EXPECT_LE(2 * st.size_after, st.size_before);
    }
}

TEST(DepthMeasure, Rejections) {
    auto g = gl2(2);
    EXPECT_THROW(depth_measure(g, 0, strong_antisym_check(g)), PreconditionUnmet);
    auto fin = finest22(2);
    EXPECT_THROW(depth_measure(fin, 0, strong_antisym_check(fin)), PreconditionUnmet);
    // m = 1 leaves no room for a fixing.
    FieldSpec f(2, 3);
    SchemeInstance inst(PointSet(f, {1, 2, 3, 4, 5, 6, 7}));
    LinearMScheme one;
    one.inst = inst;
    one.m = 1;
    one.levels.push_back(coarsest_partition(inst, 1));
    auto v = strong_antisym_check(one);
    ASSERT_EQ(v.outcome, Outcome::Antisymmetric);
    try {
        depth_measure(one, 0, v);
        FAIL();
    } catch (const DepthMeasureExhausted& e) {
        EXPECT_EQ(e.partial().count, 0);
        EXPECT_EQ(e.partial().block_size, 7u);
    }
}

// ---- traces --------------------------------------------------------------------------

TEST(Trace, ConclusionFailureDetection) {
    Trace t(1);
    t[0].check(make_inequality("premise", 1, ">", 2));
    EXPECT_FALSE(any_conclusion_fails(t));
    t[0].conclude(make_inequality("ok", 2, ">=", 2));
    EXPECT_FALSE(any_conclusion_fails(t));
    t[0].conclude(make_inequality("bad", 1, "==", 2));
    EXPECT_TRUE(any_conclusion_fails(t));
    EXPECT_THROW(make_inequality("x", 1, "~", 2), InputError);
    auto q = make_inequality("frac", Rational(3, 4), "<", Rational(1));
    EXPECT_EQ(q.lhs, "3/4");
    EXPECT_TRUE(q.holds);
}

#include "stark/basis.hpp"

#include <gtest/gtest.h>

#include <set>

#include "oracle_helpers.hpp"

using namespace stark;

TEST(Basis, BosonSectorMatchesBruteForce) {
    const auto basis = enumerate_boson_sector(4, 2, 2);
    const auto expected = oracle::brute_force_sector(4, 2, 2);
    ASSERT_EQ(basis.dimension(), 10u);
    ASSERT_EQ(basis.dimension(), expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) {
        EXPECT_EQ(basis.state(k), expected[k]) << "state " << k;
    }
}

TEST(Basis, EmptySector) {
    const auto basis = enumerate_boson_sector(2, 0, 1);
    ASSERT_EQ(basis.dimension(), 1u);
    EXPECT_EQ(basis.state(0), (FockState{0, 0}));
}

TEST(Basis, LargeSectorDimensionStarsAndBars) {
    const auto basis = enumerate_boson_sector(12, 6, 6);
    EXPECT_EQ(basis.dimension(), 12376u);
    EXPECT_EQ(basis.dimension(), oracle::binomial(17, 6));
}

TEST(Basis, SpinSectorExplicit) {
    const auto basis = enumerate_spin_sector(4, 2);
    ASSERT_EQ(basis.dimension(), 6u);
    const auto expected = oracle::brute_force_sector(4, 2, 1);
    for (std::size_t k = 0; k < expected.size(); ++k) {
        EXPECT_EQ(basis.state(k), expected[k]);
    }
}

TEST(Basis, SpinSectorBinomialDimension) {
    EXPECT_EQ(enumerate_spin_sector(18, 9).dimension(), oracle::binomial(18, 9));
    EXPECT_EQ(enumerate_spin_sector(18, 9).dimension(), 48620u);
}

TEST(Basis, SingleSiteSpinSector) {
    const auto basis = enumerate_spin_sector(1, 1);
    ASSERT_EQ(basis.dimension(), 1u);
    EXPECT_EQ(basis.state(0), (FockState{1}));
}

TEST(Basis, LexicographicOrderAndIndexEndpoints) {
    const auto basis = enumerate_boson_sector(5, 3, 3);
    for (std::size_t k = 1; k < basis.dimension(); ++k) {
        EXPECT_LT(basis.state(k - 1), basis.state(k));
    }
    EXPECT_EQ(basis.index_of(basis.state(0)), 0u);
    EXPECT_EQ(basis.index_of(basis.state(basis.dimension() - 1)), basis.dimension() - 1);
}

TEST(Basis, IndexRoundtripFullSector) {
    for (const auto& basis :
         {enumerate_boson_sector(6, 3, 3), enumerate_boson_sector(5, 4, 2),
          enumerate_spin_sector(8, 4)}) {
        for (std::size_t k = 0; k < basis.dimension(); ++k) {
            EXPECT_EQ(basis.index_of(basis.state(k)), k);
        }
    }
}

TEST(Basis, IndexOfRejectsForeignState) {
    const auto basis = enumerate_boson_sector(4, 2, 2);
    EXPECT_THROW(basis.index_of(FockState{2, 2, 0, 0}), LookupError);   // wrong N
    EXPECT_THROW(basis.index_of(FockState{1, 1, 0}), LookupError);      // wrong length
}

TEST(Basis, CapacityValidation) {
    EXPECT_THROW(enumerate_boson_sector(3, 7, 2), ParameterError);
    EXPECT_THROW(enumerate_spin_sector(3, 4), ParameterError);
    EXPECT_THROW(enumerate_boson_sector(4, 2, 0), ParameterError);
}

TEST(Basis, DimensionLawCapNonBinding) {
    for (int L = 2; L <= 10; ++L) {
        for (int N = 0; N <= 5; ++N) {
            EXPECT_EQ(enumerate_boson_sector(L, N, std::max(N, 1)).dimension(),
                      oracle::binomial(L + N - 1, N))
                << "L=" << L << " N=" << N;
        }
    }
}

TEST(Basis, CapMonotonicity) {
    const int L = 6, N = 4;
    std::size_t prev = 0;
    for (int cap = 1; cap <= N; ++cap) {
        const auto dim = enumerate_boson_sector(L, N, cap).dimension();
        EXPECT_GE(dim, prev);
        prev = dim;
    }
    EXPECT_EQ(enumerate_boson_sector(L, N, 1).dimension(), oracle::binomial(L, N));
}

TEST(Basis, BipartitionExamples) {
    const auto [l1, r1] = bipartition_split(FockState{1, 0, 1, 0}, 2);
    EXPECT_EQ(l1, (FockState{1, 0}));
    EXPECT_EQ(r1, (FockState{1, 0}));
    const auto [l2, r2] = bipartition_split(FockState{2, 0, 0, 1}, 1);
    EXPECT_EQ(l2, (FockState{2}));
    EXPECT_EQ(r2, (FockState{0, 0, 1}));
}

TEST(Basis, SplitMergeIdentityAndLeftCounts) {
    const auto basis = enumerate_boson_sector(6, 3, 3);
    std::set<int> left_counts;
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        for (int cut = 1; cut < 6; ++cut) {
            const auto [lf, rf] = bipartition_split(basis.state(k), cut);
            FockState merged = lf;
            merged.insert(merged.end(), rf.begin(), rf.end());
            EXPECT_EQ(merged, basis.state(k));
            if (cut == 3) left_counts.insert(particle_number(lf));
        }
    }
    EXPECT_EQ(left_counts, (std::set<int>{0, 1, 2, 3}));
}

TEST(Basis, BipartitionCutValidation) {
    EXPECT_THROW(bipartition_split(FockState{1, 0}, 0), ParameterError);
    EXPECT_THROW(bipartition_split(FockState{1, 0}, 2), ParameterError);
}

#include "stark/observables.hpp"

#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "oracle_helpers.hpp"

using namespace stark;

namespace {

Eigen::VectorXd random_state(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(eng);
    v.normalize();
    return v;
}

}  // namespace

TEST(EntanglementEntropy, ProductStateIsZero) {
    const SectorBasis basis(6, 3, 3);
    for (std::size_t k : {std::size_t(0), basis.dimension() / 2, basis.dimension() - 1}) {
        Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dimension()));
        psi(static_cast<Eigen::Index>(k)) = 1.0;
        EXPECT_NEAR(entanglement_entropy(psi, basis, 3), 0.0, 1e-12);
    }
}

TEST(EntanglementEntropy, TwoTermSchmidt) {
    const SectorBasis basis(2, 1, 1);
    Eigen::VectorXd psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(entanglement_entropy(psi, basis, 1), std::log(2.0), 1e-12);
}

TEST(EntanglementEntropy, PureStateReflectionSymmetry) {
    // S(rho_A) = S(rho_B): evaluate the same state on the site-reversed basis
    const SectorBasis basis(8, 4, 4);
    const Eigen::VectorXd psi = random_state(basis.dimension(), 1);
    Eigen::VectorXd rev = Eigen::VectorXd::Zero(psi.size());
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        FockState s = basis.state(k);
        std::reverse(s.begin(), s.end());
        rev(static_cast<Eigen::Index>(basis.index_of(s))) = psi(static_cast<Eigen::Index>(k));
    }
    for (int cut = 1; cut < 8; ++cut) {
        EXPECT_NEAR(entanglement_entropy(psi, basis, cut),
                    entanglement_entropy(rev, basis, 8 - cut), 1e-10)
            << "cut " << cut;
    }
}

TEST(EntanglementEntropy, BoundsAndSchmidtSum) {
    const SectorBasis basis(6, 3, 3);
    const BipartitionPlan plan(basis, 3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Eigen::VectorXd psi = random_state(basis.dimension(), seed);
        const auto schmidt = plan.schmidt(psi);
        EXPECT_NEAR(schmidt.lambdas.sum(), 1.0, 1e-10);
        EXPECT_GE(schmidt.lambdas.minCoeff(), 0.0);
        const double s = plan.entropy(psi);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, std::log(static_cast<double>(schmidt.lambdas.size())) + 1e-12);
    }
}

TEST(EntanglementEntropy, ComplexStateMatchesRealEmbedding) {
    const SectorBasis basis(6, 3, 1);
    const Eigen::VectorXd re = random_state(basis.dimension(), 7);
    Eigen::VectorXcd cpsi = re.cast<std::complex<double>>();
    EXPECT_NEAR(entanglement_entropy(cpsi, basis, 3), entanglement_entropy(re, basis, 3), 1e-12);
}

TEST(EntanglementEntropy, RejectsUnnormalized) {
    const SectorBasis basis(4, 2, 2);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dimension()));
    psi(0) = 1.1;
    EXPECT_THROW(entanglement_entropy(psi, basis, 2), ParameterError);
}

TEST(ParticipationEntropy, BasisUniformAndTwoComponent) {
    const SectorBasis basis(4, 2, 2);
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(dim);
    e0(3) = 1.0;
    EXPECT_NEAR(participation_entropy(e0), 0.0, 1e-12);

    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    EXPECT_NEAR(participation_entropy(uniform), std::log(static_cast<double>(dim)), 1e-12);

    Eigen::VectorXd two = Eigen::VectorXd::Zero(dim);
    two(0) = 0.6;
    two(1) = 0.8;
    const double expected = -0.36 * std::log(0.36) - 0.64 * std::log(0.64);
    EXPECT_NEAR(participation_entropy(two), expected, 1e-12);
    EXPECT_NEAR(expected, 0.6534, 5e-5);
}

TEST(ParticipationEntropy, PermutationInvariance) {
    const SectorBasis basis(6, 3, 1);
    const Eigen::VectorXd psi = random_state(basis.dimension(), 9);
    Eigen::VectorXd shuffled = psi;
    std::mt19937_64 eng(4);
    std::shuffle(shuffled.data(), shuffled.data() + shuffled.size(), eng);
    EXPECT_NEAR(participation_entropy(psi), participation_entropy(shuffled), 1e-12);
}

TEST(SiteOccupations, BasisStateAndConservation) {
    const SectorBasis basis(4, 2, 2);
    const std::size_t k = basis.index_of({1, 0, 1, 0});
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dimension()));
    psi(static_cast<Eigen::Index>(k)) = 1.0;
    const Eigen::VectorXd occ = site_occupations(psi, basis);
    EXPECT_DOUBLE_EQ(occ(0), 1.0);
    EXPECT_DOUBLE_EQ(occ(1), 0.0);
    EXPECT_DOUBLE_EQ(occ(2), 1.0);
    EXPECT_DOUBLE_EQ(occ(3), 0.0);

    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Eigen::VectorXd r = random_state(basis.dimension(), seed);
        EXPECT_NEAR(site_occupations(r, basis).sum(), 2.0, 1e-10);
    }
}

TEST(SiteOccupations, UniformSuperpositionHalfFilling) {
    const SectorBasis basis(4, 2, 1);
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    const Eigen::VectorXd occ = site_occupations(uniform, basis);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(occ(j), 0.5, 1e-12);
}

TEST(Imbalance, PatternAndAntiPattern) {
    const SectorBasis basis(4, 2, 1);
    const InitialPattern pattern(FockState{1, 0, 1, 0});
    Eigen::VectorXd self = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dimension()));
    self(static_cast<Eigen::Index>(basis.index_of(pattern.occupations))) = 1.0;
    EXPECT_NEAR(imbalance(self, pattern, basis), 1.0, 1e-12);

    Eigen::VectorXd anti = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dimension()));
    anti(static_cast<Eigen::Index>(basis.index_of({0, 1, 0, 1}))) = 1.0;
    EXPECT_NEAR(imbalance(anti, pattern, basis), -1.0, 1e-12);

    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    EXPECT_NEAR(imbalance(uniform, pattern, basis), 0.0, 1e-12);
}

TEST(InitialPattern, Validation) {
    EXPECT_THROW(InitialPattern(FockState{2, 0, 0, 0}), ParameterError);
    EXPECT_THROW(InitialPattern(FockState{1, 1, 1, 0}), ParameterError);
    EXPECT_NO_THROW(InitialPattern(FockState{1, 1, 0, 0}));
    const auto cdw = cdw_pattern(6);
    EXPECT_EQ(cdw.occupations, (FockState{1, 0, 1, 0, 1, 0}));
}

TEST(PageValue, DeterministicPerSeed) {
    const SectorBasis basis(6, 3, 3);
    const auto a = page_value_monte_carlo(basis, 3, 500, 11);
    const auto b = page_value_monte_carlo(basis, 3, 500, 11);
    const auto c = page_value_monte_carlo(basis, 3, 500, 12);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_NE(a.mean, c.mean);
}

TEST(PageValue, StandardErrorScaling) {
    const SectorBasis basis(6, 3, 3);
    const auto small = page_value_monte_carlo(basis, 3, 1000, 5);
    const auto large = page_value_monte_carlo(basis, 3, 100000, 5);
    const double ratio = small.standard_error / large.standard_error;
    EXPECT_NEAR(ratio, 10.0, 2.0);  // ~ sqrt(100)
}

TEST(PageValue, SpinSectorNearClosedForm) {
    const SectorBasis basis(10, 5, 1);
    const auto est = page_value_monte_carlo(basis, 5, 20000, 21);
    EXPECT_NEAR(est.mean, page_value_formula_spin(10), 0.1);
    EXPECT_NEAR(page_value_formula_spin(10), 2.9657, 1e-4);
}

TEST(PageValue, ComplexEnsembleDiffersSlightly) {
    const SectorBasis basis(8, 4, 4);
    const auto re = page_value_monte_carlo(basis, 4, 20000, 31, RandomStateEnsemble::RealGaussian);
    const auto cx =
        page_value_monte_carlo(basis, 4, 20000, 31, RandomStateEnsemble::ComplexGaussian);
    EXPECT_GT(cx.mean, re.mean);          // complex ensemble concentrates higher
    EXPECT_LT(cx.mean - re.mean, 0.1);
}

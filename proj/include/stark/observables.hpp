#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <omp.h>

#include "stark/basis.hpp"
#include "stark/errors.hpp"
#include "stark/rng.hpp"

namespace stark {

struct BipartiteSchmidt {
    int cut = 0;
    Eigen::VectorXd lambdas;  // squared Schmidt coefficients, sum to 1
};

namespace detail {

inline void check_normalized(double norm, const char* where) {
    if (std::abs(norm - 1.0) > 1e-8) {
        throw ParameterError(std::string(where) + ": state vector is not normalized (|psi| = " +
                             std::to_string(norm) + ")");
    }
}

inline double entropy_from_probs(const Eigen::VectorXd& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 1e-30) s -= p(i) * std::log(p(i));
    }
    return s;
}

}  // namespace detail

/// Precomputed bipartition layout for one (basis, cut) pair.
///
/// The reduced density matrix is block-diagonal in the left-fragment particle
/// number, so the Schmidt spectrum is assembled from per-block Gram matrices
/// of the reshaped coefficient matrix; the full rho_A is never formed.
class BipartitionPlan {
  public:
    BipartitionPlan(const SectorBasis& basis, int cut)
        : cut_(cut), dimension_(basis.dimension()) {
        const int L = basis.num_sites();
        const int N = basis.num_particles();
        const int cap = basis.max_occ();
        if (cut <= 0 || cut >= L) {
            throw ParameterError("BipartitionPlan: cut must lie strictly inside the chain");
        }
        const int n_lo = std::max(0, N - (L - cut) * cap);
        const int n_hi = std::min(N, cut * cap);
        block_of_n_.assign(static_cast<std::size_t>(N) + 1, -1);
        for (int n = n_lo; n <= n_hi; ++n) {
            block_of_n_[static_cast<std::size_t>(n)] = static_cast<int>(left_dims_.size());
            left_bases_.emplace_back(cut, n, cap);
            right_bases_.emplace_back(L - cut, N - n, cap);
            left_dims_.push_back(left_bases_.back().dimension());
            right_dims_.push_back(right_bases_.back().dimension());
        }
        block_.resize(basis.dimension());
        left_index_.resize(basis.dimension());
        right_index_.resize(basis.dimension());
        for (std::size_t k = 0; k < basis.dimension(); ++k) {
            const auto [lf, rf] = bipartition_split(basis.state(k), cut);
            const int n = particle_number(lf);
            const int b = block_of_n_[static_cast<std::size_t>(n)];
            block_[k] = b;
            left_index_[k] = left_bases_[static_cast<std::size_t>(b)].index_of(lf);
            right_index_[k] = right_bases_[static_cast<std::size_t>(b)].index_of(rf);
        }
    }

    int cut() const { return cut_; }

    template <class Scalar>
    BipartiteSchmidt schmidt(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& psi) const {
        if (static_cast<std::size_t>(psi.size()) != dimension_) {
            throw ParameterError("schmidt: vector length does not match basis dimension");
        }
        detail::check_normalized(psi.norm(), "schmidt");
        using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
        std::vector<Mat> blocks;
        blocks.reserve(left_dims_.size());
        for (std::size_t b = 0; b < left_dims_.size(); ++b) {
            blocks.emplace_back(Mat::Zero(static_cast<Eigen::Index>(left_dims_[b]),
                                          static_cast<Eigen::Index>(right_dims_[b])));
        }
        for (std::size_t k = 0; k < dimension_; ++k) {
            blocks[static_cast<std::size_t>(block_[k])](
                static_cast<Eigen::Index>(left_index_[k]),
                static_cast<Eigen::Index>(right_index_[k])) = psi(static_cast<Eigen::Index>(k));
        }
        std::vector<double> lams;
        for (const auto& m : blocks) {
            const bool left_small = m.rows() <= m.cols();
            Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram =
                left_small ? (m * m.adjoint()).eval() : (m.adjoint() * m).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>
                es(gram, Eigen::EigenvaluesOnly);
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                double lam = es.eigenvalues()(i);
                if (lam < -1e-14) {
                    throw NumericalError("schmidt: Gram matrix eigenvalue below -1e-14");
                }
                lams.push_back(std::max(lam, 0.0));
            }
        }
        BipartiteSchmidt out;
        out.cut = cut_;
        out.lambdas = Eigen::Map<Eigen::VectorXd>(lams.data(), static_cast<Eigen::Index>(lams.size()));
        return out;
    }

    template <class Scalar>
    double entropy(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& psi) const {
        return detail::entropy_from_probs(schmidt(psi).lambdas);
    }

  private:
    int cut_;
    std::size_t dimension_;
    std::vector<int> block_of_n_;
    std::vector<SectorBasis> left_bases_;
    std::vector<SectorBasis> right_bases_;
    std::vector<std::size_t> left_dims_;
    std::vector<std::size_t> right_dims_;
    std::vector<int> block_;
    std::vector<std::size_t> left_index_;
    std::vector<std::size_t> right_index_;
};

/// Von Neumann entanglement entropy (nats) across the bond left of `cut`.
template <class Scalar>
double entanglement_entropy(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& psi,
                            const SectorBasis& basis, int cut) {
    return BipartitionPlan(basis, cut).entropy(psi);
}

/// Shannon participation entropy (nats) over the sector's Fock basis.
template <class Scalar>
double participation_entropy(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& psi) {
    detail::check_normalized(psi.norm(), "participation_entropy");
    Eigen::VectorXd p(psi.size());
    for (Eigen::Index i = 0; i < psi.size(); ++i) p(i) = std::norm(std::complex<double>(psi(i)));
    return detail::entropy_from_probs(p);
}

/// Per-site occupation expectations <n_j>; sums exactly to N.
template <class Scalar>
Eigen::VectorXd site_occupations(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& psi,
                                 const SectorBasis& basis) {
    if (static_cast<std::size_t>(psi.size()) != basis.dimension()) {
        throw ParameterError("site_occupations: vector length does not match basis dimension");
    }
    detail::check_normalized(psi.norm(), "site_occupations");
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(basis.num_sites());
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        const double w = std::norm(std::complex<double>(psi(static_cast<Eigen::Index>(k))));
        if (w == 0.0) continue;
        const FockState& s = basis.state(k);
        for (int j = 0; j < basis.num_sites(); ++j) {
            occ(j) += w * static_cast<double>(s[static_cast<std::size_t>(j)]);
        }
    }
    return occ;
}

/// Half-filling 0/1 product configuration used as quench initial state.
struct InitialPattern {
    FockState occupations;
    std::vector<int> ones;
    std::vector<int> zeros;

    explicit InitialPattern(FockState occ) : occupations(std::move(occ)) {
        const int L = static_cast<int>(occupations.size());
        for (int j = 0; j < L; ++j) {
            const int n = occupations[static_cast<std::size_t>(j)];
            if (n == 1) {
                ones.push_back(j);
            } else if (n == 0) {
                zeros.push_back(j);
            } else {
                throw ParameterError("InitialPattern: occupations must be 0 or 1");
            }
        }
        if (L % 2 != 0 || static_cast<int>(ones.size()) != L / 2) {
            throw ParameterError("InitialPattern: pattern must be at half filling");
        }
    }

    std::string label() const { return to_string(occupations); }
};

/// Charge-density wave |1010...10>.
inline InitialPattern cdw_pattern(int num_sites) {
    FockState s(static_cast<std::size_t>(num_sites), 0);
    for (int j = 0; j < num_sites; j += 2) s[static_cast<std::size_t>(j)] = 1;
    return InitialPattern(std::move(s));
}

/// Imbalance between initially occupied and initially empty sites, Eq.-style
/// normalization N_1(0) = (2/L) sum_{j in ones(zeros)} <n_j>.
template <class Scalar>
double imbalance(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& psi,
                 const InitialPattern& pattern, const SectorBasis& basis) {
    const Eigen::VectorXd occ = site_occupations(psi, basis);
    if (static_cast<int>(pattern.occupations.size()) != basis.num_sites()) {
        throw ParameterError("imbalance: pattern length does not match basis");
    }
    const double two_over_l = 2.0 / static_cast<double>(basis.num_sites());
    double n1 = 0.0, n0 = 0.0;
    for (int j : pattern.ones) n1 += occ(j);
    for (int j : pattern.zeros) n0 += occ(j);
    n1 *= two_over_l;
    n0 *= two_over_l;
    const double denom = n1 + n0;
    if (std::abs(denom) < 1e-300) {
        throw NumericalError("imbalance: vanishing total occupation at half filling");
    }
    return (n1 - n0) / denom;
}

enum class RandomStateEnsemble { RealGaussian, ComplexGaussian };

struct PageEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

/// Monte-Carlo mean half-cut entanglement entropy of Haar-random unit vectors
/// within the sector.  Per-sample derived RNG streams and an indexed
/// reduction keep the result independent of thread scheduling.
inline PageEstimate page_value_monte_carlo(const SectorBasis& basis, int cut,
                                           std::size_t samples, std::uint64_t seed,
                                           RandomStateEnsemble ensemble =
                                               RandomStateEnsemble::RealGaussian) {
    if (samples < 2) throw ParameterError("page_value_monte_carlo: need at least two samples");
    const BipartitionPlan plan(basis, cut);
    const Eigen::Index dim = static_cast<Eigen::Index>(basis.dimension());
    std::vector<double> values(samples);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(samples); ++s) {
        auto eng = rng::engine(seed, "page-sample", static_cast<std::uint64_t>(s));
        std::normal_distribution<double> gauss(0.0, 1.0);
        if (ensemble == RandomStateEnsemble::RealGaussian) {
            Eigen::VectorXd v(dim);
            for (Eigen::Index i = 0; i < dim; ++i) v(i) = gauss(eng);
            v.normalize();
            values[static_cast<std::size_t>(s)] = plan.entropy(v);
        } else {
            Eigen::VectorXcd v(dim);
            for (Eigen::Index i = 0; i < dim; ++i) {
                const double re = gauss(eng);
                const double im = gauss(eng);
                v(i) = std::complex<double>(re, im);
            }
            v.normalize();
            values[static_cast<std::size_t>(s)] = plan.entropy(v);
        }
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(samples);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

/// Closed-form Page value 0.5 [L ln 2 - 1] for an unconstrained spin-1/2
/// chain; the sector-sampled Monte-Carlo value differs from this.
inline double page_value_formula_spin(int num_sites) {
    return 0.5 * (num_sites * std::log(2.0) - 1.0);
}

}  // namespace stark

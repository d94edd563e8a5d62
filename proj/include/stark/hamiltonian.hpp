#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stark/basis.hpp"
#include "stark/errors.hpp"

namespace stark {

/// On-site potential h_j = -gamma * j + alpha * (j / (L-1))^2.
/// Vanishes exactly at j = 0; the quadratic term equals alpha at j = L-1.
struct PotentialSpec {
    double gamma = 0.0;
    double alpha = 0.0;
    int num_sites = 2;

    double onsite(int site) const {
        if (num_sites < 2) {
            throw ParameterError("PotentialSpec: need at least two sites");
        }
        if (site < 0 || site >= num_sites) {
            throw ParameterError("PotentialSpec: site index out of range");
        }
        const double x = static_cast<double>(site) / static_cast<double>(num_sites - 1);
        return -gamma * static_cast<double>(site) + alpha * x * x;
    }
};

inline double onsite_potential(int site, const PotentialSpec& spec) {
    return spec.onsite(site);
}

enum class ModelKind { BoseHubbard, AllToAllXX };

inline std::string model_name(ModelKind kind) {
    return kind == ModelKind::BoseHubbard ? "bose_hubbard" : "all_to_all_xx";
}

struct ModelParams {
    ModelKind kind = ModelKind::BoseHubbard;
    double hopping = 1.0;      // J (Bose-Hubbard)
    double interaction = 0.0;  // U (Bose-Hubbard)
    double coupling = 0.0;     // g (all-to-all XX)
    PotentialSpec potential;
};

/// Real symmetric sparse matrix in CSR form over a SectorBasis.
///
/// Column indices within each row are sorted, and mirrored entries are
/// produced by evaluating the identical amplitude expression on both sides,
/// so H is exactly symmetric and matvec summation order is reproducible.
class SparseHamiltonian {
  public:
    SparseHamiltonian(std::shared_ptr<const SectorBasis> basis, ModelParams params)
        : basis_(std::move(basis)), params_(params) {
        row_ptr_.assign(basis_->dimension() + 1, 0);
    }

    const SectorBasis& basis() const { return *basis_; }
    std::shared_ptr<const SectorBasis> basis_ptr() const { return basis_; }
    const ModelParams& params() const { return params_; }
    std::size_t dimension() const { return basis_->dimension(); }
    std::size_t nonzeros() const { return values_.size(); }

    double coeff(std::size_t row, std::size_t col) const {
        for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) {
            if (cols_[k] == col) return values_[k];
        }
        return 0.0;
    }

    double diagonal(std::size_t row) const { return coeff(row, row); }

    double trace() const {
        double t = 0.0;
        for (std::size_t a = 0; a < dimension(); ++a) t += diagonal(a);
        return t;
    }

    template <class Scalar>
    void apply(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
               Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) const {
        if (static_cast<std::size_t>(x.size()) != dimension()) {
            throw ParameterError("matvec: vector length does not match basis dimension");
        }
        y.resize(x.size());
        const std::size_t n = dimension();
        for (std::size_t a = 0; a < n; ++a) {
            Scalar acc = Scalar(0);
            for (std::size_t k = row_ptr_[a]; k < row_ptr_[a + 1]; ++k) {
                acc += values_[k] * x[static_cast<Eigen::Index>(cols_[k])];
            }
            y[static_cast<Eigen::Index>(a)] = acc;
        }
    }

    template <class Scalar>
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> matvec(
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) const {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y;
        apply(x, y);
        return y;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dimension()),
                                                  static_cast<Eigen::Index>(dimension()));
        for (std::size_t a = 0; a < dimension(); ++a) {
            for (std::size_t k = row_ptr_[a]; k < row_ptr_[a + 1]; ++k) {
                m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(cols_[k])) = values_[k];
            }
        }
        return m;
    }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& cols() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

    /// Assembly hook: rows must be appended in order, columns pre-sorted.
    void append_row(const std::vector<std::pair<std::size_t, double>>& entries) {
        for (const auto& [col, val] : entries) {
            cols_.push_back(col);
            values_.push_back(val);
        }
        filled_rows_ += 1;
        row_ptr_[filled_rows_] = cols_.size();
    }

  private:
    std::shared_ptr<const SectorBasis> basis_;
    ModelParams params_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
    std::size_t filled_rows_ = 0;
};

namespace detail {

inline void sort_and_merge(std::vector<std::pair<std::size_t, double>>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < entries.size(); ++r) {
        if (w > 0 && entries[w - 1].first == entries[r].first) {
            entries[w - 1].second += entries[r].second;
        } else {
            entries[w++] = entries[r];
        }
    }
    entries.resize(w);
}

}  // namespace detail

/// Bose-Hubbard chain:
///   H = -(U/2) sum_j n_j(n_j-1) + sum_j h_j n_j
///       + J sum_j (a^dag_j a_{j+1} + h.c.)
/// with h_j from PotentialSpec.  Moves that would exceed the sector's
/// occupancy cap are dropped.
inline SparseHamiltonian build_bose_hubbard(std::shared_ptr<const SectorBasis> basis, double J,
                                            double U, const PotentialSpec& spec) {
    if (spec.num_sites != basis->num_sites()) {
        throw ParameterError("build_bose_hubbard: potential and basis disagree on L");
    }
    const int L = basis->num_sites();
    const int cap = basis->max_occ();
    std::vector<double> h(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) h[static_cast<std::size_t>(j)] = spec.onsite(j);

    ModelParams params;
    params.kind = ModelKind::BoseHubbard;
    params.hopping = J;
    params.interaction = U;
    params.potential = spec;
    SparseHamiltonian ham(basis, params);

    std::vector<std::pair<std::size_t, double>> entries;
    FockState target;
    for (std::size_t a = 0; a < basis->dimension(); ++a) {
        const FockState& s = basis->state(a);
        entries.clear();
        double diag = 0.0;
        for (int j = 0; j < L; ++j) {
            const double n = s[static_cast<std::size_t>(j)];
            diag += h[static_cast<std::size_t>(j)] * n - 0.5 * U * n * (n - 1.0);
        }
        entries.emplace_back(a, diag);
        for (int j = 0; j + 1 < L; ++j) {
            const int nj = s[static_cast<std::size_t>(j)];
            const int nj1 = s[static_cast<std::size_t>(j + 1)];
            // a^dag_{j+1} a_j : one particle hops right
            if (nj > 0 && nj1 < cap) {
                target = s;
                target[static_cast<std::size_t>(j)] -= 1;
                target[static_cast<std::size_t>(j + 1)] += 1;
                entries.emplace_back(basis->index_of(target),
                                     J * std::sqrt(static_cast<double>(nj)) *
                                         std::sqrt(static_cast<double>(nj1 + 1)));
            }
            // a^dag_j a_{j+1} : one particle hops left
            if (nj1 > 0 && nj < cap) {
                target = s;
                target[static_cast<std::size_t>(j + 1)] -= 1;
                target[static_cast<std::size_t>(j)] += 1;
                entries.emplace_back(basis->index_of(target),
                                     J * std::sqrt(static_cast<double>(nj1)) *
                                         std::sqrt(static_cast<double>(nj + 1)));
            }
        }
        detail::sort_and_merge(entries);
        ham.append_row(entries);
    }
    return ham;
}

/// All-to-all XX chain:
///   H = -(g/L) sum_{j>i+1} (sx_i sx_j + sy_i sy_j)
///       + sum_i (sx_i sx_{i+1} + sy_i sy_{i+1}) + sum_i h_i sz_i.
/// Flip-flop matrix element of (sx sx + sy sy) between |up,down> and
/// |down,up> is 2; the diagonal is sum_i h_i (2 n_i - 1).
inline SparseHamiltonian build_all_to_all_xx(std::shared_ptr<const SectorBasis> basis, double g,
                                             const PotentialSpec& spec) {
    if (!basis->is_spin_sector()) {
        throw ModelMismatchError("build_all_to_all_xx: needs a hard-core (max_occ = 1) sector");
    }
    if (spec.num_sites != basis->num_sites()) {
        throw ParameterError("build_all_to_all_xx: potential and basis disagree on L");
    }
    const int L = basis->num_sites();
    std::vector<double> h(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) h[static_cast<std::size_t>(j)] = spec.onsite(j);
    const double nonlocal = -2.0 * g / static_cast<double>(L);

    ModelParams params;
    params.kind = ModelKind::AllToAllXX;
    params.coupling = g;
    params.hopping = 1.0;
    params.potential = spec;
    SparseHamiltonian ham(basis, params);

    std::vector<std::pair<std::size_t, double>> entries;
    FockState target;
    for (std::size_t a = 0; a < basis->dimension(); ++a) {
        const FockState& s = basis->state(a);
        entries.clear();
        double diag = 0.0;
        for (int i = 0; i < L; ++i) {
            diag += h[static_cast<std::size_t>(i)] * (2.0 * s[static_cast<std::size_t>(i)] - 1.0);
        }
        entries.emplace_back(a, diag);
        for (int i = 0; i < L; ++i) {
            for (int j = i + 1; j < L; ++j) {
                if (s[static_cast<std::size_t>(i)] == s[static_cast<std::size_t>(j)]) continue;
                target = s;
                std::swap(target[static_cast<std::size_t>(i)], target[static_cast<std::size_t>(j)]);
                const double amp = (j == i + 1) ? 2.0 : nonlocal;
                entries.emplace_back(basis->index_of(target), amp);
            }
        }
        detail::sort_and_merge(entries);
        ham.append_row(entries);
    }
    return ham;
}

}  // namespace stark

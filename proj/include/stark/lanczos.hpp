#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "stark/errors.hpp"
#include "stark/hamiltonian.hpp"
#include "stark/rng.hpp"

namespace stark {

struct SpectralBounds {
    double e_min = 0.0;
    double e_max = 0.0;
    int iterations = 0;
    double span() const { return e_max - e_min; }
};

/// Estimates the extremal eigenvalues with a plain Lanczos recurrence
/// (no reorthogonalization; ghost copies of converged extremes are harmless
/// for bounds).  Deterministic: the start vector comes from a fixed seed.
inline SpectralBounds lanczos_bounds(const SparseHamiltonian& ham, double tol = 1e-9,
                                     int max_iter = 400) {
    const std::size_t n = ham.dimension();
    if (n == 0) {
        throw ParameterError("lanczos_bounds: empty basis");
    }
    if (n == 1) {
        const double e = ham.diagonal(0);
        return {e, e, 0};
    }
    auto eng = rng::engine(0x1a2b3c4d5e6f7788ull, "lanczos-bounds");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(eng);
    v.normalize();

    Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(v.size());
    Eigen::VectorXd w(v.size());
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[k] couples step k and k+1

    double lo_prev = 0.0, hi_prev = 0.0;
    bool have_prev = false;
    const int m_max = std::min<std::size_t>(n, static_cast<std::size_t>(max_iter));
    for (int it = 0; it < m_max; ++it) {
        ham.apply(v, w);
        if (it > 0) w -= beta.back() * v_prev;
        const double a = v.dot(w);
        alpha.push_back(a);
        w -= a * v;
        const double b = w.norm();

        const bool breakdown = b < 1e-14 * std::max(1.0, std::abs(a));
        if (breakdown || it + 1 == m_max || (it + 1) % 8 == 0) {
            const int k = static_cast<int>(alpha.size());
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
            for (int i = 0; i < k; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
            for (int i = 0; i + 1 < k; ++i) {
                t(i, i + 1) = beta[static_cast<std::size_t>(i)];
                t(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues()(0);
            const double hi = es.eigenvalues()(k - 1);
            const double scale = std::max(hi - lo, 1e-300);
            if (have_prev && std::abs(lo - lo_prev) < tol * scale &&
                std::abs(hi - hi_prev) < tol * scale) {
                return {lo, hi, it + 1};
            }
            lo_prev = lo;
            hi_prev = hi;
            have_prev = true;
            if (breakdown || it + 1 == m_max) {
                return {lo, hi, it + 1};
            }
        }
        beta.push_back(b);
        v_prev = v;
        v = w / b;
    }
    return {lo_prev, hi_prev, m_max};
}

}  // namespace stark

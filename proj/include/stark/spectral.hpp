#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>
#include <omp.h>

#include "stark/basis.hpp"
#include "stark/errors.hpp"
#include "stark/hamiltonian.hpp"
#include "stark/lanczos.hpp"
#include "stark/rng.hpp"

namespace stark {

struct EmptySelectionError : std::runtime_error {
    explicit EmptySelectionError(const std::string& what) : std::runtime_error(what) {}
};

/// Eigenvalues in ascending order, optionally with orthonormal eigenvectors
/// stored column-wise.
struct EigenSolution {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;  // empty when not requested
    double e_min = 0.0;
    double e_max = 0.0;

    bool has_vectors() const { return vectors.size() > 0; }
    std::size_t size() const { return static_cast<std::size_t>(energies.size()); }
};

inline double normalized_energy(double energy, double e_min, double e_max) {
    if (!(e_max > e_min)) {
        throw ParameterError("normalized_energy: spectrum edges are degenerate");
    }
    return (energy - e_min) / (e_max - e_min);
}

/// Dense diagonalization via LAPACK (dsyevd / dsyev).
inline EigenSolution full_spectrum(const SparseHamiltonian& ham, bool want_vectors,
                                   std::size_t dimension_cap = 50000) {
    const std::size_t n = ham.dimension();
    if (n > dimension_cap) {
        throw ResourceError("full_spectrum: dimension " + std::to_string(n) +
                            " exceeds cap " + std::to_string(dimension_cap) +
                            "; use windowed diagonalization or the DoS estimator");
    }
    Eigen::MatrixXd a = ham.dense();
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    const lapack_int ln = static_cast<lapack_int>(n);
    lapack_int info;
    if (want_vectors) {
        info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', ln, a.data(), ln, w.data());
    } else {
        info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'L', ln, a.data(), ln, w.data());
    }
    if (info != 0) {
        throw NumericalError("full_spectrum: LAPACK syev failed with info " +
                             std::to_string(info));
    }
    EigenSolution sol;
    sol.energies = std::move(w);
    if (want_vectors) sol.vectors = std::move(a);
    sol.e_min = sol.energies(0);
    sol.e_max = sol.energies(sol.energies.size() - 1);
    return sol;
}

/// Eigenpairs with 1-based sorted indices in [first, last] via dsyevr.
/// Cheaper than full_spectrum with vectors when only an energy window is
/// needed; the returned EigenSolution carries the window's eigenpairs but the
/// full-spectrum edges must be supplied by the caller for normalization.
inline EigenSolution window_eigenpairs(const SparseHamiltonian& ham, std::size_t first,
                                       std::size_t last, double e_min, double e_max) {
    const std::size_t n = ham.dimension();
    if (first < 1 || last < first || last > n) {
        throw ParameterError("window_eigenpairs: bad index range");
    }
    Eigen::MatrixXd a = ham.dense();
    const lapack_int ln = static_cast<lapack_int>(n);
    const lapack_int il = static_cast<lapack_int>(first);
    const lapack_int iu = static_cast<lapack_int>(last);
    const lapack_int nsel = iu - il + 1;
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nsel));
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(nsel));
    lapack_int m = 0;
    lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', ln, a.data(), ln, 0.0, 0.0,
                                     il, iu, 0.0, &m, w.data(), z.data(), ln, isuppz.data());
    if (info != 0 || m != nsel) {
        throw NumericalError("window_eigenpairs: LAPACK syevr failed (info " +
                             std::to_string(info) + ")");
    }
    EigenSolution sol;
    sol.energies = w.head(nsel);
    sol.vectors = std::move(z);
    sol.e_min = e_min;
    sol.e_max = e_max;
    return sol;
}

/// Density of states over a uniform normalized-energy grid on [0, 1].
/// density(i) * bin_width(i) is the estimated number of states in bin i;
/// the bin-weighted integral equals total_states.
struct DoSProfile {
    Eigen::VectorXd bin_edges;  // size bins + 1, on [0, 1]
    Eigen::VectorXd density;    // size bins, states per unit epsilon
    double total_states = 0.0;
    double e_min = 0.0;  // energy mapped to epsilon = 0
    double e_max = 0.0;  // energy mapped to epsilon = 1
    std::vector<std::string> warnings;

    std::size_t bins() const { return static_cast<std::size_t>(density.size()); }
    double bin_width(std::size_t i) const { return bin_edges(i + 1) - bin_edges(i); }
    double bin_center(std::size_t i) const { return 0.5 * (bin_edges(i) + bin_edges(i + 1)); }
    double counts(std::size_t i) const { return density(i) * bin_width(i); }
};

/// Exact DoS histogram from a list of eigenvalues.
inline DoSProfile dos_from_spectrum(const Eigen::VectorXd& energies, int bins = 101) {
    if (bins < 1 || energies.size() < 1) {
        throw ParameterError("dos_from_spectrum: need at least one bin and one energy");
    }
    DoSProfile prof;
    prof.bin_edges = Eigen::VectorXd::LinSpaced(bins + 1, 0.0, 1.0);
    prof.density = Eigen::VectorXd::Zero(bins);
    prof.total_states = static_cast<double>(energies.size());
    prof.e_min = energies.minCoeff();
    prof.e_max = energies.maxCoeff();
    const double span = prof.e_max - prof.e_min;
    for (Eigen::Index i = 0; i < energies.size(); ++i) {
        double eps = span > 0.0 ? (energies(i) - prof.e_min) / span : 0.0;
        int b = std::min(bins - 1, std::max(0, static_cast<int>(eps * bins)));
        prof.density(b) += 1.0;
    }
    for (int b = 0; b < bins; ++b) prof.density(b) /= prof.bin_width(static_cast<std::size_t>(b));
    return prof;
}

namespace detail {

inline std::vector<double> jackson_kernel(int moments) {
    std::vector<double> g(static_cast<std::size_t>(moments));
    const double q = M_PI / (moments + 1.0);
    for (int m = 0; m < moments; ++m) {
        g[static_cast<std::size_t>(m)] =
            ((moments - m + 1.0) * std::cos(q * m) + std::sin(q * m) / std::tan(q)) /
            (moments + 1.0);
    }
    return g;
}

}  // namespace detail

/// Stochastic Chebyshev (kernel polynomial) DoS estimate.
///
/// Rademacher probes with per-probe derived RNG streams; Jackson-damped
/// moments; per-bin counts from the cumulative count function evaluated at
/// the bin edges, repaired to be nondecreasing.  Deterministic for a fixed
/// seed, independent of thread scheduling.
inline DoSProfile dos_chebyshev(const SparseHamiltonian& ham, int moments, int probes, int bins,
                                std::uint64_t seed) {
    if (moments < 2 || probes < 1 || bins < 1) {
        throw ParameterError("dos_chebyshev: need moments >= 2, probes >= 1, bins >= 1");
    }
    DoSProfile prof;
    if (moments < 64) prof.warnings.push_back("moments < 64: kernel resolution is coarse");
    if (probes < 8) prof.warnings.push_back("probes < 8: stochastic trace noise is large");

    const std::size_t n = ham.dimension();
    const SpectralBounds bounds = lanczos_bounds(ham);
    prof.e_min = bounds.e_min;
    prof.e_max = bounds.e_max;
    prof.total_states = static_cast<double>(n);
    prof.bin_edges = Eigen::VectorXd::LinSpaced(bins + 1, 0.0, 1.0);
    prof.density = Eigen::VectorXd::Zero(bins);

    // Rescale H to [-1, 1] with a 1% safety pad; clipping outside the
    // Chebyshev domain would corrupt the moments.
    double span = bounds.span();
    double pad = span > 0.0 ? 0.01 * span : std::max(1.0, std::abs(bounds.e_min)) * 1e-8;
    const double lo = bounds.e_min - pad;
    const double hi = bounds.e_max + pad;
    const double scale = (hi - lo) / 2.0;
    const double center = (hi + lo) / 2.0;

    // Per-probe moment accumulators, reduced in probe order afterwards.
    std::vector<std::vector<double>> probe_mu(static_cast<std::size_t>(probes),
                                              std::vector<double>(static_cast<std::size_t>(moments), 0.0));
#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < probes; ++p) {
        auto eng = rng::engine(seed, "dos-probe", p);
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng::rademacher(eng);
        Eigen::VectorXd t0 = z;
        Eigen::VectorXd t1(z.size()), t2(z.size());
        ham.apply(z, t1);
        t1 = (t1 - center * z) / scale;
        auto& mu = probe_mu[static_cast<std::size_t>(p)];
        mu[0] = z.dot(t0);
        mu[1] = z.dot(t1);
        for (int m = 2; m < moments; ++m) {
            ham.apply(t1, t2);
            t2 = 2.0 * ((t2 - center * t1) / scale) - t0;
            mu[static_cast<std::size_t>(m)] = z.dot(t2);
            t0.swap(t1);
            t1.swap(t2);
        }
    }
    std::vector<double> mu(static_cast<std::size_t>(moments), 0.0);
    for (int p = 0; p < probes; ++p) {
        for (int m = 0; m < moments; ++m) {
            mu[static_cast<std::size_t>(m)] += probe_mu[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)];
        }
    }
    for (double& v : mu) v /= static_cast<double>(probes);

    const std::vector<double> g = detail::jackson_kernel(moments);
    for (int m = 0; m < moments; ++m) mu[static_cast<std::size_t>(m)] *= g[static_cast<std::size_t>(m)];

    // Cumulative count below each bin edge:
    //   N(theta) = mu_0 (pi - theta)/pi - (2/pi) sum_m mu_m sin(m theta)/m,
    // with x = cos(theta).  The outermost edges absorb the padded domain so
    // the counts sum exactly to mu_0.
    const double e_span = prof.e_max - prof.e_min;
    Eigen::VectorXd cum(bins + 1);
    for (int k = 0; k <= bins; ++k) {
        double theta;
        if (k == 0) {
            theta = M_PI;
        } else if (k == bins) {
            theta = 0.0;
        } else {
            const double energy = prof.e_min + prof.bin_edges(k) * e_span;
            double x = (energy - center) / scale;
            x = std::clamp(x, -1.0, 1.0);
            theta = std::acos(x);
        }
        double acc = mu[0] * (M_PI - theta) / M_PI;
        for (int m = 1; m < moments; ++m) {
            acc -= 2.0 * mu[static_cast<std::size_t>(m)] * std::sin(m * theta) / (m * M_PI);
        }
        cum(k) = acc;
    }
    for (int k = 1; k <= bins; ++k) cum(k) = std::max(cum(k), cum(k - 1));
    for (int k = 0; k < bins; ++k) {
        prof.density(k) = (cum(k + 1) - cum(k)) / prof.bin_width(static_cast<std::size_t>(k));
    }
    return prof;
}

/// Center of the bin with maximal density after a 3-bin moving average;
/// ties resolve to the lower epsilon.
inline double max_dos_energy(const DoSProfile& prof) {
    const int bins = static_cast<int>(prof.bins());
    double best = -1.0;
    int best_bin = 0;
    for (int i = 0; i < bins; ++i) {
        const int lo = std::max(0, i - 1);
        const int hi = std::min(bins - 1, i + 1);
        double s = 0.0;
        for (int k = lo; k <= hi; ++k) s += prof.density(k);
        s /= static_cast<double>(hi - lo + 1);
        if (s > best) {
            best = s;
            best_bin = i;
        }
    }
    return prof.bin_center(static_cast<std::size_t>(best_bin));
}

struct WindowSpec {
    enum class Mode { HalfWidth, NearestCount };
    Mode mode = Mode::HalfWidth;
    double half_width = 0.05;
    std::size_t count = 500;

    static WindowSpec by_half_width(double w) { return {Mode::HalfWidth, w, 0}; }
    static WindowSpec by_nearest_count(std::size_t k) { return {Mode::NearestCount, 0.0, k}; }
};

/// Indices (sorted by energy) of the eigenstates selected around eps_star.
/// HalfWidth keeps |eps - eps*| <= w; NearestCount keeps the k closest in
/// eps, which is a contiguous block of the sorted spectrum.
inline std::vector<std::size_t> select_window_states(const Eigen::VectorXd& energies,
                                                     double e_min, double e_max, double eps_star,
                                                     const WindowSpec& spec) {
    const std::size_t n = static_cast<std::size_t>(energies.size());
    if (n == 0) throw EmptySelectionError("select_window_states: empty spectrum");
    std::vector<double> eps(n);
    for (std::size_t i = 0; i < n; ++i) eps[i] = normalized_energy(energies(static_cast<Eigen::Index>(i)), e_min, e_max);

    std::vector<std::size_t> out;
    if (spec.mode == WindowSpec::Mode::HalfWidth) {
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(eps[i] - eps_star) <= spec.half_width) out.push_back(i);
        }
        if (out.empty()) {
            throw EmptySelectionError("select_window_states: no eigenstate inside the window");
        }
        return out;
    }
    const std::size_t k = std::min(spec.count, n);
    if (k == 0) throw EmptySelectionError("select_window_states: requested zero states");
    // Expand a contiguous block around the insertion point of eps_star.
    std::size_t rhs = static_cast<std::size_t>(
        std::lower_bound(eps.begin(), eps.end(), eps_star) - eps.begin());
    std::size_t lhs = rhs;  // block is [lhs, rhs)
    while (rhs - lhs < k) {
        const bool can_left = lhs > 0;
        const bool can_right = rhs < n;
        if (can_left && can_right) {
            const double dl = std::abs(eps[lhs - 1] - eps_star);
            const double dr = std::abs(eps[rhs] - eps_star);
            if (dl <= dr) {
                --lhs;
            } else {
                ++rhs;
            }
        } else if (can_left) {
            --lhs;
        } else {
            ++rhs;
        }
    }
    out.resize(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = lhs + i;
    return out;
}

struct RStats {
    double mean = 0.0;
    std::size_t ratios = 0;       // number of r values averaged
    std::size_t merged_levels = 0;  // levels dropped as exact degeneracies
};

/// Mean ratio of consecutive level spacings, r = min(d_n, d_{n+1}) /
/// max(d_n, d_{n+1}).  Gaps below 1e-12 * (e_max - e_min) are treated as
/// exact degeneracies and merged before forming ratios.
inline RStats r_statistics(const Eigen::VectorXd& energies) {
    const std::size_t n = static_cast<std::size_t>(energies.size());
    if (n < 3) throw ParameterError("r_statistics: need at least three levels");
    for (std::size_t i = 1; i < n; ++i) {
        if (energies(static_cast<Eigen::Index>(i)) < energies(static_cast<Eigen::Index>(i - 1))) {
            throw ParameterError("r_statistics: energies must be ascending");
        }
    }
    const double scale = energies(static_cast<Eigen::Index>(n - 1)) - energies(0);
    const double cut = 1e-12 * scale;

    RStats stats;
    std::vector<double> levels;
    levels.reserve(n);
    levels.push_back(energies(0));
    for (std::size_t i = 1; i < n; ++i) {
        const double e = energies(static_cast<Eigen::Index>(i));
        if (e - levels.back() <= cut) {
            stats.merged_levels += 1;
        } else {
            levels.push_back(e);
        }
    }
    if (levels.size() < 3) {
        throw ParameterError("r_statistics: fewer than three distinct levels");
    }
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 2; i < levels.size(); ++i) {
        const double d1 = levels[i - 1] - levels[i - 2];
        const double d2 = levels[i] - levels[i - 1];
        acc += std::min(d1, d2) / std::max(d1, d2);
        cnt += 1;
    }
    stats.mean = acc / static_cast<double>(cnt);
    stats.ratios = cnt;
    return stats;
}

/// argmax_n |<E_n|psi0>| with the signed coefficient; ties -> lower index.
inline std::pair<std::size_t, double> dominant_eigenstate_overlap(const Eigen::VectorXd& psi0,
                                                                  const EigenSolution& sol) {
    if (!sol.has_vectors()) {
        throw ParameterError("dominant_eigenstate_overlap: eigenvectors not available");
    }
    if (psi0.size() != sol.vectors.rows()) {
        throw ParameterError("dominant_eigenstate_overlap: dimension mismatch");
    }
    Eigen::VectorXd c = sol.vectors.transpose() * psi0;
    std::size_t best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (std::abs(c(i)) > best_abs) {
            best_abs = std::abs(c(i));
            best = static_cast<std::size_t>(i);
        }
    }
    return {best, c(static_cast<Eigen::Index>(best))};
}

struct FockExpansion {
    std::vector<std::pair<double, FockState>> components;  // sorted by |a| descending
    bool clipped = false;
};

/// Leading Fock components of one eigenstate.
inline FockExpansion eigenstate_fock_expansion(const EigenSolution& sol, const SectorBasis& basis,
                                               std::size_t index, std::size_t top_k) {
    if (!sol.has_vectors()) {
        throw ParameterError("eigenstate_fock_expansion: eigenvectors not available");
    }
    if (index >= static_cast<std::size_t>(sol.vectors.cols())) {
        throw ParameterError("eigenstate_fock_expansion: eigenstate index out of range");
    }
    const std::size_t dim = static_cast<std::size_t>(sol.vectors.rows());
    FockExpansion out;
    if (top_k > dim) {
        out.clipped = true;
        top_k = dim;
    }
    std::vector<std::size_t> order(dim);
    for (std::size_t i = 0; i < dim; ++i) order[i] = i;
    const auto col = sol.vectors.col(static_cast<Eigen::Index>(index));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(col(static_cast<Eigen::Index>(a))) >
               std::abs(col(static_cast<Eigen::Index>(b)));
    });
    out.components.reserve(top_k);
    for (std::size_t i = 0; i < top_k; ++i) {
        out.components.emplace_back(col(static_cast<Eigen::Index>(order[i])),
                                    basis.state(order[i]));
    }
    return out;
}

}  // namespace stark

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stark/errors.hpp"
#include "stark/hamiltonian.hpp"
#include "stark/lanczos.hpp"
#include "stark/observables.hpp"
#include "stark/rng.hpp"

namespace stark {

struct TimeGrid {
    std::vector<double> points;

    /// Logarithmically spaced grid from t_min to t_max, optionally prefixed
    /// with t = 0.
    static TimeGrid log_spaced(double t_min, double t_max, int n, bool include_zero = true) {
        if (!(t_min > 0.0) || !(t_max > t_min) || n < 2) {
            throw ParameterError("TimeGrid: need 0 < t_min < t_max and n >= 2");
        }
        TimeGrid grid;
        if (include_zero) grid.points.push_back(0.0);
        const double l0 = std::log(t_min);
        const double l1 = std::log(t_max);
        for (int i = 0; i < n; ++i) {
            grid.points.push_back(std::exp(l0 + (l1 - l0) * i / static_cast<double>(n - 1)));
        }
        grid.validate();
        return grid;
    }

    void validate() const {
        if (points.empty() || points.front() < 0.0) {
            throw ParameterError("TimeGrid: must start at t >= 0");
        }
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (points[i] <= points[i - 1]) {
                throw ParameterError("TimeGrid: points must be strictly increasing");
            }
        }
    }

    std::size_t size() const { return points.size(); }
    bool operator==(const TimeGrid& other) const { return points == other.points; }
};

struct TimeSeriesMeta {
    std::string observable;
    std::string model;
    std::string pattern;
    int num_sites = 0;
    double gamma = 0.0;
    double interaction = 0.0;  // U or g depending on the model
    double alpha = 0.0;
    std::uint64_t seed = 0;
    int krylov_dim = 0;
    double krylov_tol = 0.0;
    int averaged_members = 1;
};

struct TimeSeries {
    TimeGrid grid;
    std::vector<double> values;
    TimeSeriesMeta meta;
};

struct KrylovOptions {
    int subspace_dim = 30;
    double tol = 1e-10;  // local error budget per unit time
};

namespace detail {

struct LanczosFactorization {
    Eigen::MatrixXcd basis;   // n x k orthonormal columns
    Eigen::VectorXd alpha;    // k
    Eigen::VectorXd beta;     // k-1 couplings (+ residual coupling separately)
    double residual_beta = 0.0;
    int k = 0;
};

inline LanczosFactorization lanczos_factorize(const SparseHamiltonian& ham,
                                              const Eigen::VectorXcd& v0, int m) {
    const Eigen::Index n = v0.size();
    LanczosFactorization fac;
    fac.basis.resize(n, m);
    fac.alpha.resize(m);
    fac.beta.resize(m > 1 ? m - 1 : 0);
    Eigen::VectorXcd v = v0;
    Eigen::VectorXcd w(n);
    for (int j = 0; j < m; ++j) {
        fac.basis.col(j) = v;
        ham.apply(v, w);
        if (j > 0) w -= fac.beta(j - 1) * fac.basis.col(j - 1);
        const double a = std::real(fac.basis.col(j).dot(w));
        fac.alpha(j) = a;
        w -= a * v;
        // full two-pass reorthogonalization keeps the small projected problem
        // accurate at tight tolerances
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) {
                const std::complex<double> c = fac.basis.col(i).dot(w);
                w -= c * fac.basis.col(i);
            }
        }
        const double b = w.norm();
        fac.k = j + 1;
        if (b < 1e-13) {
            fac.residual_beta = 0.0;
            return fac;
        }
        if (j + 1 < m) {
            fac.beta(j) = b;
            v = w / b;
        } else {
            fac.residual_beta = b;
        }
    }
    return fac;
}

// phi = exp(-i T dt) e_1 for the k x k tridiagonal T.
inline Eigen::VectorXcd tridiag_expm_e1(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                                        int k, double dt) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) t(i, i) = alpha(i);
    for (int i = 0; i + 1 < k; ++i) {
        t(i, i + 1) = beta(i);
        t(i + 1, i) = beta(i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXcd phase(k);
    for (int i = 0; i < k; ++i) {
        phase(i) = std::exp(std::complex<double>(0.0, -es.eigenvalues()(i) * dt));
    }
    const Eigen::VectorXd first_row = es.eigenvectors().row(0).transpose();
    return es.eigenvectors() * phase.cwiseProduct(first_row.cast<std::complex<double>>());
}

}  // namespace detail

/// One Krylov (Lanczos) step of exp(-i H dt) psi with adaptive internal
/// subdivision.  The local error estimate per substep h is
/// beta_{m+1} |[exp(-i T h)]_{m,1}|, accepted when below tol * h.
inline Eigen::VectorXcd krylov_propagate(const SparseHamiltonian& ham, const Eigen::VectorXcd& psi,
                                         double dt, int subspace_dim = 30, double tol = 1e-10) {
    if (subspace_dim < 8) {
        throw ParameterError("krylov_propagate: subspace dimension must be >= 8");
    }
    if (static_cast<std::size_t>(psi.size()) != ham.dimension()) {
        throw ParameterError("krylov_propagate: vector length does not match basis dimension");
    }
    detail::check_normalized(psi.norm(), "krylov_propagate");
    if (dt == 0.0) return psi;

    const int m = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(subspace_dim), ham.dimension()));
    Eigen::VectorXcd state = psi;
    double remaining = dt;
    double h = dt;
    while (remaining > 0.0) {
        h = std::min(h, remaining);
        const double norm = state.norm();
        const Eigen::VectorXcd unit = state / norm;
        const auto fac = detail::lanczos_factorize(ham, unit, m);
        bool accepted = false;
        while (!accepted) {
            const Eigen::VectorXcd phi = detail::tridiag_expm_e1(fac.alpha, fac.beta, fac.k, h);
            const double err = fac.residual_beta * std::abs(phi(fac.k - 1));
            if (err <= tol * h || fac.residual_beta == 0.0) {
                state = norm * (fac.basis.leftCols(fac.k) * phi);
                remaining -= h;
                accepted = true;
                // allow the step to grow back after transients
                h *= 1.5;
            } else {
                h *= 0.5;
                if (h < 1e-12 * std::max(1.0, dt)) {
                    throw NumericalError(
                        "krylov_propagate: step collapsed below 1e-12 (m = " + std::to_string(m) +
                        ", residual beta = " + std::to_string(fac.residual_beta) + ")");
                }
            }
        }
    }
    return state;
}

struct InitialStateSample {
    std::vector<InitialPattern> patterns;
    std::vector<double> epsilons;  // recomputed normalized energies, same order
    bool exhausted = false;        // fewer qualifying states than requested
    double e_min = 0.0;
    double e_max = 0.0;
};

/// Uniformly samples `count` distinct half-filling 0/1 product states whose
/// normalized diagonal energy lies within [eps_star - w, eps_star + w].
/// Qualifying patterns are enumerated exactly, then a seeded partial shuffle
/// picks the sample; if fewer qualify than requested, all are returned with
/// the exhausted flag set.
inline InitialStateSample sample_initial_states(const SectorBasis& basis,
                                                const SparseHamiltonian& ham, double eps_star,
                                                double half_width, std::size_t count,
                                                std::uint64_t seed) {
    if (basis.num_sites() % 2 != 0 || basis.num_particles() != basis.num_sites() / 2) {
        throw ParameterError("sample_initial_states: basis must be the half-filling sector");
    }
    if (&ham.basis() != &basis) {
        if (ham.basis().num_sites() != basis.num_sites() ||
            ham.basis().num_particles() != basis.num_particles() ||
            ham.basis().max_occ() != basis.max_occ()) {
            throw ParameterError("sample_initial_states: Hamiltonian built on a different sector");
        }
    }
    const SpectralBounds bounds = lanczos_bounds(ham);
    if (!(bounds.e_max > bounds.e_min)) {
        throw ParameterError("sample_initial_states: degenerate spectral edges");
    }
    std::vector<std::size_t> qualifying;
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        const FockState& s = basis.state(k);
        bool zero_one = true;
        for (int n : s) {
            if (n > 1) {
                zero_one = false;
                break;
            }
        }
        if (!zero_one) continue;
        const double eps = (ham.diagonal(k) - bounds.e_min) / (bounds.e_max - bounds.e_min);
        if (std::abs(eps - eps_star) <= half_width) qualifying.push_back(k);
    }

    InitialStateSample out;
    out.e_min = bounds.e_min;
    out.e_max = bounds.e_max;
    std::vector<std::size_t> chosen;
    if (qualifying.size() <= count) {
        out.exhausted = qualifying.size() < count;
        chosen = qualifying;
    } else {
        auto eng = rng::engine(seed, "initial-states");
        for (std::size_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, qualifying.size() - 1);
            std::swap(qualifying[i], qualifying[pick(eng)]);
        }
        chosen.assign(qualifying.begin(), qualifying.begin() + static_cast<std::ptrdiff_t>(count));
        std::sort(chosen.begin(), chosen.end());
    }
    for (std::size_t k : chosen) {
        out.patterns.emplace_back(basis.state(k));
        out.epsilons.push_back((ham.diagonal(k) - bounds.e_min) / (bounds.e_max - bounds.e_min));
    }
    return out;
}

/// Propagates a product state once through the grid, evaluating the requested
/// observables at every point.  Tags: EE (half-chain), PE, imbalance,
/// occupations (one series per site, keyed "n0", "n1", ...).
inline std::map<std::string, TimeSeries> evolve_observables(const SparseHamiltonian& ham,
                                                            const InitialPattern& psi0,
                                                            const TimeGrid& grid,
                                                            const std::vector<std::string>& tags,
                                                            const KrylovOptions& krylov = {}) {
    grid.validate();
    const SectorBasis& basis = ham.basis();
    bool want_ee = false, want_pe = false, want_imb = false, want_occ = false;
    for (const auto& t : tags) {
        if (t == "EE") {
            want_ee = true;
        } else if (t == "PE") {
            want_pe = true;
        } else if (t == "imbalance") {
            want_imb = true;
        } else if (t == "occupations") {
            want_occ = true;
        } else {
            throw ParameterError("evolve_observables: unknown observable tag '" + t + "'");
        }
    }

    const int L = basis.num_sites();
    const int cut = L / 2;
    std::unique_ptr<BipartitionPlan> plan;
    if (want_ee) plan = std::make_unique<BipartitionPlan>(basis, cut);

    const std::size_t idx0 = basis.index_of(psi0.occupations);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dimension()));
    psi(static_cast<Eigen::Index>(idx0)) = 1.0;

    TimeSeriesMeta base;
    base.model = model_name(ham.params().kind);
    base.pattern = psi0.label();
    base.num_sites = L;
    base.gamma = ham.params().potential.gamma;
    base.alpha = ham.params().potential.alpha;
    base.interaction = ham.params().kind == ModelKind::BoseHubbard ? ham.params().interaction
                                                                   : ham.params().coupling;
    base.krylov_dim = krylov.subspace_dim;
    base.krylov_tol = krylov.tol;

    std::map<std::string, TimeSeries> out;
    auto series_for = [&](const std::string& tag) -> TimeSeries& {
        auto [it, inserted] = out.try_emplace(tag);
        if (inserted) {
            it->second.grid = grid;
            it->second.meta = base;
            it->second.meta.observable = tag;
            it->second.values.reserve(grid.size());
        }
        return it->second;
    };
    if (want_ee) series_for("EE");
    if (want_pe) series_for("PE");
    if (want_imb) series_for("imbalance");
    if (want_occ) {
        for (int j = 0; j < L; ++j) series_for("n" + std::to_string(j));
    }

    double t_now = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.points[k];
        if (t > t_now) {
            psi = krylov_propagate(ham, psi, t - t_now, krylov.subspace_dim, krylov.tol);
            t_now = t;
        }
        if (want_ee) series_for("EE").values.push_back(plan->entropy(psi));
        if (want_pe) series_for("PE").values.push_back(participation_entropy(psi));
        if (want_imb || want_occ) {
            if (want_imb) series_for("imbalance").values.push_back(imbalance(psi, psi0, basis));
            if (want_occ) {
                const Eigen::VectorXd occ = site_occupations(psi, basis);
                for (int j = 0; j < L; ++j) {
                    series_for("n" + std::to_string(j)).values.push_back(occ(j));
                }
            }
        }
    }
    return out;
}

/// Pointwise arithmetic mean of series sharing a grid and observable tag.
inline TimeSeries average_over_initial_states(const std::vector<TimeSeries>& members) {
    if (members.empty()) {
        throw ParameterError("average_over_initial_states: no series given");
    }
    const TimeSeries& first = members.front();
    for (const TimeSeries& s : members) {
        if (!(s.grid == first.grid)) {
            throw ParameterError("average_over_initial_states: grids differ");
        }
        if (s.meta.observable != first.meta.observable) {
            throw ParameterError("average_over_initial_states: observable tags differ");
        }
        if (s.values.size() != first.values.size()) {
            throw ParameterError("average_over_initial_states: series lengths differ");
        }
    }
    TimeSeries avg;
    avg.grid = first.grid;
    avg.meta = first.meta;
    avg.meta.pattern = "average";
    avg.meta.averaged_members = static_cast<int>(members.size());
    avg.values.assign(first.values.size(), 0.0);
    for (const TimeSeries& s : members) {
        for (std::size_t i = 0; i < s.values.size(); ++i) avg.values[i] += s.values[i];
    }
    for (double& v : avg.values) v /= static_cast<double>(members.size());
    return avg;
}

/// Centered moving average over grid indices; edge windows shrink
/// symmetrically; window = 1 is the identity.
inline TimeSeries smooth_series(const TimeSeries& series, int window) {
    if (window < 1 || window % 2 == 0) {
        throw ParameterError("smooth_series: window must be odd and >= 1");
    }
    TimeSeries out = series;
    const int n = static_cast<int>(series.values.size());
    const int half = window / 2;
    for (int i = 0; i < n; ++i) {
        const int reach = std::min({half, i, n - 1 - i});
        double acc = 0.0;
        for (int k = i - reach; k <= i + reach; ++k) acc += series.values[static_cast<std::size_t>(k)];
        out.values[static_cast<std::size_t>(i)] = acc / static_cast<double>(2 * reach + 1);
    }
    return out;
}

}  // namespace stark

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stark/errors.hpp"

namespace stark {

struct CollapsePoint {
    int L = 0;
    double gamma = 0.0;
    double y = 0.0;  // normalized observable (EE / Page or PE / ln N)
};

struct SearchBox {
    double lo = 0.0;
    double hi = 1.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct CollapseResult {
    std::string ansatz;
    double gamma_c = std::numeric_limits<double>::quiet_NaN();
    double nu = std::numeric_limits<double>::quiet_NaN();
    double gamma0 = std::numeric_limits<double>::quiet_NaN();
    double gamma1 = std::numeric_limits<double>::quiet_NaN();
    double b_minus = std::numeric_limits<double>::quiet_NaN();
    double b_plus = std::numeric_limits<double>::quiet_NaN();
    double cost = std::numeric_limits<double>::infinity();
    long grid_evaluations = 0;
    long refine_evaluations = 0;
    // collapsed coordinates (scaling variable, y, L, gamma) at the optimum
    std::vector<std::array<double, 4>> collapsed;
};

/// Cost of a collapse: sum of absolute consecutive differences of the values
/// (already ordered by the scaling variable) divided by their range, minus 1.
/// Zero for monotone sequences.
inline double cost_function(const std::vector<double>& ordered_values) {
    if (ordered_values.size() < 2) {
        throw ParameterError("cost_function: need at least two values");
    }
    const auto [mn, mx] = std::minmax_element(ordered_values.begin(), ordered_values.end());
    if (*mx == *mn) {
        throw ParameterError("cost_function: constant data has undefined cost");
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < ordered_values.size(); ++i) {
        acc += std::abs(ordered_values[i] - ordered_values[i - 1]);
    }
    return acc / (*mx - *mn) - 1.0;
}

namespace detail {

struct ScaledPoint {
    double u;
    double y;
    int L;
    double gamma;
};

// Sort by scaling variable; ties broken by (L, gamma) ascending.
inline void sort_scaled(std::vector<ScaledPoint>& pts) {
    std::sort(pts.begin(), pts.end(), [](const ScaledPoint& a, const ScaledPoint& b) {
        if (a.u != b.u) return a.u < b.u;
        if (a.L != b.L) return a.L < b.L;
        return a.gamma < b.gamma;
    });
}

inline double cost_of_scaled(std::vector<ScaledPoint>& pts) {
    sort_scaled(pts);
    std::vector<double> ys(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) ys[i] = pts[i].y;
    return cost_function(ys);
}

inline void validate_collapse_input(const std::vector<CollapsePoint>& data) {
    std::set<int> sizes;
    std::map<int, std::set<double>> gammas;
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();
    for (const auto& p : data) {
        sizes.insert(p.L);
        gammas[p.L].insert(p.gamma);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    if (sizes.size() < 2) {
        throw ParameterError("collapse: need at least two distinct system sizes");
    }
    for (const auto& [L, gs] : gammas) {
        if (gs.size() < 5) {
            throw ParameterError("collapse: need at least five gamma values per system size");
        }
    }
    if (!(ymax > ymin)) {
        throw ParameterError("collapse: degenerate data (all y equal)");
    }
}

// Deterministic Nelder-Mead on a box; evaluations outside the box return
// +infinity so the optimum stays inside.
inline std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
    const std::vector<double>& step, int max_iter, long& eval_counter) {
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> simplex;
    std::vector<double> fvals;
    simplex.push_back(start);
    for (std::size_t d = 0; d < dim; ++d) {
        auto v = start;
        v[d] += step[d];
        simplex.push_back(v);
    }
    for (const auto& v : simplex) {
        fvals.push_back(f(v));
        ++eval_counter;
    }
    auto order = [&]() {
        std::vector<std::size_t> idx(simplex.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (std::size_t i : idx) {
            s2.push_back(simplex[i]);
            f2.push_back(fvals[i]);
        }
        simplex.swap(s2);
        fvals.swap(f2);
    };
    order();
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fvals.back() - fvals.front()) < 1e-12) break;
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i + 1 < simplex.size(); ++i) {
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);
        auto blend = [&](double coef) {
            std::vector<double> v(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                v[d] = centroid[d] + coef * (simplex.back()[d] - centroid[d]);
            }
            return v;
        };
        const auto reflected = blend(-1.0);
        const double fr = f(reflected);
        ++eval_counter;
        if (fr < fvals.front()) {
            const auto expanded = blend(-2.0);
            const double fe = f(expanded);
            ++eval_counter;
            simplex.back() = fe < fr ? expanded : reflected;
            fvals.back() = std::min(fe, fr);
        } else if (fr < fvals[fvals.size() - 2]) {
            simplex.back() = reflected;
            fvals.back() = fr;
        } else {
            const auto contracted = blend(0.5);
            const double fc = f(contracted);
            ++eval_counter;
            if (fc < fvals.back()) {
                simplex.back() = contracted;
                fvals.back() = fc;
            } else {
                for (std::size_t i = 1; i < simplex.size(); ++i) {
                    for (std::size_t d = 0; d < dim; ++d) {
                        simplex[i][d] = simplex.front()[d] + 0.5 * (simplex[i][d] - simplex.front()[d]);
                    }
                    fvals[i] = f(simplex[i]);
                    ++eval_counter;
                }
            }
        }
        order();
    }
    return {simplex.front(), fvals.front()};
}

struct GridAxis {
    double lo;
    double hi;
    int n;
    double at(int i) const {
        return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
};

// Exhaustive coarse grid followed by simplex refinement from the best cells.
inline std::pair<std::vector<double>, double> grid_then_refine(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<GridAxis>& axes,
    long& grid_evals, long& refine_evals, int refine_from = 5) {
    const std::size_t dim = axes.size();
    std::vector<int> idx(dim, 0);
    std::vector<std::pair<double, std::vector<double>>> cells;
    bool done = false;
    while (!done) {
        std::vector<double> x(dim);
        for (std::size_t d = 0; d < dim; ++d) x[d] = axes[d].at(idx[d]);
        const double fx = f(x);
        ++grid_evals;
        cells.emplace_back(fx, x);
        // odometer increment
        std::size_t d = 0;
        while (d < dim) {
            if (++idx[d] < axes[d].n) break;
            idx[d] = 0;
            ++d;
        }
        done = d == dim;
    }
    std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;  // ties -> lowest parameter values
    });

    std::vector<double> best_x = cells.front().second;
    double best_f = cells.front().first;
    const int tries = std::min<int>(refine_from, static_cast<int>(cells.size()));
    for (int t = 0; t < tries; ++t) {
        std::vector<double> step(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            step[d] = (axes[d].hi - axes[d].lo) / std::max(1, axes[d].n - 1);
            if (step[d] == 0.0) step[d] = 1e-3;
        }
        auto [x, fx] = nelder_mead(f, cells[static_cast<std::size_t>(t)].second, step, 200,
                                   refine_evals);
        if (fx < best_f || (fx == best_f && x < best_x)) {
            best_f = fx;
            best_x = x;
        }
    }
    return {best_x, best_f};
}

}  // namespace detail

/// Power-law collapse under y = f[L^{1/nu} (gamma - gamma_c)]; minimizes the
/// cost function over (gamma_c, nu) by exhaustive grid search plus simplex
/// refinement from the best cells.  Deterministic.
inline CollapseResult powerlaw_collapse(const std::vector<CollapsePoint>& data,
                                        const SearchBox& gamma_c_box, const SearchBox& nu_box,
                                        int grid_points = 60) {
    detail::validate_collapse_input(data);
    if (!(nu_box.lo > 0.0)) {
        throw ParameterError("powerlaw_collapse: nu search box must be positive");
    }
    auto scaled = [&](double gamma_c, double nu) {
        std::vector<detail::ScaledPoint> pts;
        pts.reserve(data.size());
        for (const auto& p : data) {
            const double u = std::pow(static_cast<double>(p.L), 1.0 / nu) * (p.gamma - gamma_c);
            pts.push_back({u, p.y, p.L, p.gamma});
        }
        return pts;
    };
    auto objective = [&](const std::vector<double>& x) {
        if (!gamma_c_box.contains(x[0]) || !nu_box.contains(x[1])) {
            return std::numeric_limits<double>::infinity();
        }
        auto pts = scaled(x[0], x[1]);
        return detail::cost_of_scaled(pts);
    };

    CollapseResult result;
    result.ansatz = "powerlaw";
    std::vector<detail::GridAxis> axes = {{gamma_c_box.lo, gamma_c_box.hi, grid_points},
                                          {nu_box.lo, nu_box.hi, grid_points}};
    auto [x, fx] = detail::grid_then_refine(objective, axes, result.grid_evaluations,
                                            result.refine_evaluations);
    result.gamma_c = x[0];
    result.nu = x[1];
    result.cost = fx;
    auto pts = scaled(x[0], x[1]);
    detail::sort_scaled(pts);
    for (const auto& p : pts) result.collapsed.push_back({p.u, p.y, static_cast<double>(p.L), p.gamma});
    return result;
}

struct BktOptions {
    bool equal_b = true;          // b_- = b_+
    bool linear_crossing = false;  // gamma_c = gamma0 + gamma1 * L
    SearchBox gamma0{0.3, 2.0};
    SearchBox gamma1{-0.2, 0.2};
    SearchBox b{0.1, 10.0};
    int grid_points = 50;
};

/// BKT collapse with scaling variable sgn(gamma - gamma_c(L)) * L / xi,
/// xi = exp(b_pm / sqrt|gamma - gamma_c(L)|); points closer than 1e-6 to the
/// crossing are excluded (divergent correlation length).
inline CollapseResult bkt_collapse(const std::vector<CollapsePoint>& data,
                                   const BktOptions& opt = {}) {
    detail::validate_collapse_input(data);
    // parameter layout: [gamma0, (gamma1), b_minus, (b_plus)]
    const bool has_g1 = opt.linear_crossing;
    const bool has_bp = !opt.equal_b;

    auto scaled = [&](double gamma0, double gamma1, double bm, double bp) {
        std::vector<detail::ScaledPoint> pts;
        pts.reserve(data.size());
        for (const auto& p : data) {
            const double gc = gamma0 + gamma1 * static_cast<double>(p.L);
            const double d = p.gamma - gc;
            if (std::abs(d) < 1e-6) continue;
            const double b = d < 0.0 ? bm : bp;
            const double xi = std::exp(b / std::sqrt(std::abs(d)));
            const double u = (d < 0.0 ? -1.0 : 1.0) * static_cast<double>(p.L) / xi;
            pts.push_back({u, p.y, p.L, p.gamma});
        }
        return pts;
    };
    auto unpack = [&](const std::vector<double>& x) {
        const double g0 = x[0];
        const double g1 = has_g1 ? x[1] : 0.0;
        const double bm = x[has_g1 ? 2 : 1];
        const double bp = has_bp ? x[has_g1 ? 3 : 2] : bm;
        return std::array<double, 4>{g0, g1, bm, bp};
    };
    auto objective = [&](const std::vector<double>& x) {
        const auto [g0, g1, bm, bp] = unpack(x);
        if (!opt.gamma0.contains(g0) || !opt.b.contains(bm) || !opt.b.contains(bp) ||
            (has_g1 && !opt.gamma1.contains(g1))) {
            return std::numeric_limits<double>::infinity();
        }
        auto pts = scaled(g0, g1, bm, bp);
        if (pts.size() < 2) return std::numeric_limits<double>::infinity();
        return detail::cost_of_scaled(pts);
    };

    std::vector<detail::GridAxis> axes;
    axes.push_back({opt.gamma0.lo, opt.gamma0.hi, opt.grid_points});
    if (has_g1) axes.push_back({opt.gamma1.lo, opt.gamma1.hi, opt.grid_points});
    axes.push_back({opt.b.lo, opt.b.hi, opt.grid_points});
    if (has_bp) axes.push_back({opt.b.lo, opt.b.hi, opt.grid_points});

    CollapseResult result;
    result.ansatz = std::string("bkt_") + (opt.equal_b ? "equal_b" : "unequal_b") +
                    (has_g1 ? "_linear_crossing" : "_fixed_crossing");
    auto [x, fx] = detail::grid_then_refine(objective, axes, result.grid_evaluations,
                                            result.refine_evaluations);
    const auto [g0, g1, bm, bp] = unpack(x);
    result.gamma0 = g0;
    result.gamma1 = g1;
    result.gamma_c = g0;  // crossing at L -> 0 intercept; per-L value is g0 + g1 L
    result.b_minus = bm;
    result.b_plus = bp;
    result.cost = fx;
    auto pts = scaled(g0, g1, bm, bp);
    detail::sort_scaled(pts);
    for (const auto& p : pts) result.collapsed.push_back({p.u, p.y, static_cast<double>(p.L), p.gamma});
    return result;
}

struct PowerDecayFit {
    double exponent = 0.0;   // xi in I(t) ~ t^-xi
    double amplitude = 0.0;
    double residual_rms = 0.0;  // RMS of log-residuals
    std::size_t points_used = 0;
};

/// Least-squares line on (ln t, ln I) for t >= t_min; non-positive values are
/// dropped.  xi = -slope.
inline PowerDecayFit fit_power_decay(const std::vector<double>& times,
                                     const std::vector<double>& values, double t_min) {
    if (times.size() != values.size()) {
        throw ParameterError("fit_power_decay: time/value length mismatch");
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= t_min && times[i] > 0.0 && values[i] > 0.0) {
            lx.push_back(std::log(times[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    if (lx.size() < 10) {
        throw ParameterError("fit_power_decay: fewer than 10 usable points in the fit window");
    }
    const double n = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) {
        throw ParameterError("fit_power_decay: degenerate time grid");
    }
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (slope * lx[i] + intercept);
        sse += r * r;
    }
    PowerDecayFit fit;
    fit.exponent = -slope;
    fit.amplitude = std::exp(intercept);
    fit.residual_rms = std::sqrt(sse / n);
    fit.points_used = lx.size();
    return fit;
}

struct CriticalExponentFit {
    double gamma_c = 0.0;
    double nu = 0.0;
    double amplitude = 0.0;
    double xi_bar = 0.0;
    double residual_rms = 0.0;
};

/// Piecewise fit xi(gamma) = A |gamma - gamma_c|^nu + xi_bar below gamma_c
/// and xi_bar above, with xi_bar fixed first as the mean over the plateau
/// set.  The amplitude is profiled out by linear least squares at each
/// (gamma_c, nu).
inline CriticalExponentFit fit_critical_exponent(const std::vector<std::pair<double, double>>& points,
                                                 const SearchBox& gamma_c_box,
                                                 const SearchBox& nu_box,
                                                 const std::vector<double>& plateau_gammas,
                                                 int grid_points = 60) {
    if (points.size() < 6) {
        throw ParameterError("fit_critical_exponent: need at least six (gamma, xi) points");
    }
    if (!(nu_box.lo > 0.0)) {
        throw ParameterError("fit_critical_exponent: nu search box must be positive");
    }
    double xi_bar = 0.0;
    std::size_t plateau_n = 0;
    for (const auto& [g, xi] : points) {
        for (double pg : plateau_gammas) {
            if (std::abs(g - pg) < 1e-9) {
                xi_bar += xi;
                ++plateau_n;
                break;
            }
        }
    }
    if (plateau_n == 0) {
        throw ParameterError("fit_critical_exponent: plateau set matches no data point");
    }
    xi_bar /= static_cast<double>(plateau_n);

    struct Eval {
        double sse;
        double amplitude;
    };
    auto evaluate = [&](double gamma_c, double nu) -> Eval {
        double sww = 0.0, swr = 0.0;
        for (const auto& [g, xi] : points) {
            if (g < gamma_c) {
                const double w = std::pow(std::abs(g - gamma_c), nu);
                sww += w * w;
                swr += w * (xi - xi_bar);
            }
        }
        const double amp = sww > 0.0 ? swr / sww : 0.0;
        double sse = 0.0;
        for (const auto& [g, xi] : points) {
            const double model =
                g < gamma_c ? amp * std::pow(std::abs(g - gamma_c), nu) + xi_bar : xi_bar;
            const double r = xi - model;
            sse += r * r;
        }
        return {sse, amp};
    };
    auto objective = [&](const std::vector<double>& x) {
        if (!gamma_c_box.contains(x[0]) || !nu_box.contains(x[1])) {
            return std::numeric_limits<double>::infinity();
        }
        return evaluate(x[0], x[1]).sse;
    };
    long ge = 0, re = 0;
    std::vector<detail::GridAxis> axes = {{gamma_c_box.lo, gamma_c_box.hi, grid_points},
                                          {nu_box.lo, nu_box.hi, grid_points}};
    auto [x, fx] = detail::grid_then_refine(objective, axes, ge, re);
    const Eval best = evaluate(x[0], x[1]);

    std::size_t below = 0;
    for (const auto& [g, xi] : points) {
        if (g < x[0]) ++below;
    }
    double spread = 0.0;
    for (const auto& [g, xi] : points) spread = std::max(spread, std::abs(xi - xi_bar));
    if (below < 2 || best.amplitude <= 0.0 || best.amplitude * 1e8 < spread || spread == 0.0) {
        throw NumericalError("fit_critical_exponent: no resolvable critical branch (all-plateau data?)");
    }
    CriticalExponentFit fit;
    fit.gamma_c = x[0];
    fit.nu = x[1];
    fit.amplitude = best.amplitude;
    fit.xi_bar = xi_bar;
    fit.residual_rms = std::sqrt(fx / static_cast<double>(points.size()));
    return fit;
}

}  // namespace stark

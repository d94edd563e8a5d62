#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "stark/errors.hpp"
#include "stark/hamiltonian.hpp"
#include "stark/rng.hpp"

namespace stark {

/// Validated experiment description.  Parsed from a JSON file; unknown keys
/// anywhere are hard errors so sweep typos cannot silently waste compute.
struct RunConfig {
    ModelKind model = ModelKind::BoseHubbard;
    std::vector<std::string> tasks;
    std::uint64_t seed = 0;
    std::string out_dir = "runs/out";
    int workers = 1;

    // parameter grid
    std::vector<int> sizes;               // L
    std::vector<double> gammas;           // linear-field strengths
    std::vector<double> couplings{4.0};   // U (Bose-Hubbard) or g (XX)
    std::vector<double> alphas{2.0};      // curvature
    std::optional<int> max_occ;           // bosons only; default N = L/2

    // eigenstate window
    std::string window_mode = "half_width";  // or nearest_count
    double window_half_width = 0.05;
    int window_count = 500;

    // density of states
    int dos_moments = 512;
    int dos_probes = 32;
    int dos_bins = 101;

    // Page-value sampling
    std::size_t page_samples = 100000;
    std::string page_ensemble = "real";
    std::string page_normalization = "sampled";  // or spin closed form: "formula"

    // quench dynamics
    double t_min = 0.1;
    double t_max = 1000.0;
    int time_points = 200;
    int initial_states = 50;
    std::string initial_state_mode = "sampled";  // or "cdw"
    int krylov_dim = 30;
    double krylov_tol = 1e-10;
    int smooth_window = 9;
    std::vector<std::string> observables{"EE", "PE", "imbalance"};
    bool save_trajectories = false;

    // fits
    double fit_t_min = 200.0;
    double plateau_gamma_min = 3.6;
    std::vector<std::string> collapse_ansatz{"powerlaw"};
    std::string collapse_crossing = "fixed";  // "linear" enables gamma_c = g0 + g1 L
    std::vector<std::string> collapse_observables{"EE", "PE"};
    double box_gamma_c_lo = 1.0, box_gamma_c_hi = 6.0;
    double box_nu_lo = 0.3, box_nu_hi = 3.0;
    double box_b_lo = 0.1, box_b_hi = 10.0;
    double box_gamma1_lo = -0.2, box_gamma1_hi = 0.2;

    bool dump_matrix = false;

    int sector_particles(int L) const { return L / 2; }
    int sector_cap(int L) const {
        if (model == ModelKind::AllToAllXX) return 1;
        return max_occ.value_or(sector_particles(L));
    }

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    void validate() const;

    /// Hash of the canonical JSON form; stable under key reordering because
    /// nlohmann::json stores object keys sorted.
    std::string hash() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(rng::fnv1a(to_json().dump())));
        return buf;
    }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace detail

inline nlohmann::json RunConfig::to_json() const {
    nlohmann::json grid{{"L", sizes}, {"gamma", gammas}, {"alpha", alphas}};
    if (model == ModelKind::BoseHubbard) {
        grid["U"] = couplings;
        if (max_occ) grid["max_occ"] = *max_occ;
    } else {
        grid["g"] = couplings;
    }
    return nlohmann::json{
        {"model", model_name(model)},
        {"tasks", tasks},
        {"seed", seed},
        {"out", out_dir},
        {"workers", workers},
        {"grid", grid},
        {"window",
         {{"mode", window_mode}, {"half_width", window_half_width}, {"count", window_count}}},
        {"dos", {{"moments", dos_moments}, {"probes", dos_probes}, {"bins", dos_bins}}},
        {"page",
         {{"samples", page_samples},
          {"ensemble", page_ensemble},
          {"normalization", page_normalization}}},
        {"dynamics",
         {{"t_min", t_min},
          {"t_max", t_max},
          {"points", time_points},
          {"initial_states", initial_states},
          {"initial_state_mode", initial_state_mode},
          {"krylov_dim", krylov_dim},
          {"krylov_tol", krylov_tol},
          {"smooth_window", smooth_window},
          {"observables", observables},
          {"save_trajectories", save_trajectories}}},
        {"fits",
         {{"t_min", fit_t_min},
          {"plateau_gamma_min", plateau_gamma_min},
          {"collapse_ansatz", collapse_ansatz},
          {"crossing", collapse_crossing},
          {"observables", collapse_observables},
          {"gamma_c_box", {box_gamma_c_lo, box_gamma_c_hi}},
          {"nu_box", {box_nu_lo, box_nu_hi}},
          {"b_box", {box_b_lo, box_b_hi}},
          {"gamma1_box", {box_gamma1_lo, box_gamma1_hi}}}},
        {"dump_matrix", dump_matrix}};
}

inline RunConfig RunConfig::from_json(const nlohmann::json& j) {
    detail::check_keys(j, {"model", "tasks", "seed", "out", "workers", "grid", "window", "dos",
                           "page", "dynamics", "fits", "dump_matrix"},
                       "config");
    RunConfig c;
    const std::string model = detail::get_or<std::string>(j, "model", "bose_hubbard");
    if (model == "bose_hubbard") {
        c.model = ModelKind::BoseHubbard;
    } else if (model == "all_to_all_xx") {
        c.model = ModelKind::AllToAllXX;
    } else {
        throw ConfigError("config: unknown model '" + model + "'");
    }
    if (!j.contains("seed")) {
        throw ConfigError("config: 'seed' is required (no implicit entropy)");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
    c.tasks = detail::get_or<std::vector<std::string>>(j, "tasks", {});
    c.out_dir = detail::get_or<std::string>(j, "out", c.out_dir);
    c.workers = detail::get_or<int>(j, "workers", 1);
    c.dump_matrix = detail::get_or<bool>(j, "dump_matrix", false);

    if (!j.contains("grid")) throw ConfigError("config: 'grid' is required");
    const auto& grid = j.at("grid");
    detail::check_keys(grid, {"L", "gamma", "U", "g", "alpha", "max_occ"}, "grid");
    c.sizes = detail::get_or<std::vector<int>>(grid, "L", {});
    c.gammas = detail::get_or<std::vector<double>>(grid, "gamma", {});
    c.alphas = detail::get_or<std::vector<double>>(grid, "alpha", c.alphas);
    if (c.model == ModelKind::BoseHubbard) {
        if (grid.contains("g")) throw ConfigError("grid: 'g' is an XX-model key; use 'U'");
        c.couplings = detail::get_or<std::vector<double>>(grid, "U", {4.0});
        if (grid.contains("max_occ")) c.max_occ = grid.at("max_occ").get<int>();
    } else {
        if (grid.contains("U")) throw ConfigError("grid: 'U' is a Bose-Hubbard key; use 'g'");
        if (grid.contains("max_occ")) throw ConfigError("grid: max_occ is fixed to 1 for the XX model");
        c.couplings = detail::get_or<std::vector<double>>(grid, "g", {0.5});
    }

    if (j.contains("window")) {
        const auto& w = j.at("window");
        detail::check_keys(w, {"mode", "half_width", "count"}, "window");
        c.window_mode = detail::get_or<std::string>(w, "mode", c.window_mode);
        c.window_half_width = detail::get_or<double>(w, "half_width",
                                                     c.model == ModelKind::AllToAllXX ? 0.02 : 0.05);
        c.window_count = detail::get_or<int>(w, "count", c.window_count);
    } else if (c.model == ModelKind::AllToAllXX) {
        c.window_half_width = 0.02;
    }
    if (j.contains("dos")) {
        const auto& d = j.at("dos");
        detail::check_keys(d, {"moments", "probes", "bins"}, "dos");
        c.dos_moments = detail::get_or<int>(d, "moments", c.dos_moments);
        c.dos_probes = detail::get_or<int>(d, "probes", c.dos_probes);
        c.dos_bins = detail::get_or<int>(d, "bins", c.dos_bins);
    }
    if (j.contains("page")) {
        const auto& p = j.at("page");
        detail::check_keys(p, {"samples", "ensemble", "normalization"}, "page");
        c.page_samples = detail::get_or<std::size_t>(p, "samples", c.page_samples);
        c.page_ensemble = detail::get_or<std::string>(p, "ensemble", c.page_ensemble);
        c.page_normalization =
            detail::get_or<std::string>(p, "normalization", c.page_normalization);
    }
    if (j.contains("dynamics")) {
        const auto& d = j.at("dynamics");
        detail::check_keys(d,
                           {"t_min", "t_max", "points", "initial_states", "initial_state_mode",
                            "krylov_dim", "krylov_tol", "smooth_window", "observables",
                            "save_trajectories"},
                           "dynamics");
        c.t_min = detail::get_or<double>(d, "t_min", c.t_min);
        c.t_max = detail::get_or<double>(d, "t_max", c.t_max);
        c.time_points = detail::get_or<int>(d, "points", c.time_points);
        c.initial_states = detail::get_or<int>(d, "initial_states", c.initial_states);
        c.initial_state_mode =
            detail::get_or<std::string>(d, "initial_state_mode", c.initial_state_mode);
        c.krylov_dim = detail::get_or<int>(d, "krylov_dim", c.krylov_dim);
        c.krylov_tol = detail::get_or<double>(d, "krylov_tol", c.krylov_tol);
        c.smooth_window = detail::get_or<int>(d, "smooth_window", c.smooth_window);
        c.observables = detail::get_or<std::vector<std::string>>(d, "observables", c.observables);
        c.save_trajectories = detail::get_or<bool>(d, "save_trajectories", false);
    }
    if (j.contains("fits")) {
        const auto& f = j.at("fits");
        detail::check_keys(f,
                           {"t_min", "plateau_gamma_min", "collapse_ansatz", "crossing",
                            "observables", "gamma_c_box", "nu_box", "b_box", "gamma1_box"},
                           "fits");
        c.fit_t_min = detail::get_or<double>(f, "t_min", c.fit_t_min);
        c.plateau_gamma_min = detail::get_or<double>(
            f, "plateau_gamma_min", c.model == ModelKind::AllToAllXX ? 1.2 : 3.6);
        c.collapse_ansatz =
            detail::get_or<std::vector<std::string>>(f, "collapse_ansatz", c.collapse_ansatz);
        c.collapse_crossing = detail::get_or<std::string>(f, "crossing", c.collapse_crossing);
        c.collapse_observables =
            detail::get_or<std::vector<std::string>>(f, "observables", c.collapse_observables);
        auto box = [&](const char* key, double& lo, double& hi) {
            if (f.contains(key)) {
                const auto v = f.at(key).get<std::vector<double>>();
                if (v.size() != 2) throw ConfigError(std::string("fits: ") + key + " needs [lo, hi]");
                lo = v[0];
                hi = v[1];
            }
        };
        box("gamma_c_box", c.box_gamma_c_lo, c.box_gamma_c_hi);
        box("nu_box", c.box_nu_lo, c.box_nu_hi);
        box("b_box", c.box_b_lo, c.box_b_hi);
        box("gamma1_box", c.box_gamma1_lo, c.box_gamma1_hi);
    } else {
        if (c.model == ModelKind::AllToAllXX) {
            c.plateau_gamma_min = 1.2;
            c.box_gamma_c_lo = 0.3;
            c.box_gamma_c_hi = 2.0;
        }
    }
    c.validate();
    return c;
}

inline void RunConfig::validate() const {
    static const std::set<std::string> known_tasks{"spectrum", "dos",      "rstat",
                                                   "eigenobs", "pagevalue", "dynamics",
                                                   "collapse", "fitimbalance"};
    for (const auto& t : tasks) {
        if (!known_tasks.count(t)) throw ConfigError("config: unknown task '" + t + "'");
    }
    if (sizes.empty() || gammas.empty() || couplings.empty() || alphas.empty()) {
        if (!tasks.empty()) throw ConfigError("config: parameter grid must be non-empty");
    }
    for (int L : sizes) {
        if (L < 2 || L % 2 != 0) {
            throw ConfigError("config: system sizes must be even and >= 2 (half filling)");
        }
        if (max_occ && (*max_occ < 1 || *max_occ > L / 2)) {
            throw ConfigError("config: max_occ must be in [1, L/2]");
        }
    }
    if (window_mode != "half_width" && window_mode != "nearest_count") {
        throw ConfigError("config: window mode must be half_width or nearest_count");
    }
    if (window_half_width < 0.0 || window_half_width > 0.5) {
        throw ConfigError("config: window half_width must be in [0, 0.5]");
    }
    if (window_count < 1) throw ConfigError("config: window count must be positive");
    if (dos_moments < 2 || dos_probes < 1 || dos_bins < 1) {
        throw ConfigError("config: dos settings out of range");
    }
    if (page_samples < 2) throw ConfigError("config: page samples must be >= 2");
    if (page_ensemble != "real" && page_ensemble != "complex") {
        throw ConfigError("config: page ensemble must be real or complex");
    }
    if (page_normalization != "sampled" && page_normalization != "formula") {
        throw ConfigError("config: page normalization must be sampled or formula");
    }
    if (!(t_min > 0.0) || !(t_max > t_min) || time_points < 2) {
        throw ConfigError("config: dynamics time grid out of range");
    }
    if (initial_states < 1) throw ConfigError("config: initial_states must be >= 1");
    if (initial_state_mode != "sampled" && initial_state_mode != "cdw") {
        throw ConfigError("config: initial_state_mode must be sampled or cdw");
    }
    if (krylov_dim < 8) throw ConfigError("config: krylov_dim must be >= 8");
    if (!(krylov_tol > 0.0)) throw ConfigError("config: krylov_tol must be positive");
    if (smooth_window < 1 || smooth_window % 2 == 0) {
        throw ConfigError("config: smooth_window must be odd and >= 1");
    }
    for (const auto& obs : observables) {
        if (obs != "EE" && obs != "PE" && obs != "imbalance" && obs != "occupations") {
            throw ConfigError("config: unknown dynamics observable '" + obs + "'");
        }
    }
    for (const auto& a : collapse_ansatz) {
        if (a != "powerlaw" && a != "bkt_equal_b" && a != "bkt_unequal_b") {
            throw ConfigError("config: unknown collapse ansatz '" + a + "'");
        }
    }
    if (collapse_crossing != "fixed" && collapse_crossing != "linear") {
        throw ConfigError("config: crossing must be fixed or linear");
    }
    for (const auto& obs : collapse_observables) {
        if (obs != "EE" && obs != "PE") {
            throw ConfigError("config: collapse observable must be EE or PE");
        }
    }
    if (workers < 1) throw ConfigError("config: workers must be >= 1");
    if (!(box_gamma_c_hi > box_gamma_c_lo) || !(box_nu_hi > box_nu_lo) ||
        !(box_b_hi > box_b_lo) || !(box_gamma1_hi > box_gamma1_lo) || box_nu_lo <= 0.0 ||
        box_b_lo <= 0.0) {
        throw ConfigError("config: malformed search boxes");
    }
}

}  // namespace stark

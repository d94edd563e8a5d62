#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>
#include <omp.h>

#include "stark/config.hpp"
#include "stark/dynamics.hpp"
#include "stark/errors.hpp"
#include "stark/io.hpp"
#include "stark/observables.hpp"
#include "stark/scaling.hpp"
#include "stark/spectral.hpp"
#include "stark/version.hpp"

namespace stark {

struct GridPoint {
    int L = 0;
    double gamma = 0.0;
    double coupling = 0.0;  // U or g
    double alpha = 0.0;

    std::string dir_name(ModelKind model) const {
        auto fmt = [](double x) {
            std::string s = io::fmt_double(x);
            for (char& c : s) {
                if (c == '.') c = 'p';
                if (c == '-') c = 'm';
            }
            return s;
        };
        const char* ck = model == ModelKind::BoseHubbard ? "U" : "g";
        return "L" + std::to_string(L) + "_gam" + fmt(gamma) + "_" + ck + fmt(coupling) + "_al" +
               fmt(alpha);
    }
};

struct TaskOutput {
    std::string path;  // relative to the run directory
    std::string checksum;
};

struct TaskResult {
    std::string name;
    std::string point;  // directory name or "" for aggregate tasks
    std::string status = "completed";  // completed | skipped | failed
    std::string error;
    std::vector<TaskOutput> outputs;
};

struct RunManifest {
    std::string config_hash;
    std::string version = kVersion;
    std::vector<TaskResult> tasks;

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : tasks) {
            nlohmann::json outs = nlohmann::json::array();
            for (const auto& o : t.outputs) {
                outs.push_back({{"path", o.path}, {"checksum", o.checksum}});
            }
            nlohmann::json tj{{"name", t.name},
                              {"point", t.point},
                              {"status", t.status},
                              {"outputs", outs}};
            if (!t.error.empty()) tj["error"] = t.error;
            arr.push_back(tj);
        }
        return {{"config_hash", config_hash}, {"version", version}, {"tasks", arr}};
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.config_hash = j.value("config_hash", "");
        m.version = j.value("version", "");
        for (const auto& tj : j.value("tasks", nlohmann::json::array())) {
            TaskResult t;
            t.name = tj.value("name", "");
            t.point = tj.value("point", "");
            t.status = tj.value("status", "");
            t.error = tj.value("error", "");
            for (const auto& oj : tj.value("outputs", nlohmann::json::array())) {
                t.outputs.push_back({oj.value("path", ""), oj.value("checksum", "")});
            }
            m.tasks.push_back(std::move(t));
        }
        return m;
    }

    bool all_green() const {
        return std::all_of(tasks.begin(), tasks.end(),
                           [](const TaskResult& t) { return t.status != "failed"; });
    }
    std::size_t failed_count() const {
        return static_cast<std::size_t>(
            std::count_if(tasks.begin(), tasks.end(),
                          [](const TaskResult& t) { return t.status == "failed"; }));
    }
};

namespace detail {

class ExperimentRunner {
  public:
    ExperimentRunner(const RunConfig& config) : cfg_(config), root_(config.out_dir) {}

    RunManifest run() {
        manifest_.config_hash = cfg_.hash();
        load_previous_manifest();

        std::vector<GridPoint> points;
        for (int L : cfg_.sizes) {
            for (double gamma : cfg_.gammas) {
                for (double coupling : cfg_.couplings) {
                    for (double alpha : cfg_.alphas) {
                        points.push_back({L, gamma, coupling, alpha});
                    }
                }
            }
        }

        struct PlannedTask {
            std::string name;
            GridPoint point;
            bool aggregate = false;
        };
        std::vector<PlannedTask> plan;
        const std::set<std::string> requested(cfg_.tasks.begin(), cfg_.tasks.end());
        for (const char* name : {"spectrum", "dos", "rstat", "eigenobs", "dynamics"}) {
            if (!requested.count(name)) continue;
            for (const auto& p : points) plan.push_back({name, p, false});
        }
        if (requested.count("pagevalue")) {
            std::set<int> seen;
            for (const auto& p : points) {
                if (seen.insert(p.L).second) plan.push_back({"pagevalue", p, false});
            }
        }

        std::vector<TaskResult> results(plan.size());
        if (cfg_.workers > 1) {
            // task-level pool; nested (per-task) OpenMP regions then serialize
#pragma omp parallel for schedule(dynamic) num_threads(cfg_.workers)
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(plan.size()); ++i) {
                results[static_cast<std::size_t>(i)] =
                    run_point_task(plan[static_cast<std::size_t>(i)].name,
                                   plan[static_cast<std::size_t>(i)].point);
            }
        } else {
            for (std::size_t i = 0; i < plan.size(); ++i) {
                results[i] = run_point_task(plan[i].name, plan[i].point);
            }
        }
        for (auto& r : results) manifest_.tasks.push_back(std::move(r));

        // aggregate tasks consume the per-point files written above
        if (requested.count("collapse")) {
            manifest_.tasks.push_back(run_collapse(points));
        }
        if (requested.count("fitimbalance")) {
            manifest_.tasks.push_back(run_fitimbalance(points));
        }

        io::write_json(root_ / "manifest.json", manifest_.to_json());
        return manifest_;
    }

  private:
    using Path = std::filesystem::path;

    void load_previous_manifest() {
        const Path p = root_ / "manifest.json";
        if (std::filesystem::exists(p)) {
            try {
                previous_ = RunManifest::from_json(io::read_json(p));
            } catch (...) {
                previous_.reset();  // unreadable manifest: just redo the work
            }
        }
    }

    // A task may be skipped when a previous manifest lists the same outputs
    // and every file still matches its checksum.
    bool can_skip(const std::string& name, const std::string& point, TaskResult& result) const {
        if (!previous_ || previous_->config_hash != manifest_.config_hash) return false;
        for (const auto& t : previous_->tasks) {
            if (t.name != name || t.point != point || t.status == "failed") continue;
            if (t.outputs.empty()) return false;
            for (const auto& o : t.outputs) {
                const Path p = root_ / o.path;
                if (!std::filesystem::exists(p) || io::checksum_file(p) != o.checksum) {
                    return false;
                }
            }
            result = t;
            result.status = "skipped";
            return true;
        }
        return false;
    }

    void record_output(TaskResult& result, const Path& rel) const {
        result.outputs.push_back({rel.generic_string(), io::checksum_file(root_ / rel)});
    }

    std::shared_ptr<const SectorBasis> sector(const GridPoint& p) const {
        return std::make_shared<SectorBasis>(p.L, cfg_.sector_particles(p.L), cfg_.sector_cap(p.L));
    }

    SparseHamiltonian hamiltonian(const GridPoint& p) const {
        const PotentialSpec spec{p.gamma, p.alpha, p.L};
        if (cfg_.model == ModelKind::BoseHubbard) {
            return build_bose_hubbard(sector(p), 1.0, p.coupling, spec);
        }
        return build_all_to_all_xx(sector(p), p.coupling, spec);
    }

    // Energies from the sibling spectrum task when its file exists (the CSV
    // round-trips doubles exactly); otherwise diagonalize.
    Eigen::VectorXd energies_for(const GridPoint& p, const SparseHamiltonian& ham) const {
        const Path f = root_ / p.dir_name(cfg_.model) / "spectrum.csv";
        if (std::filesystem::exists(f)) {
            const auto rows = io::read_csv(f, 2);
            if (rows.size() == ham.dimension()) {
                Eigen::VectorXd e(static_cast<Eigen::Index>(rows.size()));
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    e(static_cast<Eigen::Index>(i)) = rows[i][0];
                }
                return e;
            }
        }
        return full_spectrum(ham, false).energies;
    }

    TaskResult run_point_task(const std::string& name, const GridPoint& point) {
        TaskResult result;
        result.name = name;
        result.point = name == "pagevalue" ? "L" + std::to_string(point.L)
                                           : point.dir_name(cfg_.model);
        if (can_skip(name, result.point, result)) return result;
        try {
            if (name == "spectrum") {
                task_spectrum(point, result);
            } else if (name == "dos") {
                task_dos(point, result);
            } else if (name == "rstat") {
                task_rstat(point, result);
            } else if (name == "eigenobs") {
                task_eigenobs(point, result);
            } else if (name == "dynamics") {
                task_dynamics(point, result);
            } else if (name == "pagevalue") {
                task_pagevalue(point, result);
            }
        } catch (const std::exception& e) {
            result.status = "failed";
            result.error = e.what();
        }
        return result;
    }

    void task_spectrum(const GridPoint& p, TaskResult& result) {
        const auto ham = hamiltonian(p);
        const auto sol = full_spectrum(ham, false);
        const Path dir = Path(p.dir_name(cfg_.model));
        std::vector<std::vector<double>> rows;
        rows.reserve(sol.size());
        for (Eigen::Index i = 0; i < sol.energies.size(); ++i) {
            rows.push_back({sol.energies(i),
                            normalized_energy(sol.energies(i), sol.e_min, sol.e_max)});
        }
        io::write_csv(root_ / dir / "spectrum.csv", "E,epsilon", rows);
        nlohmann::json meta = io::model_json(ham);
        meta["e_min"] = sol.e_min;
        meta["e_max"] = sol.e_max;
        io::write_json(root_ / dir / "spectrum.json", meta);
        record_output(result, dir / "spectrum.csv");
        record_output(result, dir / "spectrum.json");
        if (cfg_.dump_matrix) {
            io::dump_matrix(ham, root_ / dir / "hamiltonian.txt");
            record_output(result, dir / "hamiltonian.txt");
        }
    }

    void task_dos(const GridPoint& p, TaskResult& result) {
        const auto ham = hamiltonian(p);
        const std::uint64_t seed = rng::derive_seed(cfg_.seed, "dos", point_index(p));
        const auto prof = dos_chebyshev(ham, cfg_.dos_moments, cfg_.dos_probes, cfg_.dos_bins, seed);
        const Path dir = Path(p.dir_name(cfg_.model));
        std::vector<std::vector<double>> rows;
        for (std::size_t b = 0; b < prof.bins(); ++b) {
            rows.push_back({prof.bin_center(b), prof.density(static_cast<Eigen::Index>(b))});
        }
        io::write_csv(root_ / dir / "dos.csv", "epsilon,density", rows);
        nlohmann::json meta = io::model_json(ham);
        meta["moments"] = cfg_.dos_moments;
        meta["probes"] = cfg_.dos_probes;
        meta["bins"] = cfg_.dos_bins;
        meta["seed"] = seed;
        meta["e_min"] = prof.e_min;
        meta["e_max"] = prof.e_max;
        meta["eps_star"] = max_dos_energy(prof);
        meta["warnings"] = prof.warnings;
        io::write_json(root_ / dir / "dos.json", meta);
        record_output(result, dir / "dos.csv");
        record_output(result, dir / "dos.json");
    }

    WindowSpec window_spec() const {
        return cfg_.window_mode == "half_width"
                   ? WindowSpec::by_half_width(cfg_.window_half_width)
                   : WindowSpec::by_nearest_count(static_cast<std::size_t>(cfg_.window_count));
    }

    void task_rstat(const GridPoint& p, TaskResult& result) {
        const auto ham = hamiltonian(p);
        const Eigen::VectorXd energies = energies_for(p, ham);
        const double e_min = energies(0);
        const double e_max = energies(energies.size() - 1);
        const auto prof = dos_from_spectrum(energies, cfg_.dos_bins);
        const double eps_star = max_dos_energy(prof);
        const auto idx = select_window_states(energies, e_min, e_max, eps_star, window_spec());
        Eigen::VectorXd window(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            window(static_cast<Eigen::Index>(i)) = energies(static_cast<Eigen::Index>(idx[i]));
        }
        const auto stats = r_statistics(window);
        const Path dir = Path(p.dir_name(cfg_.model));
        nlohmann::json meta = io::model_json(ham);
        meta["eps_star"] = eps_star;
        meta["window_mode"] = cfg_.window_mode;
        meta["window_half_width"] = cfg_.window_half_width;
        meta["window_count"] = cfg_.window_count;
        meta["window_states"] = idx.size();
        meta["r_mean"] = stats.mean;
        meta["ratios"] = stats.ratios;
        meta["merged_levels"] = stats.merged_levels;
        io::write_json(root_ / dir / "rstat.json", meta);
        record_output(result, dir / "rstat.json");
    }

    void task_eigenobs(const GridPoint& p, TaskResult& result) {
        const auto ham = hamiltonian(p);
        const Eigen::VectorXd energies = energies_for(p, ham);
        const double e_min = energies(0);
        const double e_max = energies(energies.size() - 1);
        const auto prof = dos_from_spectrum(energies, cfg_.dos_bins);
        const double eps_star = max_dos_energy(prof);
        const auto idx = select_window_states(energies, e_min, e_max, eps_star, window_spec());
        // window indices are contiguous only in nearest_count mode; compute
        // eigenvectors for the covering index range
        const std::size_t first = idx.front() + 1;  // 1-based for LAPACK
        const std::size_t last = idx.back() + 1;
        const auto win = window_eigenpairs(ham, first, last, e_min, e_max);

        const BipartitionPlan plan(ham.basis(), p.L / 2);
        const double ln_dim = std::log(static_cast<double>(ham.dimension()));
        std::vector<std::vector<double>> rows;
        double mean_ee = 0.0, mean_pe = 0.0;
        std::size_t used = 0;
        for (std::size_t i : idx) {
            const Eigen::Index col = static_cast<Eigen::Index>(i - (first - 1));
            const Eigen::VectorXd v = win.vectors.col(col);
            const double ee = plan.entropy(v);
            const double pe = participation_entropy(v);
            const double eps = normalized_energy(energies(static_cast<Eigen::Index>(i)), e_min, e_max);
            rows.push_back({eps, ee, pe});
            mean_ee += ee;
            mean_pe += pe;
            ++used;
        }
        mean_ee /= static_cast<double>(used);
        mean_pe /= static_cast<double>(used);

        const Path dir = Path(p.dir_name(cfg_.model));
        io::write_csv(root_ / dir / "eigenobs.csv", "epsilon,S_EE,S_PE", rows);
        nlohmann::json meta = io::model_json(ham);
        meta["eps_star"] = eps_star;
        meta["window_states"] = used;
        meta["mean_S_EE"] = mean_ee;
        meta["mean_S_PE"] = mean_pe;
        meta["ln_dim"] = ln_dim;
        io::write_json(root_ / dir / "eigenobs.json", meta);
        record_output(result, dir / "eigenobs.csv");
        record_output(result, dir / "eigenobs.json");
    }

    void task_pagevalue(const GridPoint& p, TaskResult& result) {
        const auto basis = sector(p);
        const std::uint64_t seed = rng::derive_seed(cfg_.seed, "page", p.L);
        const auto ensemble = cfg_.page_ensemble == "real" ? RandomStateEnsemble::RealGaussian
                                                           : RandomStateEnsemble::ComplexGaussian;
        const auto est = page_value_monte_carlo(*basis, p.L / 2, cfg_.page_samples, seed, ensemble);
        const Path dir = Path("L" + std::to_string(p.L));
        nlohmann::json meta{{"model", model_name(cfg_.model)},
                            {"L", p.L},
                            {"N", basis->num_particles()},
                            {"max_occ", basis->max_occ()},
                            {"dim", basis->dimension()},
                            {"cut", p.L / 2},
                            {"samples", est.samples},
                            {"seed", seed},
                            {"ensemble", cfg_.page_ensemble},
                            {"mean", est.mean},
                            {"standard_error", est.standard_error},
                            {"formula_spin", page_value_formula_spin(p.L)}};
        io::write_json(root_ / dir / "pagevalue.json", meta);
        record_output(result, dir / "pagevalue.json");
    }

    void task_dynamics(const GridPoint& p, TaskResult& result) {
        const auto ham = hamiltonian(p);
        const auto grid = TimeGrid::log_spaced(cfg_.t_min, cfg_.t_max, cfg_.time_points);
        const std::uint64_t seed = rng::derive_seed(cfg_.seed, "dynamics", point_index(p));

        std::vector<InitialPattern> patterns;
        double eps_star = 0.5;
        if (cfg_.initial_state_mode == "cdw") {
            patterns.push_back(cdw_pattern(p.L));
        } else {
            const auto dos_seed = rng::derive_seed(cfg_.seed, "dos", point_index(p));
            const auto prof =
                dos_chebyshev(ham, cfg_.dos_moments, cfg_.dos_probes, cfg_.dos_bins, dos_seed);
            eps_star = max_dos_energy(prof);
            const double width = cfg_.model == ModelKind::AllToAllXX ? 0.02 : 0.05;
            auto sample = sample_initial_states(ham.basis(), ham, eps_star, width,
                                                static_cast<std::size_t>(cfg_.initial_states), seed);
            if (sample.patterns.empty()) {
                throw EmptySelectionError("dynamics: no initial state inside the energy window");
            }
            patterns = std::move(sample.patterns);
        }

        const KrylovOptions kry{cfg_.krylov_dim, cfg_.krylov_tol};
        std::map<std::string, std::vector<TimeSeries>> per_tag;
        for (const auto& pattern : patterns) {
            auto series = evolve_observables(ham, pattern, grid, cfg_.observables, kry);
            for (auto& [tag, ts] : series) {
                ts.meta.seed = seed;
                per_tag[tag].push_back(std::move(ts));
            }
        }

        const Path dir = Path(p.dir_name(cfg_.model));
        nlohmann::json meta = io::model_json(ham);
        meta["seed"] = seed;
        meta["eps_star"] = eps_star;
        meta["initial_state_mode"] = cfg_.initial_state_mode;
        meta["krylov_dim"] = cfg_.krylov_dim;
        meta["krylov_tol"] = cfg_.krylov_tol;
        meta["smooth_window"] = cfg_.smooth_window;
        meta["t_min"] = cfg_.t_min;
        meta["t_max"] = cfg_.t_max;
        meta["points"] = cfg_.time_points;
        nlohmann::json pat_list = nlohmann::json::array();
        for (const auto& pattern : patterns) pat_list.push_back(pattern.label());
        meta["patterns"] = pat_list;

        for (auto& [tag, members] : per_tag) {
            const TimeSeries avg = average_over_initial_states(members);
            const TimeSeries smoothed = smooth_series(avg, cfg_.smooth_window);
            const Path rel = dir / ("series_" + tag + ".csv");
            io::write_timeseries_csv(root_ / rel, avg, smoothed);
            record_output(result, rel);
            if (cfg_.save_trajectories) {
                for (std::size_t m = 0; m < members.size(); ++m) {
                    const Path traj = dir / ("series_" + tag + "_s" + std::to_string(m) + ".csv");
                    io::write_timeseries_csv(root_ / traj, members[m],
                                             smooth_series(members[m], cfg_.smooth_window));
                    record_output(result, traj);
                }
            }
        }
        io::write_json(root_ / dir / "dynamics.json", meta);
        record_output(result, dir / "dynamics.json");
    }

    TaskResult run_collapse(const std::vector<GridPoint>& points) {
        TaskResult result;
        result.name = "collapse";
        if (can_skip("collapse", "", result)) return result;
        try {
            for (const std::string& obs : cfg_.collapse_observables) {
                std::vector<CollapsePoint> data;
                for (const auto& p : points) {
                    const Path f = root_ / p.dir_name(cfg_.model) / "eigenobs.json";
                    if (!std::filesystem::exists(f)) {
                        throw ResourceError("collapse: missing eigenobs output " + f.string());
                    }
                    const auto meta = io::read_json(f);
                    double y;
                    if (obs == "EE") {
                        y = meta.at("mean_S_EE").get<double>() / page_norm(p.L);
                    } else {
                        y = meta.at("mean_S_PE").get<double>() / meta.at("ln_dim").get<double>();
                    }
                    data.push_back({p.L, p.gamma, y});
                }
                const SearchBox gc{cfg_.box_gamma_c_lo, cfg_.box_gamma_c_hi};
                const SearchBox nu{cfg_.box_nu_lo, cfg_.box_nu_hi};
                nlohmann::json all = nlohmann::json::object();
                for (const std::string& ansatz : cfg_.collapse_ansatz) {
                    CollapseResult r;
                    if (ansatz == "powerlaw") {
                        r = powerlaw_collapse(data, gc, nu);
                    } else {
                        BktOptions opt;
                        opt.equal_b = ansatz == "bkt_equal_b";
                        opt.linear_crossing = cfg_.collapse_crossing == "linear";
                        opt.gamma0 = gc;
                        opt.gamma1 = {cfg_.box_gamma1_lo, cfg_.box_gamma1_hi};
                        opt.b = {cfg_.box_b_lo, cfg_.box_b_hi};
                        r = bkt_collapse(data, opt);
                    }
                    all[ansatz] = io::collapse_result_json(r);
                    const Path csv = Path("collapse_" + obs + "_" + ansatz + ".csv");
                    io::write_collapsed_csv(root_ / csv, r);
                    record_output(result, csv);
                }
                nlohmann::json meta{{"observable", obs},
                                    {"normalization", obs == "EE" ? cfg_.page_normalization : "ln_dim"},
                                    {"results", all}};
                nlohmann::json input = nlohmann::json::array();
                for (const auto& d : data) input.push_back({d.L, d.gamma, d.y});
                meta["points"] = input;
                const Path out = Path("collapse_" + obs + ".json");
                io::write_json(root_ / out, meta);
                record_output(result, out);
            }
        } catch (const std::exception& e) {
            result.status = "failed";
            result.error = e.what();
        }
        return result;
    }

    TaskResult run_fitimbalance(const std::vector<GridPoint>& points) {
        TaskResult result;
        result.name = "fitimbalance";
        if (can_skip("fitimbalance", "", result)) return result;
        try {
            // one fit per (L, coupling, alpha) slice, over the gamma grid
            std::map<std::string, std::vector<std::pair<double, GridPoint>>> slices;
            for (const auto& p : points) {
                GridPoint key = p;
                key.gamma = 0.0;
                slices[key.dir_name(cfg_.model)].emplace_back(p.gamma, p);
            }
            for (auto& [slice_name, members] : slices) {
                std::sort(members.begin(), members.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                std::vector<std::vector<double>> xi_rows;
                std::vector<std::pair<double, double>> xi_points;
                for (const auto& [gamma, p] : members) {
                    const Path f = root_ / p.dir_name(cfg_.model) / "series_imbalance.csv";
                    if (!std::filesystem::exists(f)) {
                        throw ResourceError("fitimbalance: missing dynamics output " + f.string());
                    }
                    const auto ts = io::read_timeseries_csv(f);
                    // fits use the raw (unsmoothed) series
                    const auto fit = fit_power_decay(ts.times, ts.values, cfg_.fit_t_min);
                    xi_rows.push_back({gamma, fit.exponent, fit.amplitude, fit.residual_rms});
                    xi_points.emplace_back(gamma, fit.exponent);
                }
                const Path csv = Path("fitimbalance_" + slice_name + ".csv");
                io::write_csv(root_ / csv, "gamma,xi,amplitude,residual_rms", xi_rows);
                record_output(result, csv);

                nlohmann::json meta{{"slice", slice_name},
                                    {"t_fit_min", cfg_.fit_t_min},
                                    {"plateau_gamma_min", cfg_.plateau_gamma_min}};
                std::vector<double> plateau;
                for (const auto& [g, xi] : xi_points) {
                    if (g >= cfg_.plateau_gamma_min) plateau.push_back(g);
                }
                if (xi_points.size() >= 6 && !plateau.empty()) {
                    try {
                        const auto fit = fit_critical_exponent(
                            xi_points, {cfg_.box_gamma_c_lo, cfg_.box_gamma_c_hi},
                            {cfg_.box_nu_lo, cfg_.box_nu_hi}, plateau);
                        meta["gamma_c"] = fit.gamma_c;
                        meta["nu"] = fit.nu;
                        meta["amplitude"] = fit.amplitude;
                        meta["xi_bar"] = fit.xi_bar;
                        meta["residual_rms"] = fit.residual_rms;
                    } catch (const std::exception& e) {
                        meta["critical_fit_error"] = e.what();
                    }
                } else {
                    meta["critical_fit_error"] = "too few gamma points for the piecewise fit";
                }
                const Path out = Path("fitimbalance_" + slice_name + ".json");
                io::write_json(root_ / out, meta);
                record_output(result, out);
            }
        } catch (const std::exception& e) {
            result.status = "failed";
            result.error = e.what();
        }
        return result;
    }

    double page_norm(int L) const {
        if (cfg_.page_normalization == "formula") return page_value_formula_spin(L);
        const Path f = root_ / ("L" + std::to_string(L)) / "pagevalue.json";
        if (!std::filesystem::exists(f)) {
            throw ResourceError("collapse: missing pagevalue output for L = " + std::to_string(L));
        }
        return io::read_json(f).at("mean").get<double>();
    }

    std::uint64_t point_index(const GridPoint& p) const {
        return rng::fnv1a(p.dir_name(cfg_.model));
    }

    RunConfig cfg_;
    Path root_;
    RunManifest manifest_;
    std::optional<RunManifest> previous_;
};

}  // namespace detail

/// Executes the configured tasks over the parameter grid.  Independent tasks
/// failing are recorded in the manifest without aborting the rest; reruns of
/// a completed configuration skip tasks whose outputs still match their
/// checksums.
inline RunManifest run_experiment(const RunConfig& config) {
    config.validate();
    detail::ExperimentRunner runner(config);
    return runner.run();
}

/// Canned configurations reproducing the toolkit's standard result sets.
/// Desk scale substitutes reduced sizes and counts; full scale uses the
/// original parameters (hours of runtime and tens of GB of memory for the
/// largest sectors).
inline RunConfig reproduce_config(const std::string& tag, const std::string& scale,
                                  std::uint64_t seed, const std::string& out_dir) {
    const bool desk = scale == "desk";
    if (!desk && scale != "full") {
        throw ConfigError("reproduce: scale must be desk or full");
    }
    RunConfig c;
    c.seed = seed;
    c.out_dir = out_dir;
    auto linspace = [](double lo, double hi, int n) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) {
            v.push_back(lo + (hi - lo) * static_cast<double>(i) / std::max(1, n - 1));
        }
        return v;
    };
    if (tag == "fig2") {
        c.model = ModelKind::BoseHubbard;
        c.tasks = {"spectrum", "rstat"};
        c.sizes = {desk ? 8 : 12};
        c.gammas = linspace(0.5, 6.0, desk ? 8 : 23);
        c.couplings = desk ? std::vector<double>{1.0, 2.0, 4.0, 8.0}
                           : std::vector<double>{0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 12.0, 16.0, 20.0};
    } else if (tag == "fig3" || tag == "tableI") {
        c.model = ModelKind::BoseHubbard;
        c.tasks = {"spectrum", "eigenobs", "pagevalue", "collapse"};
        c.sizes = desk ? std::vector<int>{6, 8} : std::vector<int>{10, 12, 14};
        c.gammas = linspace(1.0, 5.0, desk ? 9 : 17);
        c.page_samples = desk ? 20000 : 100000;
        c.window_mode = "nearest_count";
        c.window_count = desk ? 40 : 1000;
        c.collapse_ansatz = tag == "tableI"
                                ? std::vector<std::string>{"powerlaw", "bkt_equal_b", "bkt_unequal_b"}
                                : std::vector<std::string>{"powerlaw"};
        if (tag == "tableI") c.collapse_crossing = "linear";
    } else if (tag == "fig6") {
        c.model = ModelKind::BoseHubbard;
        c.tasks = {"dynamics", "fitimbalance"};
        c.sizes = {desk ? 10 : 14};
        c.gammas = {2.0, 2.4, 2.8, 3.2, 3.6, 4.0, 5.0, 6.0, 8.0};
        c.initial_states = desk ? 8 : 50;
        c.observables = {"EE", "PE", "imbalance"};
    } else if (tag == "fig8") {
        c.model = ModelKind::AllToAllXX;
        c.tasks = {"spectrum", "rstat"};
        c.sizes = {desk ? 12 : 16};
        c.gammas = {0.2};
        c.couplings = {0.0, 0.025, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0};
        c.window_half_width = 0.02;
    } else if (tag == "fig9") {
        c.model = ModelKind::AllToAllXX;
        c.tasks = {"spectrum", "eigenobs", "pagevalue", "collapse"};
        c.sizes = desk ? std::vector<int>{8, 10} : std::vector<int>{12, 14, 16, 18};
        c.gammas = linspace(0.2, 1.6, desk ? 8 : 15);
        c.couplings = {0.5};
        c.page_samples = desk ? 20000 : 100000;
        c.window_mode = "nearest_count";
        c.window_count = desk ? 40 : 500;
        c.box_gamma_c_lo = 0.3;
        c.box_gamma_c_hi = 2.0;
    } else if (tag == "fig10") {
        c.model = ModelKind::AllToAllXX;
        c.tasks = {"dynamics", "fitimbalance"};
        c.sizes = {desk ? 12 : 18};
        c.gammas = {0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 2.0};
        c.couplings = {0.5};
        c.initial_states = desk ? 8 : 50;
        c.window_half_width = 0.02;
        c.plateau_gamma_min = 1.2;
        c.box_gamma_c_lo = 0.3;
        c.box_gamma_c_hi = 2.0;
    } else if (tag == "figS1") {
        c.model = ModelKind::BoseHubbard;
        c.tasks = {"dos"};
        c.sizes = {desk ? 8 : 14};
        c.gammas = {1.0, 3.0, 5.0, 7.0};
    } else if (tag == "figS2") {
        c.model = ModelKind::BoseHubbard;
        c.tasks = {"pagevalue"};
        c.sizes = desk ? std::vector<int>{10} : std::vector<int>{10, 12, 14};
        c.gammas = {0.0};
        c.page_samples = desk ? 10000 : 100000;
    } else if (tag == "figS3") {
        c.model = ModelKind::BoseHubbard;
        c.tasks = {"dynamics"};
        c.sizes = {desk ? 8 : 14};
        c.gammas = {2.0};
        c.couplings = {0.0, 4.0, 20.0, 500.0};
        c.initial_state_mode = "cdw";
        c.observables = {"EE", "PE"};
    } else if (tag == "figS4") {
        c.model = ModelKind::BoseHubbard;
        c.tasks = {"dynamics"};
        c.sizes = {desk ? 8 : 14};
        c.gammas = {2.0, 4.0, 8.0};
        c.alphas = {0.0, 2.0};
        c.initial_states = desk ? 8 : 500;
        c.observables = {"imbalance"};
    } else if (tag == "figS5" || tag == "figS6") {
        c.model = ModelKind::AllToAllXX;
        c.tasks = {"dynamics"};
        c.sizes = {desk ? 12 : 18};
        c.gammas = {0.4, 0.8, 1.2, 1.6, 2.0};
        c.couplings = {0.5};
        c.initial_states = desk ? 8 : 50;
        c.observables = std::vector<std::string>{tag == "figS5" ? "EE" : "PE"};
        c.window_half_width = 0.02;
    } else {
        throw ConfigError(
            "reproduce: unknown tag '" + tag +
            "'; valid tags: fig2 fig3 fig6 fig8 fig9 fig10 figS1 figS2 figS3 figS4 figS5 figS6 tableI");
    }
    c.validate();
    return c;
}

inline RunManifest reproduce_figure(const std::string& tag, const std::string& scale,
                                    std::uint64_t seed, const std::string& out_dir) {
    return run_experiment(reproduce_config(tag, scale, seed, out_dir));
}

}  // namespace stark

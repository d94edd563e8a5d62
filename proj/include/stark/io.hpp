#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stark/dynamics.hpp"
#include "stark/errors.hpp"
#include "stark/hamiltonian.hpp"
#include "stark/rng.hpp"
#include "stark/scaling.hpp"
#include "stark/spectral.hpp"

namespace stark::io {

/// Shortest representation that round-trips a double exactly.
inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("write_text: cannot open " + path.string());
    out << contents;
    if (!out) throw ResourceError("write_text: write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResourceError("read_text: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string checksum_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(rng::fnv1a(bytes)));
    return buf;
}

inline std::string checksum_file(const std::filesystem::path& path) {
    return checksum_hex(read_text(path));
}

/// CSV with one header line; all doubles at 17 significant digits so files
/// round-trip exactly and reruns are byte-identical.
inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string body = header + "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) body += ",";
            body += fmt_double(row[i]);
        }
        body += "\n";
    }
    write_text(path, body);
}

inline std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                                 std::size_t expected_columns = 0) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw ParameterError("read_csv: empty file " + path.string());
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (expected_columns && row.size() != expected_columns) {
            throw ParameterError("read_csv: bad column count in " + path.string());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    return nlohmann::json::parse(read_text(path));
}

inline nlohmann::json potential_json(const PotentialSpec& spec) {
    return {{"gamma", spec.gamma}, {"alpha", spec.alpha}, {"L", spec.num_sites}};
}

inline nlohmann::json model_json(const SparseHamiltonian& ham) {
    const auto& p = ham.params();
    nlohmann::json j{{"model", model_name(p.kind)},
                     {"L", ham.basis().num_sites()},
                     {"N", ham.basis().num_particles()},
                     {"max_occ", ham.basis().max_occ()},
                     {"dim", ham.dimension()},
                     {"potential", potential_json(p.potential)}};
    if (p.kind == ModelKind::BoseHubbard) {
        j["J"] = p.hopping;
        j["U"] = p.interaction;
    } else {
        j["g"] = p.coupling;
    }
    return j;
}

/// Coordinate-format dump (row, col, value at 17 significant digits) with a
/// metadata header line, for cross-validation against independent codes.
inline void dump_matrix(const SparseHamiltonian& ham, const std::filesystem::path& path) {
    std::string body = "# " + model_json(ham).dump() + "\n";
    for (std::size_t a = 0; a < ham.dimension(); ++a) {
        for (std::size_t k = ham.row_ptr()[a]; k < ham.row_ptr()[a + 1]; ++k) {
            body += std::to_string(a) + " " + std::to_string(ham.cols()[k]) + " " +
                    fmt_double(ham.values()[k]) + "\n";
        }
    }
    write_text(path, body);
}

inline void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& raw,
                                 const TimeSeries& smoothed) {
    if (raw.values.size() != smoothed.values.size()) {
        throw ParameterError("write_timeseries_csv: raw/smoothed length mismatch");
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(raw.values.size());
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
        rows.push_back({raw.grid.points[i], raw.values[i], smoothed.values[i]});
    }
    write_csv(path, "time,value,smoothed_value", rows);
}

struct TimeSeriesFile {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> smoothed;
};

inline TimeSeriesFile read_timeseries_csv(const std::filesystem::path& path) {
    TimeSeriesFile f;
    for (const auto& row : read_csv(path, 3)) {
        f.times.push_back(row[0]);
        f.values.push_back(row[1]);
        f.smoothed.push_back(row[2]);
    }
    return f;
}

inline std::vector<CollapsePoint> read_collapse_csv(const std::filesystem::path& path) {
    std::vector<CollapsePoint> pts;
    for (const auto& row : read_csv(path, 3)) {
        pts.push_back({static_cast<int>(row[0]), row[1], row[2]});
    }
    return pts;
}

inline std::vector<std::pair<double, double>> read_xi_csv(const std::filesystem::path& path) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : read_csv(path, 2)) pts.emplace_back(row[0], row[1]);
    return pts;
}

inline nlohmann::json collapse_result_json(const CollapseResult& r) {
    nlohmann::json j{{"ansatz", r.ansatz},
                     {"cost", r.cost},
                     {"grid_evaluations", r.grid_evaluations},
                     {"refine_evaluations", r.refine_evaluations}};
    auto put = [&](const char* key, double v) {
        if (std::isfinite(v)) j[key] = v;
    };
    put("gamma_c", r.gamma_c);
    put("nu", r.nu);
    put("gamma0", r.gamma0);
    put("gamma1", r.gamma1);
    put("b_minus", r.b_minus);
    put("b_plus", r.b_plus);
    return j;
}

inline void write_collapsed_csv(const std::filesystem::path& path, const CollapseResult& r) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : r.collapsed) {
        rows.push_back({row[0], row[1], row[2], row[3]});
    }
    write_csv(path, "scaling_variable,y,L,gamma", rows);
}

}  // namespace stark::io

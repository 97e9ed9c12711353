#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xmint/dataset.hpp"
#include "xmint/error.hpp"
#include "xmint/path.hpp"
#include "xmint/simulate.hpp"

namespace xmint {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // ragged-free; rows[i].size() == columns.size()
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

/// Reads a headered, comma-separated, `.`-decimal numeric table. Parse
/// failures name the offending row (1-based, excluding the header) and
/// column.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidData("cannot open '" + path + "'");

    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw InvalidData("'" + path + "' is empty");
    t.columns = detail::split_fields(line);
    for (std::size_t j = 0; j < t.columns.size(); ++j)
        if (t.columns[j].empty())
            throw InvalidData("'" + path + "': empty header name in column " +
                              std::to_string(j + 1));

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> fields = detail::split_fields(line);
        if (fields.size() != t.columns.size())
            throw InvalidData("'" + path + "': row " + std::to_string(row) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(t.columns.size()));
        std::vector<double> vals(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const std::string& f = fields[j];
            char* end = nullptr;
            vals[j] = std::strtod(f.c_str(), &end);
            if (f.empty() || end != f.c_str() + f.size())
                throw InvalidData("'" + path + "': row " + std::to_string(row) + ", column '" +
                                  t.columns[j] + "': cannot parse '" + f + "' as a number");
        }
        t.rows.push_back(std::move(vals));
    }
    if (t.rows.empty()) throw InvalidData("'" + path + "' has a header but no data rows");
    return t;
}

/// Assembles a Dataset from named columns. When `mediators` is empty,
/// every column other than the exposure and outcome is a candidate.
inline Dataset dataset_from_table(const CsvTable& t, const std::string& exposure,
                                  const std::string& outcome,
                                  const std::vector<std::string>& mediators = {}) {
    auto find_col = [&](const std::string& name) {
        for (std::size_t j = 0; j < t.columns.size(); ++j)
            if (t.columns[j] == name) return static_cast<long>(j);
        throw InvalidData("column '" + name + "' not found in input");
    };
    const long jx = find_col(exposure);
    const long jy = find_col(outcome);
    if (jx == jy) throw InvalidData("exposure and outcome name the same column '" + exposure + "'");

    std::vector<long> jm;
    if (mediators.empty()) {
        for (std::size_t j = 0; j < t.columns.size(); ++j)
            if (static_cast<long>(j) != jx && static_cast<long>(j) != jy)
                jm.push_back(static_cast<long>(j));
        if (jm.empty()) throw InvalidData("no mediator columns remain besides '" + exposure +
                                          "' and '" + outcome + "'");
    } else {
        for (const std::string& name : mediators) {
            const long j = find_col(name);
            if (j == jx || j == jy)
                throw InvalidData("mediator '" + name + "' is also the exposure or outcome");
            jm.push_back(j);
        }
    }

    const auto n = static_cast<Eigen::Index>(t.rows.size());
    Dataset d;
    d.X.resize(n);
    d.Y.resize(n);
    d.M.resize(n, static_cast<Eigen::Index>(jm.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        d.X[i] = t.rows[i][jx];
        d.Y[i] = t.rows[i][jy];
        for (std::size_t k = 0; k < jm.size(); ++k) d.M(i, k) = t.rows[i][jm[k]];
    }
    for (long j : jm) d.column_names.push_back(t.columns[j]);
    return d;
}

/// Writes content to a temp file beside `path`, then renames it over
/// `path`, so readers never observe a partial file.
inline void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out.good()) throw Error("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename '" + tmp.string() + "' to '" + path + "': " + ec.message());
    }
}

/// Dataset as X,Y,M1..MV with full round-trip precision.
inline std::string dataset_csv(const Dataset& d) {
    std::string out = "X,Y";
    for (Eigen::Index v = 0; v < d.V(); ++v) out += "," + d.mediator_name(v);
    out += "\n";
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        out += detail::format_double(d.X[i]) + "," + detail::format_double(d.Y[i]);
        for (Eigen::Index v = 0; v < d.V(); ++v) out += "," + detail::format_double(d.M(i, v));
        out += "\n";
    }
    return out;
}

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
    atomic_write_text(path, dataset_csv(d));
}

inline std::string grid_csv(const std::vector<GridRow>& table) {
    std::string out = "N,V,ES,runs,tpr_med,fdr_med,tpr_int,fdr_int,converged_runs\n";
    for (const GridRow& r : table) {
        out += std::to_string(r.N) + "," + std::to_string(r.V) + "," +
               detail::format_double(r.ES) + "," + std::to_string(r.runs) + "," +
               detail::format_double(r.tpr_med) + "," + detail::format_double(r.fdr_med) + "," +
               detail::format_double(r.tpr_int) + "," + detail::format_double(r.fdr_int) + "," +
               std::to_string(r.converged_runs) + "\n";
    }
    return out;
}

inline void write_grid_csv(const std::string& path, const std::vector<GridRow>& table) {
    atomic_write_text(path, grid_csv(table));
}

/// Plot-ready HBIC path: one row per lambda step.
inline std::string path_csv(const PathResult& res) {
    std::string out = "lambda,hbic,n_mediators,n_interactions,df,loglik,converged\n";
    for (const PathStep& s : res.steps) {
        out += detail::format_double(s.lambda) + "," + detail::format_double(s.hbic) + "," +
               std::to_string(s.state.mediators.size()) + "," +
               std::to_string(s.state.interactions.size()) + "," + std::to_string(s.df) + "," +
               detail::format_double(s.loglik) + "," + (s.converged ? "1" : "0") + "\n";
    }
    return out;
}

inline void write_path_csv(const std::string& path, const PathResult& res) {
    atomic_write_text(path, path_csv(res));
}

}  // namespace xmint

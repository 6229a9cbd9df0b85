// Serialization: the shared state/density JSON schema, count tables as CSV
// or JSON, reconstruction results, analysis reports and plot-data export.
//
// State schema: {"n_qubits": n, "kind": "pure"|"density", "data": [[re, im], ...]}
// with density matrices flattened row-major.
// Count table CSV: header `setting,raw_counts,background,drift_normalizer`,
// settings as strings over {H,V,D,R}.

#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ghzw/analysis.hpp"
#include "ghzw/povm.hpp"
#include "ghzw/states.hpp"
#include "ghzw/tomography.hpp"

namespace ghzw {

using json = nlohmann::json;

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- states ---

inline json to_json(const PureState& psi) {
    json data = json::array();
    for (Eigen::Index i = 0; i < psi.dim(); ++i)
        data.push_back({psi.amplitudes(i).real(), psi.amplitudes(i).imag()});
    return {{"n_qubits", psi.n_qubits}, {"kind", "pure"}, {"data", std::move(data)}};
}

inline json to_json(const DensityMatrix& rho) {
    json data = json::array();
    for (Eigen::Index r = 0; r < rho.dim(); ++r)
        for (Eigen::Index c = 0; c < rho.dim(); ++c)
            data.push_back({rho.matrix(r, c).real(), rho.matrix(r, c).imag()});
    return {{"n_qubits", rho.n_qubits}, {"kind", "density"}, {"data", std::move(data)}};
}

using AnyState = std::variant<PureState, DensityMatrix>;

inline AnyState state_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n_qubits") || !j.contains("kind") || !j.contains("data"))
        throw io_error("state JSON must have n_qubits, kind and data fields");
    const int n = j.at("n_qubits").get<int>();
    const std::string kind = j.at("kind").get<std::string>();
    const auto& data = j.at("data");
    auto parse_cx = [](const json& e) {
        if (!e.is_array() || e.size() != 2) throw io_error("complex entries must be [re, im]");
        return cx(e[0].get<double>(), e[1].get<double>());
    };
    const Eigen::Index d = dim_for(n);
    if (kind == "pure") {
        if (static_cast<Eigen::Index>(data.size()) != d)
            throw io_error("pure state data length must be 2^n_qubits");
        Vec a(d);
        for (Eigen::Index i = 0; i < d; ++i)
            a(i) = parse_cx(data[static_cast<std::size_t>(i)]);
        return PureState(n, std::move(a));
    }
    if (kind == "density") {
        if (static_cast<Eigen::Index>(data.size()) != d * d)
            throw io_error("density data length must be 4^n_qubits");
        Mat m(d, d);
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c)
                m(r, c) = parse_cx(data[static_cast<std::size_t>(r * d + c)]);
        return DensityMatrix(n, std::move(m));
    }
    throw io_error("state kind must be \"pure\" or \"density\"");
}

inline DensityMatrix as_density(const AnyState& s) {
    if (std::holds_alternative<DensityMatrix>(s)) return std::get<DensityMatrix>(s);
    return DensityMatrix::from_pure(std::get<PureState>(s));
}

// --- filter outcome ---

inline json to_json(const FilterOutcome<PureState>& out) {
    return {{"success_probability", out.success_probability},
            {"state", to_json(out.output_state)},
            {"a_squared", out.a_squared}};
}

inline json to_json(const FilterOutcome<DensityMatrix>& out) {
    return {{"success_probability", out.success_probability},
            {"state", to_json(out.output_state)},
            {"a_squared", out.a_squared}};
}

// --- count tables ---

inline std::string counts_to_csv(const std::vector<CountRecord>& records) {
    std::ostringstream os;
    os.precision(17);
    os << "setting,raw_counts,background,drift_normalizer\n";
    for (const auto& r : records)
        os << setting_label(r.setting) << ',' << r.raw_counts << ',' << r.background << ','
           << r.drift_normalizer << '\n';
    return os.str();
}

inline std::vector<CountRecord> counts_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw io_error("count CSV is empty");
    auto strip = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
        return s;
    };
    if (strip(line) != "setting,raw_counts,background,drift_normalizer")
        throw io_error("count CSV header must be setting,raw_counts,background,drift_normalizer");
    std::vector<CountRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string setting, raw, bg, drift;
        if (!std::getline(ls, setting, ',') || !std::getline(ls, raw, ',') ||
            !std::getline(ls, bg, ',') || !std::getline(ls, drift))
            throw io_error("count CSV line " + std::to_string(lineno) + ": expected 4 fields");
        try {
            records.push_back({setting_from_label(setting), std::stoll(raw), std::stod(bg),
                               std::stod(strip(drift))});
        } catch (const std::exception& e) {
            throw io_error("count CSV line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

inline json counts_to_json(const std::vector<CountRecord>& records) {
    json arr = json::array();
    for (const auto& r : records)
        arr.push_back({{"setting", setting_label(r.setting)},
                       {"raw_counts", r.raw_counts},
                       {"background", r.background},
                       {"drift_normalizer", r.drift_normalizer}});
    return arr;
}

inline std::vector<CountRecord> counts_from_json(const json& j) {
    if (!j.is_array()) throw io_error("count JSON must be an array of records");
    std::vector<CountRecord> records;
    for (const auto& e : j) {
        CountRecord r;
        r.setting = setting_from_label(e.at("setting").get<std::string>());
        r.raw_counts = e.at("raw_counts").get<long long>();
        r.background = e.value("background", 0.0);
        r.drift_normalizer = e.value("drift_normalizer", 1.0);
        records.push_back(std::move(r));
    }
    return records;
}

// --- reconstruction / analysis ---

inline json to_json(const ReconstructionResult& r) {
    return {{"rho", to_json(r.rho)},
            {"log_likelihood", r.log_likelihood},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"residual", r.residual}};
}

inline json to_json(const UncertaintyReport& r) {
    return {{"point_estimate", r.point_estimate},
            {"std_dev", r.std_dev},
            {"n_trials", r.n_trials},
            {"n_failed", r.n_failed}};
}

inline json to_json(const ReferenceExperiment& ref) {
    return {{"description",
             "published three-photon realization (a^2 = 0.38); depends on that "
             "setup's lab noise, shown for comparison only"},
            {"a_squared", ref.a_squared},
            {"f_ghz_local_opt_in", {{"value", ref.f_ghz_g_in}, {"err", ref.f_ghz_g_in_err}}},
            {"f_w_local_opt_in", {{"value", ref.f_w_g_in}, {"err", ref.f_w_g_in_err}}},
            {"f_ghz_local_opt_out", {{"value", ref.f_ghz_g_out}, {"err", ref.f_ghz_g_out_err}}},
            {"f_w_local_opt_out", {{"value", ref.f_w_g_out}, {"err", ref.f_w_g_out_err}}}};
}

inline json to_json(const ConversionReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        json r = {{"statistic", row.statistic},
                  {"before", row.before.value},
                  {"after", row.after.value}};
        if (row.before.std_dev) r["before_std_dev"] = *row.before.std_dev;
        if (row.after.std_dev) r["after_std_dev"] = *row.after.std_dev;
        rows.push_back(std::move(r));
    }
    return {{"rows", std::move(rows)}, {"reference_experiment", to_json(report.reference)}};
}

inline std::string report_table(const ConversionReport& report) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    for (const auto& row : report.rows) {
        os << row.statistic << ": before=" << row.before.value;
        if (row.before.std_dev) os << " +/- " << *row.before.std_dev;
        os << " after=" << row.after.value;
        if (row.after.std_dev) os << " +/- " << *row.after.std_dev;
        os << '\n';
    }
    const auto& ref = report.reference;
    os << "reference (published three-photon experiment, a^2=" << ref.a_squared
       << "): ghz_local_opt " << ref.f_ghz_g_in << "->" << ref.f_ghz_g_out << ", w_local_opt "
       << ref.f_w_g_in << "->" << ref.f_w_g_out << " (comparison only)\n";
    return os.str();
}

// Bar-chart export: one line per matrix element with basis-string labels.
inline std::string plot_data_csv(const DensityMatrix& rho, bool da_basis = false) {
    Mat m = rho.matrix;
    if (da_basis) {
        Mat h1(2, 2);
        h1 << 1, 1, 1, -1;
        h1 /= std::sqrt(2.0);
        Mat h = Mat::Ones(1, 1);
        for (int q = 0; q < rho.n_qubits; ++q) {
            Mat next(h.rows() * 2, h.cols() * 2);
            for (Eigen::Index i = 0; i < h.rows(); ++i)
                for (Eigen::Index j = 0; j < h.cols(); ++j)
                    next.block(2 * i, 2 * j, 2, 2) = h(i, j) * h1;
            h.swap(next);
        }
        m = h * m * h;  // Hadamard is real symmetric and self-inverse
    }
    std::ostringstream os;
    os.precision(12);
    os << "row,col,real,imag,abs\n";
    const char one = da_basis ? 'A' : 'V';
    const char zero = da_basis ? 'D' : 'H';
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            os << index_label(r, rho.n_qubits, zero, one) << ','
               << index_label(c, rho.n_qubits, zero, one) << ',' << m(r, c).real() << ','
               << m(r, c).imag() << ',' << std::abs(m(r, c)) << '\n';
    return os.str();
}

// --- file helpers ---

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw io_error("write failed: " + path);
}

inline json load_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw io_error("invalid JSON in " + path + ": " + e.what());
    }
}

inline AnyState load_state(const std::string& path) { return state_from_json(load_json(path)); }

// Counts are loaded as CSV unless the content starts with a JSON array.
inline std::vector<CountRecord> load_counts(const std::string& path) {
    const std::string content = read_file(path);
    const auto first = content.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && content[first] == '[') {
        try {
            return counts_from_json(json::parse(content));
        } catch (const json::exception& e) {
            throw io_error("invalid count JSON in " + path + ": " + e.what());
        }
    }
    std::istringstream ss(content);
    return counts_from_csv(ss);
}

}  // namespace ghzw

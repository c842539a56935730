#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "krigreg/kriging.hpp"
#include "krigreg/regularizer.hpp"
#include "krigreg/testlab.hpp"
#include "krigreg/version.hpp"

namespace krigreg {

// Shortest decimal representation that parses back to the same double.
// Every number this library writes to CSV goes through here, which makes
// output files byte-stable and round-trips exact.
inline std::string format_double(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

inline double parse_double(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc() || result.ptr != last)
        throw std::invalid_argument("parse_double: not a number: '" + std::string(text) + "'");
    return value;
}

// FNV-1a over raw bytes; used to stamp outputs with point-set and config
// fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t hash = 0xcbf29ce484222325ull) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

inline std::string to_hex(std::uint64_t value) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

// Fingerprint of the exact training data: normalized locations then values,
// row by row, as raw doubles.
inline std::string point_set_hash(const TrainingSet& training) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (Eigen::Index i = 0; i < training.size(); ++i)
        for (Eigen::Index j = 0; j < training.dim(); ++j) {
            const double u = training.unit_locations()(i, j);
            hash = fnv1a64(&u, sizeof(u), hash);
        }
    for (Eigen::Index i = 0; i < training.size(); ++i) {
        const double w = training.values()[i];
        hash = fnv1a64(&w, sizeof(w), hash);
    }
    return to_hex(hash);
}

// Write-to-temp-then-rename so readers never observe a partial file.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline nlohmann::json domain_to_json(const DomainBox& domain) {
    nlohmann::json lower = nlohmann::json::array();
    nlohmann::json upper = nlohmann::json::array();
    for (Eigen::Index j = 0; j < domain.dim(); ++j) {
        lower.push_back(domain.lower()[j]);
        upper.push_back(domain.upper()[j]);
    }
    return {{"lower", lower}, {"upper", upper}};
}

inline DomainBox domain_from_json(const nlohmann::json& j) {
    const auto& lower = j.at("lower");
    const auto& upper = j.at("upper");
    Eigen::VectorXd lo(lower.size()), hi(upper.size());
    for (std::size_t i = 0; i < lower.size(); ++i) lo[static_cast<Eigen::Index>(i)] = lower[i];
    for (std::size_t i = 0; i < upper.size(); ++i) hi[static_cast<Eigen::Index>(i)] = upper[i];
    return DomainBox(lo, hi);
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i];
    return v;
}

// ---- model serialization ----------------------------------------------

inline nlohmann::json model_to_json(const KrigingModel& model) {
    const TrainingSet& training = model.training();
    nlohmann::json locations = nlohmann::json::array();
    for (Eigen::Index i = 0; i < training.size(); ++i)
        locations.push_back(vector_to_json(training.locations().row(i).transpose()));

    return nlohmann::json{
        {"format", "krigreg-model"},
        {"version", 1},
        {"tool_version", kVersion},
        {"domain", domain_to_json(training.domain())},
        {"locations", locations},
        {"values", vector_to_json(training.values())},
        {"theta", vector_to_json(model.params().theta())},
        {"p", vector_to_json(model.params().p())},
        {"kappa", model.kappa()},
        {"condition_norm", kConditionNorm},
    };
}

inline void save_model(const KrigingModel& model, const std::filesystem::path& path) {
    atomic_write_file(path, model_to_json(model).dump(2) + "\n");
}

inline KrigingModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "krigreg-model")
        throw std::invalid_argument("model file: missing or wrong 'format' field");
    const DomainBox domain = domain_from_json(j.at("domain"));
    const auto& locations_json = j.at("locations");
    Eigen::MatrixXd locations(locations_json.size(), domain.dim());
    for (std::size_t i = 0; i < locations_json.size(); ++i) {
        const Eigen::VectorXd row = vector_from_json(locations_json[i]);
        if (row.size() != domain.dim())
            throw std::invalid_argument("model file: location row " + std::to_string(i) +
                                        " has wrong dimension");
        locations.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    TrainingSet training(std::move(locations), vector_from_json(j.at("values")), domain);
    KernelParams params(vector_from_json(j.at("theta")), vector_from_json(j.at("p")));
    return KrigingModel::fit(std::move(training), std::move(params));
}

inline KrigingModel load_model(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("model file " + path.string() + ": " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("model file " + path.string() + ": " + e.what());
    }
}

// ---- CSV exports --------------------------------------------------------

// Grid CSV: header row, one "x1,x2,value" line per lattice node, x1-major.
inline std::string grid_to_csv(const testlab::GridField& grid) {
    std::string out = "x1,x2,value\n";
    for (int i = 0; i < grid.rows(); ++i)
        for (int j = 0; j < grid.cols(); ++j) {
            out += format_double(grid.x1_at(i));
            out += ',';
            out += format_double(grid.x2_at(j));
            out += ',';
            out += format_double(grid.values()(i, j));
            out += '\n';
        }
    return out;
}

// Trace CSV: iter, normalized iter, kappa, normalized kappa, then theta.
inline std::string trace_to_csv(const ConvergenceTrace& trace) {
    if (trace.empty()) throw std::invalid_argument("trace_to_csv: empty trace");
    const Eigen::Index dim = trace.entries().front().theta.size();
    std::string out = "iter,iter_norm,kappa,kappa_norm";
    for (Eigen::Index j = 0; j < dim; ++j) out += ",theta_" + std::to_string(j + 1);
    out += '\n';
    for (std::size_t i = 0; i < trace.entries().size(); ++i) {
        const TraceEntry& entry = trace.entries()[i];
        out += std::to_string(entry.iter);
        out += ',';
        out += format_double(trace.iter_norm(i));
        out += ',';
        out += format_double(entry.kappa);
        out += ',';
        out += format_double(trace.kappa_norm(i));
        for (Eigen::Index j = 0; j < dim; ++j) {
            out += ',';
            out += format_double(entry.theta[j]);
        }
        out += '\n';
    }
    return out;
}

// Points CSV (x1,...,xk,value) used by the fit command.
struct PointsCsv {
    Eigen::MatrixXd locations;
    Eigen::VectorXd values;
};

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline PointsCsv parse_points_csv(const std::string& content) {
    std::vector<std::vector<double>> rows;
    std::istringstream stream(content);
    std::string line;
    int line_no = 0;
    bool saw_first = false;
    Eigen::Index dim = -1;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<double> row;
        bool numeric = true;
        for (const std::string_view field : split_csv_line(line)) {
            try {
                row.push_back(parse_double(field));
            } catch (const std::invalid_argument&) {
                if (!saw_first) { numeric = false; break; }  // header row
                throw std::invalid_argument("points csv line " + std::to_string(line_no) +
                                            ": bad field '" + std::string(field) + "'");
            }
        }
        saw_first = true;
        if (!numeric) continue;
        if (row.size() < 2)
            throw std::invalid_argument("points csv line " + std::to_string(line_no) +
                                        ": need at least one coordinate and a value");
        if (dim == -1) dim = static_cast<Eigen::Index>(row.size()) - 1;
        if (static_cast<Eigen::Index>(row.size()) != dim + 1)
            throw std::invalid_argument("points csv line " + std::to_string(line_no) +
                                        ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("points csv: no data rows");

    PointsCsv result;
    result.locations.resize(static_cast<Eigen::Index>(rows.size()), dim);
    result.values.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index j = 0; j < dim; ++j)
            result.locations(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
        result.values[static_cast<Eigen::Index>(i)] = rows[i].back();
    }
    return result;
}

inline std::string points_to_csv(const TrainingSet& training) {
    std::string out;
    for (Eigen::Index j = 0; j < training.dim(); ++j)
        out += "x" + std::to_string(j + 1) + ",";
    out += "value\n";
    for (Eigen::Index i = 0; i < training.size(); ++i) {
        for (Eigen::Index j = 0; j < training.dim(); ++j) {
            out += format_double(training.locations()(i, j));
            out += ',';
        }
        out += format_double(training.values()[i]);
        out += '\n';
    }
    return out;
}

}  // namespace krigreg

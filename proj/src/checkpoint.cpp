#include "gapsoup/checkpoint.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "gapsoup/io.hpp"

namespace gapsoup {

void Checkpoint::validate() const {
    for (const auto& [name, p] : params) {
        std::size_t expect = 1;  // empty shape denotes a scalar
        for (std::size_t s : p.shape) expect *= s;
        if (p.data.size() != expect) {
            throw std::invalid_argument("checkpoint param " + name +
                                        ": data length does not match shape");
        }
        for (double v : p.data) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("checkpoint param " + name +
                                            ": non-finite value");
            }
        }
    }
}

Checkpoint wse(const Checkpoint& zs, const Checkpoint& ft, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("wse: alpha must lie in [0,1]");
    }
    if (zs.params.size() != ft.params.size()) {
        throw std::invalid_argument("wse: parameter key sets differ");
    }
    Checkpoint out;
    out.format_version = zs.format_version;
    auto it_ft = ft.params.begin();
    for (auto it_zs = zs.params.begin(); it_zs != zs.params.end(); ++it_zs, ++it_ft) {
        if (it_zs->first != it_ft->first) {
            throw std::invalid_argument("wse: parameter key sets differ at " + it_zs->first);
        }
        const TensorParam& a = it_zs->second;
        const TensorParam& b = it_ft->second;
        if (a.shape != b.shape) {
            throw std::invalid_argument("wse: shape mismatch for " + it_zs->first);
        }
        TensorParam mixed;
        mixed.shape = a.shape;
        mixed.data.resize(a.data.size());
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            mixed.data[i] = (1.0 - alpha) * a.data[i] + alpha * b.data[i];
        }
        out.params.emplace(it_zs->first, std::move(mixed));
    }
    out.meta["wse.alpha"] = format_double(alpha);
    out.meta["wse.parent_zs"] = zs.meta.count("digest") ? zs.meta.at("digest") : "zs";
    out.meta["wse.parent_ft"] = ft.meta.count("digest") ? ft.meta.at("digest") : "ft";
    return out;
}

MixReport select_alpha(const Checkpoint& zs, const Checkpoint& ft,
                       const std::vector<double>& grid,
                       const std::function<double(const Checkpoint&)>& evaluate) {
    if (grid.empty()) throw std::invalid_argument("select_alpha: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || grid[i] > 1.0) {
            throw std::invalid_argument("select_alpha: grid value outside [0,1]");
        }
        if (i > 0 && grid[i] <= grid[i - 1]) {
            throw std::invalid_argument("select_alpha: grid not strictly increasing");
        }
    }
    MixReport report;
    report.alphas = grid;
    report.metric_per_alpha.reserve(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double m;
        try {
            m = evaluate(wse(zs, ft, grid[i]));
        } catch (const std::exception& e) {
            throw std::runtime_error("select_alpha: callback failed at alpha=" +
                                     format_double(grid[i]) + ": " + e.what());
        }
        report.metric_per_alpha.push_back(m);
        if (m > report.metric_per_alpha[best]) best = i;
    }
    report.selected_alpha = grid[best];
    return report;
}

std::string mix_report_csv(const MixReport& report) {
    std::string out = "alpha,metric\n";
    for (std::size_t i = 0; i < report.alphas.size(); ++i) {
        out += format_double(report.alphas[i]) + "," +
               format_double(report.metric_per_alpha[i]) + "\n";
    }
    out += "# selected_alpha=" + format_double(report.selected_alpha) + "\n";
    return out;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    ckpt.validate();
    // Hand-rolled emitter: key order and float formatting are part of the
    // format (byte-identical reruns).
    std::string out = "{\n  \"format_version\": " + std::to_string(ckpt.format_version) +
                      ",\n  \"meta\": {";
    bool first = true;
    for (const auto& [k, v] : ckpt.meta) {
        out += first ? "\n" : ",\n";
        out += "    " + nlohmann::json(k).dump() + ": " + nlohmann::json(v).dump();
        first = false;
    }
    out += first ? "},\n" : "\n  },\n";
    out += "  \"params\": {";
    first = true;
    for (const auto& [name, p] : ckpt.params) {
        out += first ? "\n" : ",\n";
        out += "    " + nlohmann::json(name).dump() + ": {\"shape\": [";
        for (std::size_t i = 0; i < p.shape.size(); ++i) {
            if (i) out += ", ";
            out += std::to_string(p.shape[i]);
        }
        out += "], \"data\": [";
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            if (i) out += ", ";
            out += format_double(p.data[i]);
        }
        out += "]}";
        first = false;
    }
    out += first ? "}\n}\n" : "\n  }\n}\n";
    write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("checkpoint " + path + ": malformed document: " + e.what());
    }
    Checkpoint ckpt;
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
        throw std::runtime_error("checkpoint " + path + ": missing format_version");
    }
    ckpt.format_version = doc["format_version"].get<int>();
    if (ckpt.format_version != 1) {
        throw std::runtime_error("checkpoint " + path + ": unsupported format_version " +
                                 std::to_string(ckpt.format_version));
    }
    if (doc.contains("meta")) {
        for (const auto& [k, v] : doc["meta"].items()) {
            ckpt.meta[k] = v.get<std::string>();
        }
    }
    if (!doc.contains("params") || !doc["params"].is_object()) {
        throw std::runtime_error("checkpoint " + path + ": missing params");
    }
    for (const auto& [name, obj] : doc["params"].items()) {
        if (!obj.contains("shape") || !obj["shape"].is_array()) {
            throw std::runtime_error("checkpoint " + path + ": param " + name +
                                     " is missing its shape");
        }
        if (!obj.contains("data") || !obj["data"].is_array()) {
            throw std::runtime_error("checkpoint " + path + ": param " + name +
                                     " is missing its data");
        }
        TensorParam p;
        for (const auto& s : obj["shape"]) p.shape.push_back(s.get<std::size_t>());
        for (const auto& v : obj["data"]) {
            if (!v.is_number()) {
                throw std::runtime_error("checkpoint " + path + ": param " + name +
                                         " has a non-finite value");
            }
            p.data.push_back(v.get<double>());
        }
        ckpt.params.emplace(name, std::move(p));
    }
    ckpt.validate();
    return ckpt;
}

}  // namespace gapsoup

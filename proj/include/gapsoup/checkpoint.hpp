#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gapsoup {

struct TensorParam {
    std::vector<std::size_t> shape;
    std::vector<double> data;  // flat, size = product of shape
};

// Named-parameter model snapshot. std::map keeps iteration lexicographic
// by parameter name, which the file format and wse rely on.
struct Checkpoint {
    int format_version = 1;
    std::map<std::string, TensorParam> params;
    std::map<std::string, std::string> meta;

    void validate() const;  // shapes consistent, all values finite
};

// Weight-space ensemble: every parameter = (1-alpha)*zs + alpha*ft.
// meta records both parents and alpha.
Checkpoint wse(const Checkpoint& zs, const Checkpoint& ft, double alpha);

struct MixReport {
    std::vector<double> alphas;            // strictly increasing, in [0,1]
    std::vector<double> metric_per_alpha;  // same length
    double selected_alpha = 0.0;           // argmax, ties toward smallest alpha
};

// Evaluates the metric callback at every grid point; returns the full curve
// plus the argmax (smallest alpha on ties). Callback failures propagate with
// the offending alpha attached.
MixReport select_alpha(const Checkpoint& zs, const Checkpoint& ft,
                       const std::vector<double>& grid,
                       const std::function<double(const Checkpoint&)>& evaluate);

// CSV: header "alpha,metric", one row per point, "# selected_alpha=..." last.
std::string mix_report_csv(const MixReport& report);

// Self-describing JSON document; doubles carry 17 significant digits so the
// round trip is bit-exact.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gapsoup

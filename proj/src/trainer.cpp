#include "gapsoup/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gapsoup/io.hpp"
#include "gapsoup/rng.hpp"

namespace gapsoup {

namespace {

std::string activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "relu";
}

Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw std::invalid_argument("unknown activation: " + s);
}

}  // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be positive");
    if (vcr.epsilon <= 0.0) throw std::invalid_argument("vcr.epsilon must be positive");
    if (vcr.lambda_var < 0.0 || vcr.lambda_cov < 0.0) {
        throw std::invalid_argument("vcr lambdas must be nonnegative");
    }
}

MlpClassifier::MlpClassifier(std::size_t input_dim, std::size_t hidden_dim,
                             std::size_t n_classes, Activation act)
    : w1_(input_dim, hidden_dim),
      w2_(hidden_dim, n_classes),
      b1_(hidden_dim, 0.0),
      b2_(n_classes, 0.0),
      act_(act) {
    if (input_dim == 0 || hidden_dim == 0 || n_classes < 2) {
        throw std::invalid_argument("MlpClassifier: degenerate architecture");
    }
}

MlpClassifier MlpClassifier::random_init(std::size_t input_dim, std::size_t hidden_dim,
                                         std::size_t n_classes, Activation act,
                                         std::uint64_t seed) {
    MlpClassifier m(input_dim, hidden_dim, n_classes, act);
    SplitMix64 rng(seed);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
    for (double& v : m.w1_.data) v = rng.next_uniform(-lim1, lim1);
    const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden_dim + n_classes));
    for (double& v : m.w2_.data) v = rng.next_uniform(-lim2, lim2);
    return m;
}

Matrix MlpClassifier::penultimate(const Matrix& x) const {
    Matrix z = matmul(x, w1_);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t j = 0; j < z.cols; ++j) {
            const double s = z(i, j) + b1_[j];
            z(i, j) = act_ == Activation::Tanh ? std::tanh(s) : std::max(s, 0.0);
        }
    return z;
}

std::pair<Matrix, Matrix> MlpClassifier::forward(const Matrix& x) const {
    Matrix h = penultimate(x);
    Matrix logits = matmul(h, w2_);
    for (std::size_t i = 0; i < logits.rows; ++i)
        for (std::size_t j = 0; j < logits.cols; ++j) logits(i, j) += b2_[j];
    return {std::move(h), std::move(logits)};
}

Checkpoint MlpClassifier::to_checkpoint() const {
    Checkpoint ckpt;
    ckpt.params["layer1.weight"] = {{w1_.rows, w1_.cols}, w1_.data};
    ckpt.params["layer1.bias"] = {{b1_.size()}, b1_};
    ckpt.params["layer2.weight"] = {{w2_.rows, w2_.cols}, w2_.data};
    ckpt.params["layer2.bias"] = {{b2_.size()}, b2_};
    ckpt.meta["arch.activation"] = activation_name(act_);
    ckpt.meta["arch.input_dim"] = std::to_string(input_dim());
    ckpt.meta["arch.hidden_dim"] = std::to_string(hidden_dim());
    ckpt.meta["arch.n_classes"] = std::to_string(n_classes());
    return ckpt;
}

MlpClassifier MlpClassifier::from_checkpoint(const Checkpoint& ckpt) {
    for (const char* key :
         {"layer1.weight", "layer1.bias", "layer2.weight", "layer2.bias"}) {
        if (!ckpt.params.count(key)) {
            throw std::invalid_argument(std::string("checkpoint lacks parameter ") + key);
        }
    }
    const TensorParam& w1 = ckpt.params.at("layer1.weight");
    const TensorParam& w2 = ckpt.params.at("layer2.weight");
    if (w1.shape.size() != 2 || w2.shape.size() != 2 || w1.shape[1] != w2.shape[0]) {
        throw std::invalid_argument("checkpoint layer shapes are inconsistent");
    }
    Activation act = Activation::Tanh;
    if (ckpt.meta.count("arch.activation")) {
        act = activation_from_name(ckpt.meta.at("arch.activation"));
    }
    MlpClassifier m(w1.shape[0], w1.shape[1], w2.shape[1], act);
    m.w1_.data = w1.data;
    m.w2_.data = w2.data;
    m.b1_ = ckpt.params.at("layer1.bias").data;
    m.b2_ = ckpt.params.at("layer2.bias").data;
    if (m.b1_.size() != w1.shape[1] || m.b2_.size() != w2.shape[1]) {
        throw std::invalid_argument("checkpoint bias shapes are inconsistent");
    }
    return m;
}

std::vector<double*> MlpClassifier::param_blocks() {
    return {w1_.data.data(), b1_.data(), w2_.data.data(), b2_.data()};
}

std::vector<std::size_t> MlpClassifier::param_sizes() const {
    return {w1_.data.size(), b1_.size(), w2_.data.size(), b2_.size()};
}

std::pair<double, Matrix> cross_entropy(const Matrix& logits,
                                        const std::vector<std::size_t>& labels) {
    const std::size_t n = logits.rows, k = logits.cols;
    if (labels.size() != n) {
        throw std::invalid_argument("cross_entropy: label count mismatch");
    }
    Matrix grad(n, k);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= k) {
            throw std::invalid_argument("cross_entropy: label out of range at row " +
                                        std::to_string(i));
        }
        double mx = logits(i, 0);
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < k; ++j) denom += std::exp(logits(i, j) - mx);
        const double log_denom = std::log(denom);
        loss += log_denom - (logits(i, labels[i]) - mx);
        for (std::size_t j = 0; j < k; ++j) {
            const double p = std::exp(logits(i, j) - mx) / denom;
            grad(i, j) = (p - (j == labels[i] ? 1.0 : 0.0)) / static_cast<double>(n);
        }
    }
    return {loss / static_cast<double>(n), std::move(grad)};
}

double lr_at(std::size_t step, const TrainConfig& cfg, std::size_t total_steps) {
    const std::size_t warmup = std::min(cfg.warmup_steps, total_steps / 10);
    if (total_steps <= warmup) {
        throw std::invalid_argument("lr_at: total_steps must exceed warmup");
    }
    if (step > total_steps) {
        throw std::invalid_argument("lr_at: step beyond total_steps");
    }
    if (step < warmup) {
        return cfg.learning_rate * static_cast<double>(step) / static_cast<double>(warmup);
    }
    const double progress = static_cast<double>(step - warmup) /
                            static_cast<double>(total_steps - warmup);
    return cfg.learning_rate * 0.5 * (1.0 + std::cos(M_PI * progress));
}

void adamw_step(std::vector<double*>& params, const std::vector<std::size_t>& sizes,
                const std::vector<const double*>& grads, AdamWMoments& moments,
                std::size_t step_index, double lr, const AdamWConfig& cfg) {
    if (params.size() != sizes.size() || grads.size() != sizes.size()) {
        throw std::invalid_argument("adamw_step: block count mismatch");
    }
    if (step_index == 0) throw std::invalid_argument("adamw_step: step_index starts at 1");
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    if (moments.m.empty()) {
        moments.m.assign(total, 0.0);
        moments.v.assign(total, 0.0);
    }
    if (moments.m.size() != total) {
        throw std::invalid_argument("adamw_step: moment size mismatch");
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_index));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_index));
    std::size_t offset = 0;
    for (std::size_t b = 0; b < params.size(); ++b) {
        double* p = params[b];
        const double* g = grads[b];
        for (std::size_t i = 0; i < sizes[b]; ++i) {
            double& m = moments.m[offset + i];
            double& v = moments.v[offset + i];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g[i];
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p[i]);
        }
        offset += sizes[b];
    }
}

namespace {

std::vector<double> column_sums(const Matrix& a) {
    std::vector<double> s(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) s[j] += a(i, j);
    return s;
}

Matrix take_rows(const Matrix& a, const std::vector<std::size_t>& idx, std::size_t begin,
                 std::size_t end) {
    Matrix out(end - begin, a.cols);
    for (std::size_t r = begin; r < end; ++r)
        for (std::size_t j = 0; j < a.cols; ++j) out(r - begin, j) = a(idx[r], j);
    return out;
}

}  // namespace

TrainResult train(const LabeledDataset& data, const TrainConfig& cfg,
                  const Checkpoint& init, const LabeledDataset& heldout) {
    cfg.validate();
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("train: empty dataset");
    MlpClassifier model = MlpClassifier::from_checkpoint(init);
    if (model.input_dim() != data.features.cols) {
        throw std::invalid_argument("train: init checkpoint does not match data dimension");
    }

    const std::size_t batch = std::min(cfg.batch_size, n);
    const std::size_t steps_per_epoch = (n + batch - 1) / batch;
    const std::size_t total_steps = cfg.epochs * steps_per_epoch;

    SplitMix64 rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    AdamWMoments moments;
    std::vector<double*> blocks = model.param_blocks();
    const std::vector<std::size_t> sizes = model.param_sizes();

    TrainResult result;
    result.loss_curve.reserve(total_steps);

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates from the run's generator; the only source of randomness.
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = rng.next_below(i + 1);
            std::swap(order[i], order[j]);
        }
        for (std::size_t b0 = 0; b0 < n; b0 += batch, ++step) {
            const std::size_t b1 = std::min(b0 + batch, n);
            const Matrix x = take_rows(data.features, order, b0, b1);
            std::vector<std::size_t> y(b1 - b0);
            for (std::size_t r = b0; r < b1; ++r) y[r - b0] = data.labels[order[r]];

            auto [hidden, logits] = model.forward(x);
            auto [ce_value, dlogits] = cross_entropy(logits, y);

            double vcr_value = 0.0;
            Matrix dhidden = matmul(dlogits, model.w2_.transposed());
            if ((cfg.vcr.lambda_var > 0.0 || cfg.vcr.lambda_cov > 0.0) && x.rows >= 2) {
                LossValueAndGrad vcr = vcr_loss(hidden, cfg.vcr);
                vcr_value = vcr.value;
                for (std::size_t i = 0; i < dhidden.data.size(); ++i) {
                    dhidden.data[i] += vcr.grad.data[i];
                }
            }

            // Backprop through the activation.
            Matrix dz1 = std::move(dhidden);
            for (std::size_t i = 0; i < dz1.rows; ++i)
                for (std::size_t j = 0; j < dz1.cols; ++j) {
                    const double h = hidden(i, j);
                    dz1(i, j) *= model.activation() == Activation::Tanh
                                     ? 1.0 - h * h
                                     : (h > 0.0 ? 1.0 : 0.0);
                }

            const Matrix dw2 = matmul(hidden.transposed(), dlogits);
            const std::vector<double> db2 = column_sums(dlogits);
            const Matrix dw1 = matmul(x.transposed(), dz1);
            const std::vector<double> db1 = column_sums(dz1);

            const double total = ce_value + vcr_value;
            if (!std::isfinite(total)) {
                throw std::runtime_error("train: non-finite loss at step " +
                                         std::to_string(step));
            }
            const double lr = lr_at(step, cfg, total_steps);
            result.loss_curve.push_back({ce_value, vcr_value, total, lr});

            std::vector<const double*> grads = {dw1.data.data(), db1.data(),
                                                dw2.data.data(), db2.data()};
            adamw_step(blocks, sizes, grads, moments, step + 1, lr, cfg.optimizer);
        }
    }

    result.final = model.to_checkpoint();
    result.final.meta["train.seed"] = std::to_string(cfg.seed);
    result.final.meta["train.epochs"] = std::to_string(cfg.epochs);
    result.final.meta["train.lambda_var"] = format_double(cfg.vcr.lambda_var);
    result.final.meta["train.lambda_cov"] = format_double(cfg.vcr.lambda_cov);
    result.final.meta["train.features"] = "penultimate";
    result.final.meta["train.warmup_effective"] =
        std::to_string(std::min(cfg.warmup_steps, total_steps / 10));

    result.feature_snapshot.features = model.penultimate(heldout.features);
    result.feature_snapshot.label = heldout.domain.empty() ? "heldout" : heldout.domain;
    return result;
}

double accuracy(const Checkpoint& ckpt, const LabeledDataset& data) {
    const MlpClassifier model = MlpClassifier::from_checkpoint(ckpt);
    const auto [hidden, logits] = model.forward(data.features);
    (void)hidden;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < logits.cols; ++j)
            if (logits(i, j) > logits(i, arg)) arg = j;
        if (arg == data.labels[i]) ++correct;
    }
    return data.size() == 0 ? 0.0 : static_cast<double>(correct) / data.size();
}

std::string loss_curve_csv(const std::vector<LossPoint>& curve) {
    std::string out = "step,ce,vcr,total,lr\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out += std::to_string(i) + "," + format_double(curve[i].ce) + "," +
               format_double(curve[i].vcr) + "," + format_double(curve[i].total) + "," +
               format_double(curve[i].lr) + "\n";
    }
    return out;
}

}  // namespace gapsoup

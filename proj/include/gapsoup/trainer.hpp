#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gapsoup/checkpoint.hpp"
#include "gapsoup/dataset.hpp"
#include "gapsoup/diversity.hpp"
#include "gapsoup/matrix.hpp"
#include "gapsoup/vcr.hpp"

namespace gapsoup {

enum class Activation { Tanh, Relu };

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

struct TrainConfig {
    double learning_rate = 3e-3;
    std::size_t batch_size = 128;  // capped at dataset size
    std::size_t epochs = 10;
    std::size_t warmup_steps = 500;  // capped at 10% of total steps
    AdamWConfig optimizer;
    VcrParams vcr;
    std::uint64_t seed = 0;
    std::size_t hidden_dim = 32;
    Activation activation = Activation::Tanh;

    void validate() const;
};

// Two-layer MLP: input -> hidden (tanh or relu) -> class logits. The hidden
// activations are the "encoded features" consumed by VCR and the diversity
// metrics.
class MlpClassifier {
public:
    MlpClassifier(std::size_t input_dim, std::size_t hidden_dim, std::size_t n_classes,
                  Activation act);

    // Uniform +/- sqrt(6/(fan_in+fan_out)) initialization from the seeded
    // generator.
    static MlpClassifier random_init(std::size_t input_dim, std::size_t hidden_dim,
                                     std::size_t n_classes, Activation act,
                                     std::uint64_t seed);

    // Penultimate activations for a batch of inputs.
    Matrix penultimate(const Matrix& x) const;
    // (hidden activations, logits)
    std::pair<Matrix, Matrix> forward(const Matrix& x) const;

    Checkpoint to_checkpoint() const;
    static MlpClassifier from_checkpoint(const Checkpoint& ckpt);

    std::size_t input_dim() const { return w1_.rows; }
    std::size_t hidden_dim() const { return w1_.cols; }
    std::size_t n_classes() const { return w2_.cols; }
    Activation activation() const { return act_; }

    // Flat views used by the optimizer and gradient checks.
    std::vector<double*> param_blocks();
    std::vector<std::size_t> param_sizes() const;

    Matrix w1_, w2_;               // input x hidden, hidden x classes
    std::vector<double> b1_, b2_;

private:
    Activation act_;
};

// Mean negative log-softmax of the true class (max-subtraction stabilized).
// grad = (softmax - onehot)/N.
std::pair<double, Matrix> cross_entropy(const Matrix& logits,
                                        const std::vector<std::size_t>& labels);

// Linear warmup to learning_rate, then cosine decay to 0 at total_steps.
// The configured warmup is capped at 10% of total_steps.
double lr_at(std::size_t step, const TrainConfig& cfg, std::size_t total_steps);

struct AdamWMoments {
    std::vector<double> m, v;
};

// In-place decoupled-weight-decay update with bias-corrected moments.
// step_index starts at 1.
void adamw_step(std::vector<double*>& params, const std::vector<std::size_t>& sizes,
                const std::vector<const double*>& grads, AdamWMoments& moments,
                std::size_t step_index, double lr, const AdamWConfig& cfg);

struct LossPoint {
    double ce = 0.0;
    double vcr = 0.0;
    double total = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    Checkpoint final;
    std::vector<LossPoint> loss_curve;  // one point per optimizer step
    FeatureSet feature_snapshot;        // penultimate features of held-out data
};

// Deterministic fine-tuning: epochs * ceil(N/batch) steps of AdamW on
// L_CE + L_VCR, where VCR sees the penultimate activations of each
// mini-batch. Shuffling derives from cfg.seed only. The snapshot is taken
// on `heldout` with the final model.
TrainResult train(const LabeledDataset& data, const TrainConfig& cfg,
                  const Checkpoint& init, const LabeledDataset& heldout);

// Top-1 accuracy of a checkpointed classifier on a dataset.
double accuracy(const Checkpoint& ckpt, const LabeledDataset& data);

std::string loss_curve_csv(const std::vector<LossPoint>& curve);

}  // namespace gapsoup

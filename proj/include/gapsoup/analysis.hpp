#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapsoup/checkpoint.hpp"
#include "gapsoup/domain_synth.hpp"
#include "gapsoup/trainer.hpp"

namespace gapsoup {

// One fine-tuning run of the hyperparameter study: its recipe plus the
// measured diversity of held-out generated features and test accuracy on
// both domains.
struct SweepRecord {
    std::size_t run_id = 0;
    double learning_rate = 0.0;
    std::size_t batch_size = 0;
    std::size_t epochs = 0;
    double lambda_var = 0.0;
    double lambda_cov = 0.0;
    double d_mag = 0.0;
    double d_dir = 0.0;  // may be +inf
    double acc_real = 0.0;
    double acc_generated = 0.0;
};

struct SweepFailure {
    std::size_t run_id = 0;
    std::string message;
};

struct SweepResult {
    std::vector<SweepRecord> records;   // sorted by run_id
    std::vector<SweepFailure> failures;
};

// Cartesian grid of recipes. The default shape is 3 learning rates x
// 3 batch sizes x 5 epoch counts = 45 runs.
struct SweepGrid {
    std::vector<double> learning_rates = {3e-3, 1e-4, 3e-4};
    std::vector<std::size_t> batch_sizes = {32, 64, 128};
    std::vector<std::size_t> epoch_counts = {1, 2, 3, 5, 10};
    double lambda_var = 0.64;
    double lambda_cov = 0.04;
    std::size_t hidden_dim = 32;
    std::uint64_t master_seed = 0;

    std::size_t size() const {
        return learning_rates.size() * batch_sizes.size() * epoch_counts.size();
    }
};

struct CorrelationReport {
    double plcc_mag_vs_acc = 0.0;
    double plcc_dir_vs_acc = 0.0;
    std::size_t n_runs = 0;
    std::size_t n_excluded_inf = 0;  // +inf d_dir records dropped from the dir PLCC
};

// Sample Pearson correlation. Both lists need length >= 3 and nonzero
// variance.
double plcc(const std::vector<double>& x, const std::vector<double>& y);

// The reference ("zero-shot" stand-in): a briefly trained classifier on the
// real-domain train split. Every sweep run and every ensembling experiment
// fine-tunes from this same initialization.
Checkpoint train_reference(const DomainPair& pair, std::size_t hidden_dim,
                           std::uint64_t seed);

// Fine-tunes one grid point on the generated train split from `reference`,
// measuring diversity on the generated val split and accuracy on both test
// splits.
SweepRecord run_one(const DomainPair& pair, const Checkpoint& reference,
                    const SweepGrid& grid, std::size_t run_id, double lr,
                    std::size_t batch, std::size_t epochs);

// Runs the whole grid; individual failures are recorded, not fatal, as long
// as at least three runs succeed. jobs > 1 executes runs concurrently.
SweepResult run_sweep(const DomainSpec& spec, const SweepGrid& grid,
                      std::size_t jobs = 1);

CorrelationReport correlate(const std::vector<SweepRecord>& records);

// Exact header:
// run_id,learning_rate,batch_size,epochs,lambda_var,lambda_cov,d_mag,d_dir,acc_real,acc_generated
std::string sweep_csv(const std::vector<SweepRecord>& records);

}  // namespace gapsoup

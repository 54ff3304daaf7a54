#include "gapsoup/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gapsoup/io.hpp"
#include "gapsoup/rng.hpp"

namespace gapsoup {

double plcc(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("plcc: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("plcc: needs at least 3 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::invalid_argument("plcc: zero variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

Checkpoint train_reference(const DomainPair& pair, std::size_t hidden_dim,
                           std::uint64_t seed) {
    const std::size_t dim = pair.real_train.features.cols;
    std::size_t n_classes = 0;
    for (std::size_t label : pair.real_train.labels) {
        n_classes = std::max(n_classes, label + 1);
    }
    const std::uint64_t init_seed = SplitMix64::split(seed, 0x5EEDULL);
    const Checkpoint init =
        MlpClassifier::random_init(dim, hidden_dim, n_classes, Activation::Tanh, init_seed)
            .to_checkpoint();
    // Deliberately brief: the reference should carry the real-domain class
    // structure without being fully adapted, like a generic pretrained model.
    TrainConfig cfg;
    cfg.learning_rate = 3e-3;
    cfg.batch_size = 128;
    cfg.epochs = 1;
    cfg.warmup_steps = 0;
    cfg.seed = SplitMix64::split(seed, 0xBA5EULL);
    cfg.hidden_dim = hidden_dim;
    TrainResult result = train(pair.real_train, cfg, init, pair.real_val);
    Checkpoint out = result.final;
    out.meta["role"] = "reference";
    return out;
}

SweepRecord run_one(const DomainPair& pair, const Checkpoint& reference,
                    const SweepGrid& grid, std::size_t run_id, double lr,
                    std::size_t batch, std::size_t epochs) {
    TrainConfig cfg;
    cfg.learning_rate = lr;
    cfg.batch_size = batch;
    cfg.epochs = epochs;
    cfg.warmup_steps = 500;
    cfg.hidden_dim = grid.hidden_dim;
    cfg.vcr.lambda_var = grid.lambda_var;
    cfg.vcr.lambda_cov = grid.lambda_cov;
    cfg.seed = SplitMix64::split(grid.master_seed, run_id);

    TrainResult result = train(pair.gen_train, cfg, reference, pair.gen_val);
    const DiversityReport div = diversity_report(result.feature_snapshot);

    SweepRecord rec;
    rec.run_id = run_id;
    rec.learning_rate = lr;
    rec.batch_size = batch;
    rec.epochs = epochs;
    rec.lambda_var = grid.lambda_var;
    rec.lambda_cov = grid.lambda_cov;
    rec.d_mag = div.d_mag;
    rec.d_dir = div.d_dir;
    rec.acc_real = accuracy(result.final, pair.real_test);
    rec.acc_generated = accuracy(result.final, pair.gen_test);
    return rec;
}

SweepResult run_sweep(const DomainSpec& spec, const SweepGrid& grid, std::size_t jobs) {
    if (grid.size() == 0) throw std::invalid_argument("run_sweep: empty grid");
    const DomainPair pair = generate_pair(spec);
    const Checkpoint reference = train_reference(pair, grid.hidden_dim, grid.master_seed);

    struct Point {
        std::size_t run_id;
        double lr;
        std::size_t batch;
        std::size_t epochs;
    };
    std::vector<Point> points;
    std::size_t run_id = 0;
    for (double lr : grid.learning_rates)
        for (std::size_t batch : grid.batch_sizes)
            for (std::size_t epochs : grid.epoch_counts)
                points.push_back({run_id++, lr, batch, epochs});

    SweepResult result;
    std::mutex mu;
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= points.size()) break;
            const Point& pt = points[i];
            try {
                SweepRecord rec =
                    run_one(pair, reference, grid, pt.run_id, pt.lr, pt.batch, pt.epochs);
                std::lock_guard<std::mutex> lock(mu);
                result.records.push_back(rec);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                result.failures.push_back({pt.run_id, e.what()});
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::sort(result.records.begin(), result.records.end(),
              [](const SweepRecord& a, const SweepRecord& b) { return a.run_id < b.run_id; });
    std::sort(result.failures.begin(), result.failures.end(),
              [](const SweepFailure& a, const SweepFailure& b) { return a.run_id < b.run_id; });
    if (result.records.size() < 3) {
        throw std::runtime_error("run_sweep: fewer than 3 runs succeeded (" +
                                 std::to_string(result.records.size()) + " of " +
                                 std::to_string(points.size()) + ")");
    }
    return result;
}

CorrelationReport correlate(const std::vector<SweepRecord>& records) {
    std::vector<double> mag, acc_for_mag, dir, acc_for_dir;
    std::size_t excluded = 0;
    for (const SweepRecord& r : records) {
        mag.push_back(r.d_mag);
        acc_for_mag.push_back(r.acc_real);
        if (std::isfinite(r.d_dir)) {
            dir.push_back(r.d_dir);
            acc_for_dir.push_back(r.acc_real);
        } else {
            ++excluded;
        }
    }
    if (mag.size() < 3 || dir.size() < 3) {
        throw std::invalid_argument("correlate: needs at least 3 usable records");
    }
    CorrelationReport report;
    report.plcc_mag_vs_acc = plcc(mag, acc_for_mag);
    report.plcc_dir_vs_acc = plcc(dir, acc_for_dir);
    report.n_runs = records.size();
    report.n_excluded_inf = excluded;
    return report;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::string out =
        "run_id,learning_rate,batch_size,epochs,lambda_var,lambda_cov,"
        "d_mag,d_dir,acc_real,acc_generated\n";
    for (const SweepRecord& r : records) {
        out += std::to_string(r.run_id) + "," + format_double(r.learning_rate) + "," +
               std::to_string(r.batch_size) + "," + std::to_string(r.epochs) + "," +
               format_double(r.lambda_var) + "," + format_double(r.lambda_cov) + "," +
               format_double(r.d_mag) + "," +
               (std::isfinite(r.d_dir) ? format_double(r.d_dir) : std::string("inf")) +
               "," + format_double(r.acc_real) + "," + format_double(r.acc_generated) +
               "\n";
    }
    return out;
}

}  // namespace gapsoup

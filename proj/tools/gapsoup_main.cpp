// gapsoup: synthetic-domain training toolkit.
//
// Subcommands wire the pipeline together: gen-data -> train -> ensemble,
// plus metrics / frechet / experiment for the measurement side. Standard
// output carries results; standard error carries logs and warnings.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gapsoup/analysis.hpp"
#include "gapsoup/checkpoint.hpp"
#include "gapsoup/diversity.hpp"
#include "gapsoup/domain_synth.hpp"
#include "gapsoup/io.hpp"
#include "gapsoup/rng.hpp"
#include "gapsoup/trainer.hpp"
#include "gapsoup/vcr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gapsoup;

namespace {

constexpr const char* kVersion = "0.1.0";

json load_config(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config " + path + ": " + e.what());
    }
}

// GAPSOUP_SEED overrides every config seed (CI hook).
std::uint64_t effective_seed(std::uint64_t config_seed) {
    if (const char* env = std::getenv("GAPSOUP_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') {
            throw std::runtime_error("GAPSOUP_SEED is not an integer");
        }
        return v;
    }
    return config_seed;
}

std::string timestamp_utc() {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::string& dir_or_path, const std::string& command,
                    const json& config, std::uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["config_digest"] = hex_digest(config.dump());
    m["seed"] = seed;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["toolkit_version"] = kVersion;
    m["timestamp"] = timestamp_utc();
    write_file_atomic(dir_or_path, m.dump(2) + "\n");
}

DomainSpec parse_domain_spec(const json& cfg) {
    DomainSpec spec;
    spec.n_classes = cfg.value("n_classes", spec.n_classes);
    spec.dim = cfg.value("dim", spec.dim);
    spec.samples_per_class = cfg.value("samples_per_class", spec.samples_per_class);
    spec.gap = cfg.value("gap", spec.gap);
    spec.nuisance_dims = cfg.value("nuisance_dims", spec.nuisance_dims);
    spec.noise_sigma = cfg.value("noise_sigma", spec.noise_sigma);
    spec.nuisance_jitter = cfg.value("nuisance_jitter", spec.nuisance_jitter);
    spec.seed = effective_seed(cfg.value("seed", spec.seed));
    spec.validate();
    return spec;
}

TrainConfig parse_train_config(const json& cfg) {
    TrainConfig tc;
    tc.learning_rate = cfg.value("learning_rate", tc.learning_rate);
    tc.batch_size = cfg.value("batch_size", tc.batch_size);
    tc.epochs = cfg.value("epochs", tc.epochs);
    tc.warmup_steps = cfg.value("warmup_steps", tc.warmup_steps);
    tc.hidden_dim = cfg.value("hidden_dim", tc.hidden_dim);
    tc.seed = effective_seed(cfg.value("seed", tc.seed));
    const std::string act = cfg.value("activation", std::string("tanh"));
    if (act == "tanh") {
        tc.activation = Activation::Tanh;
    } else if (act == "relu") {
        tc.activation = Activation::Relu;
    } else {
        throw std::runtime_error("config: unknown activation " + act);
    }
    tc.vcr.lambda_var = cfg.value("lambda_var", 0.0);
    tc.vcr.lambda_cov = cfg.value("lambda_cov", 0.0);
    tc.vcr.epsilon = cfg.value("epsilon", tc.vcr.epsilon);
    if (cfg.contains("optimizer")) {
        const json& opt = cfg["optimizer"];
        tc.optimizer.beta1 = opt.value("beta1", tc.optimizer.beta1);
        tc.optimizer.beta2 = opt.value("beta2", tc.optimizer.beta2);
        tc.optimizer.eps = opt.value("eps", tc.optimizer.eps);
        tc.optimizer.weight_decay = opt.value("weight_decay", tc.optimizer.weight_decay);
    }
    tc.validate();
    return tc;
}

void warn_offgrid_lambdas(const TrainConfig& tc) {
    const std::vector<double> var_grid = {0.0, 0.08, 0.16, 0.32, 0.64, 1.28};
    const std::vector<double> cov_grid = {0.0, 0.01, 0.02, 0.04, 0.08, 0.16};
    auto on_grid = [](double v, const std::vector<double>& grid) {
        for (double g : grid)
            if (std::fabs(v - g) < 1e-12) return true;
        return false;
    };
    if (!on_grid(tc.vcr.lambda_var, var_grid)) {
        std::cerr << "warning: lambda_var=" << tc.vcr.lambda_var
                  << " is outside the documented grid {0.08,0.16,0.32,0.64,1.28}\n";
    }
    if (!on_grid(tc.vcr.lambda_cov, cov_grid)) {
        std::cerr << "warning: lambda_cov=" << tc.vcr.lambda_cov
                  << " is outside the documented grid {0.01,0.02,0.04,0.08,0.16}\n";
    }
}

std::string split_path(const std::string& dir, const std::string& domain,
                       const std::string& split, const std::string& ext) {
    return (fs::path(dir) / (domain + "_" + split + ext)).string();
}

LabeledDataset load_split(const std::string& dir, const std::string& domain,
                          const std::string& split) {
    LabeledDataset ds = load_dataset(split_path(dir, domain, split, ".features"),
                                     split_path(dir, domain, split, ".labels"));
    ds.split = split;
    return ds;
}

int cmd_gen_data(const std::string& config_path, const std::string& out_dir) {
    const json cfg = load_config(config_path);
    const DomainSpec spec = parse_domain_spec(cfg);
    fs::create_directories(out_dir);
    const DomainPair pair = generate_pair(spec);

    std::vector<std::string> outputs;
    auto emit = [&](const LabeledDataset& ds) {
        const std::string f = split_path(out_dir, ds.domain, ds.split, ".features");
        const std::string l = split_path(out_dir, ds.domain, ds.split, ".labels");
        save_dataset(ds, f, l);
        outputs.push_back(f);
        outputs.push_back(l);
    };
    emit(pair.real_train);
    emit(pair.real_val);
    emit(pair.real_test);
    emit(pair.gen_train);
    emit(pair.gen_val);
    emit(pair.gen_test);
    write_manifest((fs::path(out_dir) / "manifest.json").string(), "gen-data", cfg,
                   spec.seed, {config_path}, outputs);
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_path, const std::string& domain,
              const std::string& init_path) {
    const json cfg = load_config(config_path);
    const TrainConfig tc = parse_train_config(cfg);
    warn_offgrid_lambdas(tc);

    const LabeledDataset train_data = load_split(data_dir, domain, "train");
    const LabeledDataset heldout = load_split(data_dir, domain, "val");

    std::size_t n_classes = 0;
    for (std::size_t label : train_data.labels) n_classes = std::max(n_classes, label + 1);

    Checkpoint init;
    std::vector<std::string> inputs = {config_path, data_dir};
    if (!init_path.empty()) {
        init = load_checkpoint(init_path);
        inputs.push_back(init_path);
    } else {
        init = MlpClassifier::random_init(train_data.features.cols, tc.hidden_dim,
                                          n_classes, tc.activation,
                                          SplitMix64::split(tc.seed, 0x5EEDULL))
                   .to_checkpoint();
    }

    TrainResult result = train(train_data, tc, init, heldout);
    result.final.meta["train.domain"] = domain;

    save_checkpoint(result.final, out_path);
    const std::string loss_path = out_path + ".loss.csv";
    write_file_atomic(loss_path, loss_curve_csv(result.loss_curve));
    const std::string snap_path = out_path + ".features";
    save_feature_set(result.feature_snapshot, snap_path);
    write_manifest(out_path + ".manifest.json", "train", cfg, tc.seed, inputs,
                   {out_path, loss_path, snap_path});
    return 0;
}

std::vector<double> parse_grid(const std::string& grid_arg) {
    std::vector<double> grid;
    if (grid_arg.empty()) {
        for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
        return grid;
    }
    std::string token;
    std::istringstream ss(grid_arg);
    while (std::getline(ss, token, ',')) grid.push_back(std::stod(token));
    return grid;
}

int cmd_ensemble(const std::string& zs_path, const std::string& ft_path, double alpha,
                 bool has_alpha, const std::string& search_dir,
                 const std::string& grid_arg, const std::string& out_path) {
    const Checkpoint zs = load_checkpoint(zs_path);
    const Checkpoint ft = load_checkpoint(ft_path);
    json pseudo_cfg;
    pseudo_cfg["zs"] = zs_path;
    pseudo_cfg["ft"] = ft_path;

    if (has_alpha) {
        const Checkpoint mixed = wse(zs, ft, alpha);
        save_checkpoint(mixed, out_path);
        pseudo_cfg["alpha"] = alpha;
        write_manifest(out_path + ".manifest.json", "ensemble", pseudo_cfg, 0,
                       {zs_path, ft_path}, {out_path});
        return 0;
    }

    if (search_dir.empty()) {
        throw std::runtime_error("ensemble: need either --alpha or --search <data-dir>");
    }
    const LabeledDataset val = load_split(search_dir, "real", "val");
    const std::vector<double> grid = parse_grid(grid_arg);
    const MixReport report = select_alpha(
        zs, ft, grid, [&](const Checkpoint& c) { return 100.0 * accuracy(c, val); });

    const std::string csv_path = out_path + ".mix.csv";
    write_file_atomic(csv_path, mix_report_csv(report));
    const Checkpoint winner = wse(zs, ft, report.selected_alpha);
    save_checkpoint(winner, out_path);
    pseudo_cfg["grid"] = grid;
    pseudo_cfg["search"] = search_dir;
    write_manifest(out_path + ".manifest.json", "ensemble", pseudo_cfg, 0,
                   {zs_path, ft_path, search_dir}, {out_path, csv_path});
    std::printf("selected_alpha=%s\n", format_double(report.selected_alpha).c_str());
    return 0;
}

int cmd_metrics(const std::string& features_path) {
    const FeatureSet fs_in = load_feature_set(features_path);
    const DiversityReport r = diversity_report(fs_in);
    std::printf("d_mag=%s\n", format_double(r.d_mag).c_str());
    std::printf("d_dir=%s\n",
                std::isfinite(r.d_dir) ? format_double(r.d_dir).c_str() : "inf");
    std::printf("n=%zu\n", r.n);
    std::printf("d=%zu\n", r.d);
    return 0;
}

int cmd_frechet(const std::string& path_a, const std::string& path_b) {
    const FeatureSet a = load_feature_set(path_a);
    const FeatureSet b = load_feature_set(path_b);
    std::printf("%.6f\n", frechet_distance(a, b));
    return 0;
}

SweepGrid parse_sweep_grid(const json& cfg, std::uint64_t master_seed) {
    SweepGrid grid;
    if (cfg.contains("learning_rates")) {
        grid.learning_rates = cfg["learning_rates"].get<std::vector<double>>();
    }
    if (cfg.contains("batch_sizes")) {
        grid.batch_sizes = cfg["batch_sizes"].get<std::vector<std::size_t>>();
    }
    if (cfg.contains("epoch_counts")) {
        grid.epoch_counts = cfg["epoch_counts"].get<std::vector<std::size_t>>();
    }
    grid.lambda_var = cfg.value("lambda_var", 0.0);
    grid.lambda_cov = cfg.value("lambda_cov", 0.0);
    grid.hidden_dim = cfg.value("hidden_dim", grid.hidden_dim);
    grid.master_seed = master_seed;
    return grid;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   std::size_t jobs) {
    const json cfg = load_config(config_path);
    const std::uint64_t master_seed = effective_seed(cfg.value("seed", 0ULL));
    DomainSpec spec = cfg.contains("data") ? parse_domain_spec(cfg["data"]) : DomainSpec{};
    if (!cfg.contains("data") || !cfg["data"].contains("seed")) {
        spec.seed = effective_seed(master_seed);
    }
    SweepGrid grid = parse_sweep_grid(cfg.contains("grid") ? cfg["grid"] : json::object(),
                                      master_seed);
    if (grid.size() < 3) {
        throw std::runtime_error("experiment: grid of " + std::to_string(grid.size()) +
                                 " runs cannot support a correlation; need >= 3");
    }

    const SweepResult sweep = run_sweep(spec, grid, jobs);
    const CorrelationReport report = correlate(sweep.records);

    fs::create_directories(out_dir);
    const std::string csv_path = (fs::path(out_dir) / "sweep.csv").string();
    write_file_atomic(csv_path, sweep_csv(sweep.records));

    std::string corr = "plcc_mag_vs_acc=" + format_double(report.plcc_mag_vs_acc) + "\n";
    corr += "plcc_dir_vs_acc=" + format_double(report.plcc_dir_vs_acc) + "\n";
    corr += "n_runs=" + std::to_string(report.n_runs) + "\n";
    corr += "n_excluded_inf=" + std::to_string(report.n_excluded_inf) + "\n";
    corr += "n_failed=" + std::to_string(sweep.failures.size()) + "\n";
    const std::string corr_path = (fs::path(out_dir) / "correlation.txt").string();
    write_file_atomic(corr_path, corr);

    for (const SweepFailure& f : sweep.failures) {
        std::cerr << "warning: run " << f.run_id << " failed: " << f.message << "\n";
    }
    write_manifest((fs::path(out_dir) / "manifest.json").string(), "experiment", cfg,
                   master_seed, {config_path}, {csv_path, corr_path});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gapsoup: domain-gap regularization toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_dir, out_path, domain = "generated";
    std::string init_path, zs_path, ft_path, search_dir, grid_arg;
    std::string features_a, features_b;
    double alpha = 0.0;
    std::size_t jobs = 1;

    auto* gen = app.add_subcommand("gen-data", "generate a paired two-domain dataset");
    gen->add_option("--config", config_path, "DomainSpec config (json)")->required();
    gen->add_option("--out", out_dir, "output directory")->required();

    auto* tr = app.add_subcommand("train", "fine-tune the classifier");
    tr->add_option("--config", config_path, "TrainConfig (json)")->required();
    tr->add_option("--data", data_dir, "dataset directory from gen-data")->required();
    tr->add_option("--out", out_path, "output checkpoint path")->required();
    tr->add_option("--domain", domain, "training domain (generated|real)");
    tr->add_option("--init", init_path, "initial checkpoint (default: seeded random)");

    auto* en = app.add_subcommand("ensemble", "weight-space ensemble of two checkpoints");
    en->add_option("--zs", zs_path, "reference checkpoint")->required();
    en->add_option("--ft", ft_path, "fine-tuned checkpoint")->required();
    auto* alpha_opt = en->add_option("--alpha", alpha, "fixed mixing coefficient");
    en->add_option("--search", search_dir, "grid-search alpha on this dataset dir");
    en->add_option("--grid", grid_arg, "comma-separated alpha grid (default 0,0.1,...,1)");
    en->add_option("--out", out_path, "output checkpoint path")->required();

    auto* me = app.add_subcommand("metrics", "diversity metrics of a feature file");
    me->add_option("features", features_a, "feature file")->required();

    auto* fr = app.add_subcommand("frechet", "Frechet distance between two feature files");
    fr->add_option("a", features_a, "feature file A")->required();
    fr->add_option("b", features_b, "feature file B")->required();

    auto* ex = app.add_subcommand("experiment", "hyperparameter sweep + correlation study");
    ex->add_option("--config", config_path, "sweep config (json)")->required();
    ex->add_option("--out", out_dir, "output directory")->required();
    ex->add_option("--jobs", jobs, "concurrent sweep runs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(config_path, out_dir);
        if (tr->parsed()) return cmd_train(config_path, data_dir, out_path, domain, init_path);
        if (en->parsed()) {
            return cmd_ensemble(zs_path, ft_path, alpha, alpha_opt->count() > 0,
                                search_dir, grid_arg, out_path);
        }
        if (me->parsed()) return cmd_metrics(features_a);
        if (fr->parsed()) return cmd_frechet(features_a, features_b);
        if (ex->parsed()) return cmd_experiment(config_path, out_dir, jobs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

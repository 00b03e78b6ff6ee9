// debias: estimate a model's target-distribution risk from spatially biased
// samples by importance reweighting, and run the synthetic benchmark suite.
#include <cstdio>
#include <cstdlib>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "debias/csv_io.hpp"
#include "debias/estimators.hpp"
#include "debias/experiment.hpp"
#include "debias/json_io.hpp"
#include "debias/kde.hpp"
#include "debias/rng.hpp"

namespace fs = std::filesystem;
using namespace debias;

namespace {

std::optional<std::uint64_t> seed_from_env() {
    const char* raw = std::getenv("DEBIAS_SEED");
    if (raw == nullptr || *raw == '\0')
        return std::nullopt;
    std::uint64_t value = 0;
    const char* end = raw;
    while (*end != '\0')
        ++end;
    auto [ptr, ec] = std::from_chars(raw, end, value);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument(std::string("DEBIAS_SEED is not an unsigned integer: '") +
                                    raw + "'");
    return value;
}

/// Seed precedence: --seed flag, then a master_seed key in the config file,
/// then DEBIAS_SEED, then the built-in default.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed,
                           const std::optional<std::uint64_t>& config_seed,
                           std::uint64_t fallback) {
    if (cli_seed)
        return *cli_seed;
    if (config_seed)
        return *config_seed;
    if (auto env = seed_from_env())
        return *env;
    return fallback;
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
    fs::create_directories(dir);
    return dir;
}

struct GenerateOpts {
    int k = 20;
    int n = 10000;
    std::optional<std::uint64_t> seed;
    std::string out = "points.csv";
};

int run_generate(const GenerateOpts& opt) {
    const std::uint64_t seed = resolve_seed(opt.seed, std::nullopt, ExperimentConfig{}.master_seed);
    const Domain domain{};

    const GaussianMixture g = GaussianMixture::random(opt.k, domain, 100.0,
                                                      derive_seed(seed, SeedStream::Mixture));
    const std::vector<Vec2> points =
        g.sample(static_cast<std::size_t>(opt.n), derive_seed(seed, SeedStream::EvalDraw));

    fs::path points_path(opt.out);
    fs::path mixture_path;
    if (points_path.extension() == ".csv") {
        if (points_path.has_parent_path())
            fs::create_directories(points_path.parent_path());
        mixture_path = points_path.parent_path() / "mixture.json";
    } else {
        const fs::path dir = ensure_out_dir(opt.out);
        points_path = dir / "points.csv";
        mixture_path = dir / "mixture.json";
    }

    write_points_csv(points_path.string(), points);
    write_json_file(mixture_path.string(), mixture_to_json(g));
    std::cout << "wrote " << points_path.string() << " (" << points.size() << " points) and "
              << mixture_path.string() << " (k=" << opt.k << ", seed=" << seed << ")\n";
    return 0;
}

struct EstimateOpts {
    std::string input;
    std::string mixture_path;
    std::string pair_path;
    std::vector<double> domain_edges; // x_min y_min x_max y_max
    std::string kde_rule = "silverman";
    std::string out;
};

Domain bounding_domain(const std::vector<Vec2>& points) {
    double x_min = points.front().x, x_max = points.front().x;
    double y_min = points.front().y, y_max = points.front().y;
    for (const Vec2& p : points) {
        x_min = std::min(x_min, p.x);
        x_max = std::max(x_max, p.x);
        y_min = std::min(y_min, p.y);
        y_max = std::max(y_max, p.y);
    }
    // The domain is half-open, so pad the upper edges to keep every point in.
    const double dx = std::max(x_max - x_min, 1.0) * 1e-9;
    const double dy = std::max(y_max - y_min, 1.0) * 1e-9;
    return Domain(x_min, y_min, x_max + dx, y_max + dy);
}

int run_estimate(const EstimateOpts& opt) {
    EvaluationSample sample;
    if (!opt.pair_path.empty()) {
        sample.points = read_points_csv(opt.input);
        const FieldPair pair = field_pair_from_json(load_json_file(opt.pair_path));
        sample.errors.reserve(sample.points.size());
        for (const Vec2& p : sample.points)
            sample.errors.push_back(pointwise_error(pair, p));
    } else {
        sample = read_points_errors_csv(opt.input);
    }
    if (sample.points.empty())
        throw std::invalid_argument(opt.input + ": no data rows");

    std::optional<GaussianMixture> g;
    if (!opt.mixture_path.empty())
        g = mixture_from_json(load_json_file(opt.mixture_path));

    Domain domain{};
    if (g)
        domain = g->domain();
    else if (!opt.domain_edges.empty())
        domain = Domain(opt.domain_edges[0], opt.domain_edges[1], opt.domain_edges[2],
                        opt.domain_edges[3]);
    else
        domain = bounding_domain(sample.points);

    const DensityFn p = [domain](Vec2 x) { return pdf_uniform(domain, x); };
    const BandwidthRule rule = parse_bandwidth_rule(opt.kde_rule);
    const KdeModel kde = kde_fit(sample.points, rule, domain);

    Json out;
    out["n"] = sample.points.size();
    out["domain"] = domain_to_json(domain);
    out["kde"] = Json{{"rule", to_string(rule)},
                      {"bandwidth_x", kde.bandwidth_x()},
                      {"bandwidth_y", kde.bandwidth_y()},
                      {"mass_in_domain", kde.mass_in_domain()}};
    out["mce"] = risk_estimate_to_json(mce(sample));
    if (g) {
        const GaussianMixture& gm = *g;
        out["ise"] = risk_estimate_to_json(
            ise(sample, p, [&gm](Vec2 x) { return gm.pdf(x); }));
    }
    out["ise_e"] = risk_estimate_to_json(ise_estimated(sample, p, kde));

    std::cout << out.dump(2) << '\n';
    if (!opt.out.empty())
        write_json_file(opt.out, out);
    return 0;
}

struct RunOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> n;
    std::optional<int> k;
    std::optional<int> jobs;
    std::vector<int> sizes;
    std::string out = ".";
};

LoadedConfig load_with_overrides(const RunOpts& opt) {
    LoadedConfig loaded;
    std::optional<std::uint64_t> config_seed;
    if (!opt.config_path.empty()) {
        const Json j = load_json_file(opt.config_path);
        loaded = config_from_json(j);
        if (j.contains("master_seed"))
            config_seed = loaded.experiment.master_seed;
    }
    ExperimentConfig& c = loaded.experiment;
    c.master_seed = resolve_seed(opt.seed, config_seed, c.master_seed);
    if (opt.runs)
        c.n_runs = *opt.runs;
    if (opt.n)
        c.n_eval = *opt.n;
    if (opt.k)
        c.mixture.k = *opt.k;
    if (opt.jobs)
        c.jobs = *opt.jobs;
    if (!opt.sizes.empty())
        loaded.sweep_sizes = opt.sizes;
    c.validate();
    return loaded;
}

std::string metric_cell(const ExperimentReport& report, EstimatorKind kind, bool mape) {
    for (const auto& m : report.metrics)
        if (m.kind == kind) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), mape ? "%10.2f" : "%10.4g", mape ? m.mape : m.rmse);
            return buf;
        }
    return std::string(9, ' ') + "-";
}

void print_experiment_summary(const ExperimentConfig& config, const ExperimentReport& report) {
    const std::string family = to_string(config.function_family);
    std::printf("%-10s %10s %10s %10s   (%zu runs, %zu excluded from MAPE)\n", "family", "mce",
                "ise", "ise_e", report.n_runs, report.excluded_from_mape);
    std::printf("%-10s %s %s %s   MAPE %%\n", family.c_str(),
                metric_cell(report, EstimatorKind::Mce, true).c_str(),
                metric_cell(report, EstimatorKind::Ise, true).c_str(),
                metric_cell(report, EstimatorKind::IseEstimated, true).c_str());
    std::printf("%-10s %s %s %s   RMSE\n", family.c_str(),
                metric_cell(report, EstimatorKind::Mce, false).c_str(),
                metric_cell(report, EstimatorKind::Ise, false).c_str(),
                metric_cell(report, EstimatorKind::IseEstimated, false).c_str());
}

int run_experiment_cmd(const RunOpts& opt) {
    const LoadedConfig loaded = load_with_overrides(opt);
    const fs::path dir = ensure_out_dir(opt.out);

    const ExperimentReport report = run_experiment(loaded.experiment);
    write_json_file((dir / "report.json").string(), report_to_json(loaded.experiment, report));
    write_trials_csv((dir / "trials.csv").string(), report);
    print_experiment_summary(loaded.experiment, report);
    return 0;
}

int run_sweep_cmd(const RunOpts& opt) {
    const LoadedConfig loaded = load_with_overrides(opt);
    const fs::path dir = ensure_out_dir(opt.out);

    const SweepReport report = sample_size_sweep(loaded.experiment, loaded.sweep_sizes);
    write_json_file((dir / "report.json").string(),
                    sweep_report_to_json(loaded.experiment, loaded.sweep_sizes, report));
    write_sweep_csv((dir / "sweep.csv").string(), report);

    std::printf("%8s %10s %14s %12s\n", "n", "estimator", "mean_bias", "mape%");
    for (const auto& row : report.rows)
        std::printf("%8d %10s %14.6g %12.4g\n", row.n, to_string(row.kind).c_str(), row.mean_bias,
                    row.mape);
    return 0;
}

void add_run_flags(CLI::App* cmd, RunOpts& opt, bool with_sizes) {
    cmd->add_option("--config", opt.config_path, "Experiment config JSON (strict keys)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "Master seed (overrides config and DEBIAS_SEED)");
    cmd->add_option("--runs", opt.runs, "Number of trials");
    cmd->add_option("--n", opt.n, "Evaluation sample size per trial");
    cmd->add_option("--k", opt.k, "Number of mixture components");
    cmd->add_option("--jobs", opt.jobs, "Worker cap (0 = hardware concurrency)");
    if (with_sizes)
        cmd->add_option("--sizes", opt.sizes, "Comma-separated sample sizes")->delimiter(',');
    cmd->add_option("--out", opt.out, "Output directory");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unbiased risk estimates from spatially biased samples"};
    app.require_subcommand(1);

    GenerateOpts gen;
    CLI::App* cmd_gen = app.add_subcommand("generate", "Draw a random mixture and sample it");
    cmd_gen->add_option("--k", gen.k, "Number of mixture components");
    cmd_gen->add_option("--n", gen.n, "Number of points to sample");
    cmd_gen->add_option("--seed", gen.seed, "Seed (falls back to DEBIAS_SEED)");
    cmd_gen->add_option("--out", gen.out, "points.csv path, or a directory");

    EstimateOpts est;
    CLI::App* cmd_est = app.add_subcommand("estimate", "Estimate risk from a sample file");
    cmd_est->add_option("--input", est.input, "CSV with columns x,y,error (or x,y with --pair)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_est->add_option("--mixture", est.mixture_path,
                        "Sampling-density mixture JSON; enables the ise estimate")
        ->check(CLI::ExistingFile);
    cmd_est->add_option("--pair", est.pair_path,
                        "Truth/predictor pair JSON; errors are computed from it")
        ->check(CLI::ExistingFile);
    cmd_est
        ->add_option("--domain", est.domain_edges,
                     "x_min,y_min,x_max,y_max (default: mixture domain or data bounding box)")
        ->delimiter(',')
        ->expected(4);
    cmd_est->add_option("--kde-rule", est.kde_rule, "Bandwidth rule: silverman or scott");
    cmd_est->add_option("--out", est.out, "Also write the report JSON here");

    RunOpts exp_opt;
    CLI::App* cmd_exp = app.add_subcommand("experiment", "Run seeded trials and report MAPE/RMSE");
    add_run_flags(cmd_exp, exp_opt, false);

    RunOpts sweep_opt;
    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "Bias vs evaluation sample size for each estimator");
    add_run_flags(cmd_sweep, sweep_opt, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_gen->parsed())
            return run_generate(gen);
        if (cmd_est->parsed())
            return run_estimate(est);
        if (cmd_exp->parsed())
            return run_experiment_cmd(exp_opt);
        return run_sweep_cmd(sweep_opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

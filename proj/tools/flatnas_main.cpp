// flatnas command-line front end: gen-data, train-supernet, search, oracle,
// tau, profile, sweep. Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flatnas/cli.hpp"
#include "flatnas/errors.hpp"
#include "flatnas/util.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out_dir;
    std::optional<std::string> metric;
    std::optional<double> gamma;
    std::optional<double> alpha;
    std::optional<std::string> sigmas;
    std::optional<std::string> preset;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file (flags override file values)");
    cmd->add_option("--seed", flags.seed, "root seed for all sub-streams");
    cmd->add_option("--jobs", flags.jobs, "max concurrent evaluations");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--metric", flags.metric, "search metric: flatness|accuracy|angle|combined");
    cmd->add_option("--gamma", flags.gamma, "combined-metric balance coefficient");
    cmd->add_option("--alpha", flags.alpha, "flatness depth-term weight");
    cmd->add_option("--sigmas", flags.sigmas, "comma-separated perturbation grid");
    cmd->add_option("--preset", flags.preset, "space preset: micro|nano201");
}

std::vector<double> parse_sigma_list(const std::string& csv) {
    std::vector<double> out;
    for (const auto& field : flatnas::split(csv, ',')) out.push_back(flatnas::parse_double(field));
    return out;
}

// precedence: flags > file > defaults
flatnas::RunConfig resolve_config(const CommonFlags& flags, bool apply_sigmas = true) {
    flatnas::RunConfig cfg;
    if (!flags.config_path.empty()) cfg = flatnas::load_run_config(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.jobs) cfg.jobs = *flags.jobs;
    if (flags.out_dir) cfg.output_dir = *flags.out_dir;
    if (flags.metric) cfg.metric.name = *flags.metric;
    if (flags.gamma) cfg.metric.gamma = *flags.gamma;
    if (flags.alpha) cfg.flatness.alpha = *flags.alpha;
    if (flags.sigmas && apply_sigmas) cfg.flatness.sigmas = parse_sigma_list(*flags.sigmas);
    if (flags.preset) cfg.space_preset = *flags.preset;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flatness-guided neural architecture search at desk scale"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string dataset_path, checkpoint_path, truth_path, scores_path;
    std::string genotype_str, sweep_param;
    std::string sweep_values;
    int oracle_epochs = 0;
    int seeds_per_arch = 1;
    std::size_t max_archs = 0;
    int profile_replicates = 16;

    CLI::App* gen = app.add_subcommand("gen-data", "generate the dataset CSV");
    add_common_flags(gen, flags);

    CLI::App* train = app.add_subcommand("train-supernet", "train the weight-sharing supernet");
    add_common_flags(train, flags);
    train->add_option("--data", dataset_path, "dataset CSV (default <out>/dataset.csv)");

    CLI::App* search = app.add_subcommand("search", "evolutionary search over genotypes");
    add_common_flags(search, flags);
    search->add_option("--data", dataset_path, "dataset CSV");
    search->add_option("--ckpt", checkpoint_path, "supernet checkpoint (default <out>/supernet.ckpt)");

    CLI::App* oracle = app.add_subcommand("oracle", "train every architecture from scratch");
    add_common_flags(oracle, flags);
    oracle->add_option("--data", dataset_path, "dataset CSV");
    oracle->add_option("--epochs", oracle_epochs, "from-scratch training epochs (default: optimizer.epochs)");
    oracle->add_option("--seeds-per-arch", seeds_per_arch, "seeds averaged per architecture");
    oracle->add_option("--max-archs", max_archs,
                       "oracle only a seeded sample of this many genotypes (0 = all)");

    CLI::App* tau = app.add_subcommand("tau", "Kendall's Tau between scores and ground truth");
    add_common_flags(tau, flags);
    tau->add_option("scores", scores_path, "score CSV")->required();
    tau->add_option("truth", truth_path, "ground-truth CSV")->required();

    CLI::App* profile = app.add_subcommand("profile", "loss-curvature profile of one genotype");
    add_common_flags(profile, flags);
    profile->add_option("genotype", genotype_str, "genotype string, e.g. skip|zeroize|skip")
        ->required();
    profile->add_option("--data", dataset_path, "dataset CSV");
    profile->add_option("--ckpt", checkpoint_path, "supernet checkpoint");
    profile->add_option("--replicates", profile_replicates, "noise replicates per sigma");

    CLI::App* sweep = app.add_subcommand("sweep", "tau across alpha/gamma/sigma_grid values");
    add_common_flags(sweep, flags);
    sweep->add_option("parameter", sweep_param, "alpha | gamma | sigma_grid")->required();
    sweep->add_option("--values", sweep_values,
                      "comma-separated values; sigma grids use '|' inside a value")
        ->required();
    sweep->add_option("--data", dataset_path, "dataset CSV");
    sweep->add_option("--ckpt", checkpoint_path, "supernet checkpoint");
    sweep->add_option("--truth", truth_path, "ground-truth CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) {
            flatnas::cmd_gen_data(resolve_config(flags));
        } else if (train->parsed()) {
            flatnas::cmd_train_supernet(resolve_config(flags), dataset_path);
        } else if (search->parsed()) {
            flatnas::cmd_search(resolve_config(flags), checkpoint_path, dataset_path);
        } else if (oracle->parsed()) {
            flatnas::cmd_oracle(resolve_config(flags), dataset_path, oracle_epochs, seeds_per_arch,
                                max_archs);
        } else if (tau->parsed()) {
            flatnas::cmd_tau(resolve_config(flags), scores_path, truth_path);
        } else if (profile->parsed()) {
            // profile sigmas may start at 0, so they bypass the flatness config
            flatnas::RunConfig cfg = resolve_config(flags, /*apply_sigmas=*/false);
            std::vector<double> sigmas =
                flags.sigmas ? parse_sigma_list(*flags.sigmas) : cfg.flatness.sigmas;
            flatnas::cmd_profile(cfg, genotype_str, sigmas, profile_replicates, checkpoint_path,
                                 dataset_path);
        } else if (sweep->parsed()) {
            flatnas::cmd_sweep(resolve_config(flags), sweep_param,
                               flatnas::split(sweep_values, ','), dataset_path, checkpoint_path,
                               truth_path);
        }
    } catch (const flatnas::InvalidParameter& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    } catch (const flatnas::InfeasibleConfig& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    return 0;
}

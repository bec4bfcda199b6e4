#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flatnas/evolution.hpp"
#include "flatnas/metrics.hpp"
#include "flatnas/nncore.hpp"

namespace flatnas {

struct DatasetSpecConfig {
    std::string name = "spirals";
    int classes = 3;
    int per_class = 300;
    double noise_std = 0.15;  // spirals
    int lift_dim = 16;        // spirals
    double spread = 1.0;      // blobs
    int input_dim = 16;       // blobs
    std::optional<std::uint64_t> seed;  // absent -> derived from the root seed
};

struct MetricConfig {
    std::string name = "flatness";
    std::string base_metric = "accuracy";
    double gamma = 1.0;
};

/// Full run configuration; file keys mirror the field names. Flag values
/// override file values which override defaults.
struct RunConfig {
    std::string space_preset = "micro";
    DatasetSpecConfig dataset_spec;
    OptimizerConfig optimizer;
    FlatnessConfig flatness;
    EvolutionConfig evolution;
    MetricConfig metric;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    int jobs = 1;

    void validate() const;

    // named sub-streams of the root seed
    std::uint64_t data_seed() const;
    std::uint64_t supernet_init_seed() const;
    std::uint64_t supernet_train_seed() const;
    std::uint64_t flatness_seed() const;
    std::uint64_t evolution_seed() const;
    std::uint64_t oracle_seed() const;
    std::uint64_t profile_seed() const;

    /// FlatnessConfig with the run-derived subset seed filled in.
    FlatnessConfig flatness_for_run() const;
    MetricSpec metric_spec() const;

    std::string path(const std::string& filename) const;
};

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Stable digest over the canonical JSON form; printed by every command and
/// embedded in output artifacts.
std::string config_digest(const RunConfig& cfg);

Dataset build_dataset(const RunConfig& cfg);

// Subcommand bodies. Paths default to files under cfg.output_dir.
void cmd_gen_data(const RunConfig& cfg);
void cmd_train_supernet(const RunConfig& cfg, const std::string& dataset_path = "");
void cmd_search(const RunConfig& cfg, const std::string& checkpoint_path = "",
                const std::string& dataset_path = "");
/// scratch_epochs 0 means "use the 400-epoch from-scratch default";
/// max_archs > 0 oracles only a seeded sample of that many genotypes.
void cmd_oracle(const RunConfig& cfg, const std::string& dataset_path = "", int scratch_epochs = 0,
                int seeds_per_arch = 1, std::size_t max_archs = 0);
void cmd_tau(const RunConfig& cfg, const std::string& scores_csv, const std::string& truth_csv);
void cmd_profile(const RunConfig& cfg, const std::string& genotype_str,
                 const std::vector<double>& sigmas, int replicates = 16,
                 const std::string& checkpoint_path = "", const std::string& dataset_path = "");
void cmd_sweep(const RunConfig& cfg, const std::string& parameter,
               const std::vector<std::string>& values, const std::string& dataset_path = "",
               const std::string& checkpoint_path = "", const std::string& truth_path = "");

}  // namespace flatnas

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flatnas/data.hpp"
#include "flatnas/metrics.hpp"
#include "flatnas/nncore.hpp"
#include "flatnas/searchspace.hpp"

namespace flatnas {

struct GroundTruthEntry {
    double test_accuracy = 0.0;
    double final_val_loss = 0.0;
    int seed_count = 0;
};

/// Genotype string -> from-scratch training result, in enumeration order.
/// The desk-scale stand-in for a NAS benchmark's lookup table.
struct GroundTruthTable {
    std::vector<std::pair<std::string, GroundTruthEntry>> entries;
    std::string space_preset;
    std::string training_config_digest;

    const GroundTruthEntry* find(const std::string& genotype) const;
};

struct ScratchResult {
    double test_accuracy = 0.0;
    double final_val_loss = 0.0;
    ParamSet params;
};

/// Fresh seeded init, full cosine schedule on the train split, returns
/// test-split accuracy and final val-split loss. Deterministic per seed.
ScratchResult train_from_scratch(const Genotype& g, const SearchSpaceSpec& space,
                                 const Dataset& data, const OptimizerConfig& cfg,
                                 std::uint64_t seed);

using OracleProgressFn =
    std::function<void(std::size_t done, std::size_t total, const std::string& genotype)>;

/// Trains every genotype in the space seeds_per_arch times and stores the
/// mean test accuracy / final val loss. Per-entry seeds are derived from
/// (base_seed, genotype, replicate), so a partial table resumes to the exact
/// bytes an uninterrupted run would produce. max_archs > 0 restricts the
/// table to a seeded random sample of that many genotypes (kept in
/// enumeration order), the subset-oracle mode for large spaces.
GroundTruthTable build_ground_truth_table(const SearchSpaceSpec& space, const Dataset& data,
                                          const OptimizerConfig& cfg, int seeds_per_arch,
                                          std::uint64_t base_seed, const std::string& preset_name,
                                          const std::string& config_digest,
                                          const GroundTruthTable* partial = nullptr,
                                          const OracleProgressFn& progress = {}, int jobs = 1,
                                          std::size_t max_archs = 0);

bool has_ties(std::span<const double> values);

/// Kendall's tau-b: (C - D) / sqrt((C+D+Ts)(C+D+Tg)), O(n log n) via
/// merge-sort inversion counting. Equals tau-a when no ties exist. Throws
/// LengthMismatch on unequal/short inputs and UndefinedCorrelation when
/// either input is entirely tied.
double kendall_tau(std::span<const double> scores, std::span<const double> ground_truth);

/// Tau-a: (C - D) / (n(n-1)/2), no tie correction.
double kendall_tau_a(std::span<const double> scores, std::span<const double> ground_truth);

/// Aligns two record lists by genotype and returns kendall_tau over the
/// values. Throws GenotypeSetMismatch when the genotype sets differ.
double metric_rank_correlation(const std::vector<ScoreRecord>& records_a,
                               const std::vector<ScoreRecord>& records_b,
                               const SearchSpaceSpec& space);

/// Mean loss per sigma along ray-mode perturbations around a minimum.
struct CurvatureProfile {
    std::vector<double> sigmas;
    std::vector<double> mean_losses;
    Genotype genotype;
    int replicates = 0;
};

CurvatureProfile loss_curvature_profile(const ParamSet& params, const Genotype& g,
                                        const SearchSpaceSpec& space, const Batch& val_set,
                                        std::span<const double> sigmas, int replicates, Rng& rng);

/// Same sweep over an arbitrary loss function with injectable directions.
CurvatureProfile loss_curvature_profile_fn(const LossFn& loss, const ParamSet& params,
                                           std::span<const double> sigmas, int replicates,
                                           const NoiseFn& noise);

/// CSV: header genotype,test_accuracy,final_val_loss,seed_count plus a footer
/// comment carrying the space preset and config digest.
void write_ground_truth_csv(std::ostream& os, const GroundTruthTable& table);
GroundTruthTable read_ground_truth_csv(std::istream& is);
void write_ground_truth_csv(const std::string& path, const GroundTruthTable& table);
GroundTruthTable read_ground_truth_csv(const std::string& path);

/// CSV: sigma,mean_loss rows for external plotting.
void write_profile_csv(std::ostream& os, const CurvatureProfile& profile,
                       const SearchSpaceSpec& space, const std::string& config_digest);

}  // namespace flatnas

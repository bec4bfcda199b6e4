#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "flatnas/data.hpp"
#include "flatnas/nncore.hpp"
#include "flatnas/searchspace.hpp"
#include "flatnas/supernet.hpp"

namespace flatnas {

enum class NoiseMode { ray, independent };

NoiseMode noise_mode_from_string(std::string_view s);
std::string_view noise_mode_name(NoiseMode m);

/// Hyperparameters of the flatness measure: a sigma grid, the depth weight
/// alpha, replicate count, perturbation mode and mask. `ray` rescales one
/// Gaussian direction per replicate across the grid; `independent` draws
/// fresh noise per sigma. `signed_variant` drops the absolute values.
struct FlatnessConfig {
    std::vector<double> sigmas{2e-3, 1e-2, 2e-2};
    double alpha = 1.0;
    int replicates = 8;
    NoiseMode mode = NoiseMode::ray;
    PerturbMask mask = PerturbMask::all;
    std::size_t eval_subset_size = 512;
    bool signed_variant = false;
    double epsilon = 1e-12;
    std::uint64_t subset_seed = 0;  // fixes the val-subset used for L(.)

    double flat_max() const { return 1.0 / epsilon; }
    void validate() const;
};

struct ScoreRecord {
    Genotype genotype;
    std::string metric_name;
    double value = 0.0;
    std::uint64_t seed = 0;
    std::string config_digest;
};

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// Mean cross-entropy plus argmax accuracy (argmax ties broken by the lowest
/// class index).
EvalResult eval_loss_acc(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                         const Batch& eval_set);

using LossFn = std::function<double(const ParamSet&)>;
/// Returns `count` standard-normal draws; replicates/sigmas consume it in a
/// documented order (replicate-major, then per-sigma in independent mode).
using NoiseFn = std::function<std::vector<double>(std::size_t)>;

/// Core flatness measure over an arbitrary loss function:
///   D_r = sum_i |L(p + s_{i+1} g) - L(p + s_i g)| / (s_{i+1} - s_i)
///         + alpha * |L(p + s_1 g) / s_1|
/// score = 1 / max(mean_r D_r, epsilon). Absolute values are dropped when
/// cfg.signed_variant is set. The mask restricts which entries move.
double flatness_score_fn(const LossFn& loss, const ParamSet& params, const FlatnessConfig& cfg,
                         const NoiseFn& noise);

/// Fixed seeded subset of the val split used as the L(.) evaluation set;
/// identical for every genotype so scores are comparable.
Batch flatness_eval_subset(const Dataset& ds, const FlatnessConfig& cfg);

/// Flatness of the subnet loss surface around `params`, evaluated on
/// `eval_subset` with directions drawn from `rng`.
double flatness_score(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                      const Batch& eval_subset, const FlatnessConfig& cfg, Rng& rng);

/// arccos of the normalized inner product of the flattened weight vectors,
/// in [0, pi]. Throws ZeroVector when either norm is below 1e-30 and
/// ShapeMismatch when structures differ.
double angle_score(const ParamSet& initial, const ParamSet& final_params);

/// base + gamma * (1/sigma1) * flatness.
double combined_score(double base, double flatness, double gamma, double sigma1);

enum class MetricName { flatness, accuracy, angle, combined };

MetricName metric_from_string(std::string_view s);
std::string_view metric_name_string(MetricName m);

struct MetricSpec {
    MetricName name = MetricName::flatness;
    MetricName base_metric = MetricName::accuracy;  // for combined
    double gamma = 1.0;
    FlatnessConfig flatness;

    void validate() const;
    /// Stable digest of the metric configuration; identical configs agree.
    std::string digest() const;
};

/// Shared scoring context: the supernet plus the evaluation batches.
struct ScoringContext {
    const SuperNet& net;
    Batch val_full;     // whole val split (accuracy/angle)
    Batch val_subset;   // seeded subset (flatness)
};

ScoringContext make_scoring_context(const SuperNet& net, const Dataset& ds,
                                    const FlatnessConfig& cfg);

/// Per-genotype seed: every genotype's score is self-contained, which makes
/// batch scoring order- and thread-independent.
std::uint64_t genotype_score_seed(std::uint64_t base_seed, const Genotype& g);

/// One metric evaluation; the bookkeeping-free core of score_population.
double score_one(const ScoringContext& ctx, const Genotype& g, const MetricSpec& spec,
                 std::uint64_t base_seed);

/// Scores every genotype with per-genotype derived seeds; records returned in
/// input order. Errors are wrapped as ScorerFailure with the genotype attached.
std::vector<ScoreRecord> score_population(const ScoringContext& ctx,
                                          const std::vector<Genotype>& genotypes,
                                          const MetricSpec& spec, std::uint64_t base_seed,
                                          int jobs = 1);

/// CSV columns: genotype,metric,value,seed,config_digest (header mandatory).
void write_score_csv(std::ostream& os, const std::vector<ScoreRecord>& records,
                     const SearchSpaceSpec& space);
std::vector<ScoreRecord> read_score_csv(std::istream& is, const SearchSpaceSpec& space);

}  // namespace flatnas

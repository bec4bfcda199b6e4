#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flatnas/data.hpp"
#include "flatnas/searchspace.hpp"

namespace flatnas {

enum class ParamGroup { stem, cell, head };

std::string_view param_group_name(ParamGroup g);
ParamGroup param_group_from_string(std::string_view s);

struct ParamEntry {
    std::string name;
    std::vector<double> values;       // row-major for matrices
    std::vector<std::size_t> shape;
    ParamGroup group = ParamGroup::cell;

    std::size_t size() const { return values.size(); }
};

/// Flat, ordered collection of named weight arrays. Iteration order is the
/// insertion order and is part of the deterministic contract (flattening,
/// perturbation directions and checkpoints all rely on it).
class ParamSet {
public:
    void add(ParamEntry e);
    bool has(std::string_view name) const;
    const ParamEntry& at(std::string_view name) const;
    ParamEntry& at(std::string_view name);
    std::span<const ParamEntry> entries() const { return entries_; }
    std::span<ParamEntry> entries() { return entries_; }
    std::size_t total_elements() const;
    bool empty() const { return entries_.empty(); }

    /// True when names, shapes, groups and order all agree.
    bool same_structure(const ParamSet& other) const;

    /// All values concatenated in entry order.
    std::vector<double> flatten() const;

    bool operator==(const ParamSet& other) const;

private:
    std::vector<ParamEntry> entries_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

struct OptimizerConfig {
    double lr_max = 0.01;
    double lr_min = 0.0004;
    double weight_decay = 5e-4;
    int epochs = 2400;
    double momentum = 0.7;
    std::size_t batch_size = 64;

    void validate() const;
};

/// Parameter layout of one concrete subnet: stem, the parametric blocks the
/// genotype selects (per cell instance, in (cell, edge) order), then head.
struct BlockSpec {
    std::string name;
    std::vector<std::size_t> shape;
    ParamGroup group;
};
std::vector<BlockSpec> subnet_layout(const SearchSpaceSpec& space, const Genotype& g,
                                     std::size_t input_dim, int num_classes);

/// Fresh seeded initialization: matrices uniform in +/-sqrt(6/(fan_in+fan_out)),
/// biases zero, scale gains one.
ParamSet init_params(const std::vector<BlockSpec>& layout, std::uint64_t seed);
ParamSet init_subnet_params(const SearchSpaceSpec& space, const Genotype& g,
                            std::size_t input_dim, int num_classes, std::uint64_t seed);

struct ForwardResult {
    std::vector<double> logits;  // row-major batch_size x num_classes
    double loss = 0.0;           // mean cross-entropy
};

/// Forward pass through stem -> cells -> head. `params` must contain exactly
/// the blocks of subnet_layout for (space, g); throws ShapeMismatch otherwise,
/// NonFiniteLoss on overflow.
ForwardResult forward(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                      const Batch& batch);

struct GradResult {
    double loss = 0.0;
    ParamSet grads;  // same structure as the input params
};

/// Loss and analytic gradients for every parameter in `params`.
GradResult compute_gradients(const ParamSet& params, const Genotype& g,
                             const SearchSpaceSpec& space, const Batch& batch);

/// Momentum velocities keyed by parameter name; persists across steps.
struct SgdState {
    std::map<std::string, std::vector<double>> velocity;
};

/// In-place momentum-SGD update: v = momentum*v + (grad + weight_decay*w); w -= lr*v.
void apply_sgd_update(ParamSet& params, const ParamSet& grads, double lr,
                      const OptimizerConfig& cfg, SgdState& state);

/// One momentum-SGD step over the loss gradient of (g, batch).
/// Returns the updated copy; the input is untouched.
ParamSet backward_step(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                       const Batch& batch, double lr, const OptimizerConfig& cfg, SgdState& state);

/// lr(e) = lr_min + (lr_max - lr_min)/2 * (1 + cos(pi * e / total)).
double cosine_lr(int epoch, int total_epochs, const OptimizerConfig& cfg);

enum class PerturbMask { all, cells_only };

PerturbMask perturb_mask_from_string(std::string_view s);
std::string_view perturb_mask_name(PerturbMask m);

/// Returns a copy with masked entries set to w + sigma*g. `direction` is a
/// standard-normal draw indexed over ALL elements in flatten() order (the
/// mask selects which entries consume their slice); its length must equal
/// params.total_elements().
ParamSet perturb(const ParamSet& params, double sigma, std::span<const double> direction,
                 PerturbMask mask);

}  // namespace flatnas

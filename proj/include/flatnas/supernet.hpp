#pragma once

#include <cstdint>
#include <functional>

#include "flatnas/data.hpp"
#include "flatnas/nncore.hpp"
#include "flatnas/searchspace.hpp"

namespace flatnas {

/// Layout holding one weight block per (cell, edge, op) for parametric ops,
/// plus stem and head. Subnets inherit their blocks from here.
std::vector<BlockSpec> supernet_layout(const SearchSpaceSpec& space, std::size_t input_dim,
                                       int num_classes);

/// Weight-sharing supernet. `initial_snapshot` is frozen at construction and
/// feeds the angle metric; `shared_params` is what training updates.
class SuperNet {
public:
    SuperNet(SearchSpaceSpec space, std::size_t input_dim, int num_classes,
             std::uint64_t init_seed);

    /// Rebuild from checkpoint parts; throws ShapeMismatch when the two
    /// param sets disagree structurally.
    static SuperNet from_parts(SearchSpaceSpec space, ParamSet current, ParamSet initial,
                               int epoch);

    const SearchSpaceSpec& space() const { return space_; }
    const ParamSet& shared_params() const { return shared_; }
    ParamSet& shared_params() { return shared_; }
    const ParamSet& initial_snapshot() const { return initial_; }
    int epoch() const { return epoch_; }
    std::size_t input_dim() const { return input_dim_; }
    int num_classes() const { return num_classes_; }

private:
    SuperNet() = default;
    SearchSpaceSpec space_;
    ParamSet shared_;
    ParamSet initial_;
    int epoch_ = 0;
    std::size_t input_dim_ = 0;
    int num_classes_ = 0;

    friend void train_supernet(SuperNet&, const Dataset&, const OptimizerConfig&, std::uint64_t,
                               const struct TrainHooks&);
};

/// Each edge's op index drawn independently and uniformly (a ~ U(A)).
Genotype sample_uniform_path(const SearchSpaceSpec& space, Rng& rng);

struct TrainHooks {
    std::function<void(int epoch, double lr, double mean_loss)> on_epoch;
    std::function<void(int step, const Genotype& path)> on_path;
};

/// Single-path training: per mini-batch, samples one path uniformly and
/// applies a momentum-SGD step to that path's shared weights only. The
/// learning rate follows cosine_lr per epoch. NonFiniteGradient aborts with
/// the offending step index attached.
void train_supernet(SuperNet& net, const Dataset& train_data, const OptimizerConfig& cfg,
                    std::uint64_t seed, const TrainHooks& hooks = {});

/// Copy of stem, head and exactly the blocks (per cell) selected by `g`.
/// Values are copied, never aliased.
ParamSet extract_subnet(const SuperNet& net, const Genotype& g);

/// Same extraction against the frozen initial snapshot.
ParamSet extract_initial_subnet(const SuperNet& net, const Genotype& g);

}  // namespace flatnas

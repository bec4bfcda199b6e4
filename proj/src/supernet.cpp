#include "flatnas/supernet.hpp"

#include <string>

#include "flatnas/errors.hpp"
#include "flatnas/rng.hpp"

namespace flatnas {

std::vector<BlockSpec> supernet_layout(const SearchSpaceSpec& space, std::size_t input_dim,
                                       int num_classes) {
    space.validate();
    if (input_dim < 1 || num_classes < 2)
        throw InvalidParameter("need input_dim >= 1 and num_classes >= 2");
    const auto C = static_cast<std::size_t>(space.channels);
    const auto K = static_cast<std::size_t>(num_classes);

    std::vector<BlockSpec> layout;
    layout.push_back({"stem.weight", {input_dim, C}, ParamGroup::stem});
    layout.push_back({"stem.bias", {C}, ParamGroup::stem});
    for (int c = 0; c < space.cells_per_network; ++c) {
        for (std::size_t e = 0; e < space.edge_count(); ++e) {
            for (const auto& op : space.op_names) {
                if (op != "linear" && op != "relu_linear" && op != "scale") continue;
                std::string prefix =
                    "cell" + std::to_string(c) + ".edge" + std::to_string(e) + "." + op;
                if (op == "scale") {
                    layout.push_back({prefix + ".gain", {1}, ParamGroup::cell});
                } else {
                    layout.push_back({prefix + ".weight", {C, C}, ParamGroup::cell});
                    layout.push_back({prefix + ".bias", {C}, ParamGroup::cell});
                }
            }
        }
    }
    layout.push_back({"head.weight", {C, K}, ParamGroup::head});
    layout.push_back({"head.bias", {K}, ParamGroup::head});
    return layout;
}

SuperNet::SuperNet(SearchSpaceSpec space, std::size_t input_dim, int num_classes,
                   std::uint64_t init_seed)
    : space_(std::move(space)), input_dim_(input_dim), num_classes_(num_classes) {
    shared_ = init_params(supernet_layout(space_, input_dim_, num_classes_), init_seed);
    initial_ = shared_;
}

SuperNet SuperNet::from_parts(SearchSpaceSpec space, ParamSet current, ParamSet initial,
                              int epoch) {
    if (!current.same_structure(initial))
        throw ShapeMismatch("current and initial param sets differ structurally");
    SuperNet net;
    net.space_ = std::move(space);
    net.input_dim_ = current.at("stem.weight").shape[0];
    net.num_classes_ = static_cast<int>(current.at("head.bias").values.size());
    auto expected = supernet_layout(net.space_, net.input_dim_, net.num_classes_);
    if (expected.size() != current.entries().size())
        throw ShapeMismatch("param sets do not match the supernet layout for this space");
    net.shared_ = std::move(current);
    net.initial_ = std::move(initial);
    net.epoch_ = epoch;
    return net;
}

Genotype sample_uniform_path(const SearchSpaceSpec& space, Rng& rng) {
    Genotype g;
    g.op_indices.resize(space.edge_count());
    for (auto& idx : g.op_indices)
        idx = static_cast<int>(rng.below(space.op_count()));
    return g;
}

void train_supernet(SuperNet& net, const Dataset& train_data, const OptimizerConfig& cfg,
                    std::uint64_t seed, const TrainHooks& hooks) {
    cfg.validate();
    if (train_data.train_idx.empty()) throw InvalidParameter("train split is empty");
    if (train_data.input_dim != net.input_dim())
        throw ShapeMismatch("dataset input_dim does not match supernet stem");

    Rng path_rng(derive_seed(seed, "paths"));
    const std::uint64_t shuffle_seed = derive_seed(seed, "shuffle");
    SgdState sgd;
    int step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(epoch, cfg.epochs, cfg);
        double loss_sum = 0.0;
        std::size_t batches_seen = 0;
        for (const auto& batch : epoch_batches(train_data, Split::train, cfg.batch_size,
                                               shuffle_seed, static_cast<std::uint64_t>(epoch))) {
            Genotype path = sample_uniform_path(net.space(), path_rng);
            if (hooks.on_path) hooks.on_path(step, path);
            ParamSet sub = extract_subnet(net, path);
            try {
                GradResult res = compute_gradients(sub, path, net.space(), batch);
                loss_sum += res.loss;
                apply_sgd_update(sub, res.grads, lr, cfg, sgd);
            } catch (const NonFiniteGradient& err) {
                throw NonFiniteGradient(std::string(err.what()) + " at step " +
                                        std::to_string(step));
            } catch (const NonFiniteLoss& err) {
                throw NonFiniteGradient(std::string(err.what()) + " at step " +
                                        std::to_string(step));
            }
            for (const auto& e : sub.entries())
                net.shared_params().at(e.name).values = e.values;
            ++step;
            ++batches_seen;
        }
        if (hooks.on_epoch)
            hooks.on_epoch(epoch, lr,
                           batches_seen ? loss_sum / static_cast<double>(batches_seen) : 0.0);
    }
    net.epoch_ = cfg.epochs;
}

namespace {

ParamSet extract_from(const ParamSet& source, const SuperNet& net, const Genotype& g) {
    if (!genotype_valid(g, net.space()))
        throw SpaceMismatch("genotype does not fit the supernet's space");
    auto layout = subnet_layout(net.space(), g, net.input_dim(), net.num_classes());
    ParamSet out;
    for (const auto& block : layout) {
        ParamEntry e;
        e.name = block.name;
        e.shape = block.shape;
        e.group = block.group;
        e.values = source.at(block.name).values;  // copy, not alias
        out.add(std::move(e));
    }
    return out;
}

}  // namespace

ParamSet extract_subnet(const SuperNet& net, const Genotype& g) {
    return extract_from(net.shared_params(), net, g);
}

ParamSet extract_initial_subnet(const SuperNet& net, const Genotype& g) {
    return extract_from(net.initial_snapshot(), net, g);
}

}  // namespace flatnas

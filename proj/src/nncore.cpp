#include "flatnas/nncore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flatnas/errors.hpp"
#include "flatnas/rng.hpp"

namespace flatnas {

std::string_view param_group_name(ParamGroup g) {
    switch (g) {
        case ParamGroup::stem: return "stem";
        case ParamGroup::cell: return "cell";
        case ParamGroup::head: return "head";
    }
    throw InvalidParameter("bad ParamGroup value");
}

ParamGroup param_group_from_string(std::string_view s) {
    if (s == "stem") return ParamGroup::stem;
    if (s == "cell") return ParamGroup::cell;
    if (s == "head") return ParamGroup::head;
    throw ParseError("unknown param group '" + std::string(s) + "'");
}

void ParamSet::add(ParamEntry e) {
    if (index_.count(e.name)) throw InvalidParameter("duplicate param name '" + e.name + "'");
    std::size_t expect = 1;
    for (auto d : e.shape) expect *= d;
    if (expect != e.values.size())
        throw ShapeMismatch("param '" + e.name + "' shape does not match value count");
    index_.emplace(e.name, entries_.size());
    entries_.push_back(std::move(e));
}

bool ParamSet::has(std::string_view name) const { return index_.find(name) != index_.end(); }

const ParamEntry& ParamSet::at(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ShapeMismatch("missing param '" + std::string(name) + "'");
    return entries_[it->second];
}

ParamEntry& ParamSet::at(std::string_view name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ShapeMismatch("missing param '" + std::string(name) + "'");
    return entries_[it->second];
}

std::size_t ParamSet::total_elements() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.size();
    return n;
}

bool ParamSet::same_structure(const ParamSet& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name != other.entries_[i].name) return false;
        if (entries_[i].shape != other.entries_[i].shape) return false;
        if (entries_[i].group != other.entries_[i].group) return false;
    }
    return true;
}

std::vector<double> ParamSet::flatten() const {
    std::vector<double> out;
    out.reserve(total_elements());
    for (const auto& e : entries_) out.insert(out.end(), e.values.begin(), e.values.end());
    return out;
}

bool ParamSet::operator==(const ParamSet& other) const {
    if (!same_structure(other)) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].values != other.entries_[i].values) return false;
    return true;
}

void OptimizerConfig::validate() const {
    if (lr_max <= 0.0) throw InvalidParameter("lr_max must be > 0");
    if (lr_min < 0.0 || lr_min > lr_max) throw InvalidParameter("need 0 <= lr_min <= lr_max");
    if (weight_decay < 0.0) throw InvalidParameter("weight_decay must be >= 0");
    if (epochs < 0) throw InvalidParameter("epochs must be >= 0");
    if (momentum < 0.0 || momentum >= 1.0) throw InvalidParameter("momentum must be in [0, 1)");
    if (batch_size < 1) throw InvalidParameter("batch_size must be >= 1");
}

namespace {

bool op_is_parametric(std::string_view op) {
    return op == "linear" || op == "relu_linear" || op == "scale";
}

}  // namespace

std::vector<BlockSpec> subnet_layout(const SearchSpaceSpec& space, const Genotype& g,
                                     std::size_t input_dim, int num_classes) {
    if (!genotype_valid(g, space)) throw SpaceMismatch("genotype does not fit space");
    if (input_dim < 1 || num_classes < 2)
        throw InvalidParameter("need input_dim >= 1 and num_classes >= 2");
    const auto C = static_cast<std::size_t>(space.channels);
    const auto K = static_cast<std::size_t>(num_classes);

    std::vector<BlockSpec> layout;
    layout.push_back({"stem.weight", {input_dim, C}, ParamGroup::stem});
    layout.push_back({"stem.bias", {C}, ParamGroup::stem});
    for (int c = 0; c < space.cells_per_network; ++c) {
        for (std::size_t e = 0; e < space.edge_count(); ++e) {
            const std::string& op = space.op_names[static_cast<std::size_t>(g.op_indices[e])];
            if (!op_is_parametric(op)) continue;
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
    layout.push_back({"head.weight", {C, K}, ParamGroup::head});
    layout.push_back({"head.bias", {K}, ParamGroup::head});
    return layout;
}

ParamSet init_params(const std::vector<BlockSpec>& layout, std::uint64_t seed) {
    Rng rng(seed);
    ParamSet params;
    for (const auto& block : layout) {
        ParamEntry e;
        e.name = block.name;
        e.shape = block.shape;
        e.group = block.group;
        std::size_t count = 1;
        for (auto d : block.shape) count *= d;
        e.values.assign(count, 0.0);
        if (block.shape.size() == 2) {
            double bound = std::sqrt(6.0 / static_cast<double>(block.shape[0] + block.shape[1]));
            for (auto& w : e.values) w = (2.0 * rng.uniform01() - 1.0) * bound;
        } else if (block.name.ends_with(".gain")) {
            e.values.assign(count, 1.0);
        }
        // biases stay zero
        params.add(std::move(e));
    }
    return params;
}

ParamSet init_subnet_params(const SearchSpaceSpec& space, const Genotype& g,
                            std::size_t input_dim, int num_classes, std::uint64_t seed) {
    return init_params(subnet_layout(space, g, input_dim, num_classes), seed);
}

namespace {

// row-major helpers; B = rows(A), M = cols(A) = rows(W), N = cols(W)
void matmul_add(const std::vector<double>& a, std::size_t rows, std::size_t mid,
                const std::vector<double>& w, std::size_t cols, std::vector<double>& out) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < mid; ++k) {
            double aik = a[i * mid + k];
            if (aik == 0.0) continue;
            const double* wrow = &w[k * cols];
            double* orow = &out[i * cols];
            for (std::size_t j = 0; j < cols; ++j) orow[j] += aik * wrow[j];
        }
}

struct OpKind {
    enum Kind { zeroize, skip, linear, relu_linear, scale } kind;
};

OpKind::Kind op_kind(std::string_view op) {
    if (op == "zeroize") return OpKind::zeroize;
    if (op == "skip") return OpKind::skip;
    if (op == "linear") return OpKind::linear;
    if (op == "relu_linear") return OpKind::relu_linear;
    if (op == "scale") return OpKind::scale;
    throw InvalidParameter("unknown op '" + std::string(op) + "'");
}

struct ForwardCache {
    std::size_t B = 0, C = 0, K = 0;
    std::vector<double> stem_out;                          // B x C
    std::vector<std::vector<std::vector<double>>> nodes;   // [cell][node] B x C
    std::vector<std::vector<std::vector<double>>> preact;  // [cell][edge] B x C (relu_linear only)
    std::vector<double> logits;                            // B x K
    std::vector<double> softmax;                           // B x K
    double loss = 0.0;
};

void check_params_match(const ParamSet& params, const std::vector<BlockSpec>& layout) {
    if (params.entries().size() != layout.size())
        throw ShapeMismatch("param set has " + std::to_string(params.entries().size()) +
                            " entries, genotype requires " + std::to_string(layout.size()));
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& have = params.entries()[i];
        const auto& want = layout[i];
        if (have.name != want.name || have.shape != want.shape || have.group != want.group)
            throw ShapeMismatch("param entry " + std::to_string(i) + " is '" + have.name +
                                "', expected '" + want.name + "'");
    }
}

ForwardCache run_forward(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                         const Batch& batch) {
    check_params_match(params, subnet_layout(space, g, batch.input_dim,
                                             /*num_classes=*/static_cast<int>(
                                                 params.at("head.bias").values.size())));
    const std::size_t B = batch.batch_size;
    const std::size_t C = static_cast<std::size_t>(space.channels);
    const std::size_t K = params.at("head.bias").values.size();
    if (batch.inputs.size() != B * batch.input_dim || batch.labels.size() != B)
        throw ShapeMismatch("batch buffers do not match batch_size x input_dim");
    if (params.at("stem.weight").shape[0] != batch.input_dim)
        throw ShapeMismatch("batch input_dim does not match stem");
    for (int label : batch.labels)
        if (label < 0 || static_cast<std::size_t>(label) >= K)
            throw ShapeMismatch("label out of range for head");

    ForwardCache cache;
    cache.B = B;
    cache.C = C;
    cache.K = K;

    // stem
    cache.stem_out.assign(B * C, 0.0);
    {
        const auto& w = params.at("stem.weight").values;
        const auto& b = params.at("stem.bias").values;
        matmul_add(batch.inputs, B, batch.input_dim, w, C, cache.stem_out);
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < C; ++j) cache.stem_out[i * C + j] += b[j];
    }

    // cells
    const std::size_t nodes = static_cast<std::size_t>(space.node_count);
    const std::vector<double>* cell_in = &cache.stem_out;
    cache.nodes.resize(static_cast<std::size_t>(space.cells_per_network));
    cache.preact.resize(static_cast<std::size_t>(space.cells_per_network));
    for (int c = 0; c < space.cells_per_network; ++c) {
        auto& feat = cache.nodes[static_cast<std::size_t>(c)];
        auto& pre = cache.preact[static_cast<std::size_t>(c)];
        feat.assign(nodes, std::vector<double>(B * C, 0.0));
        pre.assign(space.edge_count(), {});
        feat[0] = *cell_in;
        for (std::size_t e = 0; e < space.edge_count(); ++e) {
            const auto [src, dst] = space.edges[e];
            const std::string& op = space.op_names[static_cast<std::size_t>(g.op_indices[e])];
            const auto& x = feat[static_cast<std::size_t>(src)];
            auto& y = feat[static_cast<std::size_t>(dst)];
            std::string prefix =
                "cell" + std::to_string(c) + ".edge" + std::to_string(e) + "." + op;
            switch (op_kind(op)) {
                case OpKind::zeroize:
                    break;
                case OpKind::skip:
                    for (std::size_t i = 0; i < B * C; ++i) y[i] += x[i];
                    break;
                case OpKind::scale: {
                    double gain = params.at(prefix + ".gain").values[0];
                    for (std::size_t i = 0; i < B * C; ++i) y[i] += gain * x[i];
                    break;
                }
                case OpKind::linear:
                case OpKind::relu_linear: {
                    const auto& w = params.at(prefix + ".weight").values;
                    const auto& b = params.at(prefix + ".bias").values;
                    std::vector<double> z(B * C, 0.0);
                    matmul_add(x, B, C, w, C, z);
                    for (std::size_t i = 0; i < B; ++i)
                        for (std::size_t j = 0; j < C; ++j) z[i * C + j] += b[j];
                    if (op_kind(op) == OpKind::relu_linear) {
                        pre[e] = z;
                        for (auto& v : z) v = std::max(v, 0.0);
                    }
                    for (std::size_t i = 0; i < B * C; ++i) y[i] += z[i];
                    break;
                }
            }
        }
        cell_in = &feat[nodes - 1];
    }

    // head
    cache.logits.assign(B * K, 0.0);
    {
        const auto& w = params.at("head.weight").values;
        const auto& b = params.at("head.bias").values;
        matmul_add(*cell_in, B, C, w, K, cache.logits);
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < K; ++j) cache.logits[i * K + j] += b[j];
    }

    // mean cross-entropy with max-shifted softmax
    cache.softmax.assign(B * K, 0.0);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        const double* row = &cache.logits[i * K];
        double m = row[0];
        for (std::size_t j = 1; j < K; ++j) m = std::max(m, row[j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < K; ++j) denom += std::exp(row[j] - m);
        double lse = m + std::log(denom);
        for (std::size_t j = 0; j < K; ++j) cache.softmax[i * K + j] = std::exp(row[j] - lse);
        loss_sum += lse - row[static_cast<std::size_t>(batch.labels[i])];
    }
    cache.loss = loss_sum / static_cast<double>(B);
    if (!std::isfinite(cache.loss)) throw NonFiniteLoss("forward produced a non-finite loss");
    return cache;
}

}  // namespace

ForwardResult forward(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                      const Batch& batch) {
    ForwardCache cache = run_forward(params, g, space, batch);
    return {std::move(cache.logits), cache.loss};
}

GradResult compute_gradients(const ParamSet& params, const Genotype& g,
                             const SearchSpaceSpec& space, const Batch& batch) {
    ForwardCache cache = run_forward(params, g, space, batch);
    const std::size_t B = cache.B, C = cache.C, K = cache.K;

    GradResult out;
    out.loss = cache.loss;
    for (const auto& e : params.entries()) {
        ParamEntry z;
        z.name = e.name;
        z.shape = e.shape;
        z.group = e.group;
        z.values.assign(e.size(), 0.0);
        out.grads.add(std::move(z));
    }

    // d loss / d logits = (softmax - onehot) / B
    std::vector<double> dlogits(B * K);
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            double onehot = (static_cast<std::size_t>(batch.labels[i]) == j) ? 1.0 : 0.0;
            dlogits[i * K + j] = (cache.softmax[i * K + j] - onehot) / static_cast<double>(B);
        }

    const std::size_t nodes = static_cast<std::size_t>(space.node_count);
    const std::vector<double>& head_in =
        cache.nodes[static_cast<std::size_t>(space.cells_per_network - 1)][nodes - 1];

    // head
    std::vector<double> dflow(B * C, 0.0);  // gradient w.r.t. the current cell output
    {
        auto& dw = out.grads.at("head.weight").values;
        auto& db = out.grads.at("head.bias").values;
        const auto& w = params.at("head.weight").values;
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t k = 0; k < C; ++k) {
                double h = head_in[i * C + k];
                if (h != 0.0)
                    for (std::size_t j = 0; j < K; ++j) dw[k * K + j] += h * dlogits[i * K + j];
            }
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < K; ++j) db[j] += dlogits[i * K + j];
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t k = 0; k < C; ++k) {
                double acc = 0.0;
                for (std::size_t j = 0; j < K; ++j)
                    acc += dlogits[i * K + j] * w[k * K + j];
                dflow[i * C + k] = acc;
            }
    }

    // cells, last to first; within a cell, targets in descending node order
    for (int c = space.cells_per_network - 1; c >= 0; --c) {
        const auto& feat = cache.nodes[static_cast<std::size_t>(c)];
        const auto& pre = cache.preact[static_cast<std::size_t>(c)];
        std::vector<std::vector<double>> dnode(nodes, std::vector<double>(B * C, 0.0));
        dnode[nodes - 1] = dflow;
        for (std::size_t t = nodes - 1; t >= 1; --t) {
            const auto& dy = dnode[t];
            for (std::size_t e = 0; e < space.edge_count(); ++e) {
                const auto [src, dst] = space.edges[e];
                if (static_cast<std::size_t>(dst) != t) continue;
                const std::string& op = space.op_names[static_cast<std::size_t>(g.op_indices[e])];
                const auto& x = feat[static_cast<std::size_t>(src)];
                auto& dx = dnode[static_cast<std::size_t>(src)];
                std::string prefix =
                    "cell" + std::to_string(c) + ".edge" + std::to_string(e) + "." + op;
                switch (op_kind(op)) {
                    case OpKind::zeroize:
                        break;
                    case OpKind::skip:
                        for (std::size_t i = 0; i < B * C; ++i) dx[i] += dy[i];
                        break;
                    case OpKind::scale: {
                        double gain = params.at(prefix + ".gain").values[0];
                        double dgain = 0.0;
                        for (std::size_t i = 0; i < B * C; ++i) {
                            dgain += x[i] * dy[i];
                            dx[i] += gain * dy[i];
                        }
                        out.grads.at(prefix + ".gain").values[0] += dgain;
                        break;
                    }
                    case OpKind::linear:
                    case OpKind::relu_linear: {
                        const auto& w = params.at(prefix + ".weight").values;
                        auto& dw = out.grads.at(prefix + ".weight").values;
                        auto& db = out.grads.at(prefix + ".bias").values;
                        std::vector<double> dz(dy);
                        if (op_kind(op) == OpKind::relu_linear) {
                            const auto& z = pre[e];
                            for (std::size_t i = 0; i < B * C; ++i)
                                if (z[i] <= 0.0) dz[i] = 0.0;
                        }
                        for (std::size_t i = 0; i < B; ++i)
                            for (std::size_t k = 0; k < C; ++k) {
                                double xv = x[i * C + k];
                                if (xv != 0.0)
                                    for (std::size_t j = 0; j < C; ++j)
                                        dw[k * C + j] += xv * dz[i * C + j];
                            }
                        for (std::size_t i = 0; i < B; ++i)
                            for (std::size_t j = 0; j < C; ++j) db[j] += dz[i * C + j];
                        for (std::size_t i = 0; i < B; ++i)
                            for (std::size_t k = 0; k < C; ++k) {
                                double acc = 0.0;
                                for (std::size_t j = 0; j < C; ++j)
                                    acc += dz[i * C + j] * w[k * C + j];
                                dx[i * C + k] += acc;
                            }
                        break;
                    }
                }
            }
        }
        dflow = dnode[0];  // gradient w.r.t. this cell's input
    }

    // stem
    {
        auto& dw = out.grads.at("stem.weight").values;
        auto& db = out.grads.at("stem.bias").values;
        const std::size_t I = batch.input_dim;
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t k = 0; k < I; ++k) {
                double xv = batch.inputs[i * I + k];
                if (xv != 0.0)
                    for (std::size_t j = 0; j < C; ++j) dw[k * C + j] += xv * dflow[i * C + j];
            }
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < C; ++j) db[j] += dflow[i * C + j];
    }

    for (const auto& e : out.grads.entries())
        for (double v : e.values)
            if (!std::isfinite(v))
                throw NonFiniteGradient("non-finite gradient in '" + e.name + "'");
    return out;
}

void apply_sgd_update(ParamSet& params, const ParamSet& grads, double lr,
                      const OptimizerConfig& cfg, SgdState& state) {
    if (lr <= 0.0) throw InvalidParameter("lr must be > 0");
    for (auto& e : params.entries()) {
        const auto& grad = grads.at(e.name).values;
        auto& vel = state.velocity[e.name];
        if (vel.empty()) vel.assign(e.size(), 0.0);
        if (vel.size() != e.size()) throw ShapeMismatch("velocity size mismatch for '" + e.name + "'");
        for (std::size_t i = 0; i < e.size(); ++i) {
            double step_grad = grad[i] + cfg.weight_decay * e.values[i];
            vel[i] = cfg.momentum * vel[i] + step_grad;
            e.values[i] -= lr * vel[i];
        }
    }
}

ParamSet backward_step(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                       const Batch& batch, double lr, const OptimizerConfig& cfg,
                       SgdState& state) {
    GradResult res = compute_gradients(params, g, space, batch);
    ParamSet updated = params;
    apply_sgd_update(updated, res.grads, lr, cfg, state);
    return updated;
}

double cosine_lr(int epoch, int total_epochs, const OptimizerConfig& cfg) {
    if (total_epochs < 1) throw InvalidParameter("total_epochs must be >= 1");
    if (epoch < 0 || epoch > total_epochs) throw InvalidParameter("epoch out of [0, total_epochs]");
    double phase = std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(phase));
}

PerturbMask perturb_mask_from_string(std::string_view s) {
    if (s == "all") return PerturbMask::all;
    if (s == "cells_only") return PerturbMask::cells_only;
    throw ParseError("unknown perturb mask '" + std::string(s) + "'");
}

std::string_view perturb_mask_name(PerturbMask m) {
    return m == PerturbMask::all ? "all" : "cells_only";
}

ParamSet perturb(const ParamSet& params, double sigma, std::span<const double> direction,
                 PerturbMask mask) {
    if (!std::isfinite(sigma)) throw InvalidParameter("sigma must be finite");
    if (direction.size() != params.total_elements())
        throw ShapeMismatch("direction has " + std::to_string(direction.size()) +
                            " elements, params have " + std::to_string(params.total_elements()));
    ParamSet out = params;
    std::size_t offset = 0;
    for (auto& e : out.entries()) {
        bool active = (mask == PerturbMask::all) || (e.group == ParamGroup::cell);
        if (active)
            for (std::size_t i = 0; i < e.size(); ++i)
                e.values[i] += sigma * direction[offset + i];
        offset += e.size();
    }
    return out;
}

}  // namespace flatnas

#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "flatnas/checkpoint.hpp"
#include "flatnas/data.hpp"
#include "flatnas/errors.hpp"
#include "flatnas/supernet.hpp"

using namespace flatnas;

namespace {

SearchSpaceSpec small_micro() {
    SearchSpaceSpec s = micro_space();
    s.channels = 4;
    s.cells_per_network = 2;
    return s;
}

Dataset small_data() { return make_spirals(3, 30, 0.15, 5, 404); }

// parametric blocks present in shared_params for a path, by name prefix
std::set<std::string> selected_prefixes(const SearchSpaceSpec& space, const Genotype& g) {
    std::set<std::string> out;
    for (int c = 0; c < space.cells_per_network; ++c)
        for (std::size_t e = 0; e < space.edge_count(); ++e) {
            const std::string& op = space.op_names[static_cast<std::size_t>(g.op_indices[e])];
            if (op == "linear" || op == "relu_linear" || op == "scale")
                out.insert("cell" + std::to_string(c) + ".edge" + std::to_string(e) + "." + op);
        }
    return out;
}

}  // namespace

TEST_CASE("sample_uniform_path on a 1-op space always yields the unique genotype") {
    SearchSpaceSpec s = micro_space();
    s.op_names = {"skip"};
    Rng rng(1);
    for (int i = 0; i < 20; ++i)
        CHECK(sample_uniform_path(s, rng).op_indices == std::vector<int>{0, 0, 0});
}

TEST_CASE("sample_uniform_path covers the micro space uniformly") {
    auto space = micro_space();
    Rng rng(99);
    std::map<Genotype, int> counts;
    for (int i = 0; i < 27000; ++i) ++counts[sample_uniform_path(space, rng)];
    CHECK(counts.size() == 27);
    for (const auto& [g, count] : counts) {
        CHECK(count >= 800);   // 1000 +/- 20%
        CHECK(count <= 1200);
    }
}

TEST_CASE("sample_uniform_path replays exactly under a fixed seed") {
    auto space = micro_space();
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i)
        CHECK(sample_uniform_path(space, a) == sample_uniform_path(space, b));
}

TEST_CASE("zero-epoch training leaves shared params equal to the snapshot") {
    auto space = small_micro();
    Dataset ds = small_data();
    SuperNet net(space, ds.input_dim, ds.classes, 42);
    OptimizerConfig cfg;
    cfg.epochs = 0;
    train_supernet(net, ds, cfg, 7);
    CHECK(net.shared_params() == net.initial_snapshot());
}

TEST_CASE("one training step touches only the sampled path") {
    auto space = small_micro();
    Dataset ds = small_data();
    SuperNet net(space, ds.input_dim, ds.classes, 42);
    OptimizerConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 1024;  // single step per epoch
    ParamSet before = net.shared_params();
    Genotype sampled;
    TrainHooks hooks;
    hooks.on_path = [&](int, const Genotype& path) { sampled = path; };
    train_supernet(net, ds, cfg, 13, hooks);

    auto active = selected_prefixes(space, sampled);
    for (const auto& e : before.entries()) {
        if (e.group != ParamGroup::cell) continue;
        bool on_path = false;
        for (const auto& prefix : active)
            if (e.name.rfind(prefix, 0) == 0) on_path = true;
        if (!on_path)
            CHECK(net.shared_params().at(e.name).values == e.values);  // bit-identical
    }
}

TEST_CASE("seeded supernet training is bit-reproducible") {
    auto space = small_micro();
    Dataset ds = small_data();
    OptimizerConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    auto run = [&]() {
        SuperNet net(space, ds.input_dim, ds.classes, 42);
        train_supernet(net, ds, cfg, 2025);
        return net.shared_params();
    };
    CHECK(run() == run());
}

TEST_CASE("initial snapshot never changes across training") {
    auto space = small_micro();
    Dataset ds = small_data();
    SuperNet net(space, ds.input_dim, ds.classes, 8);
    ParamSet snapshot = net.initial_snapshot();
    OptimizerConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 16;
    train_supernet(net, ds, cfg, 3);
    CHECK(net.initial_snapshot() == snapshot);
}

TEST_CASE("extraction copies the selected blocks and only them") {
    auto space = small_micro();
    Dataset ds = small_data();
    SuperNet net(space, ds.input_dim, ds.classes, 4);

    Genotype g{{2, 0, 2}};  // relu_linear, zeroize, relu_linear
    ParamSet sub = extract_subnet(net, g);
    // stem(2) + head(2) + 2 relu_linear blocks x 2 entries x 2 cells
    CHECK(sub.entries().size() == 2 + 2 + 2 * 2 * 2);
    CHECK(sub.at("cell0.edge0.relu_linear.weight").values ==
          net.shared_params().at("cell0.edge0.relu_linear.weight").values);

    // weight sharing: genotypes agreeing on edge 0 extract identical blocks
    Genotype h{{2, 1, 1}};
    ParamSet other = extract_subnet(net, h);
    CHECK(other.at("cell1.edge0.relu_linear.bias").values ==
          sub.at("cell1.edge0.relu_linear.bias").values);

    // copies, not aliases: perturbing the extraction leaves the supernet alone
    sub.at("cell0.edge0.relu_linear.weight").values[0] += 1.0;
    CHECK(net.shared_params().at("cell0.edge0.relu_linear.weight").values[0] !=
          sub.at("cell0.edge0.relu_linear.weight").values[0]);

    Genotype bad{{9, 0, 0}};
    CHECK_THROWS_AS(extract_subnet(net, bad), SpaceMismatch);
}

TEST_CASE("extract equals forward through the supernet with non-selected ops dead") {
    // with a freshly built net, the initial and current extractions agree,
    // and the extracted subnet forward only sees the selected blocks
    auto space = small_micro();
    Dataset ds = small_data();
    SuperNet net(space, ds.input_dim, ds.classes, 19);
    Genotype g{{1, 2, 1}};
    CHECK(extract_subnet(net, g) == extract_initial_subnet(net, g));

    OptimizerConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    train_supernet(net, ds, cfg, 5);

    ParamSet now = extract_subnet(net, g);
    ParamSet init = extract_initial_subnet(net, g);
    CHECK(now.same_structure(init));
    CHECK(now.at("head.weight").values != init.at("head.weight").values);
}

TEST_CASE("every (edge, op) pair is sampled when E*B >= 200 on the micro space") {
    auto space = small_micro();
    Dataset ds = small_data();  // 45 train rows
    SuperNet net(space, ds.input_dim, ds.classes, 77);
    OptimizerConfig cfg;
    cfg.epochs = 40;  // 40 epochs x 6 batches = 240 steps
    cfg.batch_size = 8;
    std::set<std::pair<std::size_t, int>> sampled;
    TrainHooks hooks;
    hooks.on_path = [&](int, const Genotype& path) {
        for (std::size_t e = 0; e < path.op_indices.size(); ++e)
            sampled.insert({e, path.op_indices[e]});
    };
    train_supernet(net, ds, cfg, 6, hooks);
    CHECK(sampled.size() == space.edge_count() * space.op_count());
}

TEST_CASE("supernet checkpoints round-trip through the flatnas-ckpt-v1 container") {
    auto space = micro_space();
    Dataset ds = small_data();
    SuperNet net(space, ds.input_dim, ds.classes, 31);
    OptimizerConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    train_supernet(net, ds, cfg, 9);

    const std::string path = "supernet_roundtrip.ckpt";
    CheckpointHeader header{"micro", 31, net.epoch(), "deadbeefdeadbeef"};
    write_supernet_checkpoint(path, header, net);

    CheckpointHeader back_header;
    SuperNet back = read_supernet_checkpoint(path, &back_header);
    CHECK(back_header.preset == "micro");
    CHECK(back_header.seed == 31);
    CHECK(back_header.epoch == 2);
    CHECK(back_header.config_digest == "deadbeefdeadbeef");
    CHECK(back.shared_params() == net.shared_params());
    CHECK(back.initial_snapshot() == net.initial_snapshot());
    CHECK(back.input_dim() == net.input_dim());
    CHECK(back.num_classes() == net.num_classes());
    std::remove(path.c_str());
}

TEST_CASE("single-section paramset checkpoints round-trip") {
    auto space = micro_space();
    Genotype g{{2, 1, 0}};
    ParamSet params = init_subnet_params(space, g, 5, 3, 123);
    CheckpointHeader header{"micro", 123, 7, "feedfacefeedface"};
    const std::string path = "paramset_roundtrip.ckpt";
    write_paramset_checkpoint(path, header, params);
    CheckpointHeader back_header;
    ParamSet back = read_paramset_checkpoint(path, &back_header);
    CHECK(back == params);
    CHECK(back_header.epoch == 7);
    CHECK(back_header.preset == "micro");
    std::remove(path.c_str());
}

TEST_CASE("corrupt checkpoints are rejected cleanly") {
    auto space = micro_space();
    SuperNet net(space, 4, 3, 1);
    const std::string path = "corrupt.ckpt";
    write_supernet_checkpoint(path, {"micro", 1, 0, "d"}, net);

    // truncate inside the binary payload
    {
        std::string bytes;
        {
            std::ifstream is(path, std::ios::binary);
            std::ostringstream os;
            os << is.rdbuf();
            bytes = os.str();
        }
        std::ofstream os(path, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(read_supernet_checkpoint(path), Error);

    // wrong magic
    {
        std::ofstream os(path, std::ios::binary);
        os << "not-a-checkpoint\n";
    }
    CHECK_THROWS_AS(read_supernet_checkpoint(path), ParseError);
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_supernet_checkpoint("does_not_exist.ckpt"), IoError);
}

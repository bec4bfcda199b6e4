#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "flatnas/benchharness.hpp"
#include "flatnas/data.hpp"
#include "flatnas/errors.hpp"
#include "flatnas/searchspace.hpp"

using namespace flatnas;

TEST_CASE("spirals: stratified 50/25/25 splits with exact per-class counts") {
    Dataset ds = make_spirals(3, 300, 0.15, 16, 7);
    CHECK(ds.n == 900);
    CHECK(ds.input_dim == 16);
    CHECK(ds.train_idx.size() == 450);
    CHECK(ds.val_idx.size() == 225);
    CHECK(ds.test_idx.size() == 225);

    auto class_counts = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> counts(3, 0);
        for (auto i : idx) ++counts[static_cast<std::size_t>(ds.labels[i])];
        return counts;
    };
    CHECK(class_counts(ds.train_idx) == std::vector<int>{150, 150, 150});
    CHECK(class_counts(ds.val_idx) == std::vector<int>{75, 75, 75});
    CHECK(class_counts(ds.test_idx) == std::vector<int>{75, 75, 75});
}

TEST_CASE("splits partition the index range") {
    Dataset ds = make_spirals(2, 30, 0.1, 4, 3);
    std::set<std::size_t> all;
    all.insert(ds.train_idx.begin(), ds.train_idx.end());
    all.insert(ds.val_idx.begin(), ds.val_idx.end());
    all.insert(ds.test_idx.begin(), ds.test_idx.end());
    CHECK(all.size() == ds.n);  // disjoint and covering
    CHECK(*all.rbegin() == ds.n - 1);
}

TEST_CASE("noiseless spirals are disjoint point sets") {
    Dataset ds = make_spirals(2, 60, 0.0, 2, 11);
    std::set<std::pair<double, double>> class0, class1;
    for (std::size_t i = 0; i < ds.n; ++i) {
        auto point = std::make_pair(ds.inputs[i * 2], ds.inputs[i * 2 + 1]);
        (ds.labels[i] == 0 ? class0 : class1).insert(point);
    }
    for (const auto& p : class0) CHECK(class1.count(p) == 0);
}

TEST_CASE("regeneration from the generator spec is bit-exact") {
    Dataset a = make_spirals(3, 60, 0.15, 8, 99);
    Dataset b = make_spirals(3, 60, 0.15, 8, 99);
    CHECK(a.inputs == b.inputs);
    CHECK(a.labels == b.labels);
    CHECK(a.train_idx == b.train_idx);

    Dataset c = make_blobs(2, 30, 0.5, 4, 1);
    Dataset d = make_blobs(2, 30, 0.5, 4, 1);
    CHECK(c.inputs == d.inputs);
}

TEST_CASE("blobs at tiny spread are linearly separable") {
    // all-skip micro subnet composes to a linear classifier
    Dataset ds = make_blobs(3, 60, 1e-3, 8, 21);
    auto space = micro_space();
    Genotype all_skip{{1, 1, 1}};
    OptimizerConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 16;
    ScratchResult res = train_from_scratch(all_skip, space, ds, cfg, 5);
    CHECK(res.test_accuracy == 1.0);
}

TEST_CASE("invalid dataset parameters are rejected") {
    CHECK_THROWS_AS(make_spirals(1, 300, 0.1, 8, 3), InvalidParameter);
    CHECK_THROWS_AS(make_spirals(3, 8, 0.1, 8, 3), InvalidParameter);   // < 3*classes
    CHECK_THROWS_AS(make_spirals(3, 300, -0.1, 8, 3), InvalidParameter);
    CHECK_THROWS_AS(make_blobs(2, 30, 0.0, 4, 3), InvalidParameter);
}

TEST_CASE("epoch batches: partition, partial tail, deterministic per epoch") {
    Dataset ds = make_spirals(3, 30, 0.1, 4, 13);
    auto batches = epoch_batches(ds, Split::train, 8, 3, 0);
    std::size_t total = 0;
    std::multiset<int> seen_labels, split_labels;
    for (const auto& b : batches) {
        total += b.batch_size;
        for (int label : b.labels) seen_labels.insert(label);
    }
    for (auto i : ds.train_idx) split_labels.insert(ds.labels[i]);
    CHECK(total == ds.train_idx.size());
    CHECK(seen_labels == split_labels);
    CHECK(batches.back().batch_size == ds.train_idx.size() % 8);

    // same (seed, epoch) replays; different epochs differ
    auto again = epoch_batches(ds, Split::train, 8, 3, 0);
    CHECK(again.front().inputs == batches.front().inputs);
    auto epoch1 = epoch_batches(ds, Split::train, 8, 3, 1);
    CHECK(epoch1.front().inputs != batches.front().inputs);

    // single batch when batch_size >= split size
    auto whole = epoch_batches(ds, Split::val, 10000, 3, 0);
    CHECK(whole.size() == 1);
    CHECK(whole.front().batch_size == ds.val_idx.size());
}

TEST_CASE("CSV round-trip preserves every bit and the generator spec") {
    Dataset ds = make_spirals(3, 30, 0.15, 5, 41);
    std::ostringstream first;
    export_dataset_csv(ds, first);

    std::istringstream in(first.str());
    Dataset back = import_dataset_csv(in);
    CHECK(back.inputs == ds.inputs);
    CHECK(back.labels == ds.labels);
    CHECK(back.train_idx == ds.train_idx);
    CHECK(back.val_idx == ds.val_idx);
    CHECK(back.test_idx == ds.test_idx);
    CHECK(back.spec.name == ds.spec.name);
    CHECK(back.spec.seed == ds.spec.seed);
    CHECK(back.classes == ds.classes);

    std::ostringstream second;
    export_dataset_csv(back, second);
    CHECK(second.str() == first.str());
}

TEST_CASE("unknown split names are rejected") {
    CHECK_THROWS_AS(split_from_string("validation"), UnknownSplit);
}

TEST_CASE("malformed dataset CSVs are rejected") {
    auto parse = [](const std::string& text) {
        std::istringstream is(text);
        return import_dataset_csv(is);
    };
    CHECK_THROWS_AS(parse("f0,f1,label,split\n"), ParseError);  // no header comment
    CHECK_THROWS_AS(parse("# flatnas-dataset-v1 name=spirals seed=1\nf0,label,split\n"
                          "1.0,0\n"),
                    ParseError);  // short row
    CHECK_THROWS_AS(parse("# flatnas-dataset-v1 name=spirals seed=1\nf0,label,split\n"
                          "1.0,0,holdout\n"),
                    UnknownSplit);
    CHECK_THROWS_AS(parse("# flatnas-dataset-v1 name=spirals seed=1\nf0,label,split\n"
                          "abc,0,train\n"),
                    ParseError);  // bad float
}

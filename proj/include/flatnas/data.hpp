#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flatnas {

enum class Split { train, val, test };

Split split_from_string(std::string_view s);
std::string_view split_name(Split s);

/// Name, seed and parameters needed to regenerate a dataset bit-exactly.
struct GeneratorSpec {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> params;  // ordered key=value
};

/// Immutable synthetic classification dataset with disjoint stratified splits.
struct Dataset {
    std::size_t n = 0;
    std::size_t input_dim = 0;
    int classes = 0;
    std::vector<double> inputs;  // row-major n x input_dim
    std::vector<int> labels;
    std::vector<std::size_t> train_idx, val_idx, test_idx;
    GeneratorSpec spec;

    const std::vector<std::size_t>& split(Split s) const;
};

/// One minibatch of rows.
struct Batch {
    std::size_t batch_size = 0;
    std::size_t input_dim = 0;
    std::vector<double> inputs;  // row-major batch_size x input_dim
    std::vector<int> labels;
};

/// K interleaved 2-D spirals with Gaussian jitter, lifted to lift_dim via a
/// seeded random projection; 50/25/25 stratified splits.
Dataset make_spirals(int classes, int per_class, double noise_std, int lift_dim,
                     std::uint64_t seed);

/// Gaussian clusters at seeded random centers; the easy-mode dataset.
Dataset make_blobs(int classes, int per_class, double spread, int input_dim,
                   std::uint64_t seed);

Batch gather(const Dataset& ds, const std::vector<std::size_t>& indices);
Batch gather_split(const Dataset& ds, Split s);

/// Batches of one epoch: seeded shuffle per (shuffle_seed, epoch), final
/// partial batch included.
std::vector<Batch> epoch_batches(const Dataset& ds, Split s, std::size_t batch_size,
                                 std::uint64_t shuffle_seed, std::uint64_t epoch);

/// CSV layout: one generator_spec header comment, a column header, then one
/// row per sample (features..., label, split). Round-trips bit-exactly.
void export_dataset_csv(const Dataset& ds, std::ostream& os);
Dataset import_dataset_csv(std::istream& is);
void export_dataset_csv(const Dataset& ds, const std::string& path);
Dataset import_dataset_csv(const std::string& path);

}  // namespace flatnas

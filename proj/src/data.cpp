#include "flatnas/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "flatnas/errors.hpp"
#include "flatnas/rng.hpp"
#include "flatnas/util.hpp"

namespace flatnas {

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw UnknownSplit("'" + std::string(s) + "'");
}

std::string_view split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    throw UnknownSplit("bad split enum value");
}

const std::vector<std::size_t>& Dataset::split(Split s) const {
    switch (s) {
        case Split::train: return train_idx;
        case Split::val: return val_idx;
        case Split::test: return test_idx;
    }
    throw UnknownSplit("bad split enum value");
}

namespace {

// 50/25/25 per class; assignment shuffled inside each class so splits are
// not curve segments. Split index lists are kept sorted ascending.
void assign_splits(Dataset& ds, int classes, int per_class, Rng& rng) {
    const int n_train = (per_class + 1) / 2;
    const int n_val = (per_class - n_train + 1) / 2;
    for (int k = 0; k < classes; ++k) {
        std::vector<std::size_t> members(static_cast<std::size_t>(per_class));
        for (int i = 0; i < per_class; ++i)
            members[static_cast<std::size_t>(i)] =
                static_cast<std::size_t>(k) * static_cast<std::size_t>(per_class) +
                static_cast<std::size_t>(i);
        rng.shuffle(members);
        for (int i = 0; i < per_class; ++i) {
            if (i < n_train)
                ds.train_idx.push_back(members[static_cast<std::size_t>(i)]);
            else if (i < n_train + n_val)
                ds.val_idx.push_back(members[static_cast<std::size_t>(i)]);
            else
                ds.test_idx.push_back(members[static_cast<std::size_t>(i)]);
        }
    }
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    std::sort(ds.val_idx.begin(), ds.val_idx.end());
    std::sort(ds.test_idx.begin(), ds.test_idx.end());
}

}  // namespace

Dataset make_spirals(int classes, int per_class, double noise_std, int lift_dim,
                     std::uint64_t seed) {
    if (classes < 2) throw InvalidParameter("spirals need classes >= 2");
    if (per_class < 3 * classes) throw InvalidParameter("spirals need per_class >= 3*classes");
    if (noise_std < 0.0) throw InvalidParameter("noise_std must be >= 0");
    if (lift_dim < 2) throw InvalidParameter("lift_dim must be >= 2");

    Dataset ds;
    ds.n = static_cast<std::size_t>(classes) * static_cast<std::size_t>(per_class);
    ds.input_dim = static_cast<std::size_t>(lift_dim);
    ds.classes = classes;
    ds.inputs.resize(ds.n * ds.input_dim);
    ds.labels.resize(ds.n);

    Rng rng(seed);

    // seeded random projection 2 -> lift_dim, drawn before the points
    std::vector<double> proj(2 * static_cast<std::size_t>(lift_dim));
    for (auto& p : proj) p = rng.normal() / std::sqrt(2.0);

    const double two_pi = 2.0 * std::numbers::pi;
    for (int k = 0; k < classes; ++k) {
        for (int i = 0; i < per_class; ++i) {
            double t = static_cast<double>(i) / static_cast<double>(per_class);
            // arm radii are spaced ~3.4*(2pi/K)/(3pi) apart, so the default
            // jitter of 0.15 stays well below the inter-arm gap
            double radius = 0.6 + 3.4 * t;
            double angle = 3.0 * std::numbers::pi * t + two_pi * k / classes;
            double x = radius * std::cos(angle) + noise_std * rng.normal();
            double y = radius * std::sin(angle) + noise_std * rng.normal();
            std::size_t row = static_cast<std::size_t>(k) * static_cast<std::size_t>(per_class) +
                              static_cast<std::size_t>(i);
            for (int d = 0; d < lift_dim; ++d)
                ds.inputs[row * ds.input_dim + static_cast<std::size_t>(d)] =
                    x * proj[static_cast<std::size_t>(d)] +
                    y * proj[static_cast<std::size_t>(lift_dim + d)];
            ds.labels[row] = k;
        }
    }

    assign_splits(ds, classes, per_class, rng);

    ds.spec.name = "spirals";
    ds.spec.seed = seed;
    ds.spec.params = {{"classes", std::to_string(classes)},
                      {"per_class", std::to_string(per_class)},
                      {"noise_std", fmt_double(noise_std)},
                      {"lift_dim", std::to_string(lift_dim)}};
    return ds;
}

Dataset make_blobs(int classes, int per_class, double spread, int input_dim,
                   std::uint64_t seed) {
    if (classes < 2) throw InvalidParameter("blobs need classes >= 2");
    if (per_class < 3 * classes) throw InvalidParameter("blobs need per_class >= 3*classes");
    if (spread <= 0.0) throw InvalidParameter("spread must be > 0");
    if (input_dim < 1) throw InvalidParameter("input_dim must be >= 1");

    Dataset ds;
    ds.n = static_cast<std::size_t>(classes) * static_cast<std::size_t>(per_class);
    ds.input_dim = static_cast<std::size_t>(input_dim);
    ds.classes = classes;
    ds.inputs.resize(ds.n * ds.input_dim);
    ds.labels.resize(ds.n);

    Rng rng(seed);
    std::vector<double> centers(static_cast<std::size_t>(classes) * ds.input_dim);
    for (auto& c : centers) c = 3.0 * rng.normal();

    for (int k = 0; k < classes; ++k) {
        for (int i = 0; i < per_class; ++i) {
            std::size_t row = static_cast<std::size_t>(k) * static_cast<std::size_t>(per_class) +
                              static_cast<std::size_t>(i);
            for (int d = 0; d < input_dim; ++d)
                ds.inputs[row * ds.input_dim + static_cast<std::size_t>(d)] =
                    centers[static_cast<std::size_t>(k) * ds.input_dim +
                            static_cast<std::size_t>(d)] +
                    spread * rng.normal();
            ds.labels[row] = k;
        }
    }

    assign_splits(ds, classes, per_class, rng);

    ds.spec.name = "blobs";
    ds.spec.seed = seed;
    ds.spec.params = {{"classes", std::to_string(classes)},
                      {"per_class", std::to_string(per_class)},
                      {"spread", fmt_double(spread)},
                      {"input_dim", std::to_string(input_dim)}};
    return ds;
}

Batch gather(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Batch b;
    b.batch_size = indices.size();
    b.input_dim = ds.input_dim;
    b.inputs.resize(b.batch_size * b.input_dim);
    b.labels.resize(b.batch_size);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= ds.n) throw InvalidParameter("sample index out of range");
        std::copy_n(ds.inputs.begin() + static_cast<std::ptrdiff_t>(indices[i] * ds.input_dim),
                    ds.input_dim, b.inputs.begin() + static_cast<std::ptrdiff_t>(i * b.input_dim));
        b.labels[i] = ds.labels[indices[i]];
    }
    return b;
}

Batch gather_split(const Dataset& ds, Split s) { return gather(ds, ds.split(s)); }

std::vector<Batch> epoch_batches(const Dataset& ds, Split s, std::size_t batch_size,
                                 std::uint64_t shuffle_seed, std::uint64_t epoch) {
    if (batch_size < 1) throw InvalidParameter("batch_size must be >= 1");
    std::vector<std::size_t> order = ds.split(s);
    Rng rng(derive_seed(shuffle_seed, "epoch", epoch));
    rng.shuffle(order);
    std::vector<Batch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        std::size_t end = std::min(start + batch_size, order.size());
        std::vector<std::size_t> chunk(order.begin() + static_cast<std::ptrdiff_t>(start),
                                       order.begin() + static_cast<std::ptrdiff_t>(end));
        batches.push_back(gather(ds, chunk));
    }
    return batches;
}

void export_dataset_csv(const Dataset& ds, std::ostream& os) {
    os << "# flatnas-dataset-v1 name=" << ds.spec.name << " seed=" << ds.spec.seed;
    for (const auto& [k, v] : ds.spec.params) os << ' ' << k << '=' << v;
    os << '\n';
    for (std::size_t d = 0; d < ds.input_dim; ++d) os << 'f' << d << ',';
    os << "label,split\n";

    std::vector<std::string> split_of(ds.n);
    for (auto i : ds.train_idx) split_of[i] = "train";
    for (auto i : ds.val_idx) split_of[i] = "val";
    for (auto i : ds.test_idx) split_of[i] = "test";

    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t d = 0; d < ds.input_dim; ++d)
            os << fmt_double(ds.inputs[i * ds.input_dim + d]) << ',';
        os << ds.labels[i] << ',' << split_of[i] << '\n';
    }
}

Dataset import_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# flatnas-dataset-v1", 0) != 0)
        throw ParseError("missing dataset header comment");

    Dataset ds;
    {
        auto fields = split(line, ' ');
        // fields[0]="#", fields[1]="flatnas-dataset-v1", rest are key=value
        for (std::size_t i = 2; i < fields.size(); ++i) {
            auto eq = fields[i].find('=');
            if (eq == std::string::npos) throw ParseError("bad header field '" + fields[i] + "'");
            std::string key = fields[i].substr(0, eq), value = fields[i].substr(eq + 1);
            if (key == "name")
                ds.spec.name = value;
            else if (key == "seed")
                ds.spec.seed = parse_u64(value);
            else
                ds.spec.params.emplace_back(key, value);
        }
    }

    if (!std::getline(is, line)) throw ParseError("missing column header");
    const std::size_t cols = split(line, ',').size();
    if (cols < 3) throw ParseError("need at least one feature, label and split column");
    ds.input_dim = cols - 2;

    int max_label = -1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != cols) throw ParseError("row has wrong column count");
        for (std::size_t d = 0; d < ds.input_dim; ++d)
            ds.inputs.push_back(parse_double(fields[d]));
        int label = static_cast<int>(parse_int(fields[ds.input_dim]));
        ds.labels.push_back(label);
        max_label = std::max(max_label, label);
        std::size_t row = ds.labels.size() - 1;
        switch (split_from_string(fields[ds.input_dim + 1])) {
            case Split::train: ds.train_idx.push_back(row); break;
            case Split::val: ds.val_idx.push_back(row); break;
            case Split::test: ds.test_idx.push_back(row); break;
        }
    }
    ds.n = ds.labels.size();
    ds.classes = max_label + 1;
    if (ds.n == 0) throw ParseError("dataset has no rows");
    return ds;
}

void export_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    export_dataset_csv(ds, os);
    if (!os) throw IoError("write failed for '" + path + "'");
}

Dataset import_dataset_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    return import_dataset_csv(is);
}

}  // namespace flatnas

#include "flatnas/benchharness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include "flatnas/errors.hpp"
#include "flatnas/rng.hpp"
#include "flatnas/util.hpp"

namespace flatnas {

const GroundTruthEntry* GroundTruthTable::find(const std::string& genotype) const {
    for (const auto& [key, entry] : entries)
        if (key == genotype) return &entry;
    return nullptr;
}

ScratchResult train_from_scratch(const Genotype& g, const SearchSpaceSpec& space,
                                 const Dataset& data, const OptimizerConfig& cfg,
                                 std::uint64_t seed) {
    cfg.validate();
    ParamSet params =
        init_subnet_params(space, g, data.input_dim, data.classes, derive_seed(seed, "init"));
    const std::uint64_t shuffle_seed = derive_seed(seed, "shuffle");
    SgdState sgd;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(epoch, cfg.epochs, cfg);
        for (const auto& batch : epoch_batches(data, Split::train, cfg.batch_size, shuffle_seed,
                                               static_cast<std::uint64_t>(epoch))) {
            GradResult res = compute_gradients(params, g, space, batch);
            apply_sgd_update(params, res.grads, lr, cfg, sgd);
        }
    }
    EvalResult val = eval_loss_acc(params, g, space, gather_split(data, Split::val));
    EvalResult test = eval_loss_acc(params, g, space, gather_split(data, Split::test));
    return {test.accuracy, val.loss, std::move(params)};
}

GroundTruthTable build_ground_truth_table(const SearchSpaceSpec& space, const Dataset& data,
                                          const OptimizerConfig& cfg, int seeds_per_arch,
                                          std::uint64_t base_seed, const std::string& preset_name,
                                          const std::string& config_digest,
                                          const GroundTruthTable* partial,
                                          const OracleProgressFn& progress, int jobs,
                                          std::size_t max_archs) {
    if (seeds_per_arch < 1) throw InvalidParameter("seeds_per_arch must be >= 1");
    auto genotypes = enumerate_all(space);
    if (max_archs > 0 && max_archs < genotypes.size()) {
        Rng rng(derive_seed(base_seed, "subset"));
        std::vector<std::size_t> order(genotypes.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        order.resize(max_archs);
        std::sort(order.begin(), order.end());  // keep enumeration order
        std::vector<Genotype> sampled;
        sampled.reserve(max_archs);
        for (auto i : order) sampled.push_back(std::move(genotypes[i]));
        genotypes = std::move(sampled);
    }

    GroundTruthTable table;
    table.space_preset = preset_name;
    table.training_config_digest = config_digest;
    table.entries.resize(genotypes.size());

    std::mutex progress_mutex;
    std::size_t done = 0;
    parallel_for_indexed(genotypes.size(), jobs, [&](std::size_t i) {
        const std::string key = encode(genotypes[i], space);
        GroundTruthEntry entry;
        if (const GroundTruthEntry* existing = partial ? partial->find(key) : nullptr) {
            entry = *existing;
        } else {
            double acc_sum = 0.0, loss_sum = 0.0;
            for (int r = 0; r < seeds_per_arch; ++r) {
                std::uint64_t seed = splitmix64(derive_seed(base_seed, "arch") ^
                                                genotype_hash(genotypes[i]) ^
                                                splitmix64(static_cast<std::uint64_t>(r)));
                ScratchResult res = train_from_scratch(genotypes[i], space, data, cfg, seed);
                acc_sum += res.test_accuracy;
                loss_sum += res.final_val_loss;
            }
            entry.test_accuracy = acc_sum / seeds_per_arch;
            entry.final_val_loss = loss_sum / seeds_per_arch;
            entry.seed_count = seeds_per_arch;
        }
        table.entries[i] = {key, entry};
        if (progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(++done, genotypes.size(), key);
        }
    });
    return table;
}

bool has_ties(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

namespace {

struct TauCounts {
    long long n0 = 0;  // all pairs
    long long n1 = 0;  // pairs tied in scores
    long long n2 = 0;  // pairs tied in ground truth
    long long diff = 0;  // C - D
};

long long tied_pairs_in_runs(const std::vector<double>& sorted) {
    long long total = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
        if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
            ++run;
        } else {
            total += static_cast<long long>(run) * static_cast<long long>(run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

// strict inversions via merge sort; equal elements do not count
long long count_inversions(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                           std::size_t hi) {
    if (hi - lo < 2) return 0;
    std::size_t mid = lo + (hi - lo) / 2;
    long long inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[i] <= v[j]) {
            scratch[k++] = v[i++];
        } else {
            inv += static_cast<long long>(mid - i);
            scratch[k++] = v[j++];
        }
    }
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
              scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

// Knight's O(n log n): C - D = n0 - n1 - n2 + n3 - 2 * swaps, with swaps the
// strict inversion count of the truth sequence after sorting by (score, truth).
TauCounts tau_counts(std::span<const double> scores, std::span<const double> truth) {
    const std::size_t n = scores.size();
    if (n != truth.size() || n < 2)
        throw LengthMismatch("kendall_tau needs two equal-length lists of size >= 2");
    for (double v : scores)
        if (!std::isfinite(v)) throw InvalidParameter("kendall_tau scores must be finite");
    for (double v : truth)
        if (!std::isfinite(v)) throw InvalidParameter("kendall_tau ground truth must be finite");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return truth[a] < truth[b];
    });

    TauCounts counts;
    counts.n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;

    long long n3 = 0;  // pairs tied in both
    {
        std::size_t run = 1;
        std::size_t joint = 1;
        for (std::size_t i = 1; i <= n; ++i) {
            bool same_score = i < n && scores[order[i]] == scores[order[i - 1]];
            bool same_both = same_score && truth[order[i]] == truth[order[i - 1]];
            if (same_score)
                ++run;
            if (same_both) {
                ++joint;
            } else {
                n3 += static_cast<long long>(joint) * static_cast<long long>(joint - 1) / 2;
                joint = 1;
            }
            if (!same_score) {
                counts.n1 += static_cast<long long>(run) * static_cast<long long>(run - 1) / 2;
                run = 1;
            }
        }
    }

    std::vector<double> truth_sorted_by_score(n);
    for (std::size_t i = 0; i < n; ++i) truth_sorted_by_score[i] = truth[order[i]];
    {
        std::vector<double> truth_sorted = truth_sorted_by_score;
        std::sort(truth_sorted.begin(), truth_sorted.end());
        counts.n2 = tied_pairs_in_runs(truth_sorted);
    }

    std::vector<double> scratch(n);
    long long swaps = count_inversions(truth_sorted_by_score, scratch, 0, n);
    counts.diff = counts.n0 - counts.n1 - counts.n2 + n3 - 2 * swaps;
    return counts;
}

}  // namespace

double kendall_tau(std::span<const double> scores, std::span<const double> ground_truth) {
    TauCounts c = tau_counts(scores, ground_truth);
    if (c.n1 == c.n0 || c.n2 == c.n0)
        throw UndefinedCorrelation("one input is entirely tied");
    return static_cast<double>(c.diff) /
           std::sqrt(static_cast<double>(c.n0 - c.n1) * static_cast<double>(c.n0 - c.n2));
}

double kendall_tau_a(std::span<const double> scores, std::span<const double> ground_truth) {
    TauCounts c = tau_counts(scores, ground_truth);
    return static_cast<double>(c.diff) / static_cast<double>(c.n0);
}

double metric_rank_correlation(const std::vector<ScoreRecord>& records_a,
                               const std::vector<ScoreRecord>& records_b,
                               const SearchSpaceSpec& space) {
    if (records_a.size() != records_b.size())
        throw GenotypeSetMismatch("record lists have different sizes");
    std::vector<std::pair<std::string, double>> b_by_genotype;
    b_by_genotype.reserve(records_b.size());
    for (const auto& r : records_b)
        b_by_genotype.emplace_back(encode(r.genotype, space), r.value);
    std::sort(b_by_genotype.begin(), b_by_genotype.end());
    {
        std::vector<std::string> keys_a, keys_b;
        for (const auto& r : records_a) keys_a.push_back(encode(r.genotype, space));
        for (const auto& [key, value] : b_by_genotype) keys_b.push_back(key);
        std::sort(keys_a.begin(), keys_a.end());
        if (keys_a != keys_b)
            throw GenotypeSetMismatch("record lists cover different genotype sets");
    }

    std::vector<double> values_a, values_b;
    values_a.reserve(records_a.size());
    values_b.reserve(records_a.size());
    for (const auto& r : records_a) {
        const std::string key = encode(r.genotype, space);
        auto it = std::lower_bound(b_by_genotype.begin(), b_by_genotype.end(),
                                   std::make_pair(key, -std::numeric_limits<double>::infinity()));
        values_a.push_back(r.value);
        values_b.push_back(it->second);
    }
    return kendall_tau(values_a, values_b);
}

CurvatureProfile loss_curvature_profile_fn(const LossFn& loss, const ParamSet& params,
                                           std::span<const double> sigmas, int replicates,
                                           const NoiseFn& noise) {
    if (sigmas.empty()) throw InvalidParameter("need at least one sigma");
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (sigmas[i] < 0.0) throw InvalidParameter("sigmas must be >= 0");
        if (i > 0 && sigmas[i] <= sigmas[i - 1])
            throw InvalidParameter("sigmas must be strictly ascending");
    }
    if (replicates < 1) throw InvalidParameter("replicates must be >= 1");

    CurvatureProfile profile;
    profile.sigmas.assign(sigmas.begin(), sigmas.end());
    profile.mean_losses.assign(sigmas.size(), 0.0);
    profile.replicates = replicates;
    for (int r = 0; r < replicates; ++r) {
        std::vector<double> dir = noise(params.total_elements());
        for (std::size_t i = 0; i < sigmas.size(); ++i)
            profile.mean_losses[i] += loss(perturb(params, sigmas[i], dir, PerturbMask::all));
    }
    for (auto& v : profile.mean_losses) v /= static_cast<double>(replicates);
    return profile;
}

CurvatureProfile loss_curvature_profile(const ParamSet& params, const Genotype& g,
                                        const SearchSpaceSpec& space, const Batch& val_set,
                                        std::span<const double> sigmas, int replicates, Rng& rng) {
    LossFn loss = [&](const ParamSet& p) { return forward(p, g, space, val_set).loss; };
    NoiseFn noise = [&rng](std::size_t n) { return rng.normal_vec(n); };
    CurvatureProfile profile = loss_curvature_profile_fn(loss, params, sigmas, replicates, noise);
    profile.genotype = g;
    return profile;
}

void write_ground_truth_csv(std::ostream& os, const GroundTruthTable& table) {
    os << "genotype,test_accuracy,final_val_loss,seed_count\n";
    for (const auto& [key, entry] : table.entries)
        os << key << ',' << fmt_double(entry.test_accuracy) << ','
           << fmt_double(entry.final_val_loss) << ',' << entry.seed_count << '\n';
    os << "# preset=" << table.space_preset << " digest=" << table.training_config_digest << '\n';
}

GroundTruthTable read_ground_truth_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "genotype,test_accuracy,final_val_loss,seed_count")
        throw ParseError("bad or missing ground-truth CSV header");
    GroundTruthTable table;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            for (const auto& field : split(line.substr(2), ' ')) {
                auto eq = field.find('=');
                if (eq == std::string::npos) continue;
                std::string key = field.substr(0, eq), value = field.substr(eq + 1);
                if (key == "preset") table.space_preset = value;
                if (key == "digest") table.training_config_digest = value;
            }
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() != 4) throw ParseError("ground-truth CSV row needs 4 columns");
        GroundTruthEntry entry;
        entry.test_accuracy = parse_double(fields[1]);
        entry.final_val_loss = parse_double(fields[2]);
        entry.seed_count = static_cast<int>(parse_int(fields[3]));
        table.entries.emplace_back(fields[0], entry);
    }
    return table;
}

void write_ground_truth_csv(const std::string& path, const GroundTruthTable& table) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_ground_truth_csv(os, table);
    if (!os) throw IoError("write failed for '" + path + "'");
}

GroundTruthTable read_ground_truth_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_ground_truth_csv(is);
}

void write_profile_csv(std::ostream& os, const CurvatureProfile& profile,
                       const SearchSpaceSpec& space, const std::string& config_digest) {
    os << "# genotype=" << encode(profile.genotype, space) << " replicates=" << profile.replicates
       << " digest=" << config_digest << '\n';
    os << "sigma,mean_loss\n";
    for (std::size_t i = 0; i < profile.sigmas.size(); ++i)
        os << fmt_double(profile.sigmas[i]) << ',' << fmt_double(profile.mean_losses[i]) << '\n';
}

}  // namespace flatnas

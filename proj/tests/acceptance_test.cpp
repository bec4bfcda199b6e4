// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs the canonical micro-space pipeline end to end.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flatnas/benchharness.hpp"
#include "flatnas/checkpoint.hpp"
#include "flatnas/cli.hpp"
#include "flatnas/data.hpp"
#include "flatnas/errors.hpp"
#include "flatnas/evolution.hpp"
#include "flatnas/metrics.hpp"
#include "flatnas/supernet.hpp"
#include "flatnas/util.hpp"

using namespace flatnas;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int number;
    std::string label;
    double budget_seconds;
    std::function<bool(std::string&)> run;
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// ---------------------------------------------------------------------------
// shared pipeline state for criteria 6, 8, 9 (built once, inside criterion 6)
// ---------------------------------------------------------------------------

struct PipelineState {
    Dataset dataset;
    SearchSpaceSpec space;
    std::vector<Genotype> genotypes;
    std::vector<double> truth_accuracy;
    Genotype best_arch, worst_arch;

    struct SeedRun {
        double tau_alpha0 = 0.0;
        double tau_alpha1 = 0.0;
        double tau_angle_vs_flatness = 0.0;
        double profile_best_sigma1 = 0.0;
        double profile_worst_sigma1 = 0.0;
    };
    std::vector<SeedRun> runs;  // pipeline seeds 1..3
    bool built = false;
};

PipelineState g_pipeline;

void build_pipeline_state() {
    if (g_pipeline.built) return;
    RunConfig cfg;  // canonical defaults: micro, spirals 3x300, seed 1
    g_pipeline.dataset = build_dataset(cfg);
    g_pipeline.space = preset_space(cfg.space_preset);

    OptimizerConfig scratch = cfg.optimizer;
    scratch.epochs = 800;
    GroundTruthTable table =
        build_ground_truth_table(g_pipeline.space, g_pipeline.dataset, scratch,
                                 /*seeds_per_arch=*/3, cfg.oracle_seed(), "micro", "acceptance",
                                 nullptr, {}, /*jobs=*/4);
    double best = -1.0, worst = 2.0;
    for (const auto& [key, entry] : table.entries) {
        Genotype g = decode(key, g_pipeline.space);
        g_pipeline.genotypes.push_back(g);
        g_pipeline.truth_accuracy.push_back(entry.test_accuracy);
        if (entry.test_accuracy > best) {
            best = entry.test_accuracy;
            g_pipeline.best_arch = g;
        }
        if (entry.test_accuracy < worst) {
            worst = entry.test_accuracy;
            g_pipeline.worst_arch = g;
        }
    }

    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        RunConfig run = cfg;
        run.seed = seed;
        SuperNet net(g_pipeline.space, g_pipeline.dataset.input_dim, g_pipeline.dataset.classes,
                     run.supernet_init_seed());
        train_supernet(net, g_pipeline.dataset, run.optimizer, run.supernet_train_seed());

        MetricSpec alpha0 = run.metric_spec();
        alpha0.name = MetricName::flatness;
        alpha0.flatness.alpha = 0.0;
        MetricSpec alpha1 = alpha0;
        alpha1.flatness.alpha = 1.0;
        MetricSpec angle = alpha0;
        angle.name = MetricName::angle;

        ScoringContext ctx = make_scoring_context(net, g_pipeline.dataset, alpha0.flatness);
        auto rec0 = score_population(ctx, g_pipeline.genotypes, alpha0, run.flatness_seed(), 4);
        auto rec1 = score_population(ctx, g_pipeline.genotypes, alpha1, run.flatness_seed(), 4);
        auto reca = score_population(ctx, g_pipeline.genotypes, angle, run.flatness_seed(), 4);

        std::vector<double> v0, v1;
        for (const auto& r : rec0) v0.push_back(r.value);
        for (const auto& r : rec1) v1.push_back(r.value);

        PipelineState::SeedRun result;
        result.tau_alpha0 = kendall_tau(v0, g_pipeline.truth_accuracy);
        result.tau_alpha1 = kendall_tau(v1, g_pipeline.truth_accuracy);
        result.tau_angle_vs_flatness = metric_rank_correlation(reca, rec1, g_pipeline.space);

        const std::vector<double> sigmas = run.flatness.sigmas;
        Batch val = gather_split(g_pipeline.dataset, Split::val);
        Rng rng_best(run.profile_seed());
        result.profile_best_sigma1 =
            loss_curvature_profile(extract_subnet(net, g_pipeline.best_arch), g_pipeline.best_arch,
                                   g_pipeline.space, val, sigmas, 16, rng_best)
                .mean_losses[0];
        Rng rng_worst(run.profile_seed());
        result.profile_worst_sigma1 =
            loss_curvature_profile(extract_subnet(net, g_pipeline.worst_arch),
                                   g_pipeline.worst_arch, g_pipeline.space, val, sigmas, 16,
                                   rng_worst)
                .mean_losses[0];
        g_pipeline.runs.push_back(result);
    }
    g_pipeline.built = true;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

bool criterion_flatness_oracle(std::string& note) {
    ParamSet params;
    ParamEntry entry;
    entry.name = "w";
    entry.shape = {1};
    entry.group = ParamGroup::cell;
    entry.values = {0.0};
    params.add(std::move(entry));

    FlatnessConfig cfg;
    cfg.sigmas = {0.1, 0.2};
    cfg.alpha = 1.0;
    cfg.replicates = 1;
    LossFn quadratic = [](const ParamSet& p) {
        double w = p.entries()[0].values[0];
        return w * w;
    };
    NoiseFn unit = [](std::size_t n) { return std::vector<double>(n, 1.0); };
    double score = flatness_score_fn(quadratic, params, cfg, unit);
    note = "score " + fmt_double(score) + " expected 2.5";
    return std::abs(score - 2.5) / 2.5 < 1e-9;
}

// independent O(n^2) pair counter
double brute_force_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    long long concordant = 0, discordant = 0, tied_x_only = 0, tied_y_only = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            bool tx = x[i] == x[j], ty = y[i] == y[j];
            if (tx && ty) continue;
            if (tx) ++tied_x_only;
            else if (ty) ++tied_y_only;
            else if ((x[i] < x[j]) == (y[i] < y[j])) ++concordant;
            else ++discordant;
        }
    return static_cast<double>(concordant - discordant) /
           std::sqrt(static_cast<double>(concordant + discordant + tied_y_only) *
                     static_cast<double>(concordant + discordant + tied_x_only));
}

bool criterion_kendall_oracle(std::string& note) {
    Rng rng(1729);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng.below(49);  // lengths 2..50
        bool with_ties = trial % 2 == 0;
        std::vector<double> x(n), y(n);
        auto draw = [&](std::vector<double>& v) {
            do {
                for (auto& value : v)
                    value = with_ties ? static_cast<double>(rng.below(4)) : rng.normal();
            } while (std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end());
        };
        draw(x);
        draw(y);
        if (kendall_tau(x, y) != brute_force_tau_b(x, y)) {
            note = "disagreement at trial " + std::to_string(trial);
            return false;
        }
        ++checked;
    }

    std::vector<double> ascending(40), descending(40);
    for (std::size_t i = 0; i < 40; ++i) {
        ascending[i] = static_cast<double>(i);
        descending[i] = static_cast<double>(40 - i);
    }
    if (kendall_tau(ascending, ascending) != 1.0) {
        note = "identity case not exactly 1.0";
        return false;
    }
    if (kendall_tau(descending, ascending) != -1.0) {
        note = "reversed case not exactly -1.0";
        return false;
    }
    note = std::to_string(checked) + " random vectors, exact agreement";
    return true;
}

bool criterion_gradient_check(std::string& note) {
    SearchSpaceSpec space = nano201_space();
    space.channels = 3;
    space.cells_per_network = 2;
    const double h = 1e-4;
    double max_rel = 0.0;
    for (std::uint64_t instance = 0; instance < 20; ++instance) {
        Rng rng(instance + 1);
        Genotype g;
        if (instance == 0) {
            g.op_indices = {2, 3, 4, 1, 0, 2};  // every op kind on a live path
        } else {
            g = sample_uniform_path(space, rng);
        }
        ParamSet params = init_subnet_params(space, g, 3, 3, instance * 31 + 7);
        // jitter to a generic point: zero-init biases on dead-input relu
        // edges would otherwise sit exactly on the relu kink, where central
        // differences and the zero subgradient legitimately disagree
        for (auto& entry : params.entries())
            for (auto& v : entry.values) v += 0.05 * rng.normal();
        Batch batch;
        batch.batch_size = 4;
        batch.input_dim = 3;
        batch.inputs = rng.normal_vec(12);
        batch.labels = {0, 1, 2, 1};

        GradResult res = compute_gradients(params, g, space, batch);
        for (const auto& entry : params.entries()) {
            for (std::size_t i = 0; i < entry.size(); ++i) {
                ParamSet plus = params, minus = params;
                plus.at(entry.name).values[i] += h;
                minus.at(entry.name).values[i] -= h;
                double fd = (forward(plus, g, space, batch).loss -
                             forward(minus, g, space, batch).loss) /
                            (2.0 * h);
                double analytic = res.grads.at(entry.name).values[i];
                double denom = std::max({std::abs(analytic), std::abs(fd), 1e-6});
                max_rel = std::max(max_rel, std::abs(analytic - fd) / denom);
            }
        }
    }
    note = "max relative error " + fmt_double(max_rel);
    return max_rel < 1e-4;
}

bool criterion_single_path_locality(std::string& note) {
    SearchSpaceSpec space = nano201_space();
    space.channels = 4;
    space.cells_per_network = 2;
    Dataset ds = make_spirals(3, 30, 0.15, 5, 10101);
    OptimizerConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 1024;  // whole train split: exactly one step per call

    SuperNet net(space, ds.input_dim, ds.classes, 5150);
    int violations = 0;
    for (std::uint64_t step = 0; step < 100; ++step) {
        ParamSet before = net.shared_params();
        Genotype path;
        TrainHooks hooks;
        hooks.on_path = [&](int, const Genotype& p) { path = p; };
        train_supernet(net, ds, cfg, step, hooks);

        std::set<std::string> active;
        for (int c = 0; c < space.cells_per_network; ++c)
            for (std::size_t e = 0; e < space.edge_count(); ++e) {
                const std::string& op =
                    space.op_names[static_cast<std::size_t>(path.op_indices[e])];
                if (op == "linear" || op == "relu_linear" || op == "scale")
                    active.insert("cell" + std::to_string(c) + ".edge" + std::to_string(e) + "." +
                                  op);
            }
        for (const auto& entry : before.entries()) {
            if (entry.group != ParamGroup::cell) continue;
            bool on_path = false;
            for (const auto& prefix : active)
                if (entry.name.rfind(prefix, 0) == 0) on_path = true;
            if (!on_path && net.shared_params().at(entry.name).values != entry.values)
                ++violations;
        }
    }
    note = "violations " + std::to_string(violations) + "/100 steps";
    return violations == 0;
}

bool criterion_evolution_optimality(std::string& note) {
    auto space = micro_space();
    std::map<Genotype, double> table;
    Rng rng(4242);
    for (const auto& g : enumerate_all(space)) table[g] = rng.uniform01();
    Genotype expected;
    double best_value = -1.0;
    for (const auto& [g, value] : table)  // exhaustive argmax oracle
        if (value > best_value) {
            best_value = value;
            expected = g;
        }

    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        EvolutionConfig cfg = EvolutionConfig::defaults_for(10);
        cfg.iterations = 20;
        cfg.seed = seed;
        EvolveResult res =
            evolve(space, [&](const Genotype& g) { return table.at(g); }, cfg);
        if (res.best.genotype == expected) ++hits;
    }
    note = "argmax found in " + std::to_string(hits) + "/10 seeds";
    return hits >= 9;
}

bool criterion_alpha_trend(std::string& note) {
    build_pipeline_state();
    int wins = 0;
    std::string detail;
    for (const auto& run : g_pipeline.runs) {
        if (run.tau_alpha1 > run.tau_alpha0) ++wins;
        detail += " [a0 " + fmt_double(run.tau_alpha0) + " a1 " + fmt_double(run.tau_alpha1) + "]";
    }
    note = "tau(alpha=1) > tau(alpha=0) in " + std::to_string(wins) + "/3 seeds;" + detail;
    return wins >= 2;
}

bool criterion_gamma_degenerate(std::string& note) {
    const fs::path root = fs::path("acceptance_scratch") / "gamma0";
    fs::remove_all(root);
    RunConfig base;
    base.metric.name = "accuracy";
    base.output_dir = (root / "base").string();
    cmd_gen_data(base);
    cmd_train_supernet(base);
    cmd_search(base);

    RunConfig degenerate = base;
    degenerate.metric.name = "combined";
    degenerate.metric.base_metric = "accuracy";
    degenerate.metric.gamma = 0.0;
    degenerate.output_dir = (root / "gamma0").string();
    cmd_gen_data(degenerate);
    cmd_train_supernet(degenerate);
    cmd_search(degenerate);

    bool same = slurp(base.path("history.jsonl")) == slurp(degenerate.path("history.jsonl"));
    note = same ? "histories byte-identical" : "histories differ";
    return same;
}

bool criterion_profile_trend(std::string& note) {
    build_pipeline_state();
    int wins = 0;
    std::string detail;
    for (const auto& run : g_pipeline.runs) {
        if (run.profile_best_sigma1 < run.profile_worst_sigma1) ++wins;
        detail += " [best " + fmt_double(run.profile_best_sigma1) + " worst " +
                  fmt_double(run.profile_worst_sigma1) + "]";
    }
    note = "best-arch loss below worst-arch at sigma1 in " + std::to_string(wins) + "/3 seeds;" +
           detail;
    return wins >= 2;
}

bool criterion_angle_flatness_correlation(std::string& note) {
    build_pipeline_state();
    int below = 0;
    std::string detail;
    for (const auto& run : g_pipeline.runs) {
        if (run.tau_angle_vs_flatness < 0.9) ++below;
        detail += " " + fmt_double(run.tau_angle_vs_flatness);
    }
    note = "tau(angle, flatness) =" + detail + "; below 0.9 in " + std::to_string(below) +
           "/3 seeds";
    return below == 3;
}

bool criterion_end_to_end_determinism(std::string& note) {
    const fs::path root = fs::path("acceptance_scratch") / "determinism";
    fs::remove_all(root);
    auto run_pipeline = [&](const std::string& leaf) {
        RunConfig cfg;  // canonical: metric flatness, seed 1
        cfg.output_dir = (root / leaf).string();
        cfg.jobs = leaf == "first" ? 4 : 2;  // concurrency must not leak into outputs
        cmd_gen_data(cfg);
        cmd_oracle(cfg, "", /*scratch_epochs=*/400, /*seeds_per_arch=*/1);
        cmd_train_supernet(cfg);
        cmd_search(cfg);
        cmd_tau(cfg, cfg.path("scores.csv"), cfg.path("ground_truth.csv"));
        return cfg;
    };
    RunConfig first = run_pipeline("first");
    RunConfig second = run_pipeline("second");

    const std::vector<std::string> artifacts{"dataset.csv",   "ground_truth.csv",
                                             "supernet.ckpt", "train_log.txt",
                                             "history.jsonl", "best.txt",
                                             "scores.csv",    "tau_report.csv"};
    std::vector<std::string> mismatched;
    for (const auto& name : artifacts)
        if (slurp(first.path(name)) != slurp(second.path(name))) mismatched.push_back(name);
    if (mismatched.empty()) {
        note = std::to_string(artifacts.size()) + " artifacts byte-identical across reruns";
        return true;
    }
    note = "mismatched:";
    for (const auto& name : mismatched) note += " " + name;
    return false;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "flatness formula matches the hand-computed quadratic value 2.5", 1.0,
         criterion_flatness_oracle},
        {2, "kendall tau agrees exactly with the O(n^2) pair counter", 5.0,
         criterion_kendall_oracle},
        {3, "analytic gradients match central finite differences (<1e-4)", 10.0,
         criterion_gradient_check},
        {4, "single-path supernet steps leave non-sampled blocks bit-identical", 10.0,
         criterion_single_path_locality},
        {5, "evolution recovers the exhaustive argmax in >=9/10 seeds", 5.0,
         criterion_evolution_optimality},
        {6, "depth term improves tau: alpha=1 beats alpha=0 in >=2/3 seeds", 600.0,
         criterion_alpha_trend},
        {7, "combined metric at gamma=0 reproduces the base search bit-for-bit", 60.0,
         criterion_gamma_degenerate},
        {8, "best-oracle architecture sits in a lower loss basin than the worst", 120.0,
         criterion_profile_trend},
        {9, "angle and flatness rank architectures differently (tau < 0.9)", 300.0,
         criterion_angle_flatness_correlation},
        {10, "full pipeline rerun is byte-identical", 900.0, criterion_end_to_end_determinism},
    };

    int failures = 0;
    for (auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        bool ok = false;
        std::string note;
        try {
            ok = criterion.run(note);
        } catch (const std::exception& err) {
            ok = false;
            note = std::string("exception: ") + err.what();
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count();
        if (seconds > criterion.budget_seconds) {
            ok = false;
            note += " [over budget " + fmt_double(criterion.budget_seconds) + "s]";
        }
        if (!ok) ++failures;
        std::printf("[%s] %2d. %s (%.2fs) -- %s\n", ok ? "PASS" : "FAIL", criterion.number,
                    criterion.label.c_str(), seconds, note.c_str());
        std::fflush(stdout);
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}

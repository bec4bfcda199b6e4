#include "flatnas/cli.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <iostream>
#include <sstream>

#include "flatnas/benchharness.hpp"
#include "flatnas/checkpoint.hpp"
#include "flatnas/data.hpp"
#include "flatnas/errors.hpp"
#include "flatnas/rng.hpp"
#include "flatnas/supernet.hpp"
#include "flatnas/util.hpp"

namespace flatnas {

namespace fs = std::filesystem;

void RunConfig::validate() const {
    preset_space(space_preset);
    if (dataset_spec.name != "spirals" && dataset_spec.name != "blobs")
        throw InvalidParameter("dataset name must be 'spirals' or 'blobs'");
    if (dataset_spec.classes < 2) throw InvalidParameter("dataset needs classes >= 2");
    if (dataset_spec.per_class < 3 * dataset_spec.classes)
        throw InvalidParameter("dataset needs per_class >= 3*classes");
    optimizer.validate();
    flatness.validate();
    evolution.validate();
    metric_from_string(metric.name);
    MetricName base = metric_from_string(metric.base_metric);
    if (metric.name == "combined") {
        if (metric.gamma < 0.0) throw InvalidParameter("combined metric requires gamma >= 0");
        if (base == MetricName::flatness || base == MetricName::combined)
            throw InvalidParameter("combined base_metric must be accuracy or angle");
    }
    if (output_dir.empty()) throw InvalidParameter("output_dir must be non-empty");
    if (jobs < 1) throw InvalidParameter("jobs must be >= 1");
}

std::uint64_t RunConfig::data_seed() const {
    return dataset_spec.seed ? *dataset_spec.seed : derive_seed(seed, "data");
}
std::uint64_t RunConfig::supernet_init_seed() const { return derive_seed(seed, "supernet-init"); }
std::uint64_t RunConfig::supernet_train_seed() const { return derive_seed(seed, "supernet-train"); }
std::uint64_t RunConfig::flatness_seed() const { return derive_seed(seed, "flatness"); }
std::uint64_t RunConfig::evolution_seed() const {
    return evolution.seed != 0 ? evolution.seed : derive_seed(seed, "evolution");
}
std::uint64_t RunConfig::oracle_seed() const { return derive_seed(seed, "oracle"); }
std::uint64_t RunConfig::profile_seed() const { return derive_seed(seed, "profile"); }

FlatnessConfig RunConfig::flatness_for_run() const {
    FlatnessConfig cfg = flatness;
    cfg.subset_seed = derive_seed(seed, "flatness-subset");
    return cfg;
}

MetricSpec RunConfig::metric_spec() const {
    MetricSpec spec;
    spec.name = metric_from_string(metric.name);
    spec.base_metric = metric_from_string(metric.base_metric);
    spec.gamma = metric.gamma;
    spec.flatness = flatness_for_run();
    return spec;
}

std::string RunConfig::path(const std::string& filename) const {
    return (fs::path(output_dir) / filename).string();
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json ds{{"name", cfg.dataset_spec.name},
                      {"classes", cfg.dataset_spec.classes},
                      {"per_class", cfg.dataset_spec.per_class},
                      {"noise_std", cfg.dataset_spec.noise_std},
                      {"lift_dim", cfg.dataset_spec.lift_dim},
                      {"spread", cfg.dataset_spec.spread},
                      {"input_dim", cfg.dataset_spec.input_dim}};
    if (cfg.dataset_spec.seed) ds["seed"] = *cfg.dataset_spec.seed;
    return nlohmann::json{
        {"space_preset", cfg.space_preset},
        {"dataset_spec", ds},
        {"optimizer",
         {{"lr_max", cfg.optimizer.lr_max},
          {"lr_min", cfg.optimizer.lr_min},
          {"weight_decay", cfg.optimizer.weight_decay},
          {"epochs", cfg.optimizer.epochs},
          {"momentum", cfg.optimizer.momentum},
          {"batch_size", cfg.optimizer.batch_size}}},
        {"flatness",
         {{"sigmas", cfg.flatness.sigmas},
          {"alpha", cfg.flatness.alpha},
          {"replicates", cfg.flatness.replicates},
          {"mode", std::string(noise_mode_name(cfg.flatness.mode))},
          {"mask", std::string(perturb_mask_name(cfg.flatness.mask))},
          {"eval_subset_size", cfg.flatness.eval_subset_size},
          {"signed_variant", cfg.flatness.signed_variant},
          {"epsilon", cfg.flatness.epsilon}}},
        {"evolution",
         {{"population_size", cfg.evolution.population_size},
          {"iterations", cfg.evolution.iterations},
          {"top_k", cfg.evolution.top_k},
          {"crossover_count", cfg.evolution.crossover_count},
          {"mutation_count", cfg.evolution.mutation_count},
          {"mutation_rate", cfg.evolution.mutation_rate},
          {"seed", cfg.evolution.seed}}},
        {"metric",
         {{"name", cfg.metric.name},
          {"base_metric", cfg.metric.base_metric},
          {"gamma", cfg.metric.gamma}}},
        {"output_dir", cfg.output_dir},
        {"seed", cfg.seed}};
}

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) known = true;
        if (!known) throw InvalidParameter("unknown config key '" + it.key() + "' in " + where);
    }
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    check_keys(j,
               {"space_preset", "dataset_spec", "optimizer", "flatness", "evolution", "metric",
                "output_dir", "seed", "jobs"},
               "config");
    maybe(j, "space_preset", cfg.space_preset);
    maybe(j, "output_dir", cfg.output_dir);
    maybe(j, "seed", cfg.seed);
    maybe(j, "jobs", cfg.jobs);
    if (j.contains("dataset_spec")) {
        const auto& d = j.at("dataset_spec");
        check_keys(d, {"name", "classes", "per_class", "noise_std", "lift_dim", "spread",
                       "input_dim", "seed"},
                   "dataset_spec");
        maybe(d, "name", cfg.dataset_spec.name);
        maybe(d, "classes", cfg.dataset_spec.classes);
        maybe(d, "per_class", cfg.dataset_spec.per_class);
        maybe(d, "noise_std", cfg.dataset_spec.noise_std);
        maybe(d, "lift_dim", cfg.dataset_spec.lift_dim);
        maybe(d, "spread", cfg.dataset_spec.spread);
        maybe(d, "input_dim", cfg.dataset_spec.input_dim);
        if (d.contains("seed")) cfg.dataset_spec.seed = d.at("seed").get<std::uint64_t>();
    }
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        check_keys(o, {"lr_max", "lr_min", "weight_decay", "epochs", "momentum", "batch_size"},
                   "optimizer");
        maybe(o, "lr_max", cfg.optimizer.lr_max);
        maybe(o, "lr_min", cfg.optimizer.lr_min);
        maybe(o, "weight_decay", cfg.optimizer.weight_decay);
        maybe(o, "epochs", cfg.optimizer.epochs);
        maybe(o, "momentum", cfg.optimizer.momentum);
        maybe(o, "batch_size", cfg.optimizer.batch_size);
    }
    if (j.contains("flatness")) {
        const auto& f = j.at("flatness");
        check_keys(f,
                   {"sigmas", "alpha", "replicates", "mode", "mask", "eval_subset_size",
                    "signed_variant", "epsilon"},
                   "flatness");
        maybe(f, "sigmas", cfg.flatness.sigmas);
        maybe(f, "alpha", cfg.flatness.alpha);
        maybe(f, "replicates", cfg.flatness.replicates);
        if (f.contains("mode"))
            cfg.flatness.mode = noise_mode_from_string(f.at("mode").get<std::string>());
        if (f.contains("mask"))
            cfg.flatness.mask = perturb_mask_from_string(f.at("mask").get<std::string>());
        maybe(f, "eval_subset_size", cfg.flatness.eval_subset_size);
        maybe(f, "signed_variant", cfg.flatness.signed_variant);
        maybe(f, "epsilon", cfg.flatness.epsilon);
    }
    if (j.contains("evolution")) {
        const auto& e = j.at("evolution");
        check_keys(e,
                   {"population_size", "iterations", "top_k", "crossover_count", "mutation_count",
                    "mutation_rate", "seed"},
                   "evolution");
        int pop = cfg.evolution.population_size;
        maybe(e, "population_size", pop);
        cfg.evolution = EvolutionConfig::defaults_for(pop);
        maybe(e, "iterations", cfg.evolution.iterations);
        maybe(e, "top_k", cfg.evolution.top_k);
        maybe(e, "crossover_count", cfg.evolution.crossover_count);
        maybe(e, "mutation_count", cfg.evolution.mutation_count);
        maybe(e, "mutation_rate", cfg.evolution.mutation_rate);
        maybe(e, "seed", cfg.evolution.seed);
    }
    if (j.contains("metric")) {
        const auto& m = j.at("metric");
        check_keys(m, {"name", "base_metric", "gamma"}, "metric");
        maybe(m, "name", cfg.metric.name);
        maybe(m, "base_metric", cfg.metric.base_metric);
        maybe(m, "gamma", cfg.metric.gamma);
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& err) {
        throw InvalidParameter("config '" + path + "' is not valid JSON: " + err.what());
    }
    return run_config_from_json(j);
}

std::string config_digest(const RunConfig& cfg) {
    // output_dir and jobs are workspace plumbing, not experiment identity;
    // the digest must match across reruns into different directories
    nlohmann::json j = run_config_to_json(cfg);
    j.erase("output_dir");
    return hex16(fnv1a64(j.dump()));
}

Dataset build_dataset(const RunConfig& cfg) {
    const auto& d = cfg.dataset_spec;
    if (d.name == "spirals")
        return make_spirals(d.classes, d.per_class, d.noise_std, d.lift_dim, cfg.data_seed());
    if (d.name == "blobs")
        return make_blobs(d.classes, d.per_class, d.spread, d.input_dim, cfg.data_seed());
    throw InvalidParameter("dataset name must be 'spirals' or 'blobs'");
}

namespace {

std::uint64_t file_digest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return fnv1a64(buf.str());
}

std::string default_path(const RunConfig& cfg, const std::string& override_path,
                         const std::string& filename) {
    return override_path.empty() ? cfg.path(filename) : override_path;
}

Dataset load_dataset_for(const RunConfig& cfg, const std::string& dataset_path) {
    return import_dataset_csv(default_path(cfg, dataset_path, "dataset.csv"));
}

}  // namespace

void cmd_gen_data(const RunConfig& cfg) {
    cfg.validate();
    const std::string digest = config_digest(cfg);
    fs::create_directories(cfg.output_dir);
    Dataset ds = build_dataset(cfg);
    ds.spec.params.emplace_back("config_digest", digest);
    const std::string out = cfg.path("dataset.csv");
    export_dataset_csv(ds, out);
    std::cout << "config_digest " << digest << '\n';
    std::cout << "dataset " << out << " rows " << ds.n << " file_digest "
              << hex16(file_digest(out)) << '\n';
}

void cmd_train_supernet(const RunConfig& cfg, const std::string& dataset_path) {
    cfg.validate();
    const std::string digest = config_digest(cfg);
    fs::create_directories(cfg.output_dir);
    Dataset ds = load_dataset_for(cfg, dataset_path);

    SuperNet net(preset_space(cfg.space_preset), ds.input_dim, ds.classes,
                 cfg.supernet_init_seed());
    std::ofstream log(cfg.path("train_log.txt"), std::ios::binary);
    if (!log) throw IoError("cannot open train log for writing");
    log << "# digest=" << digest << '\n';
    TrainHooks hooks;
    hooks.on_epoch = [&](int epoch, double lr, double mean_loss) {
        std::ostringstream line;
        line << "epoch " << epoch << " lr " << fmt_double(lr) << " mean_loss "
             << fmt_double(mean_loss);
        log << line.str() << '\n';
        std::cout << line.str() << '\n';
    };
    train_supernet(net, ds, cfg.optimizer, cfg.supernet_train_seed(), hooks);

    CheckpointHeader header{cfg.space_preset, cfg.seed, net.epoch(), digest};
    write_supernet_checkpoint(cfg.path("supernet.ckpt"), header, net);
    std::cout << "config_digest " << digest << '\n';
    std::cout << "checkpoint " << cfg.path("supernet.ckpt") << '\n';
}

void cmd_search(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& dataset_path) {
    cfg.validate();
    const std::string digest = config_digest(cfg);
    fs::create_directories(cfg.output_dir);
    Dataset ds = load_dataset_for(cfg, dataset_path);
    SuperNet net = read_supernet_checkpoint(default_path(cfg, checkpoint_path, "supernet.ckpt"));

    MetricSpec spec = cfg.metric_spec();
    spec.validate();
    ScoringContext ctx = make_scoring_context(net, ds, spec.flatness);
    const std::uint64_t score_seed = cfg.flatness_seed();
    Scorer scorer = [&](const Genotype& g) { return score_one(ctx, g, spec, score_seed); };

    EvolutionConfig evo = cfg.evolution;
    evo.seed = cfg.evolution_seed();
    EvolveResult result = evolve(net.space(), scorer, evo, cfg.jobs);

    {
        // history stays digest-free: the gamma=0 combined search must emit the
        // same bytes as its base-metric search
        std::ofstream os(cfg.path("history.jsonl"), std::ios::binary);
        if (!os) throw IoError("cannot open history log for writing");
        write_history_jsonl(os, result.history, net.space());
    }
    {
        std::ofstream os(cfg.path("best.txt"), std::ios::binary);
        if (!os) throw IoError("cannot open best file for writing");
        os << "genotype " << encode(result.best.genotype, net.space()) << '\n';
        os << "score " << fmt_double(result.best.score) << '\n';
        os << "metric " << cfg.metric.name << '\n';
        os << "digest " << digest << '\n';
    }
    {
        // every genotype the search scored, first occurrence in visit order
        std::vector<ScoreRecord> records;
        std::set<Genotype> recorded;
        const std::string metric_digest = spec.digest();
        for (const auto& snapshot : result.history)
            for (const auto& cand : snapshot)
                if (recorded.insert(cand.genotype).second)
                    records.push_back({cand.genotype, cfg.metric.name, cand.score,
                                       genotype_score_seed(score_seed, cand.genotype),
                                       metric_digest});
        std::ofstream os(cfg.path("scores.csv"), std::ios::binary);
        if (!os) throw IoError("cannot open scores CSV for writing");
        write_score_csv(os, records, net.space());
    }
    for (const auto& [genotype, message] : result.failures)
        std::cerr << "scorer failure: " << encode(genotype, net.space()) << ": " << message
                  << '\n';
    std::cout << "config_digest " << digest << '\n';
    std::cout << "best " << encode(result.best.genotype, net.space()) << " score "
              << fmt_double(result.best.score) << '\n';
}

namespace {

std::string oracle_training_digest(const RunConfig& cfg, int scratch_epochs, int seeds_per_arch,
                                   std::size_t max_archs) {
    OptimizerConfig train_cfg = cfg.optimizer;
    train_cfg.epochs = scratch_epochs;
    nlohmann::json j{{"preset", cfg.space_preset},
                     {"dataset", run_config_to_json(cfg).at("dataset_spec")},
                     {"optimizer",
                      {{"lr_max", train_cfg.lr_max},
                       {"lr_min", train_cfg.lr_min},
                       {"weight_decay", train_cfg.weight_decay},
                       {"epochs", train_cfg.epochs},
                       {"momentum", train_cfg.momentum},
                       {"batch_size", train_cfg.batch_size}}},
                     {"oracle_seed", cfg.oracle_seed()},
                     {"seeds_per_arch", seeds_per_arch},
                     {"max_archs", max_archs}};
    return hex16(fnv1a64(j.dump()));
}

}  // namespace

// from-scratch runs converge well before the supernet's shared schedule
constexpr int kDefaultScratchEpochs = 800;

void cmd_oracle(const RunConfig& cfg, const std::string& dataset_path, int scratch_epochs,
                int seeds_per_arch, std::size_t max_archs) {
    cfg.validate();
    if (scratch_epochs == 0) scratch_epochs = kDefaultScratchEpochs;
    if (scratch_epochs < 1) throw InvalidParameter("oracle epochs must be >= 1");
    const std::string digest = config_digest(cfg);
    fs::create_directories(cfg.output_dir);
    Dataset ds = load_dataset_for(cfg, dataset_path);
    SearchSpaceSpec space = preset_space(cfg.space_preset);

    OptimizerConfig train_cfg = cfg.optimizer;
    train_cfg.epochs = scratch_epochs;
    const std::string table_digest =
        oracle_training_digest(cfg, scratch_epochs, seeds_per_arch, max_archs);
    const std::string out = cfg.path("ground_truth.csv");

    GroundTruthTable partial;
    bool have_partial = false;
    if (fs::exists(out)) {
        partial = read_ground_truth_csv(out);
        if (partial.training_config_digest.empty() ||
            partial.training_config_digest == table_digest) {
            have_partial = true;
            std::cout << "resuming from " << partial.entries.size() << " existing entries\n";
        } else {
            throw InvalidParameter("existing table at '" + out +
                                   "' was built with a different training config; remove it first");
        }
    }

    GroundTruthTable table = build_ground_truth_table(
        space, ds, train_cfg, seeds_per_arch, cfg.oracle_seed(), cfg.space_preset, table_digest,
        have_partial ? &partial : nullptr,
        [](std::size_t done, std::size_t total, const std::string& genotype) {
            std::cout << "oracle " << done << "/" << total << " " << genotype << '\n';
        },
        cfg.jobs, max_archs);
    write_ground_truth_csv(out, table);
    std::cout << "config_digest " << digest << '\n';
    std::cout << "ground_truth " << out << " entries " << table.entries.size() << '\n';
}

void cmd_tau(const RunConfig& cfg, const std::string& scores_csv, const std::string& truth_csv) {
    cfg.validate();
    const std::string digest = config_digest(cfg);
    SearchSpaceSpec space = preset_space(cfg.space_preset);

    std::ifstream sis(scores_csv, std::ios::binary);
    if (!sis) throw IoError("cannot open '" + scores_csv + "'");
    std::vector<ScoreRecord> records = read_score_csv(sis, space);
    GroundTruthTable truth = read_ground_truth_csv(truth_csv);

    if (records.size() != truth.entries.size())
        throw GenotypeSetMismatch("score and truth files cover different genotype sets");
    std::vector<double> scores, accuracy;
    for (const auto& r : records) {
        const GroundTruthEntry* entry = truth.find(encode(r.genotype, space));
        if (!entry)
            throw GenotypeSetMismatch("genotype '" + encode(r.genotype, space) +
                                      "' missing from ground truth");
        scores.push_back(r.value);
        accuracy.push_back(entry->test_accuracy);
    }

    const double tau_b = kendall_tau(scores, accuracy);
    const double tau_a = kendall_tau_a(scores, accuracy);
    const bool score_ties = has_ties(scores);
    const bool truth_ties = has_ties(accuracy);

    fs::create_directories(cfg.output_dir);
    std::ofstream os(cfg.path("tau_report.csv"), std::ios::binary);
    if (!os) throw IoError("cannot open tau report for writing");
    os << "# digest=" << digest << '\n';
    os << "metric,count,tau_b,tau_a,score_ties,truth_ties\n";
    os << (records.empty() ? std::string("unknown") : records.front().metric_name) << ','
       << records.size() << ',' << fmt_double(tau_b) << ',' << fmt_double(tau_a) << ','
       << (score_ties ? 1 : 0) << ',' << (truth_ties ? 1 : 0) << '\n';

    std::cout << "config_digest " << digest << '\n';
    std::cout << "tau_b " << fmt_double(tau_b) << '\n';
    if (score_ties || truth_ties) std::cout << "tau_a " << fmt_double(tau_a) << '\n';
}

void cmd_profile(const RunConfig& cfg, const std::string& genotype_str,
                 const std::vector<double>& sigmas, int replicates,
                 const std::string& checkpoint_path, const std::string& dataset_path) {
    cfg.validate();
    const std::string digest = config_digest(cfg);
    fs::create_directories(cfg.output_dir);
    Dataset ds = load_dataset_for(cfg, dataset_path);
    SuperNet net = read_supernet_checkpoint(default_path(cfg, checkpoint_path, "supernet.ckpt"));

    Genotype g = decode(genotype_str, net.space());
    ParamSet sub = extract_subnet(net, g);
    Batch val = gather_split(ds, Split::val);
    Rng rng(cfg.profile_seed());
    CurvatureProfile profile =
        loss_curvature_profile(sub, g, net.space(), val, sigmas, replicates, rng);

    const std::string out = cfg.path("profile.csv");
    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot open profile CSV for writing");
    write_profile_csv(os, profile, net.space(), digest);
    std::cout << "config_digest " << digest << '\n';
    std::cout << "profile " << out << " rows " << profile.sigmas.size() << '\n';
}

void cmd_sweep(const RunConfig& cfg, const std::string& parameter,
               const std::vector<std::string>& values, const std::string& dataset_path,
               const std::string& checkpoint_path, const std::string& truth_path) {
    cfg.validate();
    if (parameter != "alpha" && parameter != "gamma" && parameter != "sigma_grid")
        throw InvalidParameter("sweep parameter must be alpha, gamma or sigma_grid");
    if (values.empty()) throw InvalidParameter("sweep needs at least one value");
    const std::string digest = config_digest(cfg);
    fs::create_directories(cfg.output_dir);

    const std::string truth_file = default_path(cfg, truth_path, "ground_truth.csv");
    if (!fs::exists(truth_file))
        throw MissingOracle("ground-truth table '" + truth_file + "' does not exist");
    GroundTruthTable truth = read_ground_truth_csv(truth_file);
    if (truth.entries.empty()) throw MissingOracle("ground-truth table is empty");

    Dataset ds = load_dataset_for(cfg, dataset_path);
    SuperNet net = read_supernet_checkpoint(default_path(cfg, checkpoint_path, "supernet.ckpt"));

    std::vector<Genotype> genotypes;
    std::vector<double> accuracy;
    for (const auto& [key, entry] : truth.entries) {
        genotypes.push_back(decode(key, net.space()));
        accuracy.push_back(entry.test_accuracy);
    }

    const std::string out = cfg.path("sweep.csv");
    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot open sweep CSV for writing");
    os << "# digest=" << digest << '\n';
    os << "parameter,value,tau_b,tau_a\n";

    for (const auto& value : values) {
        MetricSpec spec = cfg.metric_spec();
        std::string label;
        if (parameter == "alpha") {
            spec.name = MetricName::flatness;
            spec.flatness.alpha = parse_double(value);
            label = fmt_double(spec.flatness.alpha);
        } else if (parameter == "gamma") {
            spec.name = MetricName::combined;
            spec.base_metric = metric_from_string(cfg.metric.base_metric);
            spec.gamma = parse_double(value);
            label = fmt_double(spec.gamma);
        } else {
            spec.name = MetricName::flatness;
            std::vector<double> grid;
            for (const auto& field : split(value, '|')) grid.push_back(parse_double(field));
            spec.flatness.sigmas = grid;
            label = value;
        }
        spec.validate();
        ScoringContext ctx = make_scoring_context(net, ds, spec.flatness);
        std::vector<ScoreRecord> records =
            score_population(ctx, genotypes, spec, cfg.flatness_seed(), cfg.jobs);
        std::vector<double> scores;
        scores.reserve(records.size());
        for (const auto& r : records) scores.push_back(r.value);
        const double tau_b = kendall_tau(scores, accuracy);
        const double tau_a = kendall_tau_a(scores, accuracy);
        os << parameter << ',' << label << ',' << fmt_double(tau_b) << ',' << fmt_double(tau_a)
           << '\n';
        std::cout << "sweep " << parameter << "=" << label << " tau_b " << fmt_double(tau_b)
                  << '\n';
    }
    std::cout << "config_digest " << digest << '\n';
    std::cout << "sweep_report " << out << '\n';
}

}  // namespace flatnas

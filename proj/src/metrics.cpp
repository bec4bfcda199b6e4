#include "flatnas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flatnas/errors.hpp"
#include "flatnas/rng.hpp"
#include "flatnas/util.hpp"

namespace flatnas {

NoiseMode noise_mode_from_string(std::string_view s) {
    if (s == "ray") return NoiseMode::ray;
    if (s == "independent") return NoiseMode::independent;
    throw ParseError("unknown noise mode '" + std::string(s) + "'");
}

std::string_view noise_mode_name(NoiseMode m) {
    return m == NoiseMode::ray ? "ray" : "independent";
}

void FlatnessConfig::validate() const {
    if (sigmas.size() < 2) throw InvalidParameter("need at least two sigmas");
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (!(sigmas[i] > 0.0)) throw InvalidParameter("sigmas must be > 0");
        if (i > 0 && !(sigmas[i] > sigmas[i - 1]))
            throw InvalidParameter("sigmas must be strictly increasing");
    }
    if (!std::isfinite(alpha) || alpha < 0.0) throw InvalidParameter("alpha must be finite and >= 0");
    if (replicates < 1) throw InvalidParameter("replicates must be >= 1");
    if (eval_subset_size < 1) throw InvalidParameter("eval_subset_size must be >= 1");
    if (!(epsilon > 0.0) || epsilon > 1e-6)
        throw InvalidParameter("epsilon must be in (0, 1e-6]");
}

EvalResult eval_loss_acc(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                         const Batch& eval_set) {
    if (eval_set.batch_size == 0) throw InvalidParameter("eval set is empty");
    ForwardResult fwd = forward(params, g, space, eval_set);
    const std::size_t K = params.at("head.bias").values.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < eval_set.batch_size; ++i) {
        const double* row = &fwd.logits[i * K];
        std::size_t best = 0;
        for (std::size_t j = 1; j < K; ++j)
            if (row[j] > row[best]) best = j;  // strict >, ties keep lowest index
        if (best == static_cast<std::size_t>(eval_set.labels[i])) ++correct;
    }
    return {fwd.loss, static_cast<double>(correct) / static_cast<double>(eval_set.batch_size)};
}

double flatness_score_fn(const LossFn& loss, const ParamSet& params, const FlatnessConfig& cfg,
                         const NoiseFn& noise) {
    cfg.validate();
    const std::size_t t = cfg.sigmas.size();
    const std::size_t n = params.total_elements();
    double sum = 0.0;
    for (int r = 0; r < cfg.replicates; ++r) {
        std::vector<double> losses(t);
        if (cfg.mode == NoiseMode::ray) {
            std::vector<double> dir = noise(n);
            for (std::size_t i = 0; i < t; ++i)
                losses[i] = loss(perturb(params, cfg.sigmas[i], dir, cfg.mask));
        } else {
            for (std::size_t i = 0; i < t; ++i) {
                std::vector<double> dir = noise(n);
                losses[i] = loss(perturb(params, cfg.sigmas[i], dir, cfg.mask));
            }
        }
        double d = 0.0;
        for (std::size_t i = 0; i + 1 < t; ++i) {
            double slope = (losses[i + 1] - losses[i]) / (cfg.sigmas[i + 1] - cfg.sigmas[i]);
            d += cfg.signed_variant ? slope : std::abs(slope);
        }
        double depth = losses[0] / cfg.sigmas[0];
        d += cfg.alpha * (cfg.signed_variant ? depth : std::abs(depth));
        if (!std::isfinite(d)) throw NonFiniteLoss("flatness accumulated a non-finite value");
        sum += d;
    }
    double mean = sum / static_cast<double>(cfg.replicates);
    return 1.0 / std::max(mean, cfg.epsilon);
}

Batch flatness_eval_subset(const Dataset& ds, const FlatnessConfig& cfg) {
    cfg.validate();
    std::vector<std::size_t> indices = ds.split(Split::val);
    if (indices.empty()) throw InvalidParameter("val split is empty");
    if (cfg.eval_subset_size < indices.size()) {
        Rng rng(derive_seed(cfg.subset_seed, "flatness-eval-subset"));
        rng.shuffle(indices);
        indices.resize(cfg.eval_subset_size);
        std::sort(indices.begin(), indices.end());
    }
    return gather(ds, indices);
}

double flatness_score(const ParamSet& params, const Genotype& g, const SearchSpaceSpec& space,
                      const Batch& eval_subset, const FlatnessConfig& cfg, Rng& rng) {
    LossFn loss = [&](const ParamSet& p) { return forward(p, g, space, eval_subset).loss; };
    NoiseFn noise = [&rng](std::size_t n) { return rng.normal_vec(n); };
    return flatness_score_fn(loss, params, cfg, noise);
}

double angle_score(const ParamSet& initial, const ParamSet& final_params) {
    if (!initial.same_structure(final_params))
        throw ShapeMismatch("angle_score arguments differ structurally");
    double dot = 0.0, norm0 = 0.0, normf = 0.0;
    const auto v0 = initial.flatten();
    const auto vf = final_params.flatten();
    for (std::size_t i = 0; i < v0.size(); ++i) {
        dot += v0[i] * vf[i];
        norm0 += v0[i] * v0[i];
        normf += vf[i] * vf[i];
    }
    norm0 = std::sqrt(norm0);
    normf = std::sqrt(normf);
    if (norm0 < 1e-30 || normf < 1e-30) throw ZeroVector("angle_score needs nonzero vectors");
    double cosine = std::clamp(dot / (norm0 * normf), -1.0, 1.0);
    return std::acos(cosine);
}

double combined_score(double base, double flatness, double gamma, double sigma1) {
    if (gamma < 0.0) throw InvalidParameter("gamma must be >= 0");
    if (!(sigma1 > 0.0)) throw InvalidParameter("sigma1 must be > 0");
    return base + gamma * (1.0 / sigma1) * flatness;
}

MetricName metric_from_string(std::string_view s) {
    if (s == "flatness") return MetricName::flatness;
    if (s == "accuracy") return MetricName::accuracy;
    if (s == "angle") return MetricName::angle;
    if (s == "combined") return MetricName::combined;
    throw ParseError("unknown metric '" + std::string(s) + "'");
}

std::string_view metric_name_string(MetricName m) {
    switch (m) {
        case MetricName::flatness: return "flatness";
        case MetricName::accuracy: return "accuracy";
        case MetricName::angle: return "angle";
        case MetricName::combined: return "combined";
    }
    throw InvalidParameter("bad MetricName value");
}

void MetricSpec::validate() const {
    flatness.validate();
    if (name == MetricName::combined) {
        if (gamma < 0.0) throw InvalidParameter("combined metric requires gamma >= 0");
        if (base_metric == MetricName::flatness || base_metric == MetricName::combined)
            throw InvalidParameter("combined base metric must be accuracy or angle");
    }
}

std::string MetricSpec::digest() const {
    std::ostringstream os;
    os << metric_name_string(name) << '|' << metric_name_string(base_metric) << '|'
       << fmt_double(gamma) << '|';
    for (double s : flatness.sigmas) os << fmt_double(s) << ',';
    os << '|' << fmt_double(flatness.alpha) << '|' << flatness.replicates << '|'
       << noise_mode_name(flatness.mode) << '|' << perturb_mask_name(flatness.mask) << '|'
       << flatness.eval_subset_size << '|' << flatness.signed_variant << '|'
       << fmt_double(flatness.epsilon) << '|' << flatness.subset_seed;
    return hex16(fnv1a64(os.str()));
}

ScoringContext make_scoring_context(const SuperNet& net, const Dataset& ds,
                                    const FlatnessConfig& cfg) {
    return ScoringContext{net, gather_split(ds, Split::val), flatness_eval_subset(ds, cfg)};
}

std::uint64_t genotype_score_seed(std::uint64_t base_seed, const Genotype& g) {
    return splitmix64(base_seed ^ genotype_hash(g));
}

double score_one(const ScoringContext& ctx, const Genotype& g, const MetricSpec& spec,
                 std::uint64_t base_seed) {
    const std::uint64_t seed = genotype_score_seed(base_seed, g);
    ParamSet sub = extract_subnet(ctx.net, g);

    auto flatness_of = [&]() {
        Rng rng(seed);
        return flatness_score(sub, g, ctx.net.space(), ctx.val_subset, spec.flatness, rng);
    };
    auto base_of = [&](MetricName m) -> double {
        switch (m) {
            case MetricName::accuracy:
                return eval_loss_acc(sub, g, ctx.net.space(), ctx.val_full).accuracy;
            case MetricName::angle:
                return angle_score(extract_initial_subnet(ctx.net, g), sub);
            default:
                throw InvalidParameter("base metric must be accuracy or angle");
        }
    };

    switch (spec.name) {
        case MetricName::flatness:
            return flatness_of();
        case MetricName::accuracy:
        case MetricName::angle:
            return base_of(spec.name);
        case MetricName::combined: {
            double base = base_of(spec.base_metric);
            // gamma = 0 degenerates to the base metric exactly, bit for bit
            if (spec.gamma == 0.0) return base;
            return combined_score(base, flatness_of(), spec.gamma, spec.flatness.sigmas[0]);
        }
    }
    throw InvalidParameter("bad MetricName value");
}

std::vector<ScoreRecord> score_population(const ScoringContext& ctx,
                                          const std::vector<Genotype>& genotypes,
                                          const MetricSpec& spec, std::uint64_t base_seed,
                                          int jobs) {
    spec.validate();
    const std::string digest = spec.digest();
    std::vector<ScoreRecord> records(genotypes.size());
    parallel_for_indexed(genotypes.size(), jobs, [&](std::size_t i) {
        const Genotype& g = genotypes[i];
        try {
            records[i] = ScoreRecord{g, std::string(metric_name_string(spec.name)),
                                     score_one(ctx, g, spec, base_seed),
                                     genotype_score_seed(base_seed, g), digest};
        } catch (const Error& err) {
            throw ScorerFailure(encode(g, ctx.net.space()), err.what());
        }
    });
    return records;
}

void write_score_csv(std::ostream& os, const std::vector<ScoreRecord>& records,
                     const SearchSpaceSpec& space) {
    os << "genotype,metric,value,seed,config_digest\n";
    for (const auto& r : records)
        os << encode(r.genotype, space) << ',' << r.metric_name << ',' << fmt_double(r.value)
           << ',' << r.seed << ',' << r.config_digest << '\n';
}

std::vector<ScoreRecord> read_score_csv(std::istream& is, const SearchSpaceSpec& space) {
    std::string line;
    if (!std::getline(is, line) || line != "genotype,metric,value,seed,config_digest")
        throw ParseError("bad or missing score CSV header");
    std::vector<ScoreRecord> records;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, ',');
        if (fields.size() != 5) throw ParseError("score CSV row needs 5 columns");
        ScoreRecord r;
        r.genotype = decode(fields[0], space);
        r.metric_name = fields[1];
        r.value = parse_double(fields[2]);
        r.seed = parse_u64(fields[3]);
        r.config_digest = fields[4];
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace flatnas

#include "flatnas/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <json.hpp>

#include "flatnas/errors.hpp"
#include "flatnas/supernet.hpp"
#include "flatnas/util.hpp"

namespace flatnas {

void EvolutionConfig::validate() const {
    if (population_size < 2) throw InvalidParameter("population_size must be >= 2");
    if (iterations < 1) throw InvalidParameter("iterations must be >= 1");
    if (top_k < 1 || top_k > population_size)
        throw InvalidParameter("need 1 <= top_k <= population_size");
    if (crossover_count < 0 || mutation_count < 0)
        throw InvalidParameter("offspring counts must be >= 0");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw InvalidParameter("mutation_rate must be in [0, 1]");
    if (top_k + crossover_count + mutation_count < population_size)
        throw InfeasibleConfig("top_k + crossover_count + mutation_count must cover the population");
}

EvolutionConfig EvolutionConfig::defaults_for(int population_size) {
    EvolutionConfig cfg;
    cfg.population_size = population_size;
    cfg.top_k = std::max(1, population_size / 2);
    cfg.crossover_count = (population_size + 3) / 4;
    cfg.mutation_count = (population_size + 3) / 4;
    return cfg;
}

std::string_view origin_name(Origin o) {
    switch (o) {
        case Origin::seed_random: return "seed_random";
        case Origin::crossover: return "crossover";
        case Origin::mutation: return "mutation";
        case Origin::elite: return "elite";
    }
    throw InvalidParameter("bad Origin value");
}

namespace {

// score descending, ties by lexicographic genotype
bool candidate_better(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.genotype < b.genotype;
}

}  // namespace

EvolveResult evolve(const SearchSpaceSpec& space, const Scorer& scorer,
                    const EvolutionConfig& cfg, int jobs) {
    space.validate();
    cfg.validate();

    Rng rng(cfg.seed);
    const auto space_size = space.genotype_count();
    std::set<Genotype> seen;

    auto draw_fresh = [&](std::size_t want, std::vector<Candidate>& out) {
        std::size_t attempts = 0;
        const std::size_t max_attempts = 200 * std::max<std::size_t>(want, 1);
        while (want > 0 && attempts < max_attempts) {
            if (space_size && seen.size() >= *space_size) return;  // space exhausted
            Genotype g = sample_uniform_path(space, rng);
            ++attempts;
            if (seen.insert(g).second) {
                out.push_back({std::move(g), 0.0, Origin::seed_random});
                --want;
            }
        }
    };

    EvolveResult result;
    std::vector<Candidate> pop;
    draw_fresh(static_cast<std::size_t>(cfg.population_size), pop);
    std::size_t first_unscored = 0;  // elites at the front are already scored

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        // score the unscored tail; failures are discarded afterwards.
        // char, not bool: vector<bool> packs bits and racing writes would
        // collide under parallel scoring
        std::vector<char> failed(pop.size(), 0);
        std::vector<std::string> messages(pop.size());
        parallel_for_indexed(pop.size() - first_unscored, jobs, [&](std::size_t k) {
            const std::size_t i = first_unscored + k;
            try {
                pop[i].score = scorer(pop[i].genotype);
                if (!std::isfinite(pop[i].score)) {
                    failed[i] = 1;
                    messages[i] = "scorer returned a non-finite value";
                }
            } catch (const std::exception& err) {
                failed[i] = 1;
                messages[i] = err.what();
            }
        });
        std::vector<Candidate> survivors;
        survivors.reserve(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (failed[i])
                result.failures.emplace_back(pop[i].genotype, messages[i]);
            else
                survivors.push_back(std::move(pop[i]));
        }
        pop = std::move(survivors);
        result.history.push_back(pop);

        if (iter + 1 == cfg.iterations) continue;
        if (pop.empty()) {
            // every candidate failed; reseed and carry on
            draw_fresh(static_cast<std::size_t>(cfg.population_size), pop);
            first_unscored = 0;
            continue;
        }

        // selection
        std::vector<Candidate> ranked = pop;
        std::sort(ranked.begin(), ranked.end(), candidate_better);
        const std::size_t elite_count =
            std::min<std::size_t>(static_cast<std::size_t>(cfg.top_k), ranked.size());
        std::vector<Candidate> next;
        for (std::size_t i = 0; i < elite_count; ++i) {
            Candidate elite = ranked[i];
            elite.origin = Origin::elite;
            next.push_back(std::move(elite));
        }

        // offspring: crossovers first, then mutants; duplicates are dropped
        std::vector<Candidate> offspring;
        for (int c = 0; c < cfg.crossover_count; ++c) {
            const auto& pa = ranked[static_cast<std::size_t>(rng.below(elite_count))];
            const auto& pb = ranked[static_cast<std::size_t>(rng.below(elite_count))];
            Genotype child = crossover(pa.genotype, pb.genotype, rng);
            if (seen.insert(child).second)
                offspring.push_back({std::move(child), 0.0, Origin::crossover});
        }
        for (int m = 0; m < cfg.mutation_count; ++m) {
            const auto& parent = ranked[static_cast<std::size_t>(rng.below(elite_count))];
            Genotype mutant = mutate(space, parent.genotype, cfg.mutation_rate, rng);
            if (seen.insert(mutant).second)
                offspring.push_back({std::move(mutant), 0.0, Origin::mutation});
        }
        for (auto& child : offspring) {
            if (next.size() >= static_cast<std::size_t>(cfg.population_size)) break;
            next.push_back(std::move(child));
        }
        if (next.size() < static_cast<std::size_t>(cfg.population_size))
            draw_fresh(static_cast<std::size_t>(cfg.population_size) - next.size(), next);

        pop = std::move(next);
        first_unscored = elite_count;
    }

    result.best = best_of_history(result.history);
    return result;
}

Candidate best_of_history(const std::vector<std::vector<Candidate>>& history) {
    const Candidate* best = nullptr;
    for (const auto& snapshot : history)
        for (const auto& cand : snapshot)
            if (!best || candidate_better(cand, *best)) best = &cand;
    if (!best) throw EmptyHistory("no scored candidates in history");
    return *best;
}

void write_history_jsonl(std::ostream& os, const std::vector<std::vector<Candidate>>& history,
                         const SearchSpaceSpec& space) {
    for (std::size_t iter = 0; iter < history.size(); ++iter) {
        for (const auto& cand : history[iter]) {
            nlohmann::json line{{"iteration", iter},
                                {"genotype", encode(cand.genotype, space)},
                                {"value", cand.score},
                                {"origin", std::string(origin_name(cand.origin))}};
            os << line.dump() << '\n';
        }
    }
}

}  // namespace flatnas

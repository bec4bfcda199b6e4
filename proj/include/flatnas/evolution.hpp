#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "flatnas/searchspace.hpp"

namespace flatnas {

struct EvolutionConfig {
    int population_size = 10;
    int iterations = 20;
    int top_k = 5;
    int crossover_count = 3;
    int mutation_count = 3;
    double mutation_rate = 0.1;
    std::uint64_t seed = 0;

    void validate() const;  // throws InfeasibleConfig / InvalidParameter

    /// top_k = pop/2, crossover = mutation = ceil(pop/4); always feasible.
    static EvolutionConfig defaults_for(int population_size);
};

enum class Origin { seed_random, crossover, mutation, elite };

std::string_view origin_name(Origin o);

struct Candidate {
    Genotype genotype;
    double score = 0.0;
    Origin origin = Origin::seed_random;
};

using Scorer = std::function<double(const Genotype&)>;

struct EvolveResult {
    Candidate best;
    std::vector<std::vector<Candidate>> history;  // scored population per iteration
    std::vector<std::pair<Genotype, std::string>> failures;
};

/// Evolutionary search: seeded unique random population, per iteration score
/// the unscored, keep top_k (score descending, ties by lexicographic
/// genotype), breed crossover_count children and mutation_count mutants from
/// the elites, deduplicate against every genotype ever seen, refill with
/// fresh random genotypes when short. Scorer errors discard the candidate and
/// the search continues. Fully deterministic given cfg.seed.
EvolveResult evolve(const SearchSpaceSpec& space, const Scorer& scorer,
                    const EvolutionConfig& cfg, int jobs = 1);

/// Maximum-score candidate across all snapshots; ties by lexicographic
/// genotype. Throws EmptyHistory.
Candidate best_of_history(const std::vector<std::vector<Candidate>>& history);

/// Line-delimited log: one JSON object per candidate per iteration with keys
/// iteration, genotype, value, origin.
void write_history_jsonl(std::ostream& os, const std::vector<std::vector<Candidate>>& history,
                         const SearchSpaceSpec& space);

}  // namespace flatnas

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flatnas/rng.hpp"

namespace flatnas {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1ULL << 16;

/// Cell topology plus the candidate operation set shared by every edge.
/// Edges must form a DAG (source < target); node 0 is the cell input and
/// the last node is the cell output.
struct SearchSpaceSpec {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::string> op_names;
    int cells_per_network = 1;
    int channels = 1;

    std::size_t edge_count() const { return edges.size(); }
    std::size_t op_count() const { return op_names.size(); }

    /// |op_names|^|edges|, or nullopt when it overflows 64 bits.
    std::optional<std::uint64_t> genotype_count() const;

    /// Throws InvalidParameter when any structural invariant fails.
    void validate() const;
};

/// 3 edges x 3 ops = 27 architectures; small enough to oracle exhaustively.
SearchSpaceSpec micro_space();

/// Benchmark-style cell at vector scale: 4 nodes, 6 edges, 5 ops = 15625.
SearchSpaceSpec nano201_space();

/// Lookup by preset name ("micro" | "nano201"); throws InvalidParameter.
SearchSpaceSpec preset_space(std::string_view name);

/// One operation index per cell edge; the unit of search.
struct Genotype {
    std::vector<int> op_indices;

    bool operator==(const Genotype&) const = default;
    auto operator<=>(const Genotype&) const = default;  // lexicographic
};

bool genotype_valid(const Genotype& g, const SearchSpaceSpec& space);

/// Stable 64-bit hash of the op-index vector; used to derive per-genotype seeds.
std::uint64_t genotype_hash(const Genotype& g);

/// All genotypes in lexicographic order of op_indices.
/// Throws EnumerationCapExceeded when the space is larger than `cap`.
std::vector<Genotype> enumerate_all(const SearchSpaceSpec& space,
                                    std::uint64_t cap = kDefaultEnumerationCap);

/// Each edge independently, with probability per_edge_rate, is reassigned a
/// uniformly random op index different from its current one. RNG consumption
/// order (one coin per edge, one index draw per fired edge with >=2 ops) is
/// part of the replayable contract.
Genotype mutate(const SearchSpaceSpec& space, const Genotype& g, double per_edge_rate, Rng& rng);

/// Uniform crossover: coordinate i comes from `a` or `b` with probability 1/2.
/// Throws SpaceMismatch when lengths differ.
Genotype crossover(const Genotype& a, const Genotype& b, Rng& rng);

/// Grammar: op_name("|" op_name)*.
std::string encode(const Genotype& g, const SearchSpaceSpec& space);

/// Inverse of encode; throws ParseError on unknown op name or wrong arity.
Genotype decode(std::string_view s, const SearchSpaceSpec& space);

/// Graphviz DOT text: one node per cell node, one labeled edge per genotype
/// edge. Deterministic byte-for-byte for a given input.
std::string export_dot(const Genotype& g, const SearchSpaceSpec& space);

}  // namespace flatnas

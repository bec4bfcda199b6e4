#include "flatnas/searchspace.hpp"

#include <algorithm>
#include <sstream>

#include "flatnas/errors.hpp"
#include "flatnas/util.hpp"

namespace flatnas {

std::optional<std::uint64_t> SearchSpaceSpec::genotype_count() const {
    std::uint64_t count = 1;
    const std::uint64_t base = op_names.size();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (base != 0 && count > UINT64_MAX / base) return std::nullopt;
        count *= base;
    }
    return count;
}

void SearchSpaceSpec::validate() const {
    if (node_count < 2) throw InvalidParameter("node_count must be >= 2");
    if (edges.empty()) throw InvalidParameter("at least one edge required");
    if (op_names.empty()) throw InvalidParameter("op_names must be non-empty");
    if (cells_per_network < 1) throw InvalidParameter("cells_per_network must be >= 1");
    if (channels < 1) throw InvalidParameter("channels must be >= 1");
    for (const auto& [src, dst] : edges) {
        if (src < 0 || dst >= node_count || src >= dst)
            throw InvalidParameter("edges must satisfy 0 <= source < target < node_count");
    }
    for (const auto& name : op_names) {
        if (name.empty() || name.find('|') != std::string::npos ||
            name.find(',') != std::string::npos || name.find(' ') != std::string::npos)
            throw InvalidParameter("op name '" + name + "' is empty or contains '|', ',' or space");
    }
    auto sorted = op_names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw InvalidParameter("op names must be unique");
}

SearchSpaceSpec micro_space() {
    SearchSpaceSpec s;
    s.node_count = 3;
    s.edges = {{0, 1}, {0, 2}, {1, 2}};
    s.op_names = {"zeroize", "skip", "relu_linear"};
    s.cells_per_network = 3;
    s.channels = 16;
    return s;
}

SearchSpaceSpec nano201_space() {
    SearchSpaceSpec s;
    s.node_count = 4;
    s.edges = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    s.op_names = {"zeroize", "skip", "linear", "relu_linear", "scale"};
    s.cells_per_network = 3;
    s.channels = 16;
    return s;
}

SearchSpaceSpec preset_space(std::string_view name) {
    if (name == "micro") return micro_space();
    if (name == "nano201") return nano201_space();
    throw InvalidParameter("unknown space preset '" + std::string(name) + "'");
}

bool genotype_valid(const Genotype& g, const SearchSpaceSpec& space) {
    if (g.op_indices.size() != space.edge_count()) return false;
    for (int idx : g.op_indices)
        if (idx < 0 || static_cast<std::size_t>(idx) >= space.op_count()) return false;
    return true;
}

std::uint64_t genotype_hash(const Genotype& g) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int idx : g.op_indices) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(idx));
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

std::vector<Genotype> enumerate_all(const SearchSpaceSpec& space, std::uint64_t cap) {
    auto count = space.genotype_count();
    if (!count || *count > cap)
        throw EnumerationCapExceeded("space has " + (count ? std::to_string(*count) : std::string(">2^64")) +
                                     " genotypes, cap is " + std::to_string(cap));
    std::vector<Genotype> all;
    all.reserve(*count);
    Genotype g;
    g.op_indices.assign(space.edge_count(), 0);
    const int top = static_cast<int>(space.op_count()) - 1;
    for (;;) {
        all.push_back(g);
        // odometer increment, last coordinate fastest = lexicographic order
        std::size_t pos = g.op_indices.size();
        while (pos > 0 && g.op_indices[pos - 1] == top) {
            g.op_indices[pos - 1] = 0;
            --pos;
        }
        if (pos == 0) break;
        ++g.op_indices[pos - 1];
    }
    return all;
}

Genotype mutate(const SearchSpaceSpec& space, const Genotype& g, double per_edge_rate, Rng& rng) {
    if (per_edge_rate < 0.0 || per_edge_rate > 1.0)
        throw InvalidParameter("per_edge_rate must be in [0, 1]");
    if (!genotype_valid(g, space)) throw SpaceMismatch("genotype does not fit space");
    Genotype out = g;
    const std::uint64_t ops = space.op_count();
    for (std::size_t e = 0; e < out.op_indices.size(); ++e) {
        if (rng.uniform01() >= per_edge_rate) continue;
        if (ops < 2) continue;  // no alternative op exists
        std::uint64_t draw = rng.below(ops - 1);
        if (draw >= static_cast<std::uint64_t>(out.op_indices[e])) ++draw;
        out.op_indices[e] = static_cast<int>(draw);
    }
    return out;
}

Genotype crossover(const Genotype& a, const Genotype& b, Rng& rng) {
    if (a.op_indices.size() != b.op_indices.size())
        throw SpaceMismatch("crossover parents have different lengths");
    Genotype out;
    out.op_indices.resize(a.op_indices.size());
    for (std::size_t i = 0; i < out.op_indices.size(); ++i)
        out.op_indices[i] = rng.coin() ? a.op_indices[i] : b.op_indices[i];
    return out;
}

std::string encode(const Genotype& g, const SearchSpaceSpec& space) {
    if (!genotype_valid(g, space)) throw SpaceMismatch("genotype does not fit space");
    std::string out;
    for (std::size_t i = 0; i < g.op_indices.size(); ++i) {
        if (i > 0) out += '|';
        out += space.op_names[static_cast<std::size_t>(g.op_indices[i])];
    }
    return out;
}

Genotype decode(std::string_view s, const SearchSpaceSpec& space) {
    auto parts = split(s, '|');
    if (parts.size() != space.edge_count())
        throw ParseError("expected " + std::to_string(space.edge_count()) + " ops, got " +
                         std::to_string(parts.size()));
    Genotype g;
    g.op_indices.reserve(parts.size());
    for (const auto& name : parts) {
        auto it = std::find(space.op_names.begin(), space.op_names.end(), name);
        if (it == space.op_names.end()) throw ParseError("unknown op name '" + name + "'");
        g.op_indices.push_back(static_cast<int>(it - space.op_names.begin()));
    }
    return g;
}

std::string export_dot(const Genotype& g, const SearchSpaceSpec& space) {
    if (!genotype_valid(g, space)) throw SpaceMismatch("genotype does not fit space");
    std::ostringstream os;
    os << "digraph cell {\n";
    os << "  rankdir=LR;\n";
    for (int n = 0; n < space.node_count; ++n)
        os << "  n" << n << " [label=\"" << n << "\"];\n";
    for (std::size_t e = 0; e < space.edges.size(); ++e) {
        const auto& [src, dst] = space.edges[e];
        os << "  n" << src << " -> n" << dst << " [label=\""
           << space.op_names[static_cast<std::size_t>(g.op_indices[e])] << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace flatnas

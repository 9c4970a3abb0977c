#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace switchmc {

/// Hop count to a target, where "unreachable" is a first-class value rather
/// than a sentinel integer. Infinite compares greater than every finite
/// distance and equal to itself.
class Distance {
public:
    constexpr Distance() : hops_(kInfinite) {}

    static constexpr Distance infinite() { return Distance(); }
    static constexpr Distance of(std::int64_t hops) {
        Distance d;
        d.hops_ = hops;
        return d;
    }

    constexpr bool is_finite() const { return hops_ != kInfinite; }
    std::int64_t hops() const; // throws if infinite

    friend constexpr bool operator==(Distance a, Distance b) { return a.key() == b.key(); }
    friend constexpr std::strong_ordering operator<=>(Distance a, Distance b) {
        return a.key() <=> b.key();
    }

private:
    static constexpr std::int64_t kInfinite = -1;
    constexpr std::int64_t key() const {
        // infinite sorts above every finite value
        return hops_ == kInfinite ? INT64_MAX : hops_;
    }
    std::int64_t hops_;
};

std::string to_string(Distance d);

/// A node sequence in which consecutive nodes are joined by edges of some
/// host graph; a single node is a valid zero-length path.
struct Path {
    std::vector<int> nodes;

    int length() const { return static_cast<int>(nodes.size()) - 1; }
    bool operator==(const Path&) const = default;
};

/// Simple directed graph: no self-loops, no parallel edges.
class DiGraph {
public:
    explicit DiGraph(int node_count);
    DiGraph(int node_count, std::initializer_list<std::pair<int, int>> edges);

    int node_count() const { return static_cast<int>(adj_.size()); }
    int edge_count() const;

    void add_edge(int from, int to); // throws on self-loop or range error
    bool has_edge(int from, int to) const;

    // ascending node indices
    const std::vector<int>& out_neighbors(int v) const { return adj_[v]; }
    int out_degree(int v) const { return static_cast<int>(adj_[v].size()); }

    // lexicographic (from, to) order
    std::vector<std::pair<int, int>> edges() const;

    bool operator==(const DiGraph&) const = default;

private:
    std::vector<std::vector<int>> adj_; // sorted, unique
};

DiGraph union_graph(std::span<const DiGraph> graphs);
DiGraph intersection_graph(std::span<const DiGraph> graphs);

/// Nodes with no outgoing edges, ascending.
std::vector<int> sinks(const DiGraph& g);

bool is_acyclic(const DiGraph& g);

/// Some directed cycle as a node sequence (closing edge back to the front is
/// implicit), or nullopt when acyclic. Deterministic: depth-first from the
/// lowest node index, neighbors ascending.
std::optional<std::vector<int>> find_cycle(const DiGraph& g);

/// Every node has a path to some sink. A sink-free graph is not weakly
/// acyclic (there is nothing to converge to).
bool is_weakly_acyclic(const DiGraph& g);

/// d(v, S): edge count of a shortest path from v to the nearest member of S;
/// 0 when v is in S, infinite when S is empty or unreachable.
Distance distance_to_set(const DiGraph& g, int v, std::span<const int> targets);

/// d(v, S) for every node v at once.
std::vector<Distance> distance_table(const DiGraph& g, std::span<const int> targets);

/// Witness path achieving distance_to_set, or nullopt when unreachable.
/// Ties are broken by smallest-next-node-index breadth-first order, so the
/// returned path is deterministic.
std::optional<Path> shortest_path_to_set(const DiGraph& g, int v, std::span<const int> targets);

/// Maximum of distance_to_set over a family of graphs on a shared node set.
Distance max_distance_to_set(std::span<const DiGraph> graphs, int v, std::span<const int> targets);
std::vector<Distance> max_distance_table(std::span<const DiGraph> graphs,
                                         std::span<const int> targets);

bool is_valid_path(const DiGraph& g, const Path& p);

// plain-text edge list, one "from to" pair per line
std::string to_edge_list(const DiGraph& g, std::span<const std::string> labels);

// dot rendering; highlighted nodes are drawn with a double circle
std::string to_dot(const DiGraph& g, std::span<const std::string> labels,
                   std::span<const int> highlight = {}, const std::string& name = "G");

} // namespace switchmc

#include "switchmc/graph.hpp"

#include "switchmc/errors.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace switchmc {

std::int64_t Distance::hops() const {
    if (!is_finite())
        throw Error("hops() called on an infinite distance");
    return hops_;
}

std::string to_string(Distance d) {
    return d.is_finite() ? std::to_string(d.hops()) : std::string("inf");
}

DiGraph::DiGraph(int node_count) {
    if (node_count < 0)
        throw Error("negative node count");
    adj_.resize(static_cast<std::size_t>(node_count));
}

DiGraph::DiGraph(int node_count, std::initializer_list<std::pair<int, int>> edges)
    : DiGraph(node_count) {
    for (const auto& [from, to] : edges)
        add_edge(from, to);
}

int DiGraph::edge_count() const {
    int total = 0;
    for (const auto& nbrs : adj_)
        total += static_cast<int>(nbrs.size());
    return total;
}

void DiGraph::add_edge(int from, int to) {
    const int n = node_count();
    if (from < 0 || from >= n || to < 0 || to >= n)
        throw Error("edge endpoint out of range");
    if (from == to)
        throw Error("self-loops are not representable in a simplified transition graph");
    auto& nbrs = adj_[from];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), to);
    if (it == nbrs.end() || *it != to)
        nbrs.insert(it, to);
}

bool DiGraph::has_edge(int from, int to) const {
    const auto& nbrs = adj_[from];
    return std::binary_search(nbrs.begin(), nbrs.end(), to);
}

std::vector<std::pair<int, int>> DiGraph::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(edge_count()));
    for (int v = 0; v < node_count(); ++v)
        for (int w : adj_[v])
            out.emplace_back(v, w);
    return out;
}

namespace {

void require_same_node_count(std::span<const DiGraph> graphs) {
    if (graphs.empty())
        throw Error("graph family is empty");
    for (const auto& g : graphs)
        if (g.node_count() != graphs.front().node_count())
            throw Error("graphs have mismatched node counts");
}

std::vector<bool> target_mask(int n, std::span<const int> targets) {
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (int t : targets) {
        if (t < 0 || t >= n)
            throw Error("target node out of range");
        mask[static_cast<std::size_t>(t)] = true;
    }
    return mask;
}

} // namespace

DiGraph union_graph(std::span<const DiGraph> graphs) {
    require_same_node_count(graphs);
    DiGraph out(graphs.front().node_count());
    for (const auto& g : graphs)
        for (int v = 0; v < g.node_count(); ++v)
            for (int w : g.out_neighbors(v))
                out.add_edge(v, w);
    return out;
}

DiGraph intersection_graph(std::span<const DiGraph> graphs) {
    require_same_node_count(graphs);
    const DiGraph& first = graphs.front();
    DiGraph out(first.node_count());
    for (int v = 0; v < first.node_count(); ++v) {
        for (int w : first.out_neighbors(v)) {
            bool everywhere = true;
            for (std::size_t i = 1; i < graphs.size() && everywhere; ++i)
                everywhere = graphs[i].has_edge(v, w);
            if (everywhere)
                out.add_edge(v, w);
        }
    }
    return out;
}

std::vector<int> sinks(const DiGraph& g) {
    std::vector<int> out;
    for (int v = 0; v < g.node_count(); ++v)
        if (g.out_degree(v) == 0)
            out.push_back(v);
    return out;
}

std::optional<std::vector<int>> find_cycle(const DiGraph& g) {
    enum class Color : unsigned char { White, Gray, Black };
    const int n = g.node_count();
    std::vector<Color> color(static_cast<std::size_t>(n), Color::White);
    std::vector<int> stack;        // current DFS path
    std::vector<int> next_index(static_cast<std::size_t>(n), 0);

    for (int root = 0; root < n; ++root) {
        if (color[static_cast<std::size_t>(root)] != Color::White)
            continue;
        stack.push_back(root);
        color[static_cast<std::size_t>(root)] = Color::Gray;
        while (!stack.empty()) {
            int v = stack.back();
            const auto& nbrs = g.out_neighbors(v);
            int& idx = next_index[static_cast<std::size_t>(v)];
            if (idx < static_cast<int>(nbrs.size())) {
                int w = nbrs[static_cast<std::size_t>(idx++)];
                Color cw = color[static_cast<std::size_t>(w)];
                if (cw == Color::Gray) {
                    // back edge v -> w closes a cycle along the DFS path
                    auto it = std::find(stack.begin(), stack.end(), w);
                    return std::vector<int>(it, stack.end());
                }
                if (cw == Color::White) {
                    color[static_cast<std::size_t>(w)] = Color::Gray;
                    stack.push_back(w);
                }
            } else {
                color[static_cast<std::size_t>(v)] = Color::Black;
                stack.pop_back();
            }
        }
    }
    return std::nullopt;
}

bool is_acyclic(const DiGraph& g) {
    return !find_cycle(g).has_value();
}

bool is_weakly_acyclic(const DiGraph& g) {
    const std::vector<int> sink_nodes = sinks(g);
    if (sink_nodes.empty())
        return false;
    const auto dist = distance_table(g, sink_nodes);
    return std::ranges::all_of(dist, [](Distance d) { return d.is_finite(); });
}

std::vector<Distance> distance_table(const DiGraph& g, std::span<const int> targets) {
    const int n = g.node_count();
    std::vector<Distance> dist(static_cast<std::size_t>(n), Distance::infinite());
    const auto mask = target_mask(n, targets);

    // breadth-first over reversed edges from all targets at once
    std::vector<std::vector<int>> rev(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        for (int w : g.out_neighbors(v))
            rev[static_cast<std::size_t>(w)].push_back(v);

    std::deque<int> queue;
    for (int v = 0; v < n; ++v) {
        if (mask[static_cast<std::size_t>(v)]) {
            dist[static_cast<std::size_t>(v)] = Distance::of(0);
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int u : rev[static_cast<std::size_t>(v)]) {
            if (!dist[static_cast<std::size_t>(u)].is_finite()) {
                dist[static_cast<std::size_t>(u)] =
                    Distance::of(dist[static_cast<std::size_t>(v)].hops() + 1);
                queue.push_back(u);
            }
        }
    }
    return dist;
}

Distance distance_to_set(const DiGraph& g, int v, std::span<const int> targets) {
    if (v < 0 || v >= g.node_count())
        throw Error("node out of range");
    return distance_table(g, targets)[static_cast<std::size_t>(v)];
}

std::optional<Path> shortest_path_to_set(const DiGraph& g, int v, std::span<const int> targets) {
    const int n = g.node_count();
    if (v < 0 || v >= n)
        throw Error("node out of range");
    const auto mask = target_mask(n, targets);
    if (mask[static_cast<std::size_t>(v)])
        return Path{{v}};

    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    seen[static_cast<std::size_t>(v)] = true;
    std::deque<int> queue{v};
    int hit = -1;
    while (!queue.empty() && hit < 0) {
        int u = queue.front();
        queue.pop_front();
        for (int w : g.out_neighbors(u)) { // ascending: deterministic tie-break
            if (seen[static_cast<std::size_t>(w)])
                continue;
            seen[static_cast<std::size_t>(w)] = true;
            parent[static_cast<std::size_t>(w)] = u;
            if (mask[static_cast<std::size_t>(w)]) {
                hit = w;
                break;
            }
            queue.push_back(w);
        }
    }
    if (hit < 0)
        return std::nullopt;
    Path path;
    for (int u = hit; u != -1; u = parent[static_cast<std::size_t>(u)])
        path.nodes.push_back(u);
    std::ranges::reverse(path.nodes);
    return path;
}

Distance max_distance_to_set(std::span<const DiGraph> graphs, int v, std::span<const int> targets) {
    require_same_node_count(graphs);
    Distance worst = Distance::of(0);
    for (const auto& g : graphs)
        worst = std::max(worst, distance_to_set(g, v, targets));
    return worst;
}

std::vector<Distance> max_distance_table(std::span<const DiGraph> graphs,
                                         std::span<const int> targets) {
    require_same_node_count(graphs);
    std::vector<Distance> worst(static_cast<std::size_t>(graphs.front().node_count()),
                                Distance::of(0));
    for (const auto& g : graphs) {
        const auto dist = distance_table(g, targets);
        for (std::size_t v = 0; v < worst.size(); ++v)
            worst[v] = std::max(worst[v], dist[v]);
    }
    return worst;
}

bool is_valid_path(const DiGraph& g, const Path& p) {
    if (p.nodes.empty())
        return false;
    for (int v : p.nodes)
        if (v < 0 || v >= g.node_count())
            return false;
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i)
        if (!g.has_edge(p.nodes[i], p.nodes[i + 1]))
            return false;
    return true;
}

std::string to_edge_list(const DiGraph& g, std::span<const std::string> labels) {
    if (static_cast<int>(labels.size()) != g.node_count())
        throw Error("label count does not match node count");
    std::ostringstream out;
    for (const auto& [from, to] : g.edges())
        out << labels[static_cast<std::size_t>(from)] << ' '
            << labels[static_cast<std::size_t>(to)] << '\n';
    return out.str();
}

std::string to_dot(const DiGraph& g, std::span<const std::string> labels,
                   std::span<const int> highlight, const std::string& name) {
    if (static_cast<int>(labels.size()) != g.node_count())
        throw Error("label count does not match node count");
    const auto mask = target_mask(g.node_count(), highlight);
    std::ostringstream out;
    out << "digraph \"" << name << "\" {\n";
    for (int v = 0; v < g.node_count(); ++v) {
        out << "  \"" << labels[static_cast<std::size_t>(v)] << "\"";
        if (mask[static_cast<std::size_t>(v)])
            out << " [shape=doublecircle]";
        out << ";\n";
    }
    for (const auto& [from, to] : g.edges())
        out << "  \"" << labels[static_cast<std::size_t>(from)] << "\" -> \""
            << labels[static_cast<std::size_t>(to)] << "\";\n";
    out << "}\n";
    return out.str();
}

} // namespace switchmc

#include "gridwave/path_cover.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <thread>

namespace gridwave {

std::vector<Vertex> boundary_origins(const DefectedGrid& g, const Defect& d) {
    std::set<Vertex> out;
    for (const auto& e : d.boundary)
        for (const Vertex& v : {e.lo(), e.hi()})
            if (g.window().contains(v) && g.degree(v) <= 3) out.insert(v);
    return {out.begin(), out.end()};
}

namespace {

struct Adjacency {
    const DefectedGrid& g;
    std::vector<std::array<int, 4>> nbr;   // neighbour vertex index or -1
    std::vector<std::array<int, 4>> edge;  // window edge index
    std::vector<char> border;

    explicit Adjacency(const DefectedGrid& grid) : g(grid) {
        const int n = g.num_vertices();
        nbr.assign(static_cast<std::size_t>(n), {-1, -1, -1, -1});
        edge.assign(static_cast<std::size_t>(n), {-1, -1, -1, -1});
        border.assign(static_cast<std::size_t>(n), 0);
        for (int k = 0; k < n; ++k) {
            Vertex v = g.vertex_at(k);
            border[static_cast<std::size_t>(k)] = g.window().on_border(v) ? 1 : 0;
            auto inc = incident_edges(v);
            for (int s = 0; s < 4; ++s) {
                const EdgeId& e = inc[static_cast<std::size_t>(s)];
                if (!g.in_window(e) || g.removed(e)) continue;
                nbr[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)] = g.vertex_index(other_end(e, v));
                edge[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)] = g.edge_index(e);
            }
        }
    }
};

struct RoutedPath {
    std::vector<int> vertices;  // vertex indices, origin first
    std::vector<int> edges;     // window edge indices
};

class Router {
public:
    Router(const Adjacency& adj, double penalty) : adj_(adj), penalty_(penalty) {
        euse_.assign(static_cast<std::size_t>(adj.g.num_edges()), 0);
        vuse_.assign(adj.nbr.size(), 0);
        dist_.assign(adj.nbr.size(), std::numeric_limits<double>::infinity());
        prev_.assign(adj.nbr.size(), -1);
        prev_edge_.assign(adj.nbr.size(), -1);
    }

    void commit(const RoutedPath& p, int sign) {
        for (int v : p.vertices) vuse_[static_cast<std::size_t>(v)] += sign;
        for (int e : p.edges) euse_[static_cast<std::size_t>(e)] += sign;
    }

    RoutedPath route(int origin) {
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        std::vector<int> touched{origin};
        dist_[static_cast<std::size_t>(origin)] = 0.0;
        pq.push({0.0, origin});
        int target = -1;
        while (!pq.empty()) {
            auto [d, v] = pq.top();
            pq.pop();
            if (d > dist_[static_cast<std::size_t>(v)]) continue;
            if (adj_.border[static_cast<std::size_t>(v)]) {
                target = v;
                break;
            }
            for (int s = 0; s < 4; ++s) {
                int w = adj_.nbr[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)];
                if (w < 0) continue;
                int e = adj_.edge[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)];
                double nd = d + 1.0 + penalty_ * (euse_[static_cast<std::size_t>(e)] + vuse_[static_cast<std::size_t>(w)]);
                if (nd < dist_[static_cast<std::size_t>(w)]) {
                    if (std::isinf(dist_[static_cast<std::size_t>(w)])) touched.push_back(w);
                    dist_[static_cast<std::size_t>(w)] = nd;
                    prev_[static_cast<std::size_t>(w)] = v;
                    prev_edge_[static_cast<std::size_t>(w)] = e;
                    pq.push({nd, w});
                }
            }
        }
        RoutedPath p;
        if (target >= 0) {
            for (int v = target; v != origin; v = prev_[static_cast<std::size_t>(v)]) {
                p.vertices.push_back(v);
                p.edges.push_back(prev_edge_[static_cast<std::size_t>(v)]);
            }
            p.vertices.push_back(origin);
            std::reverse(p.vertices.begin(), p.vertices.end());
            std::reverse(p.edges.begin(), p.edges.end());
        }
        for (int v : touched) {
            dist_[static_cast<std::size_t>(v)] = std::numeric_limits<double>::infinity();
            prev_[static_cast<std::size_t>(v)] = -1;
        }
        if (target < 0) throw ValidationError("origin " + to_string(adj_.g.vertex_at(origin)) + " cannot reach the window border");
        return p;
    }

private:
    const Adjacency& adj_;
    double penalty_;
    std::vector<int> euse_, vuse_;
    std::vector<double> dist_;
    std::vector<int> prev_, prev_edge_;
};

std::vector<int> overlaps_from_keys(const std::vector<std::vector<int>>& keys, std::size_t universe) {
    const std::size_t n = keys.size(), words = (n + 63) / 64;
    std::vector<int> slot(universe, -1);
    std::vector<std::uint64_t> bits;
    for (std::size_t k = 0; k < n; ++k)
        for (int x : keys[k]) {
            int& s = slot[static_cast<std::size_t>(x)];
            if (s < 0) {
                s = static_cast<int>(bits.size() / words);
                bits.resize(bits.size() + words, 0);
            }
            bits[static_cast<std::size_t>(s) * words + k / 64] |= std::uint64_t{1} << (k % 64);
        }
    std::vector<int> out(n, 0);
    std::vector<std::uint64_t> acc(words);
    for (std::size_t k = 0; k < n; ++k) {
        std::fill(acc.begin(), acc.end(), 0);
        for (int x : keys[k]) {
            const std::uint64_t* row = &bits[static_cast<std::size_t>(slot[static_cast<std::size_t>(x)]) * words];
            for (std::size_t w = 0; w < words; ++w) acc[w] |= row[w];
        }
        int c = 0;
        for (auto w : acc) c += std::popcount(w);
        out[k] = keys[k].empty() ? 0 : c - 1;
    }
    return out;
}

std::vector<int> overlaps(const std::vector<RoutedPath>& paths, const DefectedGrid& g, bool edge_only) {
    std::vector<std::vector<int>> keys;
    keys.reserve(paths.size());
    for (const auto& p : paths) keys.push_back(edge_only ? p.edges : p.vertices);
    return overlaps_from_keys(keys, static_cast<std::size_t>(edge_only ? g.num_edges() : g.num_vertices()));
}

int max_load(const std::vector<RoutedPath>& paths, const DefectedGrid& g) {
    std::vector<int> load(static_cast<std::size_t>(g.num_vertices()), 0);
    int best = 0;
    for (const auto& p : paths)
        for (int v : p.vertices) best = std::max(best, ++load[static_cast<std::size_t>(v)]);
    return best;
}

// Upward or downward ray; the direction meeting fewer of the other origins wins, ties go up.
RoutedPath vertical_ray(const DefectedGrid& g, const Vertex& o, const std::set<Vertex>& others) {
    const Window& w = g.window();
    std::optional<RoutedPath> best;
    int best_hits = 0;
    for (int dir : {+1, -1}) {
        RoutedPath p;
        p.vertices.push_back(g.vertex_index(o));
        bool ok = true;
        int hits = 0;
        for (int y = o.y; y != (dir > 0 ? w.ymax : w.ymin); y += dir) {
            EdgeId e = Vedge(o.x, dir > 0 ? y : y - 1);
            if (g.removed(e)) {
                ok = false;
                break;
            }
            p.edges.push_back(g.edge_index(e));
            p.vertices.push_back(g.vertex_index({o.x, y + dir}));
            hits += others.count({o.x, y + dir}) > 0;
        }
        if (ok && (!best || hits < best_hits)) {
            best = std::move(p);
            best_hits = hits;
        }
    }
    if (!best) throw ValidationError("no vertical ray from origin " + to_string(o) + " reaches the window border");
    return *best;
}

PathFamily to_family(const DefectedGrid& g, const std::vector<Vertex>& origins, const std::vector<RoutedPath>& paths,
                     bool edge_only) {
    PathFamily f;
    f.origins = origins;
    for (const auto& p : paths) {
        std::vector<EdgeId> es;
        es.reserve(p.edges.size());
        for (int e : p.edges) es.push_back(g.edge_at(e));
        f.paths.push_back(std::move(es));
    }
    f.overlap = overlaps(paths, g, edge_only);
    f.congestion = f.overlap.empty() ? 0 : *std::max_element(f.overlap.begin(), f.overlap.end());
    f.max_load = max_load(paths, g);
    return f;
}

PathFamily route_once(const DefectedGrid& g, const Adjacency& adj, const std::vector<Vertex>& origins,
                      const RouterConfig& cfg, std::uint64_t seed) {
    const std::size_t n = origins.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> start(n);
    for (std::size_t k = 0; k < n; ++k) start[k] = g.vertex_index(origins[k]);

    Router router(adj, cfg.penalty);
    std::vector<RoutedPath> paths(n);
    for (int k : order) {
        paths[static_cast<std::size_t>(k)] = router.route(start[static_cast<std::size_t>(k)]);
        router.commit(paths[static_cast<std::size_t>(k)], +1);
    }
    std::vector<RoutedPath> best_paths = paths;
    auto ov = overlaps(paths, g, cfg.edge_only);
    int best = n ? *std::max_element(ov.begin(), ov.end()) : 0;
    std::vector<int> history{best};
    for (int round = 0; round < cfg.rounds; ++round) {
        // Reroute the most congested paths first.
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return ov[static_cast<std::size_t>(a)] > ov[static_cast<std::size_t>(b)];
        });
        for (int k : order) {
            router.commit(paths[static_cast<std::size_t>(k)], -1);
            paths[static_cast<std::size_t>(k)] = router.route(start[static_cast<std::size_t>(k)]);
            router.commit(paths[static_cast<std::size_t>(k)], +1);
        }
        ov = overlaps(paths, g, cfg.edge_only);
        int c = n ? *std::max_element(ov.begin(), ov.end()) : 0;
        if (c < best) {
            best = c;
            best_paths = paths;
        }
        history.push_back(best);
    }
    PathFamily f = to_family(g, origins, best_paths, cfg.edge_only);
    f.round_congestion = std::move(history);
    f.seed = seed;
    return f;
}

}  // namespace

std::vector<int> overlap_counts(const std::vector<Vertex>& origins, const std::vector<std::vector<EdgeId>>& paths,
                                bool edge_only) {
    if (origins.size() != paths.size()) throw ValidationError("one path per origin required");
    std::map<Vertex, int> vid;
    std::map<EdgeId, int> eid;
    std::vector<std::vector<int>> keys(paths.size());
    for (std::size_t k = 0; k < paths.size(); ++k) {
        if (edge_only) {
            for (const auto& e : paths[k]) keys[k].push_back(eid.emplace(e, static_cast<int>(eid.size())).first->second);
            continue;
        }
        Vertex cur = origins[k];
        keys[k].push_back(vid.emplace(cur, static_cast<int>(vid.size())).first->second);
        for (const auto& e : paths[k]) {
            if (!e.has_endpoint(cur)) throw ValidationError("path from " + to_string(origins[k]) + " is not contiguous");
            cur = other_end(e, cur);
            keys[k].push_back(vid.emplace(cur, static_cast<int>(vid.size())).first->second);
        }
    }
    return overlaps_from_keys(keys, edge_only ? eid.size() : vid.size());
}

PathFamily route_paths(const DefectedGrid& g, const std::vector<Vertex>& origins, const RouterConfig& cfg) {
    if (origins.empty()) throw ValidationError("route_paths needs at least one origin");
    for (const auto& o : origins)
        if (!g.has_vertex(o)) throw ValidationError("origin " + to_string(o) + " is not a vertex of the grid window");
    if (cfg.strategy == RouteStrategy::VerticalRay) {
        std::vector<RoutedPath> paths;
        std::set<Vertex> all(origins.begin(), origins.end());
        for (const auto& o : origins) {
            all.erase(o);
            paths.push_back(vertical_ray(g, o, all));
            all.insert(o);
        }
        PathFamily f = to_family(g, origins, paths, cfg.edge_only);
        f.round_congestion = {f.congestion};
        f.seed = cfg.seed;
        return f;
    }
    if (cfg.rounds < 0 || cfg.seeds < 1) throw ValidationError("rounds must be >= 0 and seeds >= 1");
    Adjacency adj(g);
    std::vector<PathFamily> results(static_cast<std::size_t>(cfg.seeds));
    const int nt = std::max(1, std::min(cfg.threads, cfg.seeds));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int s = t; s < cfg.seeds; s += nt)
                    results[static_cast<std::size_t>(s)] = route_once(g, adj, origins, cfg, cfg.seed + static_cast<std::uint64_t>(s));
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::size_t best = 0;
    for (std::size_t k = 1; k < results.size(); ++k)
        if (results[k].congestion < results[best].congestion) best = k;
    return std::move(results[best]);
}

StaircaseBound staircase_counting_bound(int ring, const DefectedGrid& g) {
    if (ring < 0) throw ValidationError("ring must be non-negative");
    const int x0 = (ring + 1) * (ring + 1), x1 = (ring + 1) * (ring + 2);
    const Window& w = g.window();
    if (!(w.xmin < x0 && w.xmax > x1 && w.ymin < 0 && w.ymax > ring + 1))
        throw ValidationError("ring " + std::to_string(ring) + " exceeds the window " + w.str());
    StaircaseBound b;
    b.ring = ring;
    for (int x = x0; x <= x1; ++x)
        for (int y = 0; y <= ring; ++y)
            if (g.surviving(Vedge(x, y))) ++b.available;
    for (int x = x0; x <= x1; ++x)
        for (int y = 1; y <= ring + 1; ++y) {
            Vertex v{x, y};
            int deg = g.degree(v);
            if (deg >= 1 && deg <= 3) {
                b.origins.push_back(v);
                b.required += y;
            }
        }
    b.repetitions = b.required - b.available;
    b.mean = b.origins.empty() ? 0.0 : static_cast<double>(b.repetitions) / static_cast<double>(b.origins.size());
    return b;
}

DefectCensus unbounded_defect_census(const DefectedGrid& g, int step) {
    if (step < 1) throw ValidationError("census step must be >= 1");
    DefectCensus c;
    std::vector<DefectedGrid> grids{g};
    for (int k = 1; k <= 2; ++k) grids.push_back(g.rematerialize(g.window().expanded(k * step)));
    std::vector<std::vector<Defect>> defects;
    std::vector<std::map<EdgeId, int>> owner(3);
    for (int k = 0; k < 3; ++k) {
        c.windows.push_back(grids[static_cast<std::size_t>(k)].window());
        defects.push_back(identify_defects(grids[static_cast<std::size_t>(k)]));
        for (std::size_t d = 0; d < defects.back().size(); ++d)
            for (const auto& e : defects.back()[d].edges) owner[static_cast<std::size_t>(k)][e] = static_cast<int>(d);
    }
    std::set<int> unbounded;
    for (const auto& d : defects[0]) {
        if (!d.truncated) {
            ++c.n_bounded;
            c.max_bounded_size = std::max(c.max_bounded_size, static_cast<int>(d.edges.size()));
            continue;
        }
        ++c.n_truncated;
        CensusEntry entry;
        entry.sizes.push_back(static_cast<int>(d.edges.size()));
        bool all_truncated = true;
        int last = -1;
        for (int k = 1; k < 3; ++k) {
            const Defect& big = defects[static_cast<std::size_t>(k)][static_cast<std::size_t>(
                owner[static_cast<std::size_t>(k)].at(d.edges.front()))];
            entry.sizes.push_back(static_cast<int>(big.edges.size()));
            all_truncated = all_truncated && big.truncated;
            last = owner[static_cast<std::size_t>(k)].at(d.edges.front());
        }
        entry.unbounded_candidate = all_truncated && entry.sizes[0] < entry.sizes[1] && entry.sizes[1] < entry.sizes[2];
        if (entry.unbounded_candidate) unbounded.insert(last);
        c.truncated.push_back(std::move(entry));
    }
    c.n_unbounded_truncated = static_cast<int>(unbounded.size());
    return c;
}

}  // namespace gridwave

#include "gridwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

namespace gridwave {

std::string to_string(const EdgeId& e) {
    std::ostringstream os;
    os << (e.o == Orient::H ? "H" : "V") << "@(" << e.i << "," << e.j << ")";
    return os.str();
}

std::string to_string(const Vertex& v) { return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")"; }

std::pair<Cell, Cell> cell_pair(const EdgeId& e) {
    if (e.o == Orient::H) return {Cell{e.i, e.j - 1}, Cell{e.i, e.j}};
    return {Cell{e.i - 1, e.j}, Cell{e.i, e.j}};
}

std::array<EdgeId, 4> cell_edges(const Cell& c) {
    return {Hedge(c.i, c.j), Hedge(c.i, c.j + 1), Vedge(c.i, c.j), Vedge(c.i + 1, c.j)};
}

std::array<EdgeId, 4> incident_edges(const Vertex& v) {
    return {Hedge(v.x - 1, v.y), Hedge(v.x, v.y), Vedge(v.x, v.y - 1), Vedge(v.x, v.y)};
}

Vertex other_end(const EdgeId& e, const Vertex& v) { return e.lo() == v ? e.hi() : e.lo(); }

Window Window::parse(const std::string& text) {
    static const std::regex re(R"(\s*(-?\d+)\s*:\s*(-?\d+)\s*x\s*(-?\d+)\s*:\s*(-?\d+)\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, re))
        throw ValidationError("window must look like xmin:xmax x ymin:ymax, got '" + text + "'");
    Window w{std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3]), std::stoi(m[4])};
    if (w.xmin >= w.xmax || w.ymin >= w.ymax) throw ValidationError("empty window '" + text + "'");
    return w;
}

std::string Window::str() const {
    std::ostringstream os;
    os << xmin << ":" << xmax << "x" << ymin << ":" << ymax;
    return os.str();
}

DefectedGrid::DefectedGrid(Window w, std::vector<EdgeId> removed, RemovalRule outside, bool validate)
    : w_(w), rule_(std::move(outside)) {
    if (w_.xmin >= w_.xmax || w_.ymin >= w_.ymax) throw ValidationError("empty window " + w_.str());
    mask_.assign(static_cast<std::size_t>(w_.num_edges()), 0);
    for (const auto& e : removed) {
        if (!w_.contains(e)) throw ValidationError("removed edge " + to_string(e) + " outside window " + w_.str());
        mask_[static_cast<std::size_t>(edge_index(e))] = 1;
    }
    for (int k = 0; k < w_.num_edges(); ++k)
        if (mask_[static_cast<std::size_t>(k)]) removed_.push_back(edge_at(k));
    std::sort(removed_.begin(), removed_.end());
    if (validate && !connected())
        throw ValidationError("surviving subgraph of window " + w_.str() + " is disconnected");
}

DefectedGrid DefectedGrid::from_rule(Window w, RemovalRule rule, bool validate) {
    std::vector<EdgeId> rem;
    for (int k = 0; k < w.num_edges(); ++k) {
        EdgeId e;
        int nh = w.num_h();
        if (k < nh) {
            int wx = w.xmax - w.xmin;
            e = Hedge(w.xmin + k % wx, w.ymin + k / wx);
        } else {
            int wx = w.xmax - w.xmin + 1;
            e = Vedge(w.xmin + (k - nh) % wx, w.ymin + (k - nh) / wx);
        }
        if (rule(e)) rem.push_back(e);
    }
    return DefectedGrid(w, std::move(rem), std::move(rule), validate);
}

int DefectedGrid::edge_index(const EdgeId& e) const {
    if (e.o == Orient::H) return (e.j - w_.ymin) * (w_.xmax - w_.xmin) + (e.i - w_.xmin);
    return w_.num_h() + (e.j - w_.ymin) * (w_.xmax - w_.xmin + 1) + (e.i - w_.xmin);
}

EdgeId DefectedGrid::edge_at(int k) const {
    int nh = w_.num_h();
    if (k < nh) {
        int wx = w_.xmax - w_.xmin;
        return Hedge(w_.xmin + k % wx, w_.ymin + k / wx);
    }
    int wx = w_.xmax - w_.xmin + 1;
    return Vedge(w_.xmin + (k - nh) % wx, w_.ymin + (k - nh) / wx);
}

bool DefectedGrid::removed(const EdgeId& e) const {
    if (w_.contains(e)) return mask_[static_cast<std::size_t>(edge_index(e))] != 0;
    return rule_ ? rule_(e) : false;
}

int DefectedGrid::degree(const Vertex& v) const {
    int d = 0;
    for (const auto& e : incident_edges(v)) d += surviving(e) ? 1 : 0;
    return d;
}

int DefectedGrid::window_degree(const Vertex& v) const {
    int d = 0;
    for (const auto& e : incident_edges(v)) d += (w_.contains(e) && surviving(e)) ? 1 : 0;
    return d;
}

std::vector<EdgeId> DefectedGrid::surviving_edges() const {
    std::vector<EdgeId> out;
    out.reserve(static_cast<std::size_t>(w_.num_edges()) - removed_.size());
    for (int k = 0; k < w_.num_edges(); ++k)
        if (!mask_[static_cast<std::size_t>(k)]) out.push_back(edge_at(k));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Vertex> DefectedGrid::vertices() const {
    std::vector<Vertex> out;
    for (int y = w_.ymin; y <= w_.ymax; ++y)
        for (int x = w_.xmin; x <= w_.xmax; ++x)
            if (has_vertex({x, y})) out.push_back({x, y});
    std::sort(out.begin(), out.end());
    return out;
}

bool DefectedGrid::connected() const {
    std::vector<int> dist;
    Vertex start{};
    bool any = false;
    for (int y = w_.ymin; y <= w_.ymax && !any; ++y)
        for (int x = w_.xmin; x <= w_.xmax && !any; ++x)
            if (has_vertex({x, y})) {
                start = {x, y};
                any = true;
            }
    if (!any) return false;
    dist = bfs_distances(*this, start);
    for (int k = 0; k < num_vertices(); ++k)
        if (has_vertex(vertex_at(k)) && dist[static_cast<std::size_t>(k)] < 0) return false;
    return true;
}

DefectedGrid DefectedGrid::rematerialize(const Window& w, bool validate) const {
    DefectedGrid self = *this;
    RemovalRule combined = [self](const EdgeId& e) { return self.removed(e); };
    return from_rule(w, combined, validate);
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

std::vector<Defect> identify_defects(const DefectedGrid& g) {
    if (!g.connected()) throw ValidationError("surviving subgraph is disconnected");
    const auto& rem = g.removed_edges();
    std::map<EdgeId, int> id;
    for (std::size_t k = 0; k < rem.size(); ++k) id[rem[k]] = static_cast<int>(k);
    UnionFind uf(rem.size());
    std::set<Cell> cells;
    for (const auto& e : rem) {
        auto [a, b] = cell_pair(e);
        cells.insert(a);
        cells.insert(b);
    }
    for (const auto& c : cells) {
        int first = -1;
        for (const auto& f : cell_edges(c)) {
            auto it = id.find(f);
            if (it == id.end()) continue;
            if (first < 0) first = it->second;
            else uf.unite(first, it->second);
        }
    }
    std::map<int, Defect> groups;
    for (std::size_t k = 0; k < rem.size(); ++k) groups[uf.find(static_cast<int>(k))].edges.push_back(rem[k]);
    std::vector<Defect> out;
    const Window& w = g.window();
    for (auto& [root, d] : groups) {
        std::set<EdgeId> bd;
        for (const auto& e : d.edges) {
            if (w.on_border(e.lo()) || w.on_border(e.hi())) d.truncated = true;
            auto [a, b] = cell_pair(e);
            for (const Cell& c : {a, b})
                for (const auto& f : cell_edges(c))
                    if (w.contains(f) && g.surviving(f)) bd.insert(f);
        }
        d.boundary.assign(bd.begin(), bd.end());
        out.push_back(std::move(d));
    }
    std::sort(out.begin(), out.end(), [](const Defect& a, const Defect& b) { return a.edges.front() < b.edges.front(); });
    return out;
}

double area(const Region& r) {
    double a = 0.0;
    for (const auto& [e, c] : r.cov) a += (c == Cover::Full) ? 1.0 : 0.5;
    return a;
}

Topology grid_topology(const DefectedGrid& g) {
    Topology t;
    t.incident = [](const Vertex& v) { return incident_edges(v); };
    t.endpoint = [](const EdgeId& e, bool hi) { return hi ? e.hi() : e.lo(); };
    t.surviving = [&g](const EdgeId& e) { return g.surviving(e); };
    return t;
}

PerimeterInfo perimeter(const Region& r, const Topology& t) {
    std::set<Vertex> touched;
    PerimeterInfo info;
    for (const auto& [e, c] : r.cov) {
        if (c == Cover::Full || c == Cover::HalfLow) touched.insert(t.endpoint(e, false));
        if (c == Cover::Full || c == Cover::HalfHigh) touched.insert(t.endpoint(e, true));
        if (c != Cover::Full) {
            info.perimeter += 1;
            info.boundary_points += 1;
        }
    }
    for (const auto& v : touched) {
        int p = 0;
        for (const auto& f : t.incident(v)) {
            if (!t.surviving(f)) continue;
            auto it = r.cov.find(f);
            if (it == r.cov.end() || it->second != Cover::Full) ++p;
        }
        if (p > 0) {
            info.perimeter += p;
            info.boundary_points += 1;
        }
    }
    return info;
}

PerimeterInfo perimeter(const Region& r, const DefectedGrid& g) { return perimeter(r, grid_topology(g)); }

std::vector<int> bfs_distances(const DefectedGrid& g, const Vertex& src) {
    std::vector<int> dist(static_cast<std::size_t>(g.num_vertices()), -1);
    if (!g.has_vertex(src)) return dist;
    std::deque<Vertex> q{src};
    dist[static_cast<std::size_t>(g.vertex_index(src))] = 0;
    while (!q.empty()) {
        Vertex v = q.front();
        q.pop_front();
        int dv = dist[static_cast<std::size_t>(g.vertex_index(v))];
        for (const auto& e : incident_edges(v)) {
            if (!g.in_window(e) || g.removed(e)) continue;
            Vertex w = other_end(e, v);
            auto& dw = dist[static_cast<std::size_t>(g.vertex_index(w))];
            if (dw < 0) {
                dw = dv + 1;
                q.push_back(w);
            }
        }
    }
    return dist;
}

PathResult shortest_path(const DefectedGrid& g, const Vertex& a, const Vertex& b) {
    PathResult res;
    if (!g.has_vertex(a) || !g.has_vertex(b)) return res;
    auto dist = bfs_distances(g, b);
    int da = dist[static_cast<std::size_t>(g.vertex_index(a))];
    if (da < 0) return res;
    res.found = true;
    res.length = da;
    Vertex v = a;
    res.vertices.push_back(v);
    while (!(v == b)) {
        for (const auto& e : incident_edges(v)) {
            if (!g.in_window(e) || g.removed(e)) continue;
            Vertex w = other_end(e, v);
            if (dist[static_cast<std::size_t>(g.vertex_index(w))] == dist[static_cast<std::size_t>(g.vertex_index(v))] - 1) {
                v = w;
                break;
            }
        }
        res.vertices.push_back(v);
    }
    return res;
}

Region metric_ball(const DefectedGrid& g, const Vertex& center, double radius) {
    if (radius < 0.0) throw ValidationError("radius must be non-negative");
    double twice = 2.0 * radius;
    if (std::abs(twice - std::round(twice)) > 1e-12) throw ValidationError("radius must be a multiple of 1/2");
    Region r;
    if (radius == 0.0) return r;
    if (!g.has_vertex(center)) throw ValidationError("ball center is not a vertex of the grid");
    auto dist = bfs_distances(g, center);
    const Window& w = g.window();
    for (int k = 0; k < g.num_vertices(); ++k) {
        int d = dist[static_cast<std::size_t>(k)];
        if (d >= 0 && d < radius && w.on_border(g.vertex_at(k)))
            throw ValidationError("metric ball escapes window " + w.str() + "; enlarge it");
    }
    for (const auto& e : g.surviving_edges()) {
        int d1 = dist[static_cast<std::size_t>(g.vertex_index(e.lo()))];
        int d2 = dist[static_cast<std::size_t>(g.vertex_index(e.hi()))];
        if (d1 < 0 || d2 < 0) continue;
        int dn = std::min(d1, d2);
        if (dn + 1 <= radius) r.add(e, Cover::Full);
        else if (dn + 0.5 <= radius) r.add(e, d1 < d2 ? Cover::HalfLow : Cover::HalfHigh);
    }
    return r;
}

double ball_growth_ratio(const DefectedGrid& g, const Vertex& center, int* radius_out) {
    const Window& w = g.window();
    int n = std::min({center.x - w.xmin, w.xmax - center.x, center.y - w.ymin, w.ymax - center.y});
    DefectedGrid q(w, {}, {}, false);
    for (; n >= 1; --n) {
        try {
            double ag = area(metric_ball(g, center, n));
            double aq = area(metric_ball(q, center, n));
            if (radius_out) *radius_out = n;
            return ag / aq;
        } catch (const ValidationError&) {
        }
    }
    if (radius_out) *radius_out = 0;
    return 0.0;
}

}  // namespace gridwave

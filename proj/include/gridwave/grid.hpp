#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridwave {

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Orient : std::uint8_t { H = 0, V = 1 };

struct Vertex {
    int x = 0;
    int y = 0;
    auto operator<=>(const Vertex&) const = default;
};

struct Cell {
    int i = 0;
    int j = 0;
    auto operator<=>(const Cell&) const = default;
};

// H@(i,j) is the segment (i,i+1)x{j}; V@(i,j) is {i}x(j,j+1).
struct EdgeId {
    Orient o = Orient::H;
    int i = 0;
    int j = 0;
    auto operator<=>(const EdgeId&) const = default;

    Vertex lo() const { return {i, j}; }
    Vertex hi() const { return o == Orient::H ? Vertex{i + 1, j} : Vertex{i, j + 1}; }
    bool has_endpoint(Vertex v) const { return v == lo() || v == hi(); }
};

inline EdgeId Hedge(int i, int j) { return {Orient::H, i, j}; }
inline EdgeId Vedge(int i, int j) { return {Orient::V, i, j}; }

std::string to_string(const EdgeId& e);
std::string to_string(const Vertex& v);

std::pair<Cell, Cell> cell_pair(const EdgeId& e);
std::array<EdgeId, 4> cell_edges(const Cell& c);
// Order: left, right, down, up.
std::array<EdgeId, 4> incident_edges(const Vertex& v);
Vertex other_end(const EdgeId& e, const Vertex& v);

struct Window {
    int xmin = 0;
    int xmax = 0;
    int ymin = 0;
    int ymax = 0;
    auto operator<=>(const Window&) const = default;

    bool contains(const Vertex& v) const {
        return v.x >= xmin && v.x <= xmax && v.y >= ymin && v.y <= ymax;
    }
    bool contains(const EdgeId& e) const { return contains(e.lo()) && contains(e.hi()); }
    bool on_border(const Vertex& v) const {
        return contains(v) && (v.x == xmin || v.x == xmax || v.y == ymin || v.y == ymax);
    }
    int num_h() const { return (xmax - xmin) * (ymax - ymin + 1); }
    int num_v() const { return (xmax - xmin + 1) * (ymax - ymin); }
    int num_edges() const { return num_h() + num_v(); }
    int num_vertices() const { return (xmax - xmin + 1) * (ymax - ymin + 1); }
    Window expanded(int d) const { return {xmin - d, xmax + d, ymin - d, ymax + d}; }

    static Window square(int r) { return {-r, r, -r, r}; }
    // Syntax "xmin:xmax x ymin:ymax", e.g. "-19:19x-1:2".
    static Window parse(const std::string& text);
    std::string str() const;
};

using RemovalRule = std::function<bool(const EdgeId&)>;

class DefectedGrid {
public:
    DefectedGrid() = default;
    // Removed edges must lie in the window. The rule, if given, decides removal of
    // edges outside the window. Throws ValidationError when the surviving window
    // subgraph is disconnected (unless validate is false).
    DefectedGrid(Window w, std::vector<EdgeId> removed, RemovalRule outside = {}, bool validate = true);

    static DefectedGrid from_rule(Window w, RemovalRule rule, bool validate = true);

    const Window& window() const { return w_; }
    const RemovalRule& rule() const { return rule_; }

    bool removed(const EdgeId& e) const;
    bool surviving(const EdgeId& e) const { return !removed(e); }
    bool in_window(const EdgeId& e) const { return w_.contains(e); }

    // Number of surviving incident edges on the infinite grid.
    int degree(const Vertex& v) const;
    // Number of surviving incident edges inside the window.
    int window_degree(const Vertex& v) const;
    // A vertex belongs to the materialized graph iff it has a surviving window edge.
    bool has_vertex(const Vertex& v) const { return w_.contains(v) && window_degree(v) > 0; }
    bool vertex_removed(const Vertex& v) const { return degree(v) == 0; }

    const std::vector<EdgeId>& removed_edges() const { return removed_; }
    std::vector<EdgeId> surviving_edges() const;
    std::vector<Vertex> vertices() const;

    int edge_index(const EdgeId& e) const;
    EdgeId edge_at(int idx) const;
    int num_edges() const { return w_.num_edges(); }
    int vertex_index(const Vertex& v) const { return (v.y - w_.ymin) * (w_.xmax - w_.xmin + 1) + (v.x - w_.xmin); }
    Vertex vertex_at(int idx) const {
        int wx = w_.xmax - w_.xmin + 1;
        return {w_.xmin + idx % wx, w_.ymin + idx / wx};
    }
    int num_vertices() const { return w_.num_vertices(); }

    bool connected() const;
    // Same removal pattern on a different window (window edges decided by this grid).
    DefectedGrid rematerialize(const Window& w, bool validate = true) const;

private:
    Window w_{};
    std::vector<char> mask_;
    std::vector<EdgeId> removed_;
    RemovalRule rule_;
};

struct Defect {
    std::vector<EdgeId> edges;
    std::vector<EdgeId> boundary;
    bool truncated = false;
};

std::vector<Defect> identify_defects(const DefectedGrid& g);

enum class Cover : std::uint8_t { Full, HalfLow, HalfHigh };

struct Region {
    std::map<EdgeId, Cover> cov;

    void add(const EdgeId& e, Cover c = Cover::Full) { cov[e] = c; }
    bool empty() const { return cov.empty(); }
};

double area(const Region& r);

struct PerimeterInfo {
    int perimeter = 0;
    int boundary_points = 0;
};

// Incidence structure used by the perimeter computation; the lattice grid and
// test doubles (e.g. a torus) both provide one.
struct Topology {
    std::function<std::array<EdgeId, 4>(const Vertex&)> incident;
    std::function<Vertex(const EdgeId&, bool hi)> endpoint;
    std::function<bool(const EdgeId&)> surviving;
};

Topology grid_topology(const DefectedGrid& g);
PerimeterInfo perimeter(const Region& r, const Topology& t);
PerimeterInfo perimeter(const Region& r, const DefectedGrid& g);

struct PathResult {
    bool found = false;
    int length = 0;
    std::vector<Vertex> vertices;
};

PathResult shortest_path(const DefectedGrid& g, const Vertex& a, const Vertex& b);
// Graph distances from a vertex inside the window (-1 for unreachable).
std::vector<int> bfs_distances(const DefectedGrid& g, const Vertex& src);

// Points at distance < radius; radius must be a multiple of 1/2.
Region metric_ball(const DefectedGrid& g, const Vertex& center, double radius);
// |B_n(v,G)| / |B_n(v,Q)| at the largest integer radius whose balls fit in the window.
double ball_growth_ratio(const DefectedGrid& g, const Vertex& center, int* radius_out = nullptr);

}  // namespace gridwave

#include "gridwave/defect_zoo.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "gridwave/io.hpp"

namespace gridwave {

namespace {

int mod2(int a) { return ((a % 2) + 2) % 2; }

RemovalRule vertex_wall_rule(std::function<bool(Vertex)> wall) {
    return [wall = std::move(wall)](const EdgeId& e) { return wall(e.lo()) || wall(e.hi()); };
}

bool parallel_wall(int width, Vertex v) { return v.x >= 0 && (v.y == 0 || v.y == width); }

bool growing_wall(Vertex v) {
    if (v.x < 2 || v.x % 2 != 0) return false;
    int k = v.x / 2;
    return v.y >= 1 && v.y <= k;
}

RemovalRule periodic_rule(std::vector<EdgeId> base, Vertex v) {
    if (v.x == 0 && v.y == 0) throw ValidationError("z_periodic vector must be nonzero");
    return [base = std::move(base), v](const EdgeId& e) {
        for (const auto& b : base) {
            if (b.o != e.o) continue;
            int dx = e.i - b.i, dy = e.j - b.j;
            if (v.x != 0) {
                if (dx % v.x != 0) continue;
                int k = dx / v.x;
                if (dy == k * v.y) return true;
            } else {
                if (dx != 0 || dy % v.y != 0) continue;
                return true;
            }
        }
        return false;
    };
}

RemovalRule periodic2_rule(std::vector<EdgeId> base, Vertex v1, Vertex v2) {
    long det = static_cast<long>(v1.x) * v2.y - static_cast<long>(v1.y) * v2.x;
    if (det == 0) throw ValidationError("z2_periodic vectors must be linearly independent");
    return [base = std::move(base), v1, v2, det](const EdgeId& e) {
        for (const auto& b : base) {
            if (b.o != e.o) continue;
            long dx = e.i - b.i, dy = e.j - b.j;
            long an = dx * v2.y - dy * v2.x;
            long bn = static_cast<long>(v1.x) * dy - static_cast<long>(v1.y) * dx;
            if (an % det == 0 && bn % det == 0) return true;
        }
        return false;
    };
}

std::vector<EdgeId> edge_list_param(const nlohmann::json& params, const char* key, std::vector<EdgeId> fallback) {
    if (!params.contains(key)) return fallback;
    return edges_from_json(params.at(key));
}

Vertex vec_param(const nlohmann::json& params, const char* key, Vertex fallback) {
    if (!params.contains(key)) return fallback;
    const auto& a = params.at(key);
    if (!a.is_array() || a.size() != 2) throw ValidationError(std::string("parameter '") + key + "' must be [x, y]");
    return {a[0].get<int>(), a[1].get<int>()};
}

int int_param(const nlohmann::json& params, const char* key, int fallback) {
    if (!params.contains(key)) return fallback;
    return params.at(key).get<int>();
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

std::vector<EdgeId> vertex_star(Vertex v) {
    auto a = incident_edges(v);
    return {a.begin(), a.end()};
}

const std::vector<std::string>& generator_kinds() {
    static const std::vector<std::string> kinds = {
        "q", "compact",  "z_periodic",    "z2_periodic",    "spiral",
        "parallel_slits", "staircase", "growing_slits", "block_sequence",
        "block_sequence_stacked", "length_two_grid"};
    return kinds;
}

bool spiral_wall_vertex(int gap, Vertex v) {
    const int g = gap;
    int n_max = std::max(std::abs(v.x), std::abs(v.y)) / g + 2;
    for (int n = 1; n <= n_max; ++n) {
        int a = (n - 1) * g, b = n * g;
        if (v.y == -a && v.x >= -a && v.x <= b) return true;
        if (v.x == b && v.y >= -a && v.y <= b) return true;
        if (v.y == b && v.x >= -b && v.x <= b) return true;
        if (v.x == -b && v.y >= -b && v.y <= b) return true;
    }
    return false;
}

bool staircase_cell_removed(int cx, int cy) {
    if (cx < 0) return false;
    int i = 0;
    while ((i + 1) * (i + 2) <= cx) ++i;
    int upper = 4 + i;
    int lower = (cx < (i + 1) * (i + 1)) ? 0 : i + 1;
    return cy >= lower && cy < upper;
}

bool staircase_gamma_edge(const EdgeId& e) {
    auto [a, b] = cell_pair(e);
    return staircase_cell_removed(a.i, a.j) != staircase_cell_removed(b.i, b.j);
}

Window staircase_window(int ring) {
    if (ring < 0) throw ValidationError("ring must be non-negative");
    return {-3, (ring + 1) * (ring + 2) + 3, -3, ring + 8};
}

RemovalRule make_rule(const GeneratorSpec& spec) {
    const auto& p = spec.params;
    const std::string& k = spec.kind;
    if (k == "q") return [](const EdgeId&) { return false; };
    if (k == "compact") {
        auto edges = edge_list_param(p, "removed", vertex_star({0, 0}));
        std::sort(edges.begin(), edges.end());
        return [edges](const EdgeId& e) { return std::binary_search(edges.begin(), edges.end(), e); };
    }
    if (k == "z_periodic") {
        return periodic_rule(edge_list_param(p, "base", {Vedge(0, 0)}), vec_param(p, "v", {2, 0}));
    }
    if (k == "z2_periodic") {
        return periodic2_rule(edge_list_param(p, "base", {Vedge(0, 0)}), vec_param(p, "v1", {3, 0}),
                              vec_param(p, "v2", {0, 3}));
    }
    if (k == "spiral") {
        int gap = int_param(p, "gap", 4);
        if (gap < 2) throw ValidationError("spiral gap must be >= 2");
        return vertex_wall_rule([gap](Vertex v) { return spiral_wall_vertex(gap, v); });
    }
    if (k == "parallel_slits") {
        int width = int_param(p, "width", 3);
        if (width < 2) throw ValidationError("parallel_slits width must be >= 2");
        return vertex_wall_rule([width](Vertex v) { return parallel_wall(width, v); });
    }
    if (k == "growing_slits") return vertex_wall_rule(growing_wall);
    if (k == "staircase") {
        return [](const EdgeId& e) {
            auto [a, b] = cell_pair(e);
            return staircase_cell_removed(a.i, a.j) && staircase_cell_removed(b.i, b.j);
        };
    }
    if (k == "block_sequence") {
        return [](const EdgeId& e) { return e.o == Orient::V && e.j == 0 && block_value(e.i) == 0; };
    }
    if (k == "block_sequence_stacked") {
        return [](const EdgeId& e) { return e.o == Orient::V && mod2(e.j) == 0 && block_value(e.i) == 0; };
    }
    if (k == "length_two_grid") {
        return [](const EdgeId& e) { return e.o == Orient::H ? mod2(e.j) == 1 : mod2(e.i) == 1; };
    }
    std::ostringstream msg;
    msg << "unknown generator '" << k << "'";
    std::string best;
    std::size_t best_d = 1000;
    for (const auto& cand : generator_kinds()) {
        auto d = edit_distance(k, cand);
        if (d < best_d) {
            best_d = d;
            best = cand;
        }
    }
    if (best_d <= 4) msg << "; did you mean '" << best << "'?";
    msg << " Known generators:";
    for (const auto& cand : generator_kinds()) msg << " " << cand;
    throw ValidationError(msg.str());
}

DefectedGrid materialize(const GeneratorSpec& spec, const Window& w) {
    if (spec.kind == "staircase" && !(w.xmin < 0 && w.ymin < 0 && w.ymax >= 5 && w.xmax >= 2))
        throw ValidationError("staircase window must contain Gamma_0 with margin (xmin<0, ymin<0, ymax>=5)");
    return DefectedGrid::from_rule(w, make_rule(spec));
}

std::string make_sigma(int n) {
    if (n < 1) throw ValidationError("sigma_n requires n >= 1");
    std::string s;
    s.reserve(static_cast<std::size_t>(3 * n));
    for (int k = 0; k < n; ++k) s += "010";
    return s;
}

std::string make_block(int n) {
    if (n < 1) throw ValidationError("B_n requires n >= 1");
    static std::mutex mu;
    static std::vector<std::string> memo;
    std::lock_guard<std::mutex> lock(mu);
    if (memo.empty()) {
        memo.emplace_back();
        memo.push_back(make_sigma(1) + "111" + make_sigma(1));
    }
    while (static_cast<int>(memo.size()) <= n) {
        int idx = static_cast<int>(memo.size());
        int m = 2;
        while ((1 << (m - 1)) < idx) ++m;
        int half = 1 << (m - 2);
        int k = idx - half;
        std::string sig = make_sigma(m);
        std::string out;
        for (int t = k; t >= 1; --t) {
            out += memo[static_cast<std::size_t>(t)];
            out += sig;
        }
        out += memo[static_cast<std::size_t>(half)];
        for (int t = 1; t <= k; ++t) {
            out += sig;
            out += memo[static_cast<std::size_t>(t)];
        }
        memo.push_back(std::move(out));
    }
    return memo[static_cast<std::size_t>(n)];
}

int block_value(long k) {
    int n = 1;
    std::string b = make_block(n);
    while (static_cast<long>((b.size() - 1) / 2) < std::labs(k)) b = make_block(++n);
    long c = static_cast<long>((b.size() - 1) / 2);
    return b[static_cast<std::size_t>(c + k)] == '1' ? 1 : 0;
}

PatternSearch contains_pattern(int i, int n, std::size_t max_length) {
    if (i < 1 || n < 1) throw ValidationError("contains_pattern requires i, N >= 1");
    std::string pat = make_sigma(n) + make_block(i) + make_sigma(n);
    for (int j = 1;; ++j) {
        std::string b = make_block(j);
        if (b.size() > max_length) return {};
        if (b.find(pat) != std::string::npos) return {true, j};
    }
}

DefectedGrid compact_defects_grid(const std::vector<EdgeId>& removed, const Window& w) {
    return materialize({"compact", {{"removed", [&] {
                                           nlohmann::json a = nlohmann::json::array();
                                           for (const auto& e : removed) a.push_back(edge_to_json(e));
                                           return a;
                                       }()}}},
                       w);
}

DefectedGrid z_periodic_grid(const std::vector<EdgeId>& base, Vertex v, const Window& w) {
    nlohmann::json b = nlohmann::json::array();
    for (const auto& e : base) b.push_back(edge_to_json(e));
    return materialize({"z_periodic", {{"base", b}, {"v", {v.x, v.y}}}}, w);
}

DefectedGrid z2_periodic_grid(const std::vector<EdgeId>& base, Vertex v1, Vertex v2, const Window& w) {
    nlohmann::json b = nlohmann::json::array();
    for (const auto& e : base) b.push_back(edge_to_json(e));
    return materialize({"z2_periodic", {{"base", b}, {"v1", {v1.x, v1.y}}, {"v2", {v2.x, v2.y}}}}, w);
}

DefectedGrid spiral_grid(int gap, const Window& w) { return materialize({"spiral", {{"gap", gap}}}, w); }
DefectedGrid parallel_slits_grid(int width, const Window& w) {
    return materialize({"parallel_slits", {{"width", width}}}, w);
}
DefectedGrid growing_slits_grid(const Window& w) { return materialize({"growing_slits", {}}, w); }
DefectedGrid block_sequence_grid(const Window& w) { return materialize({"block_sequence", {}}, w); }
DefectedGrid stacked_block_grid(const Window& w) { return materialize({"block_sequence_stacked", {}}, w); }
DefectedGrid staircase_grid(const Window& w) { return materialize({"staircase", {}}, w); }
DefectedGrid length_two_grid(const Window& w) { return materialize({"length_two_grid", {}}, w); }

}  // namespace gridwave

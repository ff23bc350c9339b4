#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "gridwave/defect_zoo.hpp"
#include "gridwave/io.hpp"

using namespace gridwave;

namespace {

// Block recursion written out per level: level m covers indices 2^{m-2}+1 .. 2^{m-1}.
std::map<int, std::string> oracle_blocks(int nmax) {
    std::map<int, std::string> b;
    b[1] = "010111010";
    for (int m = 2; static_cast<int>(b.size()) < nmax; ++m) {
        std::string sig;
        for (int r = 0; r < m; ++r) sig += "010";
        int half = 1 << (m - 2);
        for (int k = 1; k <= half && static_cast<int>(b.size()) < nmax; ++k) {
            std::vector<int> seq;
            for (int t = k; t >= 1; --t) seq.push_back(t);
            seq.push_back(half);
            for (int t = 1; t <= k; ++t) seq.push_back(t);
            std::string s;
            for (std::size_t q = 0; q < seq.size(); ++q) {
                if (q) s += sig;
                s += b.at(seq[q]);
            }
            b[half + k] = s;
        }
    }
    return b;
}

std::vector<int> zero_positions(const std::string& s) {
    std::vector<int> out;
    int c = static_cast<int>(s.size() - 1) / 2;
    for (int k = 0; k < static_cast<int>(s.size()); ++k)
        if (s[static_cast<std::size_t>(k)] == '0') out.push_back(k - c);
    return out;
}

// Gamma written out from its pieces: Gamma_0, H_i^-, V_i, H_i^+ and Gamma_i^+.
std::set<EdgeId> oracle_gamma(int rings) {
    std::set<EdgeId> g;
    for (int y = 0; y < 4; ++y) g.insert(Vedge(0, y));
    for (int i = 0; i <= rings; ++i) {
        for (int x = i * (i + 1); x < (i + 1) * (i + 1); ++x) g.insert(Hedge(x, 0));
        for (int y = 0; y < i + 1; ++y) {
            g.insert(Vedge((i + 1) * (i + 1), y));
            g.insert(Vedge((i + 1) * (i + 2), y));
        }
        for (int x = (i + 1) * (i + 1); x < (i + 1) * (i + 2); ++x) g.insert(Hedge(x, i + 1));
        for (int x = i * (i + 1); x < (i + 1) * (i + 2); ++x) g.insert(Hedge(x, 4 + i));
        g.insert(Vedge((i + 1) * (i + 2), 4 + i));
    }
    return g;
}

}  // namespace

TEST_CASE("sigma") {
    CHECK(make_sigma(1) == "010");
    CHECK(make_sigma(2) == "010010");
    CHECK(make_sigma(3) == "010010010");
    CHECK_THROWS_AS(make_sigma(0), ValidationError);
}

TEST_CASE("blocks match the concatenation oracle") {
    CHECK(make_block(1) == "010111010");
    std::string b1 = make_block(1);
    CHECK(make_block(2) == b1 + "010010" + b1 + "010010" + b1);
    CHECK(make_block(2).size() == 39);
    CHECK(make_block(3) == b1 + make_sigma(3) + make_block(2) + make_sigma(3) + b1);
    CHECK(make_block(3).size() == 75);
    auto oracle = oracle_blocks(12);
    for (auto& [n, s] : oracle) CHECK(make_block(n) == s);
    CHECK(make_block(4).size() == 171);
    CHECK(make_block(5).size() == 213);
    CHECK(make_block(8).size() == 855);
}

TEST_CASE("block invariants") {
    for (int n = 1; n <= 10; ++n) {
        auto b = make_block(n);
        CHECK(b.size() % 2 == 1);
        CHECK(b.size() % 3 == 0);
        auto nb = make_block(n + 1);
        std::size_t off = (nb.size() - b.size()) / 2;
        CHECK(nb.substr(off, b.size()) == b);
        std::string rev(b.rbegin(), b.rend());
        CHECK(rev == b);
    }
    auto b6 = make_block(6);
    std::size_t i = 0;
    while (i < b6.size()) {
        if (b6[i] == '0') {
            std::size_t j = i;
            while (j < b6.size() && b6[j] == '0') ++j;
            if (i > 0 && j < b6.size()) CHECK((j - i == 1 || j - i == 2));
            i = j;
        } else {
            ++i;
        }
    }
}

TEST_CASE("block_value reads centered blocks") {
    auto b2 = make_block(2);
    for (long k = -19; k <= 19; ++k) CHECK(block_value(k) == (b2[static_cast<std::size_t>(k + 19)] == '1'));
}

TEST_CASE("contains_pattern matches substring search oracle") {
    auto oracle = oracle_blocks(20);
    for (int i = 1; i <= 4; ++i)
        for (int n = 1; n <= 4; ++n) {
            std::string pat = make_sigma(n) + oracle.at(i) + make_sigma(n);
            int j = 1;
            while (oracle.at(j).find(pat) == std::string::npos) ++j;
            auto res = contains_pattern(i, n);
            REQUIRE(res.found);
            CHECK(res.j == j);
        }
    CHECK(contains_pattern(1, 2).j == 2);
    CHECK(contains_pattern(1, 3).j == 2);
    CHECK(contains_pattern(2, 3).j <= 5);
    CHECK_FALSE(contains_pattern(4, 9, 1000).found);
}

TEST_CASE("block sequence grid") {
    auto g = block_sequence_grid(Window{-4, 4, -1, 2});
    std::vector<int> xs;
    for (const auto& e : g.removed_edges()) {
        CHECK(e.o == Orient::V);
        CHECK(e.j == 0);
        xs.push_back(e.i);
    }
    CHECK(xs == std::vector<int>{-4, -2, 2, 4});
    auto g2 = block_sequence_grid(Window{-19, 19, -1, 2});
    xs.clear();
    for (const auto& e : g2.removed_edges()) xs.push_back(e.i);
    CHECK(xs == zero_positions(make_block(2)));
    int half6 = static_cast<int>(make_block(6).size() - 1) / 2;
    auto g6 = block_sequence_grid(Window{-half6, half6, -1, 2});
    for (const auto& d : identify_defects(g6)) CHECK((d.edges.size() == 1 || d.edges.size() == 2));
}

TEST_CASE("stacked block grid repeats with vertical period 2") {
    auto g = stacked_block_grid(Window{-19, 19, -3, 6});
    for (const auto& e : g.removed_edges()) {
        CHECK(e.o == Orient::V);
        CHECK(((e.j % 2) + 2) % 2 == 0);
        CHECK(g.removed(Vedge(e.i, e.j + 2)));
    }
}

TEST_CASE("staircase geometry") {
    Window w = staircase_window(5);
    auto g = staircase_grid(w);
    for (int y = 0; y < 4; ++y) CHECK(g.surviving(Vedge(0, y)));
    for (const auto& e : incident_edges({1, 2})) CHECK(g.removed(e));
    // Gamma from the formulas equals the set of edges separating D from its complement.
    auto oracle = oracle_gamma(12);
    for (int k = 0; k < g.num_edges(); ++k) {
        EdgeId e = g.edge_at(k);
        if (e.i > (5 + 1) * (5 + 2)) continue;
        CHECK(staircase_gamma_edge(e) == (oracle.count(e) > 0));
    }
    // simple path: interior Gamma vertices have exactly two Gamma neighbours
    std::map<Vertex, int> deg;
    for (const auto& e : oracle)
        if (w.contains(e)) {
            deg[e.lo()]++;
            deg[e.hi()]++;
        }
    for (const auto& [v, d] : deg) {
        if (w.on_border(v) || v.x >= w.xmax - 1) continue;
        CHECK(d == 2);
    }
    CHECK_THROWS_AS(staircase_grid(Window{0, 10, 0, 10}), ValidationError);
}

TEST_CASE("staircase boundary distance is at most three times grid distance") {
    Window w = staircase_window(4);
    auto g = staircase_grid(w);
    auto ds = identify_defects(g);
    REQUIRE(ds.size() == 1);
    std::vector<EdgeId> bd;
    for (const auto& e : ds[0].boundary)
        if (!w.on_border(e.lo()) && !w.on_border(e.hi())) bd.push_back(e);
    DefectedGrid gamma = DefectedGrid::from_rule(
        w, [&](const EdgeId& e) { return !std::binary_search(bd.begin(), bd.end(), e); }, false);
    std::set<Vertex> vs;
    for (const auto& e : bd) {
        vs.insert(e.lo());
        vs.insert(e.hi());
    }
    std::vector<Vertex> pts(vs.begin(), vs.end());
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    for (int t = 0; t < 200; ++t) {
        Vertex s = pts[pick(rng)], u = pts[pick(rng)];
        auto dg = shortest_path(g, s, u);
        auto db = shortest_path(gamma, s, u);
        REQUIRE(dg.found);
        REQUIRE(db.found);
        CHECK(db.length <= 3 * dg.length);
    }
}

TEST_CASE("periodic generators") {
    Window w{-8, 8, -6, 6};
    auto g = z_periodic_grid({Hedge(0, 0)}, {1, 0}, w);
    CHECK_THROWS_AS(z_periodic_grid({Vedge(0, 0)}, {1, 0}, w), ValidationError);
    for (int k = 0; k < g.num_edges(); ++k) {
        EdgeId e = g.edge_at(k);
        EdgeId s{e.o, e.i + 1, e.j};
        if (w.contains(s)) CHECK(g.removed(e) == g.removed(s));
    }
    auto g2 = z2_periodic_grid({Hedge(0, 0), Vedge(1, 1)}, {4, 1}, {-1, 3}, w);
    for (int k = 0; k < g2.num_edges(); ++k) {
        EdgeId e = g2.edge_at(k);
        for (Vertex v : {Vertex{4, 1}, Vertex{-1, 3}}) {
            EdgeId s{e.o, e.i + v.x, e.j + v.y};
            if (w.contains(s)) CHECK(g2.removed(e) == g2.removed(s));
        }
    }
    CHECK(g2.removed(Hedge(3, 4)));
}

TEST_CASE("length-two grid is a mesh-2 grid") {
    auto g = length_two_grid(Window{-6, 6, -6, 6});
    for (const auto& v : g.vertices()) {
        bool ex = ((v.x % 2) + 2) % 2 == 0, ey = ((v.y % 2) + 2) % 2 == 0;
        if (g.window().on_border(v)) continue;
        if (ex && ey) CHECK(g.degree(v) == 4);
        else CHECK(g.degree(v) == 2);
    }
    for (int x = -5; x <= 5; x += 2)
        for (int y = -5; y <= 5; y += 2) CHECK(g.vertex_removed({x, y}));
    for (const auto& d : identify_defects(g))
        if (!d.truncated) CHECK(d.edges.size() == 4);
}

TEST_CASE("growing slits corridor witness") {
    auto g = growing_slits_grid(Window{-2, 18, -2, 12});
    for (int k = 1; k <= 7; ++k) {
        Region r;
        for (int y = 0; y < k; ++y) r.add(Vedge(2 * k + 1, y));
        CHECK(area(r) == k);
        CHECK(perimeter(r, g).perimeter == 4);
    }
}

TEST_CASE("spiral and slits materialize connected windows") {
    for (int r : {10, 20, 30, 40}) CHECK_NOTHROW(spiral_grid(4, Window::square(r)));
    CHECK_NOTHROW(parallel_slits_grid(3, Window{-3, 20, -3, 6}));
    CHECK(spiral_wall_vertex(4, {0, 0}));
    CHECK(spiral_wall_vertex(4, {4, 4}));
    CHECK(spiral_wall_vertex(4, {-4, -4}));
    CHECK(spiral_wall_vertex(4, {8, -4}));
    CHECK_FALSE(spiral_wall_vertex(4, {2, 2}));
}

TEST_CASE("compact default removes the origin star") {
    GeneratorSpec spec{"compact", nlohmann::json::object()};
    auto g = materialize(spec, Window::square(4));
    CHECK(g.removed_edges().size() == 4);
    CHECK(g.vertex_removed({0, 0}));
}

TEST_CASE("unknown generator suggests a name") {
    try {
        make_rule({"spirl", {}});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("spiral") != std::string::npos);
    }
}

TEST_CASE("grid spec json round trip") {
    GeneratorSpec spec{"growing_slits", nlohmann::json::object()};
    auto g = materialize(spec, Window{-2, 10, -2, 7});
    auto j = grid_to_json(g, &spec);
    auto back = grid_from_json(nlohmann::json::parse(dump_json(j)));
    CHECK(back.removed_edges() == g.removed_edges());
    CHECK(back.window() == g.window());
    CHECK(back.removed(Hedge(11, 1)) == g.removed(Hedge(11, 1)));
}

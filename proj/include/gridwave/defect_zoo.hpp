#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridwave/grid.hpp"

namespace gridwave {

struct GeneratorSpec {
    std::string kind;
    nlohmann::json params = nlohmann::json::object();
};

const std::vector<std::string>& generator_kinds();

// Removal predicate on the infinite grid for a named generator.
RemovalRule make_rule(const GeneratorSpec& spec);
DefectedGrid materialize(const GeneratorSpec& spec, const Window& w);

std::string make_sigma(int n);
std::string make_block(int n);
// Value of F at integer k, read from the smallest centered block covering k.
int block_value(long k);

struct PatternSearch {
    bool found = false;
    int j = 0;
};
// Smallest j such that B_j contains sigma_N B_i sigma_N, searching blocks up to max_length characters.
PatternSearch contains_pattern(int i, int n, std::size_t max_length = 50'000'000);

// Named generators.
DefectedGrid compact_defects_grid(const std::vector<EdgeId>& removed, const Window& w);
DefectedGrid z_periodic_grid(const std::vector<EdgeId>& base, Vertex v, const Window& w);
DefectedGrid z2_periodic_grid(const std::vector<EdgeId>& base, Vertex v1, Vertex v2, const Window& w);
DefectedGrid spiral_grid(int gap, const Window& w);
DefectedGrid parallel_slits_grid(int width, const Window& w);
DefectedGrid growing_slits_grid(const Window& w);
DefectedGrid block_sequence_grid(const Window& w);
DefectedGrid stacked_block_grid(const Window& w);
DefectedGrid staircase_grid(const Window& w);
DefectedGrid length_two_grid(const Window& w);

// Staircase geometry: removed cells and the boundary path Gamma.
bool staircase_cell_removed(int cx, int cy);
bool staircase_gamma_edge(const EdgeId& e);
// Smallest window that holds ring i of the staircase (bump and upper step).
Window staircase_window(int ring);

bool spiral_wall_vertex(int gap, Vertex v);

// Edges incident to one vertex.
std::vector<EdgeId> vertex_star(Vertex v);

}  // namespace gridwave

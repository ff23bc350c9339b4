#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "gridwave/field.hpp"
#include "gridwave/grid.hpp"

namespace gridwave {

struct IsoConfig {
    int exhaustive_max_edges = 18;
    int restarts = 16;
    int steps = 40000;
    double t_start = 0.3;
    double t_end = 1e-3;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct IsoperimetricReport {
    double best_ratio = 0.0;
    Region witness;
    double area = 0.0;
    int perimeter = 0;
    std::string search_mode;
    Window window{};
    IsoConfig config;
};

// Maximizes sqrt(A)/P over connected whole-edge regions.
IsoperimetricReport search_violation(const DefectedGrid& g, const IsoConfig& cfg = {});

struct TentResult {
    Field u;
    double eps = 0.0;
    double eps_bound = 0.0;
    double area = 0.0;
    int perimeter = 0;
};

// Largest admissible ramp width for the region (exclusive bound).
double tent_eps_bound(const Region& omega, const DefectedGrid& g);
TentResult tent_function(const Region& omega, const DefectedGrid& g, double eps);

struct CoareaReport {
    double lhs = 0.0;             // ||u'||_L1
    double rhs = 0.0;             // integral of the level-set counting function
    double max_gap = 0.0;
    double layer_cake = 0.0;      // 2 * int t A({u >= t}) dt
    double l2_sq = 0.0;           // exact ||u||_2^2
    double sqrt_area_integral = 0.0;  // int sqrt(A({u >= t})) dt
};

CoareaReport coarea_check(const Field& u);

// Connected whole-edge region grown from a random edge, kept at least `margin` away from the window border.
Region random_connected_region(const DefectedGrid& g, int n_edges, std::mt19937_64& rng, int margin = 1);

}  // namespace gridwave

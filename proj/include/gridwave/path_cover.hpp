#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridwave/grid.hpp"

namespace gridwave {

// Vertices of the defect boundary whose surviving degree is at most 3.
std::vector<Vertex> boundary_origins(const DefectedGrid& g, const Defect& d);

enum class RouteStrategy { Router, VerticalRay };

struct RouterConfig {
    RouteStrategy strategy = RouteStrategy::Router;
    double penalty = 4.0;
    int rounds = 5;
    std::uint64_t seed = 0;
    int seeds = 1;          // independent orderings, reduced by minimum congestion
    int threads = 1;
    bool edge_only = false;  // count intersections by shared edges only
};

struct PathFamily {
    std::vector<Vertex> origins;
    std::vector<std::vector<EdgeId>> paths;  // paths[k] starts at origins[k] and ends on the window border
    std::vector<int> overlap;                // F(origin_k)
    int congestion = 0;                      // max_k F(origin_k)
    int max_load = 0;                        // most paths through one vertex
    std::vector<int> round_congestion;       // best congestion after each routing round
    std::uint64_t seed = 0;
};

PathFamily route_paths(const DefectedGrid& g, const std::vector<Vertex>& origins, const RouterConfig& cfg = {});

// F(v) for every path, from the stored edge lists.
std::vector<int> overlap_counts(const std::vector<Vertex>& origins, const std::vector<std::vector<EdgeId>>& paths,
                                bool edge_only = false);

struct StaircaseBound {
    int ring = 0;
    int available = 0;      // distinct vertical edges in the pocket under the ring's bump
    int required = 0;       // vertical traversals forced on the pocket origins
    int repetitions = 0;    // required - available
    double mean = 0.0;      // repetitions / #origins
    std::vector<Vertex> origins;
};

StaircaseBound staircase_counting_bound(int ring, const DefectedGrid& g);

struct CensusEntry {
    std::vector<int> sizes;  // edge count in each nested window
    bool unbounded_candidate = false;
};

struct DefectCensus {
    int n_unbounded_truncated = 0;
    int n_bounded = 0;
    int max_bounded_size = 0;
    int n_truncated = 0;
    std::vector<Window> windows;
    std::vector<CensusEntry> truncated;
};

// Classifies defects on the grid window and two enlargements by `step`.
DefectCensus unbounded_defect_census(const DefectedGrid& g, int step = 8);

}  // namespace gridwave

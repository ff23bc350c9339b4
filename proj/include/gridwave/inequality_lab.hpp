#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridwave/field.hpp"
#include "gridwave/grid.hpp"

namespace gridwave {

enum class Inequality { S1d, S2d, Gn1d, Gn2d, GnInt };

Inequality parse_inequality(const std::string& id);
std::string to_string(Inequality id);

// Left side over the structural right-hand product, with exact P1 norms:
//   s1d   ||u||_inf / ||u'||_1
//   s2d   ||u||_2 / ||u'||_1
//   gn1d  ||u||_p^p / (||u||_2^(p/2+1) ||u'||_2^(p/2-1))
//   gn2d  ||u||_p^p / (||u||_2^2 ||u'||_2^(p-2))
//   gn_int ||u||_p^p / (||u||_2^(p-2) ||u'||_2^2)
// Returns 0 when the denominator vanishes.
double inequality_ratio(Inequality id, const Field& u, double p = 4.0);

enum class FamilyKind { Tents, Exponentials, SolverStates, RandomBumps };

FamilyKind parse_family(const std::string& name);
std::string to_string(FamilyKind f);

struct FamilySpec {
    FamilyKind kind = FamilyKind::Tents;
    int count = 200;
    double p = 4.0;
    int mesh_m = 4;
    // tents
    int max_region_edges = 40;
    double tent_eps = 0.25;       // capped at half the admissible bound of each region
    bool include_iso_witness = true;
    // exponentials: eps_max * 0.7^k, k < count
    double eps_max = 2.0;
    // solver states: masses mu_min * (mu_max/mu_min)^(k/(count-1))
    double mu_min = 0.5;
    double mu_max = 20.0;
    // random bumps
    int max_bumps = 4;
    int threads = 1;
};

struct RatioReport {
    Inequality id = Inequality::S2d;
    double p = 4.0;
    double best_ratio = 0.0;
    int witness_index = -1;
    std::string witness_label;
    Field witness;
    std::string family;
    std::vector<double> ratios;
    Window window{};
    std::uint64_t seed = 0;
};

RatioReport probe_inequality(Inequality id, const DefectedGrid& g, const FamilySpec& fam, std::uint64_t seed = 0);

struct ExtensionReport {
    Field v;                       // extension on the undefected window
    double u_l1 = 0.0;             // ||u'||_L1(G)
    double v_l1 = 0.0;             // ||v'||_L1(Q)
    std::optional<double> ratio;   // v_l1 / u_l1, absent when u_l1 == 0
    double c_bound = 1.0;          // geometric constant with v_l1 <= c_bound * u_l1
    double u_l2_sq = 0.0, v_l2_sq = 0.0;
    double max_junction_gap = 0.0;
    int n_junctions = 0;
    int n_defects = 0;
};

// Fills every bounded defect of u's grid: half edges at low-degree boundary vertices replay u along
// the shortest boundary path to the anchor midpoint, everything else takes the anchor value.
ExtensionReport extend_field(const Field& u);

struct ExpTrial {
    double eps = 0.0;
    double mu = 0.0;
    double kappa = 0.0;
    Window window{};
    int n_edges = 0;          // surviving window edges integrated
    double l2_sq = 0.0;       // analytic, surviving edges only
    double deriv_l2_sq = 0.0;
    double border_ratio = 0.0;  // max over the window border of phi / kappa
    std::optional<Field> field;
};

double exp_trial_kappa(double eps, double mu);
// Radius r with exp(-eps r) < 1e-10.
int exp_trial_radius(double eps);
// phi(x,y) = kappa exp(-eps (|x| + |y|)) restricted to the surviving window edges; mesh_m > 0 also samples it.
ExpTrial exp_trial_field(const DefectedGrid& g, double eps, double mu, int mesh_m = 0);
// Analytic int |phi|^p over the same edges.
double exp_trial_lp(const DefectedGrid& g, double eps, double kappa, double p);

struct Z2Probe {
    bool found = false;
    double eps_star = 0.0;
    double energy = 0.0;
    std::pair<int, int> periods{0, 0};
    std::vector<std::pair<double, double>> sweep;  // (eps, energy)
};

// Smallest horizontal and vertical periods up to max_period of the removal pattern, if any.
std::optional<std::pair<int, int>> detect_periods(const DefectedGrid& g, int max_period = 16);

// Sweeps eps = 0.7^k down to eps_min; each trial is renormalized to mass mu on G.
Z2Probe z2_negativity_probe(const DefectedGrid& g, double p, double mu, double eps_min = 1e-3);

}  // namespace gridwave

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gridwave/field.hpp"

namespace gridwave {

struct SolverConfig {
    int mesh_m = 8;
    int max_iters = 4000;
    double tol_grad = 1e-9;   // max_i |r_i| / w_i at convergence
    double newton_switch = 1e-3;  // residual below which Newton steps are attempted
    int n_starts = 5;
    std::uint64_t seed = 0;
    int threads = 1;
    double bump_width = 1.5;   // nominal width of the initial Gaussian bumps
    double bump_spread = 0.25; // bump centers drawn within this fraction of the window half-size
    double zero_level = 1e-6;  // energies above -zero_level are reported as level 0
};

struct GroundStateResult {
    Field u;
    double energy = 0.0;
    double level = 0.0;      // min(energy, 0) with the zero_level convention
    double lambda = 0.0;     // least-squares Lagrange multiplier
    double mass = 0.0;
    double el_residual = 0.0;
    double kirchhoff_residual = 0.0;
    double grad_norm = 0.0;  // max_i |r_i| / w_i
    double border_mass = 0.0;
    bool window_adequate = true;
    int iterations = 0;
    bool converged = false;
    double p = 0.0;
    double gn_quotient = 0.0;  // largest ||u||_p^p / (||u||^(p-2) ||u'||^2) over accepted iterates
    std::vector<double> start_energies;
};

// Full nodal gradient of the discrete energy (border nodes included).
std::vector<double> energy_gradient(const Field& u, double p);

// Discrete Gagliardo-Nirenberg quotient ||u||_p^p / (||u||_2^(p-2) ||u'||_2^2) with the solver's norms.
double gn_quotient(const Field& u, double p);

GroundStateResult solve_ground_state(const DefectedGrid& g, double p, double mu, const SolverConfig& cfg = {});
// Continues from a given field (renormalized to mass mu) on its own mesh.
GroundStateResult solve_from(const Field& init, double p, double mu, const SolverConfig& cfg = {});

struct EdgeEnergyProfile {
    std::map<EdgeId, double> energy;
    std::pair<double, double> peak{0.0, 0.0};
    double radius = 0.0;  // every edge whose midpoint lies farther than this from the peak has positive energy
    int n_nonpositive = 0;
};

EdgeEnergyProfile edge_energy_profile(const Field& u, double p);

struct CriticalMassConfig {
    SolverConfig solver{.mesh_m = 16};
    double mu_start = 1.0;
    double rel_tol = 2e-3;
    int max_bracket = 30;
    double threshold = -1e-6;
};

struct CriticalMassResult {
    double mu_star_bisect = 0.0;  // largest tested mass whose level stayed above the threshold
    double mu_hi = 0.0;           // smallest tested mass with level below the threshold
    double mu_star_gn = 0.0;
    double k_hat = 0.0;
    std::vector<std::pair<double, double>> samples;  // (mu, energy)
};

CriticalMassResult estimate_critical_mass(const DefectedGrid& g, double p, const CriticalMassConfig& cfg = {});

struct LambdaIdentity {
    double lambda_multiplier = 0.0;
    double lambda_norms = 0.0;   // (||u||_p^p - ||u'||^2) / mu
    double lambda_energy = 0.0;  // -2E/mu + (1 - 2/p) ||u||_p^p / mu
    double gap = 0.0;
};

LambdaIdentity lambda_identity_check(const GroundStateResult& res, double p, double mu);

}  // namespace gridwave

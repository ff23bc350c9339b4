#include "doctest.h"

#include <cmath>
#include <random>

#include "gridwave/defect_zoo.hpp"
#include "gridwave/nls.hpp"

using namespace gridwave;

namespace {

Field random_field(const std::shared_ptr<const Mesh>& mesh, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Field u(mesh);
    for (auto& x : u.values()) x = U(rng);
    return u;
}

SolverConfig small_cfg(int m) {
    SolverConfig cfg;
    cfg.mesh_m = m;
    cfg.threads = 4;
    return cfg;
}

}  // namespace

TEST_CASE("energy gradient matches central differences") {
    std::vector<EdgeId> removed = {Hedge(0, 0), Vedge(1, -1)};
    auto mesh = std::make_shared<const Mesh>(compact_defects_grid(removed, Window::square(2)), 3);
    for (double p : {2.5, 3.0, 4.5}) {
        Field u = random_field(mesh, 7);
        auto g = energy_gradient(u, p);
        const double d = 1e-6;
        for (int i = 0; i < mesh->num_nodes(); i += 3) {
            Field a = u, b = u;
            a[i] += d;
            b[i] -= d;
            double fd = (energy(a, p) - energy(b, p)) / (2.0 * d);
            CHECK(std::abs(fd - g[static_cast<std::size_t>(i)]) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("zero field and argument validation") {
    auto mesh = std::make_shared<const Mesh>(DefectedGrid(Window::square(2), {}), 2);
    Field z(mesh);
    CHECK(energy(z, 3.0) == 0.0);
    DefectedGrid q(Window::square(3), {});
    CHECK_THROWS_AS(solve_ground_state(q, 2.0, 1.0), ValidationError);
    CHECK_THROWS_AS(solve_ground_state(q, 6.0, 1.0), ValidationError);
    CHECK_THROWS_AS(solve_ground_state(q, 3.0, 0.0), ValidationError);
    CHECK_THROWS_AS(solve_from(z, 3.0, 1.0), ValidationError);
    CriticalMassConfig cm;
    CHECK_THROWS_AS(estimate_critical_mass(q, 3.0, cm), ValidationError);
    SolverConfig bad;
    bad.n_starts = 0;
    CHECK_THROWS_AS(solve_ground_state(q, 3.0, 1.0, bad), ValidationError);
}

TEST_CASE("GN quotient is invariant under amplitude scaling") {
    auto mesh = std::make_shared<const Mesh>(DefectedGrid(Window::square(3), {}), 4);
    Field u = Field::sample(mesh, [](double x, double y) { return std::exp(-(x * x + y * y) / 3.0); });
    for (double p : {3.0, 5.0}) {
        double q0 = gn_quotient(u, p);
        CHECK(q0 > 0.0);
        CHECK(gn_quotient(u.scaled(3.7), p) == doctest::Approx(q0).epsilon(1e-12));
    }
}

TEST_CASE("ground state on the square grid satisfies the stationarity checks") {
    const double p = 3.0, mu = 4.0;
    auto r = solve_ground_state(DefectedGrid(Window::square(6), {}), p, mu, small_cfg(4));
    CHECK(r.converged);
    CHECK(r.mass == doctest::Approx(mu).epsilon(1e-10));
    CHECK(r.energy < 0.0);
    CHECK(r.level == r.energy);
    CHECK(r.lambda > 0.0);
    CHECK(r.kirchhoff_residual < 1e-8);
    CHECK(r.el_residual < 1e-6);
    CHECK(r.start_energies.size() == 5);
    for (double e : r.start_energies) CHECK(e >= r.energy - 1e-12);
    auto li = lambda_identity_check(r, p, mu);
    CHECK(li.gap < 1e-8);
    CHECK(energy(r.u, p) == doctest::Approx(r.energy).epsilon(1e-12));

    auto prof = edge_energy_profile(r.u, p);
    double total = 0.0;
    for (const auto& [e, v] : prof.energy) total += v;
    CHECK(total == doctest::Approx(r.energy).epsilon(1e-10));
    CHECK(prof.n_nonpositive > 0);
    CHECK(std::abs(prof.peak.first) <= 1.0);
    CHECK(std::abs(prof.peak.second) <= 1.0);
    CHECK(prof.radius < 6.0);
}

TEST_CASE("solve_from keeps a converged state") {
    const double p = 3.0;
    auto r = solve_ground_state(DefectedGrid(Window::square(5), {}), p, 4.0, small_cfg(4));
    auto c = solve_from(r.u, p, 4.0, small_cfg(4));
    CHECK(c.converged);
    CHECK(c.iterations <= 2);
    CHECK(c.energy == doctest::Approx(r.energy).epsilon(1e-10));
}

// A grid whose edges all have length two is a rescaled copy of the square grid:
// u_2(x) = 2^a u(x/2) with a = -2/(p-2) maps mass mu to 2^((p-6)/(p-2)) mu and
// multiplies the energy by 2^(-(p+2)/(p-2)).
TEST_CASE("length-two grid matches the rescaled square grid") {
    const double p = 3.0, mu = 4.0;
    auto q = solve_ground_state(DefectedGrid(Window::square(5), {}), p, mu, small_cfg(4));
    double mu2 = std::pow(2.0, (p - 6.0) / (p - 2.0)) * mu;
    auto g = solve_ground_state(length_two_grid(Window::square(10)), p, mu2, small_cfg(2));
    REQUIRE(q.converged);
    REQUIRE(g.converged);
    CHECK(g.energy == doctest::Approx(std::pow(2.0, -(p + 2.0) / (p - 2.0)) * q.energy).epsilon(1e-8));
    CHECK(g.lambda == doctest::Approx(0.25 * q.lambda).epsilon(1e-6));
}

TEST_CASE("critical mass bracket is consistent") {
    CriticalMassConfig cm;
    cm.solver = small_cfg(4);
    auto r = estimate_critical_mass(DefectedGrid(Window::square(6), {}), 5.0, cm);
    CHECK(r.mu_star_bisect > 0.0);
    CHECK(r.mu_hi / r.mu_star_bisect - 1.0 <= cm.rel_tol + 1e-12);
    CHECK(r.mu_star_bisect <= r.mu_star_gn * (1.0 + 1e-9));
    bool hi_negative = false;
    for (const auto& [mu, e] : r.samples) {
        if (mu == r.mu_star_bisect) CHECK(e >= cm.threshold);
        if (mu == r.mu_hi && e < cm.threshold) hi_negative = true;
    }
    CHECK(hi_negative);
}

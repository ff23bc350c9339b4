#include "doctest.h"

#include <cmath>

#include "gridwave/defect_zoo.hpp"
#include "gridwave/field.hpp"

using namespace gridwave;

namespace {

// Simpson on a fine uniform subdivision, independent of the exact segment formulas.
double simpson(const std::function<double(double)>& f, int n = 2000) {
    double h = 1.0 / n, s = f(0.0) + f(1.0);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("mesh node layout") {
    DefectedGrid g(Window::square(2), {});
    Mesh M(g, 4);
    CHECK(M.num_vertex_nodes() == 25);
    CHECK(M.num_edges() == 40);
    CHECK(M.num_nodes() == 25 + 40 * 3);
    for (int e = 0; e < M.num_edges(); ++e) {
        const auto& ed = M.edges()[static_cast<std::size_t>(e)];
        CHECK(M.node(e, 0) == M.vertex_node(ed.lo()));
        CHECK(M.node(e, 4) == M.vertex_node(ed.hi()));
        auto [x, y] = M.position(e, 2);
        CHECK(x == doctest::Approx(ed.o == Orient::H ? ed.i + 0.5 : ed.i));
        CHECK(y == doctest::Approx(ed.o == Orient::V ? ed.j + 0.5 : ed.j));
    }
    double total = 0.0;
    for (double w : M.weights()) total += w;
    CHECK(total == doctest::Approx(40.0));
    CHECK(M.is_border_node(M.vertex_node({2, 0})));
    CHECK_FALSE(M.is_border_node(M.vertex_node({0, 0})));
}

TEST_CASE("exact integrals match quadrature of the interpolant") {
    DefectedGrid g(Window::square(2), {Hedge(0, 0)});
    auto mesh = std::make_shared<const Mesh>(g, 8);
    auto f = [](double x, double y) { return std::cos(0.7 * x) * std::exp(-0.2 * y * y) + 0.3; };
    Field u = Field::sample(mesh, f);
    double l2 = 0.0, l1d = 0.0, l2d = 0.0, l3 = 0.0;
    for (int e = 0; e < mesh->num_edges(); ++e) {
        auto vals = u.edge_samples(e);
        for (int k = 0; k < mesh->m(); ++k) {
            double a = vals[static_cast<std::size_t>(k)], b = vals[static_cast<std::size_t>(k + 1)];
            double h = mesh->h();
            l2 += h * simpson([&](double t) { return std::pow(a + (b - a) * t, 2); });
            l3 += h * simpson([&](double t) { return std::pow(std::abs(a + (b - a) * t), 3.5); });
            l1d += std::abs(b - a);
            l2d += (b - a) * (b - a) / h;
        }
    }
    CHECK(u.l2_sq() == doctest::Approx(l2).epsilon(1e-12));
    CHECK(u.deriv_l1() == doctest::Approx(l1d).epsilon(1e-12));
    CHECK(u.deriv_l2_sq() == doctest::Approx(l2d).epsilon(1e-12));
    CHECK(u.lp_pow(3.5) == doctest::Approx(l3).epsilon(1e-9));
    CHECK(energy(u, 3.5) == doctest::Approx(0.5 * l2d - u.lumped_lp_pow(3.5) / 3.5));
    CHECK_THROWS_AS(energy(u, 2.0), ValidationError);
}

TEST_CASE("refinement reproduces piecewise-linear fields") {
    DefectedGrid g(Window::square(3), {Vedge(1, 1)});
    auto mesh = std::make_shared<const Mesh>(g, 3);
    Field u = Field::sample(mesh, [](double x, double y) { return 2.0 * x - y + 1.0; });
    Field v = refine(u, 12);
    Field w = Field::sample(v.mesh_ptr(), [](double x, double y) { return 2.0 * x - y + 1.0; });
    for (int n = 0; n < v.mesh().num_nodes(); ++n) CHECK(v[n] == doctest::Approx(w[n]).epsilon(1e-12));
    CHECK(v.l2_sq() == doctest::Approx(u.l2_sq()).epsilon(1e-12));
}

TEST_CASE("lumped mass of a constant is the total length") {
    DefectedGrid g(Window::square(3), {Vedge(0, 0), Hedge(0, 0)});
    auto mesh = std::make_shared<const Mesh>(g, 5);
    Field u = Field::sample(mesh, [](double, double) { return 1.0; });
    CHECK(mass(u) == doctest::Approx(g.surviving_edges().size()));
    CHECK(u.l2_sq() == doctest::Approx(g.surviving_edges().size()));
    CHECK(u.scaled(2.0).lumped_l2_sq() == doctest::Approx(4.0 * mass(u)));
}

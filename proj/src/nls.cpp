#include "gridwave/nls.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <thread>

namespace gridwave {

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct Discrete {
    const Mesh& M;
    double p;
    std::vector<char> free;
    Vec w;
    SpMat K;  // Dirichlet-reduced stiffness (identity rows at border nodes)

    Discrete(const Mesh& mesh, double p_) : M(mesh), p(p_) {
        const int n = M.num_nodes();
        free.assign(static_cast<std::size_t>(n), 1);
        for (int v = 0; v < M.num_vertex_nodes(); ++v)
            if (M.is_border_node(v)) free[static_cast<std::size_t>(v)] = 0;
        w = Eigen::Map<const Vec>(M.weights().data(), n);
        std::vector<Eigen::Triplet<double>> t;
        const double ih = 1.0 / M.h();
        for (int e = 0; e < M.num_edges(); ++e)
            for (int k = 0; k < M.m(); ++k) {
                int a = M.node(e, k), b = M.node(e, k + 1);
                bool fa = free[static_cast<std::size_t>(a)], fb = free[static_cast<std::size_t>(b)];
                if (fa) t.emplace_back(a, a, ih);
                if (fb) t.emplace_back(b, b, ih);
                if (fa && fb) {
                    t.emplace_back(a, b, -ih);
                    t.emplace_back(b, a, -ih);
                }
            }
        for (int i = 0; i < n; ++i)
            if (!free[static_cast<std::size_t>(i)]) t.emplace_back(i, i, 1.0);
        K.resize(n, n);
        K.setFromTriplets(t.begin(), t.end());
    }

    double dirichlet(const Vec& u) const {
        double s = 0.0;
        const double ih = 1.0 / M.h();
        for (int e = 0; e < M.num_edges(); ++e)
            for (int k = 0; k < M.m(); ++k) {
                double d = u[M.node(e, k + 1)] - u[M.node(e, k)];
                s += d * d * ih;
            }
        return s;
    }
    double lp(const Vec& u) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (u[i] != 0.0) s += w[i] * std::pow(std::abs(u[i]), p);
        return s;
    }
    double mass(const Vec& u) const { return u.dot(w.cwiseProduct(u)); }
    double energy(const Vec& u) const { return 0.5 * dirichlet(u) - lp(u) / p; }

    Vec gradient(const Vec& u) const {
        Vec g = K * u;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            if (!free[static_cast<std::size_t>(i)]) {
                g[i] = 0.0;
                continue;
            }
            if (u[i] != 0.0) g[i] -= w[i] * std::pow(std::abs(u[i]), p - 2.0) * u[i];
        }
        return g;
    }
};

Vec to_vec(const Field& u) { return Eigen::Map<const Vec>(u.values().data(), static_cast<Eigen::Index>(u.values().size())); }

Field to_field(const std::shared_ptr<const Mesh>& mesh, const Vec& v) {
    return Field(mesh, std::vector<double>(v.data(), v.data() + v.size()));
}

double quotient(double D, double N, double mass, double p) {
    if (D <= 0.0 || mass <= 0.0) return 0.0;
    return N / (std::pow(mass, (p - 2.0) / 2.0) * D);
}

struct RunOutput {
    Vec u;
    int iterations = 0;
    bool converged = false;
    double gn = 0.0;
};

// Newton step for the constrained system K u - W f(u) + lam W u = 0, (W u)^T du = 0.
bool newton_direction(const Discrete& d, const Vec& u, const Vec& r, const Vec& Wu, double lam, Vec& du) {
    const Eigen::Index n = u.size();
    SpMat J = d.K;
    for (Eigen::Index i = 0; i < n; ++i)
        if (d.free[static_cast<std::size_t>(i)]) {
            double fp = u[i] != 0.0 ? (d.p - 1.0) * std::pow(std::abs(u[i]), d.p - 2.0) : 0.0;
            J.coeffRef(i, i) += d.w[i] * (lam - fp);
        }
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(J);
    lu.factorize(J);
    if (lu.info() != Eigen::Success) return false;
    Vec x = lu.solve(r), y = lu.solve(Wu);
    double den = Wu.dot(y);
    if (!std::isfinite(den) || std::abs(den) < 1e-300) return false;
    double dl = -Wu.dot(x) / den;
    du = -x - dl * y;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!d.free[static_cast<std::size_t>(i)]) du[i] = 0.0;
    return du.allFinite();
}

RunOutput descend(const Discrete& d, Vec u, double mu, const SolverConfig& cfg) {
    const Eigen::Index n = u.size();
    for (Eigen::Index i = 0; i < n; ++i)
        if (!d.free[static_cast<std::size_t>(i)]) u[i] = 0.0;
    double m0 = d.mass(u);
    if (!(m0 > 0.0)) throw ValidationError("initial field vanishes on the free nodes");
    u *= std::sqrt(mu / m0);

    RunOutput out;
    SpMat P;
    Eigen::SimplicialLDLT<SpMat> solver;
    double sigma = std::numeric_limits<double>::quiet_NaN();
    auto factor = [&](double s) {
        sigma = s;
        P = d.K;
        for (Eigen::Index i = 0; i < n; ++i)
            if (d.free[static_cast<std::size_t>(i)]) P.coeffRef(i, i) += s * d.w[i];
        solver.compute(P);
        if (solver.info() != Eigen::Success) throw std::runtime_error("preconditioner factorization failed");
    };

    double E = d.energy(u);
    double t = 1.0;
    int refactors = 0;
    int next_newton = 0, newton_backoff = 1;
    Vec Wu(n);
    for (int it = 0; it < cfg.max_iters; ++it) {
        out.iterations = it;
        Vec g = d.gradient(u);
        Wu = d.w.cwiseProduct(u);
        for (Eigen::Index i = 0; i < n; ++i)
            if (!d.free[static_cast<std::size_t>(i)]) Wu[i] = 0.0;
        double lam = -u.dot(g) / mu;
        double res = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (d.free[static_cast<std::size_t>(i)]) res = std::max(res, std::abs(g[i] + lam * Wu[i]) / d.w[i]);
        double Dq = d.dirichlet(u);
        out.gn = std::max(out.gn, quotient(Dq, d.lp(u), mu, d.p));
        if (res < cfg.tol_grad) {
            out.converged = true;
            break;
        }
        if (res < cfg.newton_switch && it >= next_newton) {
            Vec r = g + lam * Wu, du;
            bool took = false;
            if (newton_direction(d, u, r, Wu, lam, du)) {
                for (double step : {1.0, 0.5, 0.25, 0.125}) {
                    Vec trial = u + step * du;
                    trial *= std::sqrt(mu / d.mass(trial));
                    double Et = d.energy(trial);
                    if (Et > E + 1e-12 * (1.0 + std::abs(E))) continue;
                    Vec gt = d.gradient(trial);
                    double lt = -trial.dot(gt) / mu, rt = 0.0;
                    for (Eigen::Index i = 0; i < n; ++i)
                        if (d.free[static_cast<std::size_t>(i)])
                            rt = std::max(rt, std::abs(gt[i] + lt * d.w[i] * trial[i]) / d.w[i]);
                    if (rt < res || Et < E - 1e-10 * std::abs(E)) {
                        u = std::move(trial);
                        E = Et;
                        took = true;
                        break;
                    }
                }
            }
            if (took) {
                newton_backoff = 1;
                continue;
            }
            // A rejected Newton step usually means a soft mode far from the minimizer; retry later.
            next_newton = it + newton_backoff;
            newton_backoff = std::min(2 * newton_backoff, 64);
        }
        double target = std::max(lam, 0.0);
        if (std::isnan(sigma) || (refactors < 40 && std::abs(target - sigma) > 0.25 * std::max(sigma, 1e-2))) {
            factor(target);
            ++refactors;
        }
        Vec a = solver.solve(g), b = solver.solve(Wu);
        double beta = Wu.dot(a) / Wu.dot(b);
        Vec dir = -(a - beta * b);
        for (Eigen::Index i = 0; i < n; ++i)
            if (!d.free[static_cast<std::size_t>(i)]) dir[i] = 0.0;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) break;
        t = std::min(1.0, 2.0 * t);
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            Vec trial = u + t * dir;
            trial *= std::sqrt(mu / d.mass(trial));
            double Et = d.energy(trial);
            // Below round-off the Armijo test is meaningless; full steps are safe in that regime.
            bool tiny = std::abs(t * slope) < 1e-13 * (1.0 + std::abs(E));
            if (Et <= E + 1e-4 * t * slope || (tiny && t == 1.0)) {
                u = std::move(trial);
                E = Et;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
    }
    out.u = std::move(u);
    return out;
}

Vec initial_bump(const Mesh& M, const SolverConfig& cfg, int start) {
    const Window& w = M.grid().window();
    double cx0 = 0.5 * (w.xmin + w.xmax), cy0 = 0.5 * (w.ymin + w.ymax);
    double hx = 0.5 * (w.xmax - w.xmin), hy = 0.5 * (w.ymax - w.ymin);
    std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(start));
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double cx = cx0, cy = cy0, width = cfg.bump_width;
    if (start > 0) {
        cx += cfg.bump_spread * hx * U(rng);
        cy += cfg.bump_spread * hy * U(rng);
        width *= 1.0 + 0.4 * U(rng);
    }
    Vec u(M.num_nodes());
    for (int e = 0; e < M.num_edges(); ++e)
        for (int k = 0; k <= M.m(); ++k) {
            auto [x, y] = M.position(e, k);
            double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            u[M.node(e, k)] = std::exp(-r2 / (2.0 * width * width));
        }
    return u;
}

GroundStateResult finish(const Discrete& d, const std::shared_ptr<const Mesh>& mesh, RunOutput run, double mu,
                         const SolverConfig& cfg) {
    GroundStateResult r;
    Vec u = std::move(run.u);
    if (u.sum() < 0.0) u = -u;
    const Mesh& M = *mesh;
    Vec g = d.gradient(u);
    Vec Wu = d.w.cwiseProduct(u);
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (d.free[static_cast<std::size_t>(i)]) {
            num += g[i] * Wu[i];
            den += Wu[i] * Wu[i];
        }
    r.lambda = den > 0.0 ? -num / den : 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!d.free[static_cast<std::size_t>(i)]) continue;
        double ri = g[i] + r.lambda * Wu[i];
        r.grad_norm = std::max(r.grad_norm, std::abs(ri) / d.w[i]);
        if (i < M.num_vertex_nodes()) r.kirchhoff_residual = std::max(r.kirchhoff_residual, std::abs(ri));
        else r.el_residual = std::max(r.el_residual, std::abs(ri) / M.h());
    }
    for (int e = 0; e < M.num_edges(); ++e) {
        const EdgeId& ed = M.edges()[static_cast<std::size_t>(e)];
        if (!(M.grid().window().on_border(ed.lo()) || M.grid().window().on_border(ed.hi()))) continue;
        for (int k = 0; k <= M.m(); ++k) {
            int nd = M.node(e, k);
            r.border_mass += d.w[nd] * u[nd] * u[nd];
        }
    }
    r.window_adequate = r.border_mass < 1e-8;
    r.energy = d.energy(u);
    r.level = r.energy > -cfg.zero_level ? 0.0 : r.energy;
    r.mass = d.mass(u);
    r.iterations = run.iterations;
    r.converged = run.converged;
    r.p = d.p;
    r.gn_quotient = run.gn;
    r.u = to_field(mesh, u);
    (void)mu;
    return r;
}

void check_problem(double p, double mu) {
    if (!(p > 2.0 && p < 6.0)) throw ValidationError("p must lie in (2, 6)");
    if (!(mu > 0.0)) throw ValidationError("mass mu must be positive");
}

}  // namespace

std::vector<double> energy_gradient(const Field& u, double p) {
    const Mesh& M = u.mesh();
    std::vector<double> g(static_cast<std::size_t>(M.num_nodes()), 0.0);
    const double ih = 1.0 / M.h();
    for (int e = 0; e < M.num_edges(); ++e)
        for (int k = 0; k < M.m(); ++k) {
            int a = M.node(e, k), b = M.node(e, k + 1);
            double d = (u[b] - u[a]) * ih;
            g[static_cast<std::size_t>(a)] -= d;
            g[static_cast<std::size_t>(b)] += d;
        }
    const auto& w = M.weights();
    for (std::size_t i = 0; i < g.size(); ++i) {
        double x = u.values()[i];
        if (x != 0.0) g[i] -= w[i] * std::pow(std::abs(x), p - 2.0) * x;
    }
    return g;
}

double gn_quotient(const Field& u, double p) { return quotient(u.deriv_l2_sq(), u.lumped_lp_pow(p), mass(u), p); }

GroundStateResult solve_from(const Field& init, double p, double mu, const SolverConfig& cfg) {
    check_problem(p, mu);
    Discrete d(init.mesh(), p);
    auto run = descend(d, to_vec(init), mu, cfg);
    auto r = finish(d, init.mesh_ptr(), std::move(run), mu, cfg);
    r.start_energies = {r.energy};
    return r;
}

GroundStateResult solve_ground_state(const DefectedGrid& g, double p, double mu, const SolverConfig& cfg) {
    check_problem(p, mu);
    if (cfg.n_starts < 1) throw ValidationError("n_starts must be >= 1");
    auto mesh = std::make_shared<const Mesh>(g, cfg.mesh_m);
    Discrete d(*mesh, p);
    std::vector<GroundStateResult> results(static_cast<std::size_t>(cfg.n_starts));
    const int nt = std::max(1, std::min(cfg.threads, cfg.n_starts));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int s = t; s < cfg.n_starts; s += nt) {
                    auto run = descend(d, initial_bump(*mesh, cfg, s), mu, cfg);
                    results[static_cast<std::size_t>(s)] = finish(d, mesh, std::move(run), mu, cfg);
                }
            } catch (...) {
                errs[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    std::size_t best = 0;
    auto better = [](const GroundStateResult& a, const GroundStateResult& b) {
        if (a.converged != b.converged) return a.converged;
        return a.energy < b.energy;
    };
    double gn = 0.0;
    std::vector<double> energies;
    for (std::size_t k = 0; k < results.size(); ++k) {
        if (better(results[k], results[best])) best = k;
        gn = std::max(gn, results[k].gn_quotient);
        energies.push_back(results[k].energy);
    }
    GroundStateResult r = std::move(results[best]);
    r.gn_quotient = gn;
    r.start_energies = std::move(energies);
    return r;
}

EdgeEnergyProfile edge_energy_profile(const Field& u, double p) {
    if (!(p > 2.0)) throw ValidationError("p must exceed 2");
    const Mesh& M = u.mesh();
    EdgeEnergyProfile prof;
    double umax = -1.0;
    for (int e = 0; e < M.num_edges(); ++e)
        for (int k = 0; k <= M.m(); ++k)
            if (std::abs(u[M.node(e, k)]) > umax) {
                umax = std::abs(u[M.node(e, k)]);
                prof.peak = M.position(e, k);
            }
    const double h = M.h();
    for (int e = 0; e < M.num_edges(); ++e) {
        double D = 0.0, N = 0.0;
        for (int k = 0; k < M.m(); ++k) {
            double a = u[M.node(e, k)], b = u[M.node(e, k + 1)];
            D += (b - a) * (b - a) / h;
            N += 0.5 * h * (std::pow(std::abs(a), p) + std::pow(std::abs(b), p));
        }
        const EdgeId& ed = M.edges()[static_cast<std::size_t>(e)];
        double E = 0.5 * D - N / p;
        prof.energy[ed] = E;
        if (E <= 0.0) {
            ++prof.n_nonpositive;
            auto [x, y] = M.position(e, 0);
            double mx = ed.o == Orient::H ? x + 0.5 : x, my = ed.o == Orient::V ? y + 0.5 : y;
            prof.radius = std::max(prof.radius, std::hypot(mx - prof.peak.first, my - prof.peak.second));
        }
    }
    return prof;
}

CriticalMassResult estimate_critical_mass(const DefectedGrid& g, double p, const CriticalMassConfig& cfg) {
    if (!(p >= 4.0 && p < 6.0)) throw ValidationError("critical mass requires 4 <= p < 6");
    if (!(cfg.mu_start > 0.0)) throw ValidationError("mu_start must be positive");
    CriticalMassResult out;
    // The concentrated branch is followed by warm starts from the latest negative-energy state.
    std::optional<Field> warm;
    auto below = [&](double mu) {
        auto r = solve_ground_state(g, p, mu, cfg.solver);
        out.k_hat = std::max(out.k_hat, r.gn_quotient);
        if (warm) {
            auto c = solve_from(*warm, p, mu, cfg.solver);
            out.k_hat = std::max(out.k_hat, c.gn_quotient);
            if (c.energy < r.energy) r = std::move(c);
        }
        out.samples.emplace_back(mu, r.energy);
        bool neg = r.energy < cfg.threshold;
        if (neg) warm = r.u;
        return neg;
    };
    double lo = 0.0, hi = 0.0;
    double mu = cfg.mu_start;
    for (int k = 0; k < cfg.max_bracket && hi == 0.0; ++k, mu *= 2.0)
        if (below(mu)) hi = mu;
    if (hi == 0.0) throw std::runtime_error("no negative level found while bracketing the critical mass");
    mu = hi;
    for (int k = 0; k < cfg.max_bracket; ++k) {
        mu *= 0.5;
        if (!below(mu)) {
            lo = mu;
            break;
        }
        hi = mu;
    }
    if (lo == 0.0) throw std::runtime_error("critical mass not bracketed from below");
    while (hi / lo - 1.0 > cfg.rel_tol) {
        double mid = std::sqrt(lo * hi);
        if (below(mid)) hi = mid;
        else lo = mid;
    }
    out.mu_star_bisect = lo;
    out.mu_hi = hi;
    out.mu_star_gn = out.k_hat > 0.0 ? std::pow(p / (2.0 * out.k_hat), 2.0 / (p - 2.0)) : INFINITY;
    return out;
}

LambdaIdentity lambda_identity_check(const GroundStateResult& res, double p, double mu) {
    LambdaIdentity li;
    double D = res.u.deriv_l2_sq(), N = res.u.lumped_lp_pow(p);
    double E = 0.5 * D - N / p;
    li.lambda_multiplier = res.lambda;
    li.lambda_norms = (N - D) / mu;
    li.lambda_energy = -2.0 * E / mu + (1.0 - 2.0 / p) * N / mu;
    li.gap = std::max({std::abs(li.lambda_multiplier - li.lambda_norms), std::abs(li.lambda_multiplier - li.lambda_energy),
                       std::abs(li.lambda_norms - li.lambda_energy)});
    return li;
}

}  // namespace gridwave

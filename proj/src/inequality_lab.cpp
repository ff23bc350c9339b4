#include "gridwave/inequality_lab.hpp"

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "gridwave/isoperimetry.hpp"
#include "gridwave/nls.hpp"

namespace gridwave {

namespace {

const std::vector<std::pair<std::string, Inequality>>& inequality_names() {
    static const std::vector<std::pair<std::string, Inequality>> names = {
        {"s1d", Inequality::S1d}, {"s2d", Inequality::S2d}, {"gn1d", Inequality::Gn1d},
        {"gn2d", Inequality::Gn2d}, {"gn_int", Inequality::GnInt}};
    return names;
}

const std::vector<std::pair<std::string, FamilyKind>>& family_names() {
    static const std::vector<std::pair<std::string, FamilyKind>> names = {{"tents", FamilyKind::Tents},
                                                                          {"exponentials", FamilyKind::Exponentials},
                                                                          {"solver_states", FamilyKind::SolverStates},
                                                                          {"random_bumps", FamilyKind::RandomBumps}};
    return names;
}

template <class T>
T lookup(const std::vector<std::pair<std::string, T>>& names, const std::string& key, const char* what) {
    for (const auto& [n, v] : names)
        if (n == key) return v;
    std::string msg = std::string("unknown ") + what + " '" + key + "'; expected one of:";
    for (const auto& [n, v] : names) msg += " " + n;
    throw ValidationError(msg);
}

template <class T>
std::string name_of(const std::vector<std::pair<std::string, T>>& names, T value) {
    for (const auto& [n, v] : names)
        if (v == value) return n;
    return "?";
}

std::mt19937_64 member_rng(std::uint64_t seed, int k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    return std::mt19937_64(seq);
}

// int over [i, i+1] of exp(-c |x|)
double exp_segment(double c, int i) {
    int a = std::min(std::abs(i), std::abs(i + 1));
    return std::exp(-c * a) * (-std::expm1(-c)) / c;
}

double exp_edge_sum(const DefectedGrid& g, double c) {
    double s = 0.0;
    for (const auto& e : g.surviving_edges()) {
        if (e.o == Orient::H) s += std::exp(-c * std::abs(e.j)) * exp_segment(c, e.i);
        else s += std::exp(-c * std::abs(e.i)) * exp_segment(c, e.j);
    }
    return s;
}

Field sample_exponential(const std::shared_ptr<const Mesh>& mesh, double eps, double kappa) {
    return Field::sample(mesh, [&](double x, double y) { return kappa * std::exp(-eps * (std::abs(x) + std::abs(y))); });
}

// Periodic edge sum: the pattern is constant on residue classes, so each class contributes a product of 1D sums.
double periodic_edge_sum(const DefectedGrid& g, std::pair<int, int> per, int r, double c) {
    const auto [px, py] = per;
    double s = 0.0;
    for (Orient o : {Orient::H, Orient::V}) {
        // Along-edge coordinate ranges over [-r, r-1], transverse over [-r, r].
        std::vector<double> along(static_cast<std::size_t>(o == Orient::H ? px : py), 0.0);
        std::vector<double> across(static_cast<std::size_t>(o == Orient::H ? py : px), 0.0);
        const int pa = static_cast<int>(along.size()), pc = static_cast<int>(across.size());
        auto mod = [](int a, int m) { return ((a % m) + m) % m; };
        for (int t = -r; t < r; ++t) along[static_cast<std::size_t>(mod(t, pa))] += exp_segment(c, t);
        for (int t = -r; t <= r; ++t) across[static_cast<std::size_t>(mod(t, pc))] += std::exp(-c * std::abs(t));
        for (int a = 0; a < pa; ++a)
            for (int b = 0; b < pc; ++b) {
                EdgeId e = o == Orient::H ? Hedge(a, b) : Vedge(b, a);
                if (g.surviving(e)) s += along[static_cast<std::size_t>(a)] * across[static_cast<std::size_t>(b)];
            }
    }
    return s;
}

struct BoundaryPaths {
    std::map<Vertex, std::vector<std::pair<Vertex, EdgeId>>> adj;
    std::map<Vertex, int> dist_lo, dist_hi;
    std::map<Vertex, Vertex> parent_lo, parent_hi;
    std::map<Vertex, EdgeId> via_lo, via_hi;
};

void bfs(const BoundaryPaths& b, Vertex src, std::map<Vertex, int>& dist, std::map<Vertex, Vertex>& parent,
         std::map<Vertex, EdgeId>& via) {
    std::deque<Vertex> q{src};
    dist[src] = 0;
    while (!q.empty()) {
        Vertex v = q.front();
        q.pop_front();
        auto it = b.adj.find(v);
        if (it == b.adj.end()) continue;
        for (const auto& [w, e] : it->second)
            if (!dist.count(w)) {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                via[w] = e;
                q.push_back(w);
            }
    }
}

}  // namespace

Inequality parse_inequality(const std::string& id) { return lookup(inequality_names(), id, "inequality"); }
std::string to_string(Inequality id) { return name_of(inequality_names(), id); }
FamilyKind parse_family(const std::string& name) { return lookup(family_names(), name, "family"); }
std::string to_string(FamilyKind f) { return name_of(family_names(), f); }

double inequality_ratio(Inequality id, const Field& u, double p) {
    const double d1 = u.deriv_l1();
    const double l2 = std::sqrt(u.l2_sq()), d2 = std::sqrt(u.deriv_l2_sq());
    auto safe = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    switch (id) {
        case Inequality::S1d: return safe(u.linf(), d1);
        case Inequality::S2d: return safe(l2, d1);
        case Inequality::Gn1d: return safe(u.lp_pow(p), std::pow(l2, 0.5 * p + 1.0) * std::pow(d2, 0.5 * p - 1.0));
        case Inequality::Gn2d: return safe(u.lp_pow(p), l2 * l2 * std::pow(d2, p - 2.0));
        case Inequality::GnInt: return safe(u.lp_pow(p), std::pow(l2, p - 2.0) * d2 * d2);
    }
    return 0.0;
}

RatioReport probe_inequality(Inequality id, const DefectedGrid& g, const FamilySpec& fam, std::uint64_t seed) {
    if (fam.count < 1) throw ValidationError("family is empty");
    if (!(fam.p >= 2.0)) throw ValidationError("exponent p must be at least 2");
    if (fam.mesh_m < 1) throw ValidationError("mesh_m must be positive");
    const int n = fam.count;
    std::vector<std::optional<Field>> members(static_cast<std::size_t>(n));
    std::vector<std::string> labels(static_cast<std::size_t>(n));
    std::shared_ptr<const Mesh> mesh;
    if (fam.kind != FamilyKind::Tents) mesh = std::make_shared<const Mesh>(g, fam.mesh_m);
    std::optional<Region> iso_region;
    if (fam.kind == FamilyKind::Tents && fam.include_iso_witness) {
        IsoConfig ic;
        ic.seed = seed;
        ic.threads = fam.threads;
        iso_region = search_violation(g, ic).witness;
    }
    const Window& w = g.window();

    auto build = [&](int k) {
        auto rng = member_rng(seed, k);
        auto& slot = members[static_cast<std::size_t>(k)];
        auto& label = labels[static_cast<std::size_t>(k)];
        switch (fam.kind) {
            case FamilyKind::Tents: {
                Region r;
                if (k == 0 && iso_region) {
                    r = *iso_region;
                    label = "tent over isoperimetric witness";
                } else {
                    int edges = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, fam.max_region_edges)));
                    r = random_connected_region(g, edges, rng);
                    label = "tent over random region #" + std::to_string(k);
                }
                try {
                    double eps = std::min(fam.tent_eps, 0.5 * tent_eps_bound(r, g));
                    slot = tent_function(r, g, eps).u;
                } catch (const ValidationError&) {
                    label += " (rejected)";
                }
                break;
            }
            case FamilyKind::Exponentials: {
                double eps = fam.eps_max * std::pow(0.7, k);
                slot = sample_exponential(mesh, eps, 1.0);
                label = "exponential eps=" + std::to_string(eps);
                break;
            }
            case FamilyKind::SolverStates: {
                double mu = n == 1 ? fam.mu_min : fam.mu_min * std::pow(fam.mu_max / fam.mu_min, double(k) / (n - 1));
                SolverConfig sc;
                sc.mesh_m = fam.mesh_m;
                sc.n_starts = 3;
                sc.seed = seed;
                double ps = fam.p > 2.0 && fam.p < 6.0 ? fam.p : 3.0;
                slot = solve_ground_state(g, ps, mu, sc).u;
                label = "ground state mu=" + std::to_string(mu);
                break;
            }
            case FamilyKind::RandomBumps: {
                std::uniform_real_distribution<double> X(w.xmin, w.xmax), Y(w.ymin, w.ymax), W(0.5, 3.0), A(0.2, 1.0);
                int nb = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, fam.max_bumps)));
                std::vector<std::array<double, 4>> bumps;
                for (int b = 0; b < nb; ++b) bumps.push_back({X(rng), Y(rng), W(rng), A(rng)});
                slot = Field::sample(mesh, [&](double x, double y) {
                    double s = 0.0;
                    for (const auto& [cx, cy, wd, am] : bumps)
                        s += am * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2.0 * wd * wd));
                    return s;
                });
                label = "bump superposition #" + std::to_string(k);
                break;
            }
        }
    };

    RatioReport rep;
    rep.id = id;
    rep.p = fam.p;
    rep.family = to_string(fam.kind);
    rep.window = w;
    rep.seed = seed;
    rep.ratios.assign(static_cast<std::size_t>(n), 0.0);
    const int nt = std::max(1, std::min(fam.threads, n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int k = t; k < n; k += nt) {
                    build(k);
                    auto& u = members[static_cast<std::size_t>(k)];
                    // Members vanish on the window border so that they extend by zero to the whole grid.
                    if (u)
                        for (int i = 0; i < u->mesh().num_vertex_nodes(); ++i)
                            if (u->mesh().is_border_node(i)) (*u)[i] = 0.0;
                    if (u) rep.ratios[static_cast<std::size_t>(k)] = inequality_ratio(id, *u, fam.p);
                }
            } catch (...) {
                errs[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    for (int k = 0; k < n; ++k)
        if (members[static_cast<std::size_t>(k)] && (rep.witness_index < 0 || rep.ratios[static_cast<std::size_t>(k)] > rep.best_ratio)) {
            rep.best_ratio = rep.ratios[static_cast<std::size_t>(k)];
            rep.witness_index = k;
        }
    if (rep.witness_index < 0) throw ValidationError("no admissible family member");
    rep.witness = std::move(*members[static_cast<std::size_t>(rep.witness_index)]);
    rep.witness_label = labels[static_cast<std::size_t>(rep.witness_index)];
    return rep;
}

ExtensionReport extend_field(const Field& u) {
    const Mesh& gm = u.mesh();
    const DefectedGrid& g = gm.grid();
    const int m = gm.m();
    auto defects = identify_defects(g);
    for (const auto& d : defects)
        if (d.truncated)
            throw ValidationError("extension needs bounded defects inside the window; the defect containing " +
                                  to_string(d.edges.front()) + " reaches the border");

    ExtensionReport rep;
    rep.n_defects = static_cast<int>(defects.size());
    auto qmesh = std::make_shared<const Mesh>(DefectedGrid(g.window(), {}), m);
    Field v(qmesh);
    for (int e = 0; e < qmesh->num_edges(); ++e) {
        int ge = gm.edge_pos(qmesh->edges()[static_cast<std::size_t>(e)]);
        if (ge < 0) continue;
        for (int k = 0; k <= m; ++k) v[qmesh->node(e, k)] = u[gm.node(ge, k)];
    }

    std::map<EdgeId, double> load;
    for (const auto& d : defects) {
        BoundaryPaths bp;
        for (const auto& e : d.boundary) {
            bp.adj[e.lo()].push_back({e.hi(), e});
            bp.adj[e.hi()].push_back({e.lo(), e});
        }
        const EdgeId anchor = *std::min_element(d.boundary.begin(), d.boundary.end());
        const int apos = gm.edge_pos(anchor);
        const double ut = u.at(apos, 0.5);
        bfs(bp, anchor.lo(), bp.dist_lo, bp.parent_lo, bp.via_lo);
        bfs(bp, anchor.hi(), bp.dist_hi, bp.parent_hi, bp.via_hi);

        struct Path {
            std::vector<std::pair<int, bool>> steps;  // edge position, traversed from lo to hi
            bool to_lo = true;
            double length = 0.0;
        };
        std::map<Vertex, Path> paths;
        double ck = 0.0;
        for (const auto& [vx, nb] : bp.adj) {
            int deg = g.degree(vx);
            if (deg > 3) continue;
            ck += 4 - deg;
            auto dl = bp.dist_lo.find(vx), dh = bp.dist_hi.find(vx);
            if (dl == bp.dist_lo.end() && dh == bp.dist_hi.end())
                throw std::runtime_error("defect boundary is disconnected at " + to_string(vx));
            bool to_lo = dh == bp.dist_hi.end() || (dl != bp.dist_lo.end() && dl->second <= dh->second);
            const auto& parent = to_lo ? bp.parent_lo : bp.parent_hi;
            const auto& via = to_lo ? bp.via_lo : bp.via_hi;
            Path p;
            p.to_lo = to_lo;
            Vertex cur = vx, target = to_lo ? anchor.lo() : anchor.hi();
            while (cur != target) {
                const EdgeId& e = via.at(cur);
                p.steps.push_back({gm.edge_pos(e), e.lo() == cur});
                cur = parent.at(cur);
            }
            p.length = static_cast<double>(p.steps.size()) + 0.5;
            paths[vx] = std::move(p);
        }
        for (const auto& e : d.boundary) load[e] += ck;

        auto along = [&](const Path& p, double s) {
            int idx = static_cast<int>(std::floor(s));
            if (idx < static_cast<int>(p.steps.size())) {
                auto [pos, fwd] = p.steps[static_cast<std::size_t>(idx)];
                double f = s - idx;
                return u.at(pos, fwd ? f : 1.0 - f);
            }
            double f = std::min(0.5, s - static_cast<double>(p.steps.size()));
            return u.at(apos, p.to_lo ? f : 1.0 - f);
        };
        auto uvert = [&](Vertex x) { return u[gm.vertex_node(x)]; };

        for (const auto& e : d.edges) {
            int qe = qmesh->edge_pos(e);
            const Path* plo = paths.count(e.lo()) ? &paths.at(e.lo()) : nullptr;
            const Path* phi = paths.count(e.hi()) ? &paths.at(e.hi()) : nullptr;
            for (int k = 0; k <= m; ++k) {
                double x = static_cast<double>(k) / m, val = ut;
                if (x < 0.5 && plo) val = along(*plo, 2.0 * plo->length * x);
                else if (x > 0.5 && phi) val = along(*phi, 2.0 * phi->length * (1.0 - x));
                v[qmesh->node(qe, k)] = val;
            }
            double left = plo ? along(*plo, plo->length) : ut, right = phi ? along(*phi, phi->length) : ut;
            rep.max_junction_gap = std::max(rep.max_junction_gap, std::abs(left - right));
            ++rep.n_junctions;
            if (plo) {
                rep.max_junction_gap = std::max(rep.max_junction_gap, std::abs(along(*plo, 0.0) - uvert(e.lo())));
                ++rep.n_junctions;
            }
            if (phi) {
                rep.max_junction_gap = std::max(rep.max_junction_gap, std::abs(along(*phi, 0.0) - uvert(e.hi())));
                ++rep.n_junctions;
            }
        }
    }
    for (const auto& [e, l] : load) rep.c_bound = std::max(rep.c_bound, 1.0 + l);
    // Vertex agreement between the copied grid values and the filled defect edges.
    for (int e = 0; e < qmesh->num_edges(); ++e)
        for (int k : {0, m}) {
            auto [x, y] = qmesh->position(e, k);
            int gv = gm.vertex_node({static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))});
            if (gv >= 0) rep.max_junction_gap = std::max(rep.max_junction_gap, std::abs(v[qmesh->node(e, k)] - u[gv]));
        }
    rep.u_l1 = u.deriv_l1();
    rep.v_l1 = v.deriv_l1();
    if (rep.u_l1 > 0.0) rep.ratio = rep.v_l1 / rep.u_l1;
    rep.u_l2_sq = u.l2_sq();
    rep.v_l2_sq = v.l2_sq();
    rep.v = std::move(v);
    return rep;
}

double exp_trial_kappa(double eps, double mu) {
    if (!(eps > 0.0 && mu > 0.0)) throw ValidationError("exp trial needs eps > 0 and mu > 0");
    return std::sqrt(0.5 * eps * mu * std::tanh(eps));
}

int exp_trial_radius(double eps) {
    if (!(eps > 0.0)) throw ValidationError("eps must be positive");
    return static_cast<int>(std::ceil(-std::log(1e-10) / eps)) + 1;
}

ExpTrial exp_trial_field(const DefectedGrid& g, double eps, double mu, int mesh_m) {
    ExpTrial t;
    t.eps = eps;
    t.mu = mu;
    t.kappa = exp_trial_kappa(eps, mu);
    t.window = g.window();
    const Window& w = t.window;
    int dmin = INT_MAX;
    for (int x = w.xmin; x <= w.xmax; ++x)
        for (int y : {w.ymin, w.ymax}) dmin = std::min(dmin, std::abs(x) + std::abs(y));
    for (int y = w.ymin; y <= w.ymax; ++y)
        for (int x : {w.xmin, w.xmax}) dmin = std::min(dmin, std::abs(x) + std::abs(y));
    t.border_ratio = std::exp(-eps * dmin);
    if (!(t.border_ratio < 1e-10))
        throw ValidationError("window too small for the exponential trial: border value ratio " +
                              std::to_string(t.border_ratio) + ", need radius >= " + std::to_string(exp_trial_radius(eps)));
    t.n_edges = static_cast<int>(g.surviving_edges().size());
    t.l2_sq = t.kappa * t.kappa * exp_edge_sum(g, 2.0 * eps);
    t.deriv_l2_sq = eps * eps * t.l2_sq;
    if (mesh_m > 0) t.field = sample_exponential(std::make_shared<const Mesh>(g, mesh_m), eps, t.kappa);
    return t;
}

double exp_trial_lp(const DefectedGrid& g, double eps, double kappa, double p) {
    if (!(p > 0.0)) throw ValidationError("p must be positive");
    return std::pow(kappa, p) * exp_edge_sum(g, p * eps);
}

std::optional<std::pair<int, int>> detect_periods(const DefectedGrid& g, int max_period) {
    const int span = 2 * max_period;
    auto periodic = [&](int dx, int dy) {
        for (Orient o : {Orient::H, Orient::V})
            for (int i = -span; i <= span; ++i)
                for (int j = -span; j <= span; ++j) {
                    EdgeId e{o, i, j}, s{o, i + dx, j + dy};
                    if (g.removed(e) != g.removed(s)) return false;
                }
        return true;
    };
    std::optional<int> px, py;
    for (int d = 1; d <= max_period && !px; ++d)
        if (periodic(d, 0)) px = d;
    for (int d = 1; d <= max_period && !py; ++d)
        if (periodic(0, d)) py = d;
    if (!px || !py) return std::nullopt;
    return std::make_pair(*px, *py);
}

Z2Probe z2_negativity_probe(const DefectedGrid& g, double p, double mu, double eps_min) {
    if (!(p > 2.0 && p < 4.0)) throw ValidationError("the negativity probe needs 2 < p < 4");
    if (!(mu > 0.0)) throw ValidationError("mass mu must be positive");
    if (!(eps_min > 0.0 && eps_min < 1.0)) throw ValidationError("eps_min must lie in (0, 1)");
    auto per = detect_periods(g);
    if (!per) throw ValidationError("grid is not periodic in both directions (periods up to 16 checked)");
    Z2Probe out;
    out.periods = *per;
    for (double eps = 1.0; eps >= eps_min; eps *= 0.7) {
        int r = exp_trial_radius(eps);
        double l2 = periodic_edge_sum(g, *per, r, 2.0 * eps);
        double lp = periodic_edge_sum(g, *per, r, p * eps);
        double s2 = mu / l2;
        double E = 0.5 * s2 * eps * eps * l2 - std::pow(s2, 0.5 * p) * lp / p;
        out.sweep.emplace_back(eps, E);
        if (E < 0.0) {
            out.found = true;
            out.eps_star = eps;
            out.energy = E;
            break;
        }
    }
    return out;
}

}  // namespace gridwave

#include "gridwave/isoperimetry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <thread>

namespace gridwave {

namespace {

struct SearchSpace {
    std::vector<EdgeId> edges;
    std::vector<std::array<int, 2>> ends;   // vertex slots
    std::vector<std::vector<int>> incident;  // per vertex slot: surviving window edges
    std::vector<int> deg_inf;                // surviving degree on the infinite grid

    explicit SearchSpace(const DefectedGrid& g) {
        edges = g.surviving_edges();
        std::vector<int> slot(static_cast<std::size_t>(g.num_vertices()), -1);
        auto slot_of = [&](const Vertex& v) {
            int& s = slot[static_cast<std::size_t>(g.vertex_index(v))];
            if (s < 0) {
                s = static_cast<int>(incident.size());
                incident.emplace_back();
                deg_inf.push_back(g.degree(v));
            }
            return s;
        };
        for (std::size_t k = 0; k < edges.size(); ++k) {
            int a = slot_of(edges[k].lo()), b = slot_of(edges[k].hi());
            ends.push_back({a, b});
            incident[static_cast<std::size_t>(a)].push_back(static_cast<int>(k));
            incident[static_cast<std::size_t>(b)].push_back(static_cast<int>(k));
        }
    }
};

Region region_of(const SearchSpace& s, const std::vector<int>& idx) {
    Region r;
    for (int k : idx) r.add(s.edges[static_cast<std::size_t>(k)]);
    return r;
}

struct Candidate {
    double ratio = -1.0;
    std::vector<int> edges;
};

Candidate exhaustive(const SearchSpace& s) {
    const int n = static_cast<int>(s.edges.size());
    std::vector<std::uint32_t> adj(static_cast<std::size_t>(n), 0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            auto ea = s.ends[static_cast<std::size_t>(a)], eb = s.ends[static_cast<std::size_t>(b)];
            if (ea[0] == eb[0] || ea[0] == eb[1] || ea[1] == eb[0] || ea[1] == eb[1]) adj[static_cast<std::size_t>(a)] |= (1u << b);
        }
    Candidate best;
    std::vector<int> cnt(s.incident.size(), 0);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::uint32_t seen = mask & (~mask + 1), frontier = seen;
        while (frontier) {
            std::uint32_t next = 0;
            for (std::uint32_t f = frontier; f; f &= f - 1) next |= adj[static_cast<std::size_t>(std::countr_zero(f))];
            next &= mask & ~seen;
            seen |= next;
            frontier = next;
        }
        if (seen != mask) continue;
        std::fill(cnt.begin(), cnt.end(), 0);
        for (std::uint32_t f = mask; f; f &= f - 1) {
            auto e = s.ends[static_cast<std::size_t>(std::countr_zero(f))];
            cnt[static_cast<std::size_t>(e[0])]++;
            cnt[static_cast<std::size_t>(e[1])]++;
        }
        int P = 0;
        for (std::size_t v = 0; v < cnt.size(); ++v)
            if (cnt[v] > 0) P += s.deg_inf[v] - cnt[v];
        double A = std::popcount(mask);
        double ratio = P > 0 ? std::sqrt(A) / P : INFINITY;
        if (ratio > best.ratio) {
            best.ratio = ratio;
            best.edges.clear();
            for (std::uint32_t f = mask; f; f &= f - 1) best.edges.push_back(std::countr_zero(f));
        }
    }
    return best;
}

class Annealer {
public:
    Annealer(const SearchSpace& s, std::uint64_t seed) : s_(s), rng_(seed) {
        in_.assign(s.edges.size(), 0);
        pos_.assign(s.edges.size(), -1);
        cnt_.assign(s.incident.size(), 0);
    }

    // Repeatedly adds the frontier edge that maximizes the ratio; returns the best prefix.
    Candidate grow_greedy(int start, int max_size) {
        add(start);
        Candidate best;
        record(best);
        std::vector<int> frontier;
        while (static_cast<int>(members_.size()) < max_size) {
            frontier.clear();
            for (int e : members_)
                for (int v : s_.ends[static_cast<std::size_t>(e)])
                    for (int f : s_.incident[static_cast<std::size_t>(v)])
                        if (!in_[static_cast<std::size_t>(f)]) frontier.push_back(f);
            if (frontier.empty()) break;
            std::sort(frontier.begin(), frontier.end());
            frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
            int pick = -1, best_p = 0;
            for (int f : frontier) {
                int before = perim_;
                for (int v : s_.ends[static_cast<std::size_t>(f)]) bump(v, +1);
                int p = perim_;
                for (int v : s_.ends[static_cast<std::size_t>(f)]) bump(v, -1);
                perim_ = before;
                if (pick < 0 || p < best_p) {
                    pick = f;
                    best_p = p;
                }
            }
            add(pick);
            if (ratio() > best.ratio) record(best);
        }
        clear();
        return best;
    }

    Candidate run(const IsoConfig& cfg, const std::vector<int>& start) {
        if (start.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, s_.edges.size() - 1);
            add(static_cast<int>(pick(rng_)));
        } else {
            for (int e : start) add(e);
        }
        Candidate best;
        record(best);
        double score = current_score();
        const double decay = std::pow(cfg.t_end / cfg.t_start, 1.0 / std::max(1, cfg.steps - 1));
        double T = cfg.t_start;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int step = 0; step < cfg.steps; ++step, T *= decay) {
            double r = unif(rng_);
            std::vector<int> added, removed;
            if (r < 0.55) {
                int e = random_frontier_edge();
                if (e < 0) continue;
                add(e);
                added.push_back(e);
            } else if (r < 0.9) {
                if (members_.size() <= 1) continue;
                int e = members_[std::uniform_int_distribution<std::size_t>(0, members_.size() - 1)(rng_)];
                remove(e);
                if (!connected()) {
                    add(e);
                    continue;
                }
                removed.push_back(e);
            } else {
                int e = members_[std::uniform_int_distribution<std::size_t>(0, members_.size() - 1)(rng_)];
                int v = s_.ends[static_cast<std::size_t>(e)][unif(rng_) < 0.5 ? 0 : 1];
                for (int f : s_.incident[static_cast<std::size_t>(v)])
                    if (!in_[static_cast<std::size_t>(f)]) {
                        add(f);
                        added.push_back(f);
                    }
                if (added.empty()) continue;
            }
            double next = current_score();
            double delta = next - score;
            if (delta >= 0.0 || unif(rng_) < std::exp(delta / T)) {
                score = next;
                if (ratio() > best.ratio) record(best);
            } else {
                for (int e : added) remove(e);
                for (int e : removed) add(e);
            }
        }
        return best;
    }

private:
    const SearchSpace& s_;
    std::mt19937_64 rng_;
    std::vector<char> in_;
    std::vector<int> pos_;
    std::vector<int> members_;
    std::vector<int> cnt_;
    int perim_ = 0;

    void clear() {
        while (!members_.empty()) remove(members_.back());
    }

    int vertex_p(int v) const {
        int c = cnt_[static_cast<std::size_t>(v)];
        return c > 0 ? s_.deg_inf[static_cast<std::size_t>(v)] - c : 0;
    }

    void bump(int v, int d) {
        perim_ -= vertex_p(v);
        cnt_[static_cast<std::size_t>(v)] += d;
        perim_ += vertex_p(v);
    }

    void add(int e) {
        in_[static_cast<std::size_t>(e)] = 1;
        pos_[static_cast<std::size_t>(e)] = static_cast<int>(members_.size());
        members_.push_back(e);
        for (int v : s_.ends[static_cast<std::size_t>(e)]) bump(v, +1);
    }

    void remove(int e) {
        in_[static_cast<std::size_t>(e)] = 0;
        int p = pos_[static_cast<std::size_t>(e)];
        int last = members_.back();
        members_[static_cast<std::size_t>(p)] = last;
        pos_[static_cast<std::size_t>(last)] = p;
        members_.pop_back();
        pos_[static_cast<std::size_t>(e)] = -1;
        for (int v : s_.ends[static_cast<std::size_t>(e)]) bump(v, -1);
    }

    int random_frontier_edge() {
        for (int tries = 0; tries < 8; ++tries) {
            int e = members_[std::uniform_int_distribution<std::size_t>(0, members_.size() - 1)(rng_)];
            int v = s_.ends[static_cast<std::size_t>(e)][rng_() & 1u];
            const auto& inc = s_.incident[static_cast<std::size_t>(v)];
            int f = inc[std::uniform_int_distribution<std::size_t>(0, inc.size() - 1)(rng_)];
            if (!in_[static_cast<std::size_t>(f)]) return f;
        }
        return -1;
    }

    bool connected() const {
        if (members_.empty()) return true;
        std::vector<char> seen(s_.edges.size(), 0);
        std::vector<int> stack{members_.front()};
        seen[static_cast<std::size_t>(members_.front())] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            int e = stack.back();
            stack.pop_back();
            for (int v : s_.ends[static_cast<std::size_t>(e)])
                for (int f : s_.incident[static_cast<std::size_t>(v)])
                    if (in_[static_cast<std::size_t>(f)] && !seen[static_cast<std::size_t>(f)]) {
                        seen[static_cast<std::size_t>(f)] = 1;
                        ++count;
                        stack.push_back(f);
                    }
        }
        return count == members_.size();
    }

    double ratio() const { return perim_ > 0 ? std::sqrt(static_cast<double>(members_.size())) / perim_ : INFINITY; }
    double current_score() const {
        return 0.5 * std::log(static_cast<double>(members_.size())) - std::log(std::max(perim_, 1));
    }

    void record(Candidate& best) const {
        best.ratio = ratio();
        best.edges = members_;
        std::sort(best.edges.begin(), best.edges.end());
    }
};

}  // namespace

IsoperimetricReport search_violation(const DefectedGrid& g, const IsoConfig& cfg) {
    SearchSpace s(g);
    if (s.edges.empty()) throw ValidationError("search space has no surviving edges");
    IsoperimetricReport rep;
    rep.window = g.window();
    rep.config = cfg;
    Candidate best;
    if (static_cast<int>(s.edges.size()) <= std::min(cfg.exhaustive_max_edges, 30)) {
        rep.search_mode = "exhaustive";
        best = exhaustive(s);
    } else {
        rep.search_mode = "annealing";
        // Greedy growth from every edge (or a strided subset) seeds the restarts.
        const int n = static_cast<int>(s.edges.size());
        const int stride = std::max(1, n / 1500);
        const int max_size = std::max(8, n / 2);
        std::vector<Candidate> greedy;
        {
            std::vector<int> starts;
            for (int e = 0; e < n; e += stride) starts.push_back(e);
            greedy.resize(starts.size());
            int nt = std::max(1, cfg.threads);
            std::vector<std::thread> pool;
            for (int t = 0; t < nt; ++t)
                pool.emplace_back([&, t] {
                    Annealer a(s, 0);
                    for (std::size_t k = static_cast<std::size_t>(t); k < starts.size(); k += static_cast<std::size_t>(nt))
                        greedy[k] = a.grow_greedy(starts[k], max_size);
                });
            for (auto& th : pool) th.join();
            std::stable_sort(greedy.begin(), greedy.end(),
                             [](const Candidate& a, const Candidate& b) { return a.ratio > b.ratio; });
            greedy.erase(std::unique(greedy.begin(), greedy.end(),
                                     [](const Candidate& a, const Candidate& b) { return a.edges == b.edges; }),
                         greedy.end());
            if (!greedy.empty()) best = greedy.front();
        }
        std::vector<Candidate> results(static_cast<std::size_t>(cfg.restarts));
        auto work = [&](int r) {
            std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                              static_cast<std::uint32_t>(r), 0x9e3779b9u};
            std::uint64_t sd = 0;
            std::array<std::uint32_t, 2> out{};
            seq.generate(out.begin(), out.end());
            sd = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
            Annealer a(s, sd);
            static const std::vector<int> none;
            // Even restarts continue from greedy seeds, odd ones start from a random edge.
            const std::size_t seed_idx = static_cast<std::size_t>(r / 2);
            const auto& start = (r % 2 == 0 && seed_idx < greedy.size()) ? greedy[seed_idx].edges : none;
            results[static_cast<std::size_t>(r)] = a.run(cfg, start);
        };
        int nt = std::max(1, std::min(cfg.threads, cfg.restarts));
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (int r = t; r < cfg.restarts; r += nt) work(r);
            });
        for (auto& th : pool) th.join();
        for (const auto& c : results)
            if (c.ratio > best.ratio) best = c;
    }
    rep.witness = region_of(s, best.edges);
    rep.area = area(rep.witness);
    rep.perimeter = perimeter(rep.witness, g).perimeter;
    rep.best_ratio = rep.perimeter > 0 ? std::sqrt(rep.area) / rep.perimeter : INFINITY;
    return rep;
}

namespace {

std::set<Vertex> closure_vertices(const Region& r) {
    std::set<Vertex> out;
    for (const auto& [e, c] : r.cov) {
        if (c != Cover::HalfHigh) out.insert(e.lo());
        if (c != Cover::HalfLow) out.insert(e.hi());
    }
    return out;
}

}  // namespace

double tent_eps_bound(const Region& omega, const DefectedGrid& g) {
    auto cl = closure_vertices(omega);
    double bound = 1.0;
    for (const auto& v : cl)
        for (const auto& e : incident_edges(v)) {
            if (!g.surviving(e)) continue;
            auto it = omega.cov.find(e);
            if (it != omega.cov.end() && it->second == Cover::Full) continue;
            bool lo_in = cl.count(e.lo()) > 0, hi_in = cl.count(e.hi()) > 0;
            if (it == omega.cov.end()) {
                bound = std::min(bound, (lo_in && hi_in) ? 0.5 : 1.0);
            } else {
                bool far_in = it->second == Cover::HalfLow ? hi_in : lo_in;
                bound = std::min(bound, far_in ? 0.25 : 0.5);
            }
        }
    for (const auto& [e, c] : omega.cov) {
        if (c == Cover::Full) continue;
        bool far_in = c == Cover::HalfLow ? cl.count(e.hi()) > 0 : cl.count(e.lo()) > 0;
        bound = std::min(bound, far_in ? 0.25 : 0.5);
    }
    return bound;
}

TentResult tent_function(const Region& omega, const DefectedGrid& g, double eps) {
    if (omega.empty()) throw ValidationError("tent function needs a nonempty region");
    double bound = tent_eps_bound(omega, g);
    if (!(eps > 0.0 && eps < bound))
        throw ValidationError("eps must lie in (0, " + std::to_string(bound) + ") for this region");
    for (const auto& [e, c] : omega.cov)
        if (!g.in_window(e) || g.removed(e)) throw ValidationError("region covers an edge outside the grid window");
    auto cl = closure_vertices(omega);
    for (const auto& v : cl)
        for (const auto& e : incident_edges(v))
            if (g.surviving(e) && !g.in_window(e))
                throw ValidationError("region touches the window border; the ramp would leave the window");
    int m = 0;
    for (int cand = 2; cand <= 100000; cand += 2) {
        double me = cand * eps;
        if (std::abs(me - std::round(me)) < 1e-9 * std::max(1.0, me) && std::round(me) >= 1.0) {
            m = cand;
            break;
        }
    }
    if (m == 0) throw ValidationError("eps must be a rational with small denominator (m*eps integral for even m <= 1e5)");
    auto mesh = std::make_shared<const Mesh>(g, m);
    Field u(mesh);
    for (int e = 0; e < mesh->num_edges(); ++e) {
        const EdgeId& ed = mesh->edges()[static_cast<std::size_t>(e)];
        auto it = omega.cov.find(ed);
        bool lo_in = cl.count(ed.lo()) > 0, hi_in = cl.count(ed.hi()) > 0;
        for (int k = 0; k <= m; ++k) {
            double t = static_cast<double>(k) / m;
            double val = 0.0;
            if (it != omega.cov.end() && it->second == Cover::Full) {
                val = 1.0;
            } else {
                double start_lo = -1.0, start_hi = 2.0;
                if (lo_in) start_lo = 0.0;
                if (hi_in) start_hi = 1.0;
                if (it != omega.cov.end() && it->second == Cover::HalfLow) start_lo = 0.5;
                if (it != omega.cov.end() && it->second == Cover::HalfHigh) start_hi = 0.5;
                if (t <= start_lo || t >= start_hi) val = 1.0;
                else {
                    if (start_lo >= 0.0) val = std::max(val, 1.0 - (t - start_lo) / eps);
                    if (start_hi <= 1.0) val = std::max(val, 1.0 - (start_hi - t) / eps);
                    val = std::max(val, 0.0);
                    if (val < 1e-12) val = 0.0;
                    if (val > 1.0 - 1e-12) val = 1.0;
                }
            }
            u[mesh->node(e, k)] = val;
        }
    }
    TentResult res;
    res.u = std::move(u);
    res.eps = eps;
    res.eps_bound = bound;
    res.area = area(omega);
    res.perimeter = perimeter(omega, g).perimeter;
    return res;
}

CoareaReport coarea_check(const Field& u) {
    const Mesh& M = u.mesh();
    const double h = M.h();
    for (double x : u.values())
        if (x < 0.0) throw ValidationError("coarea check requires a nonnegative field");
    struct Seg {
        double lo, hi;
    };
    std::vector<Seg> segs;
    segs.reserve(static_cast<std::size_t>(M.num_edges() * M.m()));
    for (int e = 0; e < M.num_edges(); ++e)
        for (int k = 0; k < M.m(); ++k) {
            double a = u[M.node(e, k)], b = u[M.node(e, k + 1)];
            segs.push_back({std::min(a, b), std::max(a, b)});
        }
    CoareaReport rep;
    rep.lhs = u.deriv_l1();
    rep.l2_sq = u.l2_sq();

    // Events: level counts change by +1 at lo and -1 at hi of each nonconstant segment.
    // The super-level area A(t) = C + D t is linear between consecutive event levels.
    struct Ev {
        double t;
        int dcount;
        double dC, dD;
    };
    std::vector<Ev> ev;
    double C = 0.0, D = 0.0;
    const double tiny = 1e-13 * std::max(1.0, u.linf());
    for (const auto& s : segs) {
        C += h;
        if (s.hi - s.lo > tiny) {
            double w = s.hi - s.lo;
            ev.push_back({s.lo, +1, -h + h * s.hi / w, -h / w});
            ev.push_back({s.hi, -1, -h * s.hi / w, h / w});
        } else {
            ev.push_back({s.lo, 0, -h, 0.0});
        }
    }
    std::sort(ev.begin(), ev.end(), [](const Ev& a, const Ev& b) { return a.t < b.t; });
    const double g2 = 0.5 / std::sqrt(3.0);
    constexpr double gx[5] = {0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155, 0.95308992296933200};
    constexpr double gw[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444, 0.23931433524968324,
                              0.11846344252809454};
    double t_prev = 0.0;
    int count = 0;
    std::size_t i = 0;
    while (i < ev.size()) {
        double t = ev[i].t;
        if (t > t_prev) {
            double len = t - t_prev;
            rep.rhs += count * len;
            double m1 = t_prev + len * (0.5 - g2), m2 = t_prev + len * (0.5 + g2);
            rep.layer_cake += 2.0 * 0.5 * len * (m1 * (C + D * m1) + m2 * (C + D * m2));
            double sq = 0.0;
            for (int q = 0; q < 5; ++q) {
                double tq = t_prev + len * gx[q];
                sq += gw[q] * std::sqrt(std::max(0.0, C + D * tq));
            }
            rep.sqrt_area_integral += len * sq;
            t_prev = t;
        }
        while (i < ev.size() && ev[i].t == t) {
            count += ev[i].dcount;
            C += ev[i].dC;
            D += ev[i].dD;
            ++i;
        }
    }
    rep.max_gap = std::max(std::abs(rep.lhs - rep.rhs), std::abs(rep.layer_cake - rep.l2_sq));
    return rep;
}

Region random_connected_region(const DefectedGrid& g, int n_edges, std::mt19937_64& rng, int margin) {
    const Window& w = g.window();
    Window inner{w.xmin + margin, w.xmax - margin, w.ymin + margin, w.ymax - margin};
    std::vector<EdgeId> pool;
    for (const auto& e : g.surviving_edges())
        if (inner.contains(e)) pool.push_back(e);
    if (pool.empty()) throw ValidationError("no surviving edges inside the margin");
    Region r;
    std::vector<EdgeId> members{pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]};
    r.add(members.front());
    for (int tries = 0; static_cast<int>(members.size()) < n_edges && tries < 50 * n_edges; ++tries) {
        const EdgeId& e = members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng)];
        Vertex v = (rng() & 1u) ? e.hi() : e.lo();
        auto inc = incident_edges(v);
        const EdgeId& f = inc[rng() % 4];
        if (!inner.contains(f) || g.removed(f) || r.cov.count(f)) continue;
        r.add(f);
        members.push_back(f);
    }
    return r;
}

}  // namespace gridwave

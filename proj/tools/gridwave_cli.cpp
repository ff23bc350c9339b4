#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridwave/defect_zoo.hpp"
#include "gridwave/edge_ode.hpp"
#include "gridwave/grid.hpp"
#include "gridwave/inequality_lab.hpp"
#include "gridwave/io.hpp"
#include "gridwave/isoperimetry.hpp"
#include "gridwave/nls.hpp"
#include "gridwave/path_cover.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gridwave;

namespace {

// Raised for non-convergence or a search that ends without a result (exit 3).
struct NotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string unknown_name(const std::string& what, const std::string& name, const std::vector<std::string>& known) {
    std::string msg = "unknown " + what + " '" + name + "'";
    auto best = std::min_element(known.begin(), known.end(), [&](const auto& x, const auto& y) {
        return edit_distance(name, x) < edit_distance(name, y);
    });
    if (best != known.end() && edit_distance(name, *best) <= 3) msg += "; did you mean '" + *best + "'?";
    msg += " Known " + what + "s:";
    for (const auto& k : known) msg += " " + k;
    return msg;
}

struct Common {
    std::string out = "out";
    std::uint64_t seed = 0;
    int threads = 1;
};

struct GridArgs {
    std::string grid = "q";
    std::vector<std::string> windows;
    std::vector<std::string> params;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "worker limit")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_grid(CLI::App* sub, GridArgs& g, const std::string& default_window, bool multi) {
    g.windows = {default_window};
    sub->add_option("--grid,--generator", g.grid, "generator name or grid-spec JSON file")->capture_default_str();
    auto* w = sub->add_option("--window", g.windows, multi ? "window(s) xmin:xmax x ymin:ymax" : "window xmin:xmax x ymin:ymax");
    w->capture_default_str();
    if (!multi) w->expected(1);
    sub->add_option("--param", g.params, "generator parameter key=value (value parsed as JSON)");
}

GeneratorSpec generator_spec(const GridArgs& a) {
    GeneratorSpec spec{a.grid, json::object()};
    for (const auto& kv : a.params) {
        auto pos = kv.find('=');
        if (pos == std::string::npos) throw ValidationError("--param expects key=value, got '" + kv + "'");
        std::string key = kv.substr(0, pos), val = kv.substr(pos + 1);
        json v = json::parse(val, nullptr, false);
        spec.params[key] = v.is_discarded() ? json(val) : v;
    }
    return spec;
}

bool is_file_spec(const std::string& s) { return s.ends_with(".json") || fs::exists(s); }

DefectedGrid load_grid(const GridArgs& a, const std::string& window_text) {
    if (is_file_spec(a.grid)) {
        std::ifstream in(a.grid);
        if (!in) throw ValidationError("cannot open grid spec '" + a.grid + "'");
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ValidationError("grid spec '" + a.grid + "' is not valid JSON");
        return grid_from_json(j);
    }
    const auto& kinds = generator_kinds();
    if (std::find(kinds.begin(), kinds.end(), a.grid) == kinds.end())
        throw ValidationError(unknown_name("generator", a.grid, kinds));
    return materialize(generator_spec(a), Window::parse(window_text));
}

json grid_config(const GridArgs& a) {
    json j = {{"grid", a.grid}, {"windows", a.windows}};
    if (!is_file_spec(a.grid)) j["params"] = generator_spec(a).params;
    return j;
}

fs::path prepare(const Common& c) {
    fs::path dir(c.out);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, json body, const json& config) {
    json j;
    j["schema"] = kSchema;
    j["config"] = config;
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    std::ofstream(path) << dump_json(j);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : os_(path) {
        for (std::size_t k = 0; k < header.size(); ++k) os_ << (k ? "," : "") << header[k];
        os_ << "\n";
    }
    template <class... T>
    void row(const T&... cells) {
        std::size_t k = 0;
        ((os_ << (k++ ? "," : "") << cell(cells)), ...);
        os_ << "\n";
    }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const std::string& v) { return v; }
    std::ofstream os_;
};

json vertex_json(const Vertex& v) { return json::array({v.x, v.y}); }

// grid -----------------------------------------------------------------------------------------

int run_grid_build(const Common& c, const GridArgs& ga) {
    auto dir = prepare(c);
    DefectedGrid g = load_grid(ga, ga.windows.front());
    json body = grid_to_json(g);
    if (!is_file_spec(ga.grid)) {
        GeneratorSpec spec = generator_spec(ga);
        body = grid_to_json(g, &spec);
    }
    body["surviving_edges"] = g.surviving_edges().size();
    body["connected"] = g.connected();
    write_json(dir / "grid.json", body, grid_config(ga));
    std::cout << "grid build: " << g.window().str() << ", " << g.removed_edges().size() << " removed edges -> "
              << (dir / "grid.json").string() << "\n";
    return 0;
}

int run_grid_classify(const Common& c, const GridArgs& ga) {
    auto dir = prepare(c);
    DefectedGrid g = load_grid(ga, ga.windows.front());
    auto defects = identify_defects(g);
    int max_bounded = 0, n_trunc = 0;
    for (const auto& d : defects) {
        if (d.truncated) ++n_trunc;
        else max_bounded = std::max(max_bounded, static_cast<int>(d.edges.size()));
    }
    int radius = 0;
    double growth = ball_growth_ratio(g, {(g.window().xmin + g.window().xmax) / 2, (g.window().ymin + g.window().ymax) / 2}, &radius);
    json body = {{"window", window_to_json(g.window())},
                 {"n_defects", defects.size()},
                 {"n_truncated", n_trunc},
                 {"max_defect_size", max_bounded},
                 {"ball_growth_ratio", growth},
                 {"ball_radius", radius},
                 {"defects", defect_report(defects)}};
    write_json(dir / "classify.json", body, grid_config(ga));
    std::cout << "grid classify: " << defects.size() << " defects (" << n_trunc << " truncated), max bounded size "
              << max_bounded << " -> " << (dir / "classify.json").string() << "\n";
    return 0;
}

// iso ------------------------------------------------------------------------------------------

int run_iso_search(const Common& c, const GridArgs& ga, IsoConfig cfg) {
    auto dir = prepare(c);
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    json runs = json::array();
    Csv csv(dir / "iso_series.csv", {"window", "window_size", "best_ratio"});
    double last = 0.0;
    for (const auto& wt : ga.windows) {
        DefectedGrid g = load_grid(ga, wt);
        auto rep = search_violation(g, cfg);
        const Window& w = g.window();
        int size = std::max(w.xmax - w.xmin, w.ymax - w.ymin);
        csv.row(w.str(), size, rep.best_ratio);
        runs.push_back({{"window", window_to_json(w)},
                        {"best_ratio", rep.best_ratio},
                        {"area", rep.area},
                        {"perimeter", rep.perimeter},
                        {"search_mode", rep.search_mode},
                        {"witness", region_to_json(rep.witness)}});
        last = rep.best_ratio;
    }
    json config = grid_config(ga);
    config.update({{"seed", c.seed},
                   {"exhaustive_max_edges", cfg.exhaustive_max_edges},
                   {"restarts", cfg.restarts},
                   {"steps", cfg.steps},
                   {"t_start", cfg.t_start},
                   {"t_end", cfg.t_end}});
    write_json(dir / "iso_search.json", {{"runs", runs}}, config);
    std::cout << "iso search: " << ga.windows.size() << " window(s), last best_ratio " << num(last) << " -> "
              << (dir / "iso_search.json").string() << "\n";
    return 0;
}

// pcheck ---------------------------------------------------------------------------------------

struct RouteArgs {
    std::string strategy = "router";
    RouterConfig cfg;
    bool include_truncated = true;
};

int run_pcheck_route(const Common& c, const GridArgs& ga, RouteArgs ra) {
    auto dir = prepare(c);
    if (ra.strategy == "router") ra.cfg.strategy = RouteStrategy::Router;
    else if (ra.strategy == "vertical_ray") ra.cfg.strategy = RouteStrategy::VerticalRay;
    else throw ValidationError(unknown_name("strategy", ra.strategy, {"router", "vertical_ray"}));
    ra.cfg.seed = c.seed;
    ra.cfg.threads = c.threads;
    Csv csv(dir / "congestion.csv", {"window", "generator", "congestion", "n_origins"});
    json runs = json::array();
    int last = 0;
    for (const auto& wt : ga.windows) {
        DefectedGrid g = load_grid(ga, wt);
        std::vector<Vertex> origins;
        for (const auto& d : identify_defects(g))
            if (ra.include_truncated || !d.truncated)
                for (const auto& v : boundary_origins(g, d)) origins.push_back(v);
        std::sort(origins.begin(), origins.end());
        origins.erase(std::unique(origins.begin(), origins.end()), origins.end());
        if (origins.empty()) throw ValidationError("grid window " + g.window().str() + " has no defect boundary origins");
        auto fam = route_paths(g, origins, ra.cfg);
        json paths = json::array();
        for (std::size_t k = 0; k < fam.paths.size(); ++k) {
            json edges = json::array();
            for (const auto& e : fam.paths[k]) edges.push_back(edge_to_json(e));
            paths.push_back({{"origin", vertex_json(fam.origins[k])}, {"overlap", fam.overlap[k]}, {"edges", edges}});
        }
        csv.row(g.window().str(), ga.grid, fam.congestion, static_cast<int>(origins.size()));
        runs.push_back({{"window", window_to_json(g.window())},
                        {"congestion", fam.congestion},
                        {"max_load", fam.max_load},
                        {"round_congestion", fam.round_congestion},
                        {"seed", fam.seed},
                        {"paths", paths}});
        last = fam.congestion;
    }
    json config = grid_config(ga);
    config.update({{"strategy", ra.strategy},
                   {"penalty", ra.cfg.penalty},
                   {"rounds", ra.cfg.rounds},
                   {"seeds", ra.cfg.seeds},
                   {"seed", c.seed},
                   {"edge_only", ra.cfg.edge_only},
                   {"include_truncated", ra.include_truncated}});
    write_json(dir / "paths.json", {{"runs", runs}}, config);
    std::cout << "pcheck route: " << ga.windows.size() << " window(s), last congestion " << last << " -> "
              << (dir / "paths.json").string() << "\n";
    return 0;
}

int run_pcheck_census(const Common& c, const GridArgs& ga, int step) {
    auto dir = prepare(c);
    DefectedGrid g = load_grid(ga, ga.windows.front());
    auto cen = unbounded_defect_census(g, step);
    json windows = json::array(), trunc = json::array();
    for (const auto& w : cen.windows) windows.push_back(window_to_json(w));
    for (const auto& t : cen.truncated) trunc.push_back({{"sizes", t.sizes}, {"unbounded_candidate", t.unbounded_candidate}});
    json body = {{"n_unbounded_truncated", cen.n_unbounded_truncated},
                 {"n_bounded", cen.n_bounded},
                 {"max_bounded_size", cen.max_bounded_size},
                 {"n_truncated", cen.n_truncated},
                 {"windows", windows},
                 {"truncated", trunc}};
    json config = grid_config(ga);
    config["step"] = step;
    write_json(dir / "census.json", body, config);
    std::cout << "pcheck census: " << cen.n_bounded << " bounded, " << cen.n_unbounded_truncated
              << " unbounded candidates -> " << (dir / "census.json").string() << "\n";
    return 0;
}

int run_pcheck_staircase(const Common& c, const std::vector<int>& rings, bool route, int rounds) {
    auto dir = prepare(c);
    Csv csv(dir / "staircase.csv", {"ring", "available", "required", "repetitions", "mean", "lower_bound", "router_congestion"});
    json rows = json::array();
    for (int i : rings) {
        DefectedGrid g = staircase_grid(staircase_window(i));
        auto b = staircase_counting_bound(i, g);
        double lower = static_cast<double>(i) * (i + 1) / (3.0 * i + 2.0);
        int cong = -1;
        if (route) {
            RouterConfig cfg;
            cfg.seed = c.seed;
            cfg.threads = c.threads;
            cfg.rounds = rounds;
            cong = route_paths(g, b.origins, cfg).congestion;
        }
        json origins = json::array();
        for (const auto& v : b.origins) origins.push_back(vertex_json(v));
        csv.row(i, b.available, b.required, b.repetitions, b.mean, lower, cong);
        json row = {{"ring", i},         {"available", b.available}, {"required", b.required},
                    {"repetitions", b.repetitions}, {"mean", b.mean}, {"lower_bound", lower},
                    {"origins", origins}};
        if (route) row["router_congestion"] = cong;
        rows.push_back(row);
    }
    write_json(dir / "staircase.json", {{"rings", rows}},
               {{"rings", rings}, {"route", route}, {"rounds", rounds}, {"seed", c.seed}});
    std::cout << "pcheck staircase-bound: " << rings.size() << " ring(s) -> " << (dir / "staircase.json").string() << "\n";
    return 0;
}

// nls ------------------------------------------------------------------------------------------

json solver_config_json(const SolverConfig& s) {
    return {{"mesh_m", s.mesh_m},       {"max_iters", s.max_iters}, {"tol_grad", s.tol_grad},
            {"n_starts", s.n_starts},   {"seed", s.seed},           {"newton_switch", s.newton_switch},
            {"zero_level", s.zero_level}};
}

json ground_state_json(const GroundStateResult& r, double p, double mu) {
    auto li = lambda_identity_check(r, p, mu);
    return {{"energy", r.energy},
            {"level", r.level},
            {"lambda", r.lambda},
            {"mass", r.mass},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"el_residual", r.el_residual},
            {"kirchhoff_residual", r.kirchhoff_residual},
            {"grad_norm", r.grad_norm},
            {"lambda_identity_gap", li.gap},
            {"border_mass", r.border_mass},
            {"window_adequate", r.window_adequate},
            {"gn_quotient", r.gn_quotient},
            {"start_energies", r.start_energies}};
}

int run_nls_solve(const Common& c, const GridArgs& ga, double p, double mu, SolverConfig s, bool dump) {
    auto dir = prepare(c);
    s.seed = c.seed;
    s.threads = c.threads;
    DefectedGrid g = load_grid(ga, ga.windows.front());
    auto r = solve_ground_state(g, p, mu, s);
    json body = ground_state_json(r, p, mu);
    if (dump) body["field"] = field_to_json(r.u);
    json config = grid_config(ga);
    config.update({{"p", p}, {"mu", mu}});
    config.update(solver_config_json(s));
    write_json(dir / "nls_solve.json", body, config);
    std::cout << "nls solve: energy " << num(r.energy) << ", lambda " << num(r.lambda)
              << (r.converged ? ", converged" : ", NOT converged") << " -> " << (dir / "nls_solve.json").string() << "\n";
    if (!r.converged) throw NotFound("solver did not converge within " + std::to_string(s.max_iters) + " iterations");
    return 0;
}

int run_nls_critical(const Common& c, const GridArgs& ga, double p, CriticalMassConfig cm) {
    auto dir = prepare(c);
    cm.solver.seed = c.seed;
    cm.solver.threads = c.threads;
    DefectedGrid g = load_grid(ga, ga.windows.front());
    auto r = estimate_critical_mass(g, p, cm);
    json samples = json::array();
    for (const auto& [m, e] : r.samples) samples.push_back({m, e});
    json body = {{"mu_star_bisect", r.mu_star_bisect}, {"mu_hi", r.mu_hi},    {"mu_star_gn", r.mu_star_gn},
                 {"k_hat", r.k_hat},                   {"samples", samples}};
    json config = grid_config(ga);
    config.update({{"p", p}, {"mu_start", cm.mu_start}, {"rel_tol", cm.rel_tol}, {"threshold", cm.threshold}});
    config.update(solver_config_json(cm.solver));
    write_json(dir / "critical_mass.json", body, config);
    std::cout << "nls critical-mass: mu_star_bisect " << num(r.mu_star_bisect) << ", mu_star_gn " << num(r.mu_star_gn)
              << " -> " << (dir / "critical_mass.json").string() << "\n";
    return 0;
}

int run_nls_sweep(const Common& c, const GridArgs& ga, double p, std::vector<double> mus, double mu_min, double mu_max,
                  int count, SolverConfig s) {
    auto dir = prepare(c);
    s.seed = c.seed;
    s.threads = c.threads;
    if (mus.empty()) {
        if (!(mu_min > 0.0 && mu_max >= mu_min) || count < 1) throw ValidationError("sweep needs 0 < mu-min <= mu-max and count >= 1");
        mus = log_grid(mu_min, mu_max, count);
    }
    DefectedGrid g = load_grid(ga, ga.windows.front());
    Csv csv(dir / "nls_sweep.csv", {"mu", "energy", "lambda", "converged"});
    json rows = json::array();
    int n_bad = 0;
    for (double mu : mus) {
        auto r = solve_ground_state(g, p, mu, s);
        csv.row(mu, r.energy, r.lambda, r.converged);
        json row = ground_state_json(r, p, mu);
        row["mu"] = mu;
        rows.push_back(row);
        if (!r.converged) ++n_bad;
    }
    json config = grid_config(ga);
    config.update({{"p", p}, {"mus", mus}});
    config.update(solver_config_json(s));
    write_json(dir / "nls_sweep.json", {{"rows", rows}}, config);
    std::cout << "nls sweep: " << mus.size() << " masses, " << n_bad << " unconverged -> "
              << (dir / "nls_sweep.csv").string() << "\n";
    if (n_bad) throw NotFound(std::to_string(n_bad) + " sweep point(s) did not converge");
    return 0;
}

// ode ------------------------------------------------------------------------------------------

struct OdeArgs {
    double p = 3.0;
    double lambda = 1.0;
    int k = 10;
    double factor = 0.05;
    int n = 1000;
    double lambda_min = 1e-2;
    double lambda_max = 1e2;
    int n_lambda = 41;
    double tol = 1e-8;
};

int run_ode_verify(const Common& c, const OdeArgs& a) {
    auto dir = prepare(c);
    auto samples = small_data_grid(a.lambda, a.p, a.k, a.factor);
    auto sd = small_data_edge_positivity(samples, a.factor, a.n, c.threads);
    auto disc = f_lambda_positivity(log_grid(a.lambda_min, a.lambda_max, a.n_lambda));
    Csv csv(dir / "ode_sweep.csv", {"p", "lambda", "a", "b", "edge_energy", "bound_violation"});
    for (const auto& r : sd.rows)
        csv.row(r.spec.p, r.spec.lambda, r.spec.a, r.spec.b, r.excluded ? std::nan("") : r.energy,
                r.excluded ? std::nan("") : std::max(r.upper_violation, r.lower_violation));
    json drows = json::array();
    for (const auto& r : disc.rows)
        drows.push_back({{"lambda", r.lambda}, {"lambda_form", r.lambda_form}, {"y_form", r.y_form},
                         {"rel_gap", r.rel_gap}, {"monotone", r.monotone}});
    bool ok = sd.n_excluded < static_cast<int>(sd.rows.size()) && sd.worst_energy > 0.0 &&
              sd.max_upper_violation <= a.tol && sd.max_lower_violation <= a.tol && disc.min_margin > 0.0 &&
              disc.all_monotone;
    json body = {{"small_data",
                  {{"n_samples", sd.rows.size()},
                   {"n_excluded", sd.n_excluded},
                   {"worst_energy", sd.worst_energy},
                   {"max_upper_violation", sd.max_upper_violation},
                   {"max_lower_violation", sd.max_lower_violation}}},
                 {"discriminant",
                  {{"min_margin", disc.min_margin}, {"max_rel_gap", disc.max_rel_gap}, {"all_monotone", disc.all_monotone},
                   {"rows", drows}}},
                 {"passed", ok}};
    write_json(dir / "ode_verify.json", body,
               {{"p", a.p}, {"lambda", a.lambda}, {"k", a.k}, {"factor", a.factor}, {"n", a.n},
                {"lambda_min", a.lambda_min}, {"lambda_max", a.lambda_max}, {"n_lambda", a.n_lambda}, {"tol", a.tol}});
    std::cout << "ode verify: worst edge energy " << num(sd.worst_energy) << ", discriminant margin "
              << num(disc.min_margin) << (ok ? ", passed" : ", FAILED") << " -> " << (dir / "ode_verify.json").string()
              << "\n";
    if (!ok) throw NotFound("edge ODE checks failed");
    return 0;
}

// ineq -----------------------------------------------------------------------------------------

int run_ineq_probe(const Common& c, const GridArgs& ga, const std::string& id_name, const std::string& fam_name,
                   FamilySpec fam, bool dump) {
    auto dir = prepare(c);
    Inequality id = parse_inequality(id_name);
    fam.kind = parse_family(fam_name);
    fam.threads = c.threads;
    Csv csv(dir / "ineq_series.csv", {"window", "inequality", "best_ratio"});
    json runs = json::array();
    double last = 0.0;
    for (const auto& wt : ga.windows) {
        DefectedGrid g = load_grid(ga, wt);
        auto r = probe_inequality(id, g, fam, c.seed);
        csv.row(g.window().str(), to_string(id), r.best_ratio);
        json run = {{"window", window_to_json(g.window())},
                    {"best_ratio", r.best_ratio},
                    {"witness_index", r.witness_index},
                    {"witness_label", r.witness_label},
                    {"ratios", r.ratios}};
        if (dump) run["witness"] = field_to_json(r.witness);
        runs.push_back(run);
        last = r.best_ratio;
    }
    json config = grid_config(ga);
    config.update({{"inequality", to_string(id)}, {"family", to_string(fam.kind)}, {"count", fam.count}, {"p", fam.p},
                   {"mesh_m", fam.mesh_m}, {"seed", c.seed}});
    write_json(dir / "ineq_probe.json", {{"runs", runs}}, config);
    std::cout << "ineq probe: " << to_string(id) << " over " << ga.windows.size() << " window(s), last best_ratio "
              << num(last) << " -> " << (dir / "ineq_probe.json").string() << "\n";
    return 0;
}

int run_ineq_extend(const Common& c, const GridArgs& ga, int mesh_m, int count) {
    auto dir = prepare(c);
    DefectedGrid g = load_grid(ga, ga.windows.front());
    auto mesh = std::make_shared<const Mesh>(g, mesh_m);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Csv csv(dir / "extension.csv", {"sample", "u_l1", "v_l1", "ratio", "c_bound", "max_junction_gap"});
    json rows = json::array();
    double worst_ratio = 0.0, worst_gap = 0.0, cb = 0.0;
    for (int k = 0; k < count; ++k) {
        Field u(mesh);
        for (auto& x : u.values()) x = U(rng);
        auto rep = extend_field(u);
        double ratio = rep.ratio.value_or(0.0);
        csv.row(k, rep.u_l1, rep.v_l1, ratio, rep.c_bound, rep.max_junction_gap);
        rows.push_back({{"u_l1", rep.u_l1}, {"v_l1", rep.v_l1}, {"ratio", ratio}, {"c_bound", rep.c_bound},
                        {"max_junction_gap", rep.max_junction_gap}, {"n_junctions", rep.n_junctions}});
        worst_ratio = std::max(worst_ratio, ratio);
        worst_gap = std::max(worst_gap, rep.max_junction_gap);
        cb = rep.c_bound;
    }
    json config = grid_config(ga);
    config.update({{"mesh_m", mesh_m}, {"count", count}, {"seed", c.seed}});
    write_json(dir / "extension.json",
               {{"c_bound", cb}, {"max_ratio", worst_ratio}, {"max_junction_gap", worst_gap}, {"samples", rows}}, config);
    std::cout << "ineq extend: " << count << " fields, max ratio " << num(worst_ratio) << " <= C " << num(cb)
              << " -> " << (dir / "extension.json").string() << "\n";
    return 0;
}

int run_ineq_exp(const Common& c, const GridArgs& ga, double eps, double mu, double p, double eps_min, bool probe) {
    auto dir = prepare(c);
    if (probe) {
        DefectedGrid g = load_grid(ga, ga.windows.front());
        auto z = z2_negativity_probe(g, p, mu, eps_min);
        Csv csv(dir / "exp_sweep.csv", {"eps", "energy"});
        json sweep = json::array();
        for (const auto& [e, en] : z.sweep) {
            csv.row(e, en);
            sweep.push_back({e, en});
        }
        json config = grid_config(ga);
        config.update({{"p", p}, {"mu", mu}, {"eps_min", eps_min}, {"probe", true}});
        write_json(dir / "exp_trial.json",
                   {{"found", z.found}, {"eps_star", z.eps_star}, {"energy", z.energy},
                    {"periods", {z.periods.first, z.periods.second}}, {"sweep", sweep}},
                   config);
        std::cout << "ineq exp-trial: " << (z.found ? "negative energy " + num(z.energy) + " at eps " + num(z.eps_star)
                                                    : std::string("no negative energy found"))
                  << " -> " << (dir / "exp_trial.json").string() << "\n";
        if (!z.found) throw NotFound("no negative energy down to eps " + num(eps_min) + "; the window is likely too small");
        return 0;
    }
    std::string wt = ga.windows.front() == "auto" ? Window::square(exp_trial_radius(eps)).str() : ga.windows.front();
    DefectedGrid g = load_grid(ga, wt);
    auto t = exp_trial_field(g, eps, mu);
    json body = {{"eps", t.eps},         {"mu", t.mu},
                 {"kappa", t.kappa},     {"window", window_to_json(t.window)},
                 {"n_edges", t.n_edges}, {"l2_sq", t.l2_sq},
                 {"deriv_l2_sq", t.deriv_l2_sq}, {"border_ratio", t.border_ratio},
                 {"lp_pow", exp_trial_lp(g, eps, t.kappa, p)}};
    json config = grid_config(ga);
    config.update({{"eps", eps}, {"mu", mu}, {"p", p}, {"probe", false}});
    write_json(dir / "exp_trial.json", body, config);
    std::cout << "ineq exp-trial: l2_sq " << num(t.l2_sq) << ", deriv_l2_sq " << num(t.deriv_l2_sq) << " -> "
              << (dir / "exp_trial.json").string() << "\n";
    return 0;
}

const std::vector<std::pair<std::string, std::vector<std::string>>> kCommands = {
    {"grid", {"build", "classify"}},
    {"iso", {"search"}},
    {"pcheck", {"route", "census", "staircase-bound"}},
    {"nls", {"solve", "critical-mass", "sweep"}},
    {"ode", {"verify"}},
    {"ineq", {"probe", "extend", "exp-trial"}},
};

// Reports unknown command words with suggestions before CLI11 sees them.
std::optional<std::string> check_command_names(int argc, char** argv) {
    std::vector<std::string> top;
    for (const auto& [name, subs] : kCommands) top.push_back(name);
    if (argc < 2 || std::string(argv[1]).starts_with("-")) return std::nullopt;
    std::string cmd = argv[1];
    auto it = std::find_if(kCommands.begin(), kCommands.end(), [&](const auto& kv) { return kv.first == cmd; });
    if (it == kCommands.end()) return unknown_name("command", cmd, top);
    if (argc < 3 || std::string(argv[2]).starts_with("-")) return std::nullopt;
    std::string sub = argv[2];
    if (std::find(it->second.begin(), it->second.end(), sub) == it->second.end())
        return unknown_name(cmd + " subcommand", sub, it->second);
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    if (auto err = check_command_names(argc, argv)) {
        std::cerr << "error: " << *err << "\n";
        return 2;
    }

    CLI::App app{"gridwave: defected grids, isoperimetry, path covers and NLS ground states"};
    app.require_subcommand(1);
    Common common;
    std::map<CLI::App*, GridArgs> grids;
    std::function<int()> action;

    // grid
    auto* grid = app.add_subcommand("grid", "build or classify defected grids")->require_subcommand(1);
    auto* grid_build = grid->add_subcommand("build", "materialize a grid and write its spec");
    add_common(grid_build, common);
    add_grid(grid_build, grids[grid_build], "-8:8x-8:8", false);
    grid_build->callback([&] { action = [&] { return run_grid_build(common, grids[grid_build]); }; });
    auto* grid_classify = grid->add_subcommand("classify", "identify defects and their sizes");
    add_common(grid_classify, common);
    add_grid(grid_classify, grids[grid_classify], "-8:8x-8:8", false);
    grid_classify->callback([&] { action = [&] { return run_grid_classify(common, grids[grid_classify]); }; });

    // iso
    IsoConfig iso;
    auto* iso_cmd = app.add_subcommand("iso", "isoperimetric search")->require_subcommand(1);
    auto* iso_search = iso_cmd->add_subcommand("search", "maximize sqrt(A)/P over connected regions");
    add_common(iso_search, common);
    add_grid(iso_search, grids[iso_search], "-6:6x-6:6", true);
    iso_search->add_option("--exhaustive-max", iso.exhaustive_max_edges, "exhaustive search up to this many edges")->capture_default_str();
    iso_search->add_option("--restarts", iso.restarts)->capture_default_str();
    iso_search->add_option("--steps", iso.steps)->capture_default_str();
    iso_search->add_option("--t-start", iso.t_start)->capture_default_str();
    iso_search->add_option("--t-end", iso.t_end)->capture_default_str();
    iso_search->callback([&] { action = [&] { return run_iso_search(common, grids[iso_search], iso); }; });

    // pcheck
    RouteArgs ra;
    int census_step = 8;
    std::vector<int> rings{3, 4, 5};
    bool stair_route = false;
    int stair_rounds = 5;
    auto* pcheck = app.add_subcommand("pcheck", "path families from defect boundaries")->require_subcommand(1);
    auto* route = pcheck->add_subcommand("route", "route paths from low-degree boundary vertices to the window border");
    add_common(route, common);
    add_grid(route, grids[route], "-10:10x-10:10", true);
    route->add_option("--strategy", ra.strategy, "router | vertical_ray")->capture_default_str();
    route->add_option("--penalty", ra.cfg.penalty)->capture_default_str();
    route->add_option("--rounds", ra.cfg.rounds)->capture_default_str();
    route->add_option("--seeds", ra.cfg.seeds, "independent orderings")->capture_default_str();
    route->add_flag("--edge-only", ra.cfg.edge_only, "count shared edges only");
    route->add_flag("!--bounded-only", ra.include_truncated, "skip truncated defects");
    route->callback([&] { action = [&] { return run_pcheck_route(common, grids[route], ra); }; });
    auto* census = pcheck->add_subcommand("census", "classify defects across nested windows");
    add_common(census, common);
    add_grid(census, grids[census], "-20:20x-20:20", false);
    census->add_option("--step", census_step, "window enlargement")->capture_default_str();
    census->callback([&] { action = [&] { return run_pcheck_census(common, grids[census], census_step); }; });
    auto* stair = pcheck->add_subcommand("staircase-bound", "counting bound on the staircase rings");
    add_common(stair, common);
    stair->add_option("--ring", rings, "ring indices")->capture_default_str();
    stair->add_flag("--route", stair_route, "also run the router on each ring");
    stair->add_option("--rounds", stair_rounds)->capture_default_str();
    stair->callback([&] { action = [&] { return run_pcheck_staircase(common, rings, stair_route, stair_rounds); }; });

    // nls
    double p_solve = 3.0, p_crit = 5.0, p_sweep = 3.0, mu = 1.0, mu_min = 0.5, mu_max = 20.0;
    int count = 10;
    bool dump = false;
    std::vector<double> mus;
    SolverConfig sc;
    CriticalMassConfig cm;
    auto add_solver = [&](CLI::App* sub, double& p, SolverConfig& s) {
        sub->add_option("--p", p, "nonlinearity exponent")->capture_default_str();
        sub->add_option("--mesh-m", s.mesh_m, "intervals per unit edge")->capture_default_str();
        sub->add_option("--max-iters", s.max_iters)->capture_default_str();
        sub->add_option("--tol-grad", s.tol_grad)->capture_default_str();
        sub->add_option("--n-starts", s.n_starts)->capture_default_str();
    };
    auto* nls = app.add_subcommand("nls", "mass-constrained ground states")->require_subcommand(1);
    auto* solve = nls->add_subcommand("solve", "ground state of a given mass");
    add_common(solve, common);
    add_grid(solve, grids[solve], "-8:8x-8:8", false);
    add_solver(solve, p_solve, sc);
    solve->add_option("--mu", mu, "mass")->capture_default_str();
    solve->add_flag("--dump-field", dump, "write per-edge samples");
    solve->callback([&] { action = [&] { return run_nls_solve(common, grids[solve], p_solve, mu, sc, dump); }; });
    auto* crit = nls->add_subcommand("critical-mass", "bisection and GN estimates of the critical mass");
    add_common(crit, common);
    add_grid(crit, grids[crit], "-6:6x-6:6", false);
    add_solver(crit, p_crit, cm.solver);
    crit->add_option("--mu-start", cm.mu_start)->capture_default_str();
    crit->add_option("--rel-tol", cm.rel_tol)->capture_default_str();
    crit->callback([&] { action = [&] { return run_nls_critical(common, grids[crit], p_crit, cm); }; });
    auto* sweep = nls->add_subcommand("sweep", "energy over a range of masses");
    add_common(sweep, common);
    add_grid(sweep, grids[sweep], "-8:8x-8:8", false);
    add_solver(sweep, p_sweep, sc);
    sweep->add_option("--mus", mus, "explicit masses");
    sweep->add_option("--mu-min", mu_min)->capture_default_str();
    sweep->add_option("--mu-max", mu_max)->capture_default_str();
    sweep->add_option("--count", count, "log-spaced masses")->capture_default_str();
    sweep->callback([&] { action = [&] { return run_nls_sweep(common, grids[sweep], p_sweep, mus, mu_min, mu_max, count, sc); }; });

    // ode
    OdeArgs oa;
    auto* ode = app.add_subcommand("ode", "single-edge ODE checks")->require_subcommand(1);
    auto* verify = ode->add_subcommand("verify", "envelopes, edge energies and the discriminant");
    add_common(verify, common);
    verify->add_option("--p", oa.p)->capture_default_str();
    verify->add_option("--lambda", oa.lambda, "lambda of the small-data grid")->capture_default_str();
    verify->add_option("--k", oa.k, "small-data grid is k x k")->capture_default_str();
    verify->add_option("--factor", oa.factor, "smallness factor")->capture_default_str();
    verify->add_option("--n", oa.n, "RK4 steps (even, >= 100)")->capture_default_str();
    verify->add_option("--lambda-min", oa.lambda_min)->capture_default_str();
    verify->add_option("--lambda-max", oa.lambda_max)->capture_default_str();
    verify->add_option("--n-lambda", oa.n_lambda)->capture_default_str();
    verify->add_option("--tol", oa.tol, "allowed envelope violation")->capture_default_str();
    verify->callback([&] { action = [&] { return run_ode_verify(common, oa); }; });

    // ineq
    std::string id_name = "s2d", fam_name = "tents";
    FamilySpec fam;
    int ext_m = 4, ext_count = 100;
    double eps = 1.0, eps_min = 1e-3, p_exp = 3.0;
    bool probe = false;
    auto* ineq = app.add_subcommand("ineq", "Sobolev and Gagliardo-Nirenberg ratio probes")->require_subcommand(1);
    auto* iprobe = ineq->add_subcommand("probe", "best ratio over a trial family");
    add_common(iprobe, common);
    add_grid(iprobe, grids[iprobe], "-6:6x-6:6", true);
    iprobe->add_option("--inequality", id_name, "s1d | s2d | gn1d | gn2d | gn_int")->capture_default_str();
    iprobe->add_option("--family", fam_name, "tents | exponentials | solver_states | random_bumps")->capture_default_str();
    iprobe->add_option("--count", fam.count)->capture_default_str();
    iprobe->add_option("--p", fam.p)->capture_default_str();
    iprobe->add_option("--mesh-m", fam.mesh_m)->capture_default_str();
    iprobe->add_option("--mu-min", fam.mu_min)->capture_default_str();
    iprobe->add_option("--mu-max", fam.mu_max)->capture_default_str();
    iprobe->add_flag("--dump-field", dump, "write the witness field");
    iprobe->callback([&] { action = [&] { return run_ineq_probe(common, grids[iprobe], id_name, fam_name, fam, dump); }; });
    auto* extend = ineq->add_subcommand("extend", "extend random fields over bounded defects");
    add_common(extend, common);
    add_grid(extend, grids[extend], "-5:5x-5:5", false);
    extend->add_option("--mesh-m", ext_m)->capture_default_str();
    extend->add_option("--count", ext_count)->capture_default_str();
    extend->callback([&] { action = [&] { return run_ineq_extend(common, grids[extend], ext_m, ext_count); }; });
    auto* exp = ineq->add_subcommand("exp-trial", "exponential trial family and the negativity probe");
    add_common(exp, common);
    add_grid(exp, grids[exp], "auto", false);
    exp->add_option("--eps", eps)->capture_default_str();
    exp->add_option("--mu", mu)->capture_default_str();
    exp->add_option("--p", p_exp)->capture_default_str();
    exp->add_option("--eps-min", eps_min)->capture_default_str();
    exp->add_flag("--probe", probe, "sweep eps down to eps-min and stop at the first negative energy");
    exp->callback([&] {
        action = [&] {
            if (probe && grids[exp].windows.front() == "auto") grids[exp].windows.front() = "-4:4x-4:4";
            return run_ineq_exp(common, grids[exp], eps, mu, p_exp, eps_min, probe);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        return action();
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

#include "gridwave/edge_ode.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gridwave/grid.hpp"

namespace gridwave {

namespace {

using big = boost::multiprecision::cpp_bin_float_50;

void check_spec(const IvpSpec& s) {
    if (!(s.p > 2.0)) throw ValidationError("p must exceed 2");
    if (!(s.lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (!(s.a > 0.0)) throw ValidationError("initial value a must be positive");
    if (!std::isfinite(s.b)) throw ValidationError("initial slope b must be finite");
}

struct Run {
    std::vector<double> u, du;
};

Run rk4(const IvpSpec& s, int n) {
    auto acc = [&](double u) { return s.lambda * u - std::pow(std::abs(u), s.p - 2.0) * u; };
    const double h = 1.0 / n;
    Run r;
    r.u.resize(static_cast<std::size_t>(n) + 1);
    r.du.resize(static_cast<std::size_t>(n) + 1);
    double u = s.a, v = s.b;
    r.u[0] = u;
    r.du[0] = v;
    for (int k = 0; k < n; ++k) {
        double k1u = v, k1v = acc(u);
        double k2u = v + 0.5 * h * k1v, k2v = acc(u + 0.5 * h * k1u);
        double k3u = v + 0.5 * h * k2v, k3v = acc(u + 0.5 * h * k2u);
        double k4u = v + h * k3v, k4v = acc(u + h * k3u);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!(std::abs(u) <= 1e6)) {
            std::ostringstream msg;
            msg << "blow-up: |u| exceeds 1e6 at x=" << (k + 1) * h << " (p=" << s.p << ", lambda=" << s.lambda
                << ", a=" << s.a << ", b=" << s.b << ")";
            throw std::runtime_error(msg.str());
        }
        r.u[static_cast<std::size_t>(k) + 1] = u;
        r.du[static_cast<std::size_t>(k) + 1] = v;
    }
    return r;
}

template <class F>
double simpson(int n, F f) {
    double s = f(0) + f(n);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k);
    return s / (3.0 * n);
}

double envelope(double A, double B, double k, double x) { return A * std::exp(-k * x) + B * std::exp(k * x); }

}  // namespace

IvpTrace integrate_ivp(const IvpSpec& s, int n) {
    check_spec(s);
    if (n < 100) throw ValidationError("resolution n must be at least 100");
    if (n % 2) throw ValidationError("resolution n must be even");
    Run coarse = rk4(s, n), fine = rk4(s, 2 * n);
    IvpTrace t;
    t.n = n;
    t.u = std::move(coarse.u);
    t.du = std::move(coarse.du);
    t.x.resize(t.u.size());
    double umax = 0.0;
    for (std::size_t k = 0; k < t.u.size(); ++k) {
        t.x[k] = static_cast<double>(k) / n;
        t.error_estimate = std::max(t.error_estimate, std::abs(t.u[k] - fine.u[2 * k]));
        umax = std::max(umax, std::abs(t.u[k]));
        if (!(t.u[k] > 0.0)) t.positive = false;
    }
    t.delta = std::pow(umax, s.p - 2.0);
    return t;
}

double check_upper_bound(const IvpTrace& t, const IvpSpec& s) {
    if (!t.positive) throw ValidationError("upper bound requires a positive trace");
    const double k = std::sqrt(s.lambda);
    const double A = 0.5 * (s.a - s.b / k), B = 0.5 * (s.a + s.b / k);
    double worst = -INFINITY;
    for (std::size_t i = 0; i < t.u.size(); ++i) worst = std::max(worst, t.u[i] - envelope(A, B, k, t.x[i]));
    return worst;
}

double check_lower_bound(const IvpTrace& t, const IvpSpec& s) {
    if (!t.positive) throw ValidationError("lower bound requires a positive trace");
    if (!(t.delta < s.lambda)) throw ValidationError("lower bound requires ||u||_inf^(p-2) < lambda");
    const double k = std::sqrt(s.lambda - t.delta);
    const double A = 0.5 * (s.a - s.b / k), B = 0.5 * (s.a + s.b / k);
    double worst = -INFINITY;
    for (std::size_t i = 0; i < t.u.size(); ++i) worst = std::max(worst, envelope(A, B, k, t.x[i]) - t.u[i]);
    return worst;
}

EnergyIdentity edge_energy_identity(const IvpTrace& t, const IvpSpec& s) {
    if (!t.positive) throw ValidationError("energy identity requires a positive trace");
    EnergyIdentity e;
    auto at = [](const std::vector<double>& v, int k) { return v[static_cast<std::size_t>(k)]; };
    e.l2_sq = simpson(t.n, [&](int k) { return at(t.u, k) * at(t.u, k); });
    e.deriv_l2_sq = simpson(t.n, [&](int k) { return at(t.du, k) * at(t.du, k); });
    e.lp_pow = simpson(t.n, [&](int k) { return std::pow(std::abs(at(t.u, k)), s.p); });
    e.quadrature = 0.5 * e.deriv_l2_sq - e.lp_pow / s.p;
    e.closed_form = 0.5 * s.lambda * e.l2_sq - 2.0 / s.p * e.lp_pow + 0.5 * s.b * s.b + std::pow(s.a, s.p) / s.p -
                    0.5 * s.lambda * s.a * s.a;
    e.gap = std::abs(e.quadrature - e.closed_form);
    return e;
}

DiscriminantReport f_lambda_positivity(const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw ValidationError("lambda grid is empty");
    DiscriminantReport rep;
    rep.min_margin = INFINITY;
    for (double lam : lambdas) {
        if (!(lam > 0.0)) throw ValidationError("lambda values must be positive");
        big l = lam, sl = sqrt(l);
        big e2 = exp(2 * sl), e4 = e2 * e2;
        big c = (e4 - 1) / (16 * e2 * sl);
        big d = (e2 - 1) * (e2 - 1) / (8 * e2);
        big lf = 4 * l * (c - big(0.25)) * (c + big(0.25)) - d * d;
        big y = 2 * sl, ey = exp(y);
        big yf = y * y / 16 * ((ey - 1) * (ey - 1) / (y * y * ey) - 1);
        DiscriminantRow row;
        row.lambda = lam;
        row.lambda_form = static_cast<double>(lf);
        row.y_form = static_cast<double>(yf);
        row.rel_gap = static_cast<double>(abs(lf - yf) / abs(yf));
        row.monotone = (1 + (y - 1) * ey > 0) && (y * (ey + 1) + 2 * (1 - ey) > 0);
        rep.min_margin = std::min({rep.min_margin, row.lambda_form, row.y_form});
        rep.max_rel_gap = std::max(rep.max_rel_gap, row.rel_gap);
        rep.all_monotone = rep.all_monotone && row.monotone;
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi >= lo) || n < 1) throw ValidationError("log grid needs 0 < lo <= hi and n >= 1");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double t = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
        out[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, t);
    }
    out.back() = hi;
    return out;
}

double smallness_threshold(double lambda, double p, double factor) {
    if (!(p > 2.0 && lambda > 0.0 && factor > 0.0)) throw ValidationError("smallness threshold needs p > 2, lambda > 0");
    return factor * std::pow(lambda, 1.0 / (p - 2.0));
}

std::vector<IvpSpec> small_data_grid(double lambda, double p, int k, double factor) {
    if (k < 1) throw ValidationError("grid size must be positive");
    const double thr = smallness_threshold(lambda, p, factor);
    std::vector<IvpSpec> out;
    for (int i = 1; i <= k; ++i) {
        double a = std::min(thr, thr * i / k), lo = -std::min(thr, a * std::sqrt(lambda));
        for (int j = 0; j < k; ++j)
            out.push_back({p, lambda, a, k == 1 ? 0.0 : std::min(thr, lo + (thr - lo) * j / (k - 1))});
    }
    return out;
}

SmallDataReport small_data_edge_positivity(const std::vector<IvpSpec>& samples, double factor, int n, int threads) {
    if (samples.empty()) throw ValidationError("sample grid is empty");
    for (const auto& s : samples) {
        check_spec(s);
        double thr = smallness_threshold(s.lambda, s.p, factor);
        if (s.a > thr || std::abs(s.b) > thr) throw ValidationError("sample outside the small-data threshold");
    }
    SmallDataReport rep;
    rep.threshold_factor = factor;
    rep.rows.resize(samples.size());
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(samples.size())));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = static_cast<std::size_t>(t); i < samples.size(); i += static_cast<std::size_t>(nt)) {
                    SmallDataRow& row = rep.rows[i];
                    row.spec = samples[i];
                    IvpTrace tr = integrate_ivp(row.spec, n);
                    if (!tr.positive) {
                        row.excluded = true;
                        continue;
                    }
                    row.energy = edge_energy_identity(tr, row.spec).quadrature;
                    row.upper_violation = check_upper_bound(tr, row.spec);
                    row.lower_violation = check_lower_bound(tr, row.spec);
                }
            } catch (...) {
                errs[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    rep.worst_energy = INFINITY;
    rep.max_upper_violation = -INFINITY;
    rep.max_lower_violation = -INFINITY;
    for (const auto& row : rep.rows) {
        if (row.excluded) {
            ++rep.n_excluded;
            continue;
        }
        rep.worst_energy = std::min(rep.worst_energy, row.energy);
        rep.max_upper_violation = std::max(rep.max_upper_violation, row.upper_violation);
        rep.max_lower_violation = std::max(rep.max_lower_violation, row.lower_violation);
    }
    return rep;
}

}  // namespace gridwave

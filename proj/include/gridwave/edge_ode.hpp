#pragma once

#include <vector>

namespace gridwave {

// u'' + |u|^(p-2) u = lambda u on [0,1], u(0) = a, u'(0) = b.
struct IvpSpec {
    double p = 3.0;
    double lambda = 1.0;
    double a = 0.0;
    double b = 0.0;
};

struct IvpTrace {
    int n = 0;
    std::vector<double> x, u, du;
    double delta = 0.0;           // ||u||_inf^(p-2)
    double error_estimate = 0.0;  // max |u_n - u_2n| over the shared samples
    bool positive = true;
};

// Classical RK4 with n steps (n even, n >= 100), checked against a run with 2n steps.
IvpTrace integrate_ivp(const IvpSpec& s, int n = 1000);

// max_x u(x) - (A0 e^{-sqrt(l) x} + B0 e^{sqrt(l) x}).
double check_upper_bound(const IvpTrace& t, const IvpSpec& s);
// max_x (A_d e^{-sqrt(l-d) x} + B_d e^{sqrt(l-d) x}) - u(x), with d = t.delta < lambda.
double check_lower_bound(const IvpTrace& t, const IvpSpec& s);

struct EnergyIdentity {
    double quadrature = 0.0;   // 1/2 ||u'||^2 - 1/p ||u||_p^p by composite Simpson
    double closed_form = 0.0;  // lambda/2 ||u||^2 - 2/p ||u||_p^p + b^2/2 + a^p/p - lambda a^2/2
    double gap = 0.0;
    double l2_sq = 0.0, lp_pow = 0.0, deriv_l2_sq = 0.0;
};

EnergyIdentity edge_energy_identity(const IvpTrace& t, const IvpSpec& s);

struct DiscriminantRow {
    double lambda = 0.0;
    double lambda_form = 0.0;
    double y_form = 0.0;
    double rel_gap = 0.0;
    bool monotone = true;  // 1 + (y-1)e^y > 0 and y(e^y+1) + 2(1-e^y) > 0 at y = 2 sqrt(lambda)
};

struct DiscriminantReport {
    std::vector<DiscriminantRow> rows;
    double min_margin = 0.0;
    double max_rel_gap = 0.0;
    bool all_monotone = true;
};

DiscriminantReport f_lambda_positivity(const std::vector<double>& lambdas);
// n points log-spaced on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

double smallness_threshold(double lambda, double p, double factor = 0.05);

struct SmallDataRow {
    IvpSpec spec;
    double energy = 0.0;
    double upper_violation = 0.0;
    double lower_violation = 0.0;
    bool excluded = false;  // sign-changing trace
};

struct SmallDataReport {
    std::vector<SmallDataRow> rows;
    double worst_energy = 0.0;
    double max_upper_violation = 0.0;
    double max_lower_violation = 0.0;
    int n_excluded = 0;
    double threshold_factor = 0.05;
};

// k x k grid with a in (0, thr] and b in [-min(thr, a sqrt(lambda)), thr]; the slope floor is the
// decaying linear mode, so the linearized trace stays positive.
std::vector<IvpSpec> small_data_grid(double lambda, double p, int k, double factor = 0.05);

// Every sample must satisfy a, |b| <= factor * lambda^(1/(p-2)).
SmallDataReport small_data_edge_positivity(const std::vector<IvpSpec>& samples, double factor = 0.05, int n = 1000,
                                           int threads = 1);

}  // namespace gridwave

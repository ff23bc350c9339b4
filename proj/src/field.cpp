#include "gridwave/field.hpp"

#include <algorithm>
#include <cmath>

namespace gridwave {

namespace {

// 5-point Gauss-Legendre on [0,1].
constexpr double kGx[5] = {0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155, 0.95308992296933200};
constexpr double kGw[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444, 0.23931433524968324,
                           0.11846344252809454};

}  // namespace

Mesh::Mesh(const DefectedGrid& g, int m) : g_(g), m_(m) {
    if (m < 1) throw ValidationError("mesh resolution m must be >= 1");
    vnode_of_.assign(static_cast<std::size_t>(g.num_vertices()), -1);
    epos_of_.assign(static_cast<std::size_t>(g.num_edges()), -1);
    vertices_ = g.vertices();
    nv_ = vertices_.size();
    border_.resize(nv_);
    degree_.resize(nv_);
    for (std::size_t k = 0; k < nv_; ++k) {
        vnode_of_[static_cast<std::size_t>(g.vertex_index(vertices_[k]))] = static_cast<int>(k);
        border_[k] = g.window().on_border(vertices_[k]) ? 1 : 0;
        degree_[k] = g.window_degree(vertices_[k]);
    }
    edges_ = g.surviving_edges();
    ne_ = edges_.size();
    for (std::size_t k = 0; k < ne_; ++k) epos_of_[static_cast<std::size_t>(g.edge_index(edges_[k]))] = static_cast<int>(k);
    weights_.assign(static_cast<std::size_t>(num_nodes()), h());
    for (std::size_t k = 0; k < nv_; ++k) weights_[k] = degree_[k] * h() / 2.0;
}

int Mesh::edge_pos(const EdgeId& e) const {
    if (!g_.window().contains(e)) return -1;
    return epos_of_[static_cast<std::size_t>(g_.edge_index(e))];
}

int Mesh::vertex_node(const Vertex& v) const {
    if (!g_.window().contains(v)) return -1;
    return vnode_of_[static_cast<std::size_t>(g_.vertex_index(v))];
}

int Mesh::node(int e, int k) const {
    const EdgeId& ed = edges_[static_cast<std::size_t>(e)];
    if (k == 0) return vnode_of_[static_cast<std::size_t>(g_.vertex_index(ed.lo()))];
    if (k == m_) return vnode_of_[static_cast<std::size_t>(g_.vertex_index(ed.hi()))];
    return static_cast<int>(nv_) + e * (m_ - 1) + (k - 1);
}

std::pair<double, double> Mesh::position(int e, int k) const {
    const EdgeId& ed = edges_[static_cast<std::size_t>(e)];
    double t = static_cast<double>(k) / m_;
    if (ed.o == Orient::H) return {ed.i + t, static_cast<double>(ed.j)};
    return {static_cast<double>(ed.i), ed.j + t};
}

Field::Field(std::shared_ptr<const Mesh> mesh, std::vector<double> values) : mesh_(std::move(mesh)), v_(std::move(values)) {
    if (static_cast<int>(v_.size()) != mesh_->num_nodes()) throw ValidationError("field size does not match mesh");
}

Field Field::sample(std::shared_ptr<const Mesh> mesh, const std::function<double(double, double)>& f) {
    Field u(mesh);
    const Mesh& M = *mesh;
    for (int e = 0; e < M.num_edges(); ++e)
        for (int k = 0; k <= M.m(); ++k) {
            auto [x, y] = M.position(e, k);
            u[M.node(e, k)] = f(x, y);
        }
    return u;
}

std::vector<double> Field::edge_samples(int e) const {
    std::vector<double> out(static_cast<std::size_t>(mesh_->m() + 1));
    for (int k = 0; k <= mesh_->m(); ++k) out[static_cast<std::size_t>(k)] = (*this)[mesh_->node(e, k)];
    return out;
}

double Field::at(int e, double t) const {
    const int m = mesh_->m();
    double s = std::clamp(t, 0.0, 1.0) * m;
    int k = std::min(static_cast<int>(std::floor(s)), m - 1);
    double f = s - k;
    return (1.0 - f) * (*this)[mesh_->node(e, k)] + f * (*this)[mesh_->node(e, k + 1)];
}

double Field::l2_sq() const {
    const double h = mesh_->h();
    double s = 0.0;
    for (int e = 0; e < mesh_->num_edges(); ++e)
        for (int k = 0; k < mesh_->m(); ++k) {
            double a = (*this)[mesh_->node(e, k)], b = (*this)[mesh_->node(e, k + 1)];
            s += h * (a * a + a * b + b * b) / 3.0;
        }
    return s;
}

double Field::deriv_l1() const {
    double s = 0.0;
    for (int e = 0; e < mesh_->num_edges(); ++e)
        for (int k = 0; k < mesh_->m(); ++k) s += std::abs((*this)[mesh_->node(e, k + 1)] - (*this)[mesh_->node(e, k)]);
    return s;
}

double Field::deriv_l2_sq() const {
    const double h = mesh_->h();
    double s = 0.0;
    for (int e = 0; e < mesh_->num_edges(); ++e)
        for (int k = 0; k < mesh_->m(); ++k) {
            double d = (*this)[mesh_->node(e, k + 1)] - (*this)[mesh_->node(e, k)];
            s += d * d / h;
        }
    return s;
}

double Field::linf() const {
    double s = 0.0;
    for (double x : v_) s = std::max(s, std::abs(x));
    return s;
}

double Field::lp_pow(double p) const {
    const double h = mesh_->h();
    double s = 0.0;
    for (int e = 0; e < mesh_->num_edges(); ++e)
        for (int k = 0; k < mesh_->m(); ++k) {
            double a = (*this)[mesh_->node(e, k)], b = (*this)[mesh_->node(e, k + 1)];
            if (a == 0.0 && b == 0.0) continue;
            double seg = 0.0;
            for (int q = 0; q < 5; ++q) seg += kGw[q] * std::pow(std::abs(a + (b - a) * kGx[q]), p);
            s += h * seg;
        }
    return s;
}

double Field::lumped_l2_sq() const {
    const auto& w = mesh_->weights();
    double s = 0.0;
    for (std::size_t n = 0; n < v_.size(); ++n) s += w[n] * v_[n] * v_[n];
    return s;
}

double Field::lumped_lp_pow(double p) const {
    const auto& w = mesh_->weights();
    double s = 0.0;
    for (std::size_t n = 0; n < v_.size(); ++n)
        if (v_[n] != 0.0) s += w[n] * std::pow(std::abs(v_[n]), p);
    return s;
}

Field Field::scaled(double s) const {
    Field out = *this;
    for (double& x : out.v_) x *= s;
    return out;
}

double energy(const Field& u, double p) {
    if (!(p > 2.0)) throw ValidationError("energy requires p > 2");
    return 0.5 * u.deriv_l2_sq() - u.lumped_lp_pow(p) / p;
}

double mass(const Field& u) { return u.lumped_l2_sq(); }

Field refine(const Field& u, int m_fine) {
    auto mesh = std::make_shared<const Mesh>(u.mesh().grid(), m_fine);
    Field out(mesh);
    for (int e = 0; e < mesh->num_edges(); ++e)
        for (int k = 0; k <= m_fine; ++k) out[mesh->node(e, k)] = u.at(e, static_cast<double>(k) / m_fine);
    return out;
}

}  // namespace gridwave

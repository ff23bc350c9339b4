#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gridwave/grid.hpp"

namespace gridwave {

// Piecewise-linear discretization with m intervals per surviving window edge.
// Nodes: grid vertices first, then the m-1 interior nodes of each edge, ordered
// from the low endpoint to the high endpoint.
class Mesh {
public:
    Mesh(const DefectedGrid& g, int m);

    const DefectedGrid& grid() const { return g_; }
    int m() const { return m_; }
    double h() const { return 1.0 / m_; }
    int num_nodes() const { return static_cast<int>(nv_ + ne_ * (m_ - 1)); }
    int num_vertex_nodes() const { return static_cast<int>(nv_); }
    int num_edges() const { return static_cast<int>(ne_); }

    const std::vector<EdgeId>& edges() const { return edges_; }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    int edge_pos(const EdgeId& e) const;  // -1 if not a mesh edge
    int vertex_node(const Vertex& v) const;  // -1 if not a mesh vertex
    // Node index of sample k (0..m) on edge position e.
    int node(int e, int k) const;
    // Lattice coordinates of sample k on edge position e.
    std::pair<double, double> position(int e, int k) const;
    bool is_border_node(int n) const { return n < static_cast<int>(nv_) && border_[static_cast<std::size_t>(n)]; }
    int vertex_degree(int vnode) const { return degree_[static_cast<std::size_t>(vnode)]; }
    // Lumped (trapezoid) weight of each node.
    const std::vector<double>& weights() const { return weights_; }

private:
    DefectedGrid g_;
    int m_;
    std::size_t nv_ = 0;
    std::size_t ne_ = 0;
    std::vector<EdgeId> edges_;
    std::vector<Vertex> vertices_;
    std::vector<int> vnode_of_;  // by grid vertex index
    std::vector<int> epos_of_;   // by grid edge index
    std::vector<char> border_;
    std::vector<int> degree_;
    std::vector<double> weights_;
};

class Field {
public:
    Field() = default;
    explicit Field(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)), v_(static_cast<std::size_t>(mesh_->num_nodes()), 0.0) {}
    Field(std::shared_ptr<const Mesh> mesh, std::vector<double> values);

    // Samples f(x, y) at every node.
    static Field sample(std::shared_ptr<const Mesh> mesh, const std::function<double(double, double)>& f);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }
    double& operator[](int n) { return v_[static_cast<std::size_t>(n)]; }
    double operator[](int n) const { return v_[static_cast<std::size_t>(n)]; }
    std::vector<double> edge_samples(int e) const;
    // Linear interpolation at local coordinate t in [0,1] along edge position e.
    double at(int e, double t) const;

    // Exact integrals of the piecewise-linear interpolant.
    double l2_sq() const;
    double deriv_l1() const;
    double deriv_l2_sq() const;
    double linf() const;
    // High-order Gauss quadrature of |u|^p per segment.
    double lp_pow(double p) const;
    // Lumped (trapezoid) versions used by the energy functional.
    double lumped_l2_sq() const;
    double lumped_lp_pow(double p) const;

    Field scaled(double s) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    std::vector<double> v_;
};

// Quadrature energy 1/2 ||u'||^2 - 1/p ||u||_p^p with the lumped scheme; p <= 2 rejected.
double energy(const Field& u, double p);
double mass(const Field& u);

// Piecewise-linear interpolation of a field onto a finer mesh of the same grid (m_fine a multiple of m).
Field refine(const Field& u, int m_fine);

}  // namespace gridwave

#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "detcond/graph.hpp"

namespace oracle {

inline Eigen::MatrixXd laplacian(const detcond::FiniteGraph& g, const std::vector<double>& w) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(g.num_vertices(), g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    if (ed.u == ed.v) continue;
    L(ed.u, ed.u) += w[e];
    L(ed.v, ed.v) += w[e];
    L(ed.u, ed.v) -= w[e];
    L(ed.v, ed.u) -= w[e];
  }
  return L;
}

/// ln of the product of the nonzero Laplacian eigenvalues.
inline double log_det_eigen(const detcond::FiniteGraph& g, const std::vector<double>& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian(g, w));
  double s = 0.0;
  for (int i = 1; i < es.eigenvalues().size(); ++i) s += std::log(es.eigenvalues()(i));
  return s;
}

/// Moore-Penrose inverse of the Laplacian of a connected graph.
inline Eigen::MatrixXd pseudo_inverse(const detcond::FiniteGraph& g, const std::vector<double>& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian(g, w));
  const auto& U = es.eigenvectors();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(es.eigenvalues().size());
  for (int i = 1; i < inv.size(); ++i) inv(i) = 1.0 / es.eigenvalues()(i);
  return U * inv.asDiagonal() * U.transpose();
}

/// b_f with the lower vertex id as tail.
inline Eigen::VectorXd incidence(const detcond::FiniteGraph& g, int e) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(g.num_vertices());
  const auto [t, h] = detcond::oriented(g.edge(e));
  b(h) += 1.0;
  b(t) -= 1.0;
  return b;
}

}  // namespace oracle

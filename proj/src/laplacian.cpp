#include "detcond/laplacian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace detcond {

Conductances::Conductances(double q_value, Configuration flags) : q(q_value), hard(std::move(flags)) {
  if (!(q >= 1.0)) throw LinalgError("conductance ratio q must be >= 1");
}

std::vector<double> Conductances::weights() const {
  std::vector<double> w(hard.size());
  for (size_t e = 0; e < hard.size(); ++e) w[e] = hard[e] ? q : 1.0;
  return w;
}

int Conductances::num_hard() const { return static_cast<int>(std::count(hard.begin(), hard.end(), 1)); }

Eigen::SparseMatrix<double> pinned_laplacian(const FiniteGraph& g, const std::vector<double>& w, VertexId pin) {
  if (static_cast<int>(w.size()) != g.num_edges()) throw LinalgError("weight vector does not match edge count");
  const int n = g.num_vertices() - 1;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    if (ed.u == ed.v) continue;
    if (!(w[e] > 0.0)) throw LinalgError("conductances must be positive");
    const int a = pinned_index(ed.u, pin), b = pinned_index(ed.v, pin);
    if (a >= 0) t.emplace_back(a, a, w[e]);
    if (b >= 0) t.emplace_back(b, b, w[e]);
    if (a >= 0 && b >= 0) {
      t.emplace_back(a, b, -w[e]);
      t.emplace_back(b, a, -w[e]);
    }
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

namespace {

using CgSolver = Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                          Eigen::DiagonalPreconditioner<double>>;

Eigen::VectorXd cg_solve(const Eigen::SparseMatrix<double>& m, const Eigen::VectorXd& rhs) {
  CgSolver cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * m.rows()));
  cg.compute(m);
  Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success) throw LinalgError("conjugate gradients did not converge");
  const double rel = (m * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (rel > 1e-10) throw LinalgError("pinned solve residual above 1e-10");
  return x;
}

double sparse_log_det(const Eigen::SparseMatrix<double>& m) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw LinalgError("sparse factorization failed; graph disconnected?");
  const Eigen::VectorXd d = ldlt.vectorD();
  double s = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw LinalgError("pinned Laplacian is not positive definite");
    s += std::log(d[i]);
  }
  return s;
}

double dense_log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += 2.0 * std::log(l(i, i));
  return s;
}

Eigen::VectorXd edge_source(int n, VertexId tail, VertexId head, VertexId pin) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  const int t = pinned_index(tail, pin), h = pinned_index(head, pin);
  if (h >= 0) b[h] += 1.0;
  if (t >= 0) b[t] -= 1.0;
  return b;
}

}  // namespace

PinnedSolver::PinnedSolver(const FiniteGraph& g, const std::vector<double>& w, VertexId pin)
    : graph_(&g), pin_(pin), dense_(g.num_vertices() - 1 <= kDenseLimit) {
  if (g.num_vertices() < 2) throw LinalgError("Laplacian needs at least two vertices");
  sparse_ = pinned_laplacian(g, w, pin);
  if (dense_) {
    llt_.compute(Eigen::MatrixXd(sparse_));
    if (llt_.info() != Eigen::Success) throw LinalgError("pinned Laplacian is not positive definite");
  }
}

Eigen::VectorXd PinnedSolver::potential(const Eigen::VectorXd& source) const {
  const int n = graph_->num_vertices();
  Eigen::VectorXd rhs(n - 1);
  for (VertexId v = 0; v < n; ++v)
    if (v != pin_) rhs[pinned_index(v, pin_)] = source[v];
  const Eigen::VectorXd x = dense_ ? Eigen::VectorXd(llt_.solve(rhs)) : cg_solve(sparse_, rhs);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  for (VertexId v = 0; v < n; ++v)
    if (v != pin_) phi[v] = x[pinned_index(v, pin_)];
  return phi;
}

double PinnedSolver::log_det() const { return dense_ ? dense_log_det(llt_) : sparse_log_det(sparse_); }

double PinnedSolver::bilinear(VertexId tail_a, VertexId head_a, VertexId tail_b, VertexId head_b) const {
  const int n = graph_->num_vertices() - 1;
  const Eigen::VectorXd ba = edge_source(n, tail_a, head_a, pin_);
  const Eigen::VectorXd bb = edge_source(n, tail_b, head_b, pin_);
  const Eigen::VectorXd x = dense_ ? Eigen::VectorXd(llt_.solve(bb)) : cg_solve(sparse_, bb);
  return ba.dot(x);
}

double log_det_pinned(const FiniteGraph& g, const std::vector<double>& w, VertexId pin) {
  return PinnedSolver(g, w, pin).log_det();
}

double log_det_zero_mean(const FiniteGraph& g, const std::vector<double>& w) {
  if (g.num_vertices() == 1) return 0.0;
  return std::log(static_cast<double>(g.num_vertices())) + log_det_pinned(g, w, 0);
}

double log_det_zero_mean(const FiniteGraph& g, const Conductances& k) { return log_det_zero_mean(g, k.weights()); }

double effective_resistance(const FiniteGraph& g, const std::vector<double>& w, EdgeId f) {
  if (g.is_self_loop(f)) return 0.0;
  const Edge& e = g.edge(f);
  return PinnedSolver(g, w).bilinear(e.u, e.v, e.u, e.v);
}

double gradient_covariance(const FiniteGraph& g, const std::vector<double>& w, EdgeId f, EdgeId g2) {
  if (g.is_self_loop(f) || g.is_self_loop(g2)) return 0.0;
  const auto [fx, fy] = oriented(g.edge(f));
  const auto [gx, gy] = oriented(g.edge(g2));
  return PinnedSolver(g, w).bilinear(fx, fy, gx, gy);
}

double transfer_current(const FiniteGraph& g, const std::vector<double>& w, EdgeId f, EdgeId g2) {
  return w[g2] * gradient_covariance(g, w, f, g2);
}

double transfer_current(const FiniteGraph& g, const Conductances& k, EdgeId f, EdgeId g2) {
  return transfer_current(g, k.weights(), f, g2);
}

std::optional<LatticeEdge> lattice_edge(const FiniteGraph& box, const Point& x, int direction) {
  const int d = box.dimension();
  if (d == 0 || direction < 0 || direction >= d || static_cast<int>(x.size()) != d) return std::nullopt;
  Point y = x;
  y[direction] += 1;
  std::optional<VertexId> merged;
  int radius = 0;
  for (VertexId v = 0; v < box.num_vertices(); ++v) {
    if (!box.has_coordinate(v)) {
      merged = v;
      continue;
    }
    for (int c : box.coordinate(v)) radius = std::max(radius, std::abs(c));
  }
  const auto tail = box.find_vertex(x);
  const auto head = box.find_vertex(y);
  if (!merged) {
    if (!tail || !head) return std::nullopt;
    const auto e = box.find_edge(*tail, *head);
    if (!e) return std::nullopt;
    return LatticeEdge{*e, *tail, *head};
  }
  // Wired box: recover the edge through the free box it was built from.
  const FiniteGraph free_box = build_box(d, radius + 1, false);
  const auto ft = free_box.find_vertex(x);
  const auto fh = free_box.find_vertex(y);
  if (!ft || !fh) return std::nullopt;
  const auto fe = free_box.find_edge(*ft, *fh);
  if (!fe) return std::nullopt;
  for (EdgeId e = 0; e < box.num_edges(); ++e)
    if (box.source_edge(e) == *fe) return LatticeEdge{e, tail ? *tail : *merged, head ? *head : *merged};
  return std::nullopt;
}

EdgeId central_edge(const FiniteGraph& box) {
  const auto e = lattice_edge(box, Point(box.dimension(), 0), 0);
  if (!e) throw GraphError("box has no edge at the origin");
  return e->edge;
}

double green_gradient(const FiniteGraph& box, const std::vector<double>& w, const Point& x, int i, const Point& y,
                      int j) {
  const auto a = lattice_edge(box, x, i);
  const auto b = lattice_edge(box, y, j);
  if (!a || !b) throw GraphError("green_gradient: lattice edge not in box");
  VertexId pin = 0;
  if (!box.boundary().empty()) pin = box.boundary().front();
  return PinnedSolver(box, w, pin).bilinear(a->tail, a->head, b->tail, b->head);
}

LaplacianState::LaplacianState(std::shared_ptr<const FiniteGraph> g, Conductances k, VertexId pin,
                               int refresh_threshold)
    : graph_(std::move(g)), k_(std::move(k)), pin_(pin), refresh_threshold_(refresh_threshold) {
  if (k_.size() != graph_->num_edges()) throw LinalgError("conductances do not match graph");
  dense_ = graph_->num_vertices() - 1 <= PinnedSolver::kDenseLimit;
  refactorize();
}

void LaplacianState::refactorize() {
  sparse_ = pinned_laplacian(*graph_, k_.weights(), pin_);
  updates_ = 0;
  growth_ = 1.0;
  if (sparse_.rows() == 0) {
    log_det_ = 0.0;
    inverse_.resize(0, 0);
    return;
  }
  if (dense_) {
    Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(sparse_)};
    if (llt.info() != Eigen::Success) throw LinalgError("pinned Laplacian is not positive definite");
    log_det_ = dense_log_det(llt);
    inverse_ = llt.solve(Eigen::MatrixXd::Identity(sparse_.rows(), sparse_.cols()));
  } else {
    log_det_ = sparse_log_det(sparse_);
  }
  updates_ = 0;
}

double LaplacianState::log_det_zero_mean() const {
  return std::log(static_cast<double>(graph_->num_vertices())) + log_det_;
}

Eigen::VectorXd LaplacianState::edge_potential(EdgeId f) const {
  const Edge& e = graph_->edge(f);
  const int a = pinned_index(e.u, pin_), b = pinned_index(e.v, pin_);
  const Eigen::VectorXd rhs = edge_source(static_cast<int>(sparse_.rows()), e.u, e.v, pin_);
  if (!dense_) return cg_solve(sparse_, rhs);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(inverse_.rows());
  if (b >= 0) x += inverse_.col(b);
  if (a >= 0) x -= inverse_.col(a);
  // One refinement step against the exact sparse Laplacian.
  const Eigen::VectorXd r = rhs - sparse_ * x;
  x.noalias() += inverse_ * r;
  return x;
}

namespace {

// (e_head - e_tail) . x for the pinned indices a = tail, b = head.
double rhs_dot(int a, int b, const Eigen::VectorXd& x) {
  double r = 0.0;
  if (b >= 0) r += x[b];
  if (a >= 0) r -= x[a];
  return r;
}

}  // namespace

double LaplacianState::pinned_quadratic(EdgeId f) const {
  const Edge& e = graph_->edge(f);
  const int a = pinned_index(e.u, pin_), b = pinned_index(e.v, pin_);
  if (dense_) {
    double r = 0.0;
    if (a >= 0) r += inverse_(a, a);
    if (b >= 0) r += inverse_(b, b);
    if (a >= 0 && b >= 0) r -= 2.0 * inverse_(a, b);
    return r;
  }
  return rhs_dot(a, b, edge_potential(f));
}

double LaplacianState::resistance(EdgeId f) const {
  if (graph_->is_self_loop(f)) return 0.0;
  return pinned_quadratic(f);
}

double LaplacianState::set_edge(EdgeId f, bool hard) {
  if (static_cast<bool>(k_.hard[f]) == hard) return 0.0;
  return flip_edge(f);
}

double LaplacianState::flip_edge(EdgeId f) {
  const double old_c = k_.value(f);
  k_.hard[f] = k_.hard[f] ? 0 : 1;
  if (graph_->is_self_loop(f)) return 0.0;
  const double dc = k_.value(f) - old_c;
  if (dc == 0.0) return 0.0;

  const Edge& e = graph_->edge(f);
  const int a = pinned_index(e.u, pin_), b = pinned_index(e.v, pin_);
  Eigen::VectorXd x = edge_potential(f);
  double r = rhs_dot(a, b, x);
  double denom = 1.0 + dc * r;
  if (!(denom > 0.0)) {
    k_.hard[f] = k_.hard[f] ? 0 : 1;
    refactorize();
    x = edge_potential(f);
    r = rhs_dot(a, b, x);
    denom = 1.0 + dc * r;
    k_.hard[f] = k_.hard[f] ? 0 : 1;
    if (!(denom > 0.0)) throw LinalgError("rank-one update lost positivity after refactorization");
  }
  const double delta = std::log(denom);

  if (dense_) inverse_.noalias() -= (dc / denom) * (x * x.transpose());
  if (a >= 0) sparse_.coeffRef(a, a) += dc;
  if (b >= 0) sparse_.coeffRef(b, b) += dc;
  if (a >= 0 && b >= 0) {
    sparse_.coeffRef(a, b) -= dc;
    sparse_.coeffRef(b, a) -= dc;
  }
  log_det_ += delta;
  // The relative error of the inverse grows by about max(denom, 1/denom).
  growth_ *= std::max(denom, 1.0 / denom);
  if (++updates_ >= refresh_threshold_ || growth_ > kGrowthLimit) refactorize();
  return delta;
}

double LaplacianState::probe_residual() const {
  if (!dense_) return 0.0;
  const Eigen::MatrixXd lap(pinned_laplacian(*graph_, k_.weights(), pin_));
  const Eigen::Index n = lap.rows();
  double worst = 0.0;
  for (Eigen::Index j : {Eigen::Index{0}, n / 2, n - 1}) {
    Eigen::VectorXd r = lap * inverse_.col(j);
    r[j] -= 1.0;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace detcond

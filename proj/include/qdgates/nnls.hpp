#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qdgates {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // ||A x - b||_2
  bool converged = true;
};

// Lawson-Hanson active set method for min ||A x - b|| subject to x >= 0.
inline NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.cols();
  NnlsResult out{Eigen::VectorXd::Zero(n), 0.0, true};
  if (n == 0) {
    out.residual = b.norm();
    return out;
  }
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     std::max<double>(1.0, a.cwiseAbs().maxCoeff()) *
                     static_cast<double>(std::max(a.rows(), n));
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Eigen::VectorXd& x = out.x;

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
    Eigen::VectorXd zs = sub.completeOrthogonalDecomposition().solve(b);
    z.setZero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zs(static_cast<Eigen::Index>(c));
  };

  const int max_outer = static_cast<int>(3 * n + 10);
  int outer = 0;
  Eigen::VectorXd w = a.transpose() * (b - a * x);
  while (true) {
    Eigen::Index pick = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        pick = j;
      }
    if (pick < 0) break;
    if (++outer > max_outer) {
      out.converged = false;
      break;
    }
    passive[static_cast<std::size_t>(pick)] = true;
    Eigen::VectorXd z;
    for (int inner = 0; inner <= max_outer; ++inner) {
      solve_passive(z);
      bool positive = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) positive = false;
      if (positive) break;
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          const double gap = x(j) - z(j);
          alpha = std::min(alpha, gap > 0.0 ? x(j) / gap : 0.0);
        }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && std::abs(x(j)) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
    }
    x = z;
    for (Eigen::Index j = 0; j < n; ++j) x(j) = std::max(0.0, x(j));
    w = a.transpose() * (b - a * x);
  }
  out.residual = (a * x - b).norm();
  return out;
}

struct LpResult {
  bool feasible = false;
  Eigen::VectorXd x;
  double objective = 0.0;
};

// Dense two-phase simplex with Bland's rule: min c.x subject to A x = b, x >= 0.
inline LpResult linear_program(const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& b, double tol = 1e-10) {
  const Eigen::Index m = a.rows(), n = a.cols();
  // Tableau columns: n originals, m artificials, rhs.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, n + m + 1);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  const double scale = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  const double eps = tol * scale;
  for (Eigen::Index i = 0; i < m; ++i) {
    double sign = b(i) < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * a.row(i);
    t(i, n + i) = 1.0;
    t(i, n + m) = sign * b(i);
    basis[static_cast<std::size_t>(i)] = n + i;
  }

  auto pivot = [&](Eigen::Index r, Eigen::Index col) {
    t.row(r) /= t(r, col);
    for (Eigen::Index i = 0; i < m; ++i)
      if (i != r && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(r);
    basis[static_cast<std::size_t>(r)] = col;
  };

  // Runs simplex on cost vector `cost` over columns [0, limit).
  auto run = [&](const Eigen::VectorXd& cost, Eigen::Index limit) {
    for (int iter = 0; iter < 10000; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < limit && enter < 0; ++j) {
        double reduced = cost(j);
        for (Eigen::Index i = 0; i < m; ++i) reduced -= cost(basis[static_cast<std::size_t>(i)]) * t(i, j);
        if (reduced < -eps) enter = j;
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (t(i, enter) <= eps) continue;
        double ratio = t(i, n + m) / t(i, enter);
        if (ratio < best - eps ||
            (std::abs(ratio - best) <= eps && leave >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    return false;
  };

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  run(phase1, n + m);
  double infeasibility = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[static_cast<std::size_t>(i)] >= n) infeasibility += t(i, n + m);
  LpResult out;
  if (infeasibility > eps) return out;
  // Drive remaining artificials out of the basis; drop redundant rows.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(t(i, j)) > eps) {
        pivot(i, j);
        break;
      }
  }
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  // Artificials left in the basis sit on redundant rows at value zero; giving
  // them a zero cost and excluding them from entering keeps them inert.
  if (!run(phase2, n)) return out;
  out.feasible = true;
  out.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[static_cast<std::size_t>(i)] < n)
      out.x(basis[static_cast<std::size_t>(i)]) = std::max(0.0, t(i, n + m));
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace qdgates

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tgqm/lp/simplex.hpp"

namespace tgqm::oracle {

// Brute-force reference for small LPs whose variables are all nonnegative
// (so the feasible set, when nonempty, is pointed and has a vertex).
struct OracleResult {
  lp::Status status = lp::Status::Infeasible;
  double objective = 0.0;
};

namespace detail {

// Calls fn(idx) for every k-subset of {0..n-1}.
template <class Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Rows G x (rel) h with rel encoded as -1 (<=), 0 (=), +1 (>=), plus x >= 0.
// Returns the min of `cost` over all vertices, or nullopt if there are none.
inline std::optional<double> vertex_min(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                                        const std::vector<int>& rel,
                                        const Eigen::VectorXd& cost) {
  const int n = static_cast<int>(G.cols());
  const int m = static_cast<int>(G.rows());
  Eigen::MatrixXd H(m + n, n);
  Eigen::VectorXd hv(m + n);
  H.topRows(m) = G;
  hv.head(m) = h;
  H.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  hv.tail(n).setZero();
  std::optional<double> best;
  for_each_subset(m + n, n, [&](const std::vector<int>& s) {
    // Every equality row must be active at a vertex.
    for (int i = 0; i < m; ++i) {
      if (rel[i] == 0 && std::find(s.begin(), s.end(), i) == s.end()) return;
    }
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd r(n);
    for (int k = 0; k < n; ++k) {
      M.row(k) = H.row(s[k]);
      r[k] = hv[s[k]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rank() < n) return;
    const Eigen::VectorXd x = lu.solve(r);
    const double tol = 1e-9 * (1.0 + x.cwiseAbs().maxCoeff());
    if ((x.array() < -tol).any()) return;
    const Eigen::VectorXd gx = G * x;
    for (int i = 0; i < m; ++i) {
      const double d = gx[i] - h[i];
      if (rel[i] < 0 && d > tol) return;
      if (rel[i] > 0 && d < -tol) return;
      if (rel[i] == 0 && std::abs(d) > tol) return;
    }
    const double v = cost.dot(x);
    if (!best || v < *best) best = v;
  });
  return best;
}

}  // namespace detail

inline OracleResult enumerate_vertices(const lp::LinearProgram& lp) {
  const int n = lp.cols();
  const int m = lp.rows();
  std::vector<int> rel(m);
  for (int i = 0; i < m; ++i) {
    rel[i] = lp.relations[i] == lp::Relation::LessEqual ? -1
             : lp.relations[i] == lp::Relation::Equal   ? 0
                                                        : 1;
  }
  const double sign = lp.sense == lp::Sense::Maximize ? -1.0 : 1.0;
  const Eigen::VectorXd cost = sign * lp.c;
  OracleResult out;
  const auto vmin = detail::vertex_min(lp.A, lp.b, rel, cost);
  if (!vmin) return out;

  // Unbounded iff some extreme ray of the recession cone improves the cost.
  // Extreme rays are vertices of the cone cut by sum(r) = 1.
  Eigen::MatrixXd G(m + 1, n);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(m + 1);
  G.topRows(m) = lp.A;
  G.row(m).setOnes();
  h[m] = 1.0;
  std::vector<int> rrel = rel;
  rrel.push_back(0);
  const auto rmin = detail::vertex_min(G, h, rrel, cost);
  if (rmin && *rmin < -1e-9) {
    out.status = lp::Status::Unbounded;
    return out;
  }
  out.status = lp::Status::Optimal;
  out.objective = sign * *vmin;
  return out;
}

/// Random LP with n <= 5 nonnegative variables and m <= 8 mixed constraints.
inline lp::LinearProgram random_small_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nd(1, 5);
  std::uniform_int_distribution<int> md(1, 8);
  std::uniform_int_distribution<int> coef(-6, 9);
  std::uniform_int_distribution<int> reld(0, 9);
  const int n = nd(rng);
  const int m = md(rng);
  lp::LinearProgram lp(m, n);
  for (int j = 0; j < n; ++j) lp.c[j] = coef(rng);
  lp.sense = reld(rng) < 5 ? lp::Sense::Minimize : lp::Sense::Maximize;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) lp.A(i, j) = coef(rng) * 0.5;
    lp.b[i] = coef(rng) + 3;
    const int r = reld(rng);
    lp.relations[i] = r < 6 ? lp::Relation::LessEqual
                      : r < 8 ? lp::Relation::GreaterEqual
                              : lp::Relation::Equal;
  }
  return lp;
}

}  // namespace tgqm::oracle

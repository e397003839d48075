#include "tgqm/lp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace tgqm::lp {

LinearProgram::LinearProgram(int m, int n)
    : c(Eigen::VectorXd::Zero(n)),
      A(Eigen::MatrixXd::Zero(m, n)),
      relations(static_cast<std::size_t>(m), Relation::Equal),
      b(Eigen::VectorXd::Zero(m)),
      lower(Eigen::VectorXd::Zero(n)),
      upper(Eigen::VectorXd::Constant(n, kInf)) {}

void LinearProgram::validate() const {
  const auto n = c.size();
  const auto m = A.rows();
  if (A.cols() != n || b.size() != m || lower.size() != n || upper.size() != n ||
      static_cast<Eigen::Index>(relations.size()) != m) {
    throw std::invalid_argument("linear program: inconsistent dimensions");
  }
  if (!c.allFinite() || !A.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("linear program: non-finite coefficient");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
        lower[j] == kInf || upper[j] == -kInf) {
      throw std::invalid_argument("linear program: invalid variable bounds");
    }
  }
}

double max_violation(const LinearProgram& lp, const Eigen::VectorXd& x) {
  double worst = 0.0;
  const Eigen::VectorXd ax = lp.A * x;
  for (int i = 0; i < lp.rows(); ++i) {
    const double r = ax[i] - lp.b[i];
    switch (lp.relations[i]) {
      case Relation::LessEqual: worst = std::max(worst, r); break;
      case Relation::GreaterEqual: worst = std::max(worst, -r); break;
      case Relation::Equal: worst = std::max(worst, std::abs(r)); break;
    }
  }
  for (int j = 0; j < lp.cols(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  return worst;
}

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// How an original variable is expressed through nonnegative columns.
struct VarMap {
  enum Kind { Shifted, Mirrored, Split } kind = Shifted;
  int col = 0;          // y column (and col+1 for Split)
  double offset = 0.0;  // x = offset + y  or  x = offset - y
};

enum class PhaseResult { Optimal, Unbounded, Stuck };

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opt, const Eigen::VectorXd& rhs)
      : opt_(opt) {
    const int n = lp.cols();
    maps_.resize(n);
    Eigen::VectorXd b = rhs;
    int ny = 0;
    int bound_rows = 0;
    for (int j = 0; j < n; ++j) {
      const double lo = lp.lower[j];
      const double hi = lp.upper[j];
      VarMap& v = maps_[j];
      if (std::isfinite(lo)) {
        v = {VarMap::Shifted, ny++, lo};
        if (std::isfinite(hi)) ++bound_rows;
      } else if (std::isfinite(hi)) {
        v = {VarMap::Mirrored, ny++, hi};
      } else {
        v = {VarMap::Split, ny, 0.0};
        ny += 2;
      }
      if (v.offset != 0.0) b -= lp.A.col(j) * v.offset;
    }

    const int m0 = lp.rows();
    m_ = m0 + bound_rows;
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m_, ny);
    Eigen::VectorXd rb(m_);
    std::vector<Relation> rel(m_);
    for (int i = 0; i < m0; ++i) {
      rb[i] = b[i];
      rel[i] = lp.relations[i];
    }
    cost_ = Eigen::VectorXd::Zero(ny);
    const double sign = lp.sense == Sense::Maximize ? -1.0 : 1.0;
    int br = m0;
    for (int j = 0; j < n; ++j) {
      const VarMap& v = maps_[j];
      const double cj = sign * lp.c[j];
      switch (v.kind) {
        case VarMap::Shifted:
          rows.block(0, v.col, m0, 1) = lp.A.col(j);
          cost_[v.col] = cj;
          if (std::isfinite(lp.upper[j])) {
            rows(br, v.col) = 1.0;
            rb[br] = lp.upper[j] - lp.lower[j];
            rel[br] = Relation::LessEqual;
            ++br;
          }
          break;
        case VarMap::Mirrored:
          rows.block(0, v.col, m0, 1) = -lp.A.col(j);
          cost_[v.col] = -cj;
          break;
        case VarMap::Split:
          rows.block(0, v.col, m0, 1) = lp.A.col(j);
          rows.block(0, v.col + 1, m0, 1) = -lp.A.col(j);
          cost_[v.col] = cj;
          cost_[v.col + 1] = -cj;
          break;
      }
    }
    flipped_.assign(m_, false);
    for (int i = 0; i < m_; ++i) {
      if (rb[i] < 0.0) {
        flipped_[i] = true;
        rows.row(i) *= -1.0;
        rb[i] = -rb[i];
        if (rel[i] == Relation::LessEqual) rel[i] = Relation::GreaterEqual;
        else if (rel[i] == Relation::GreaterEqual) rel[i] = Relation::LessEqual;
      }
    }

    int n_slack = 0;
    int n_art = 0;
    for (int i = 0; i < m_; ++i) {
      if (rel[i] != Relation::Equal) ++n_slack;
      if (rel[i] != Relation::LessEqual) ++n_art;
    }
    ny_ = ny;
    first_art_ = ny + n_slack;
    ncols_ = first_art_ + n_art;
    rhs_col_ = ncols_;
    T_ = Tableau::Zero(m_ + 1, ncols_ + 1);
    basis_.assign(m_, -1);
    unit_col_.assign(m_, -1);
    int s = ny;
    int a = first_art_;
    for (int i = 0; i < m_; ++i) {
      T_.row(i).head(ny) = rows.row(i);
      T_(i, rhs_col_) = rb[i];
      if (rel[i] == Relation::LessEqual) {
        T_(i, s) = 1.0;
        unit_col_[i] = s;
        basis_[i] = s++;
      } else {
        if (rel[i] == Relation::GreaterEqual) T_(i, s++) = -1.0;
        T_(i, a) = 1.0;
        unit_col_[i] = a;
        basis_[i] = a++;
      }
    }
    stall_limit_ = 3 * (m_ + ncols_);
    iteration_cap_ = 50 * (m_ + ncols_) + 1000;
    rhs_scale_ = std::max(1.0, rb.size() ? rb.cwiseAbs().maxCoeff() : 0.0);
  }

  /// Returns nullopt when phase 1 proves infeasibility.
  std::optional<PhaseResult> run() {
    if (first_art_ < ncols_) {
      // Phase 1: minimize the sum of artificials.
      T_.row(m_).setZero();
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] >= first_art_) T_.row(m_) -= T_.row(i);
      }
      for (int j = first_art_; j < ncols_; ++j) T_(m_, j) = 0.0;
      const PhaseResult r = iterate(ncols_);
      if (r == PhaseResult::Stuck) return r;
      const double w = -T_(m_, rhs_col_);
      if (w > opt_.feasibility_tol * rhs_scale_) return std::nullopt;
      drive_out_artificials();
    }
    // Phase 2 objective row: reduced costs of the real problem.
    T_.row(m_).setZero();
    T_.row(m_).head(ny_) = cost_.transpose();
    for (int i = 0; i < m_; ++i) {
      const int bj = basis_[i];
      if (bj < ny_ && cost_[bj] != 0.0) T_.row(m_) -= cost_[bj] * T_.row(i);
    }
    return iterate(first_art_);
  }

  Eigen::VectorXd y() const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(ny_);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < ny_) y[basis_[i]] = std::max(0.0, T_(i, rhs_col_));
    }
    return y;
  }

  Eigen::VectorXd x(const Eigen::VectorXd& y) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(maps_.size()));
    for (std::size_t j = 0; j < maps_.size(); ++j) {
      const VarMap& v = maps_[j];
      switch (v.kind) {
        case VarMap::Shifted: x[j] = v.offset + y[v.col]; break;
        case VarMap::Mirrored: x[j] = v.offset - y[v.col]; break;
        case VarMap::Split: x[j] = y[v.col] - y[v.col + 1]; break;
      }
    }
    return x;
  }

  int iterations() const { return iterations_; }

  // Multipliers of the first `rows` constraints in the minimization form.
  // Each row owns a cost-free +e_i column, whose reduced cost is -y_i.
  Eigen::VectorXd duals(int rows) const {
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
      y[i] = -T_(m_, unit_col_[i]);
      if (flipped_[i]) y[i] = -y[i];
    }
    return y;
  }

 private:
  void pivot(int r, int c) {
    T_.row(r) /= T_(r, c);
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = T_(i, c);
      if (f != 0.0) {
        T_.row(i) -= f * T_.row(r);
        T_(i, c) = 0.0;
      }
    }
    T_(r, c) = 1.0;
    basis_[r] = c;
  }

  // Columns [0, allowed) may enter the basis.
  PhaseResult iterate(int allowed) {
    bool bland = false;
    int stall = 0;
    double best = -T_(m_, rhs_col_);
    while (true) {
      if (++iterations_ > iteration_cap_) return PhaseResult::Stuck;
      int enter = -1;
      double most = -opt_.optimality_tol;
      for (int j = 0; j < allowed; ++j) {
        const double d = T_(m_, j);
        if (d < most) {
          enter = j;
          if (bland) break;
          most = d;
        }
      }
      if (enter < 0) return PhaseResult::Optimal;

      int leave = -1;
      double ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = T_(i, enter);
        if (a <= opt_.pivot_tol) continue;
        const double q = std::max(0.0, T_(i, rhs_col_)) / a;
        if (leave < 0 || q < ratio - 1e-15 * (1.0 + ratio) ||
            (q <= ratio + 1e-15 * (1.0 + ratio) && basis_[i] < basis_[leave])) {
          leave = i;
          ratio = q;
        }
      }
      if (leave < 0) return PhaseResult::Unbounded;
      pivot(leave, enter);

      const double z = -T_(m_, rhs_col_);
      if (z < best - 1e-12 * (1.0 + std::abs(best))) {
        best = z;
        stall = 0;
      } else if (++stall > stall_limit_) {
        bland = true;
      }
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < first_art_) continue;
      // Phase 1 accepted this artificial's value as tolerance noise. Pivoting
      // it out at a nonzero value would spread it through the other rows,
      // divided by a possibly small pivot, so it is cleared first.
      T_(i, rhs_col_) = 0.0;
      int col = -1;
      double mag = opt_.pivot_tol;
      for (int j = 0; j < first_art_; ++j) {
        const double a = std::abs(T_(i, j));
        if (a > mag) {
          mag = a;
          col = j;
        }
      }
      // No candidate means the row is redundant; its artificial stays basic
      // at zero and can never move because the row has no other entries.
      if (col >= 0) pivot(i, col);
    }
  }

  SimplexOptions opt_;
  std::vector<VarMap> maps_;
  Eigen::VectorXd cost_;
  Tableau T_;
  std::vector<int> basis_;
  std::vector<int> unit_col_;
  std::vector<bool> flipped_;
  int m_ = 0;
  int ny_ = 0;
  int first_art_ = 0;
  int ncols_ = 0;
  int rhs_col_ = 0;
  int stall_limit_ = 0;
  int iteration_cap_ = 0;
  int iterations_ = 0;
  double rhs_scale_ = 1.0;
};

// nullopt: numerical trouble, caller may retry.
std::optional<LpOutcome> attempt(const LinearProgram& lp, const SimplexOptions& opt,
                                 const Eigen::VectorXd& rhs) {
  Simplex s(lp, opt, rhs);
  LpOutcome out;
  const auto r = s.run();
  out.iterations = s.iterations();
  if (!r) {
    out.status = Status::Infeasible;
    return out;
  }
  if (*r == PhaseResult::Stuck) return std::nullopt;
  if (*r == PhaseResult::Unbounded) {
    out.status = Status::Unbounded;
    return out;
  }
  out.status = Status::Optimal;
  out.x = s.x(s.y());
  const double scale =
      std::max(1.0, lp.b.size() ? lp.b.cwiseAbs().maxCoeff() : 0.0);
  if (max_violation(lp, out.x) > opt.feasibility_tol * scale) return std::nullopt;
  out.objective = lp.c.dot(out.x);
  out.duals = s.duals(lp.rows());
  if (lp.sense == Sense::Maximize) out.duals = -out.duals;
  return out;
}

}  // namespace

LpOutcome solve(const LinearProgram& lp, const SimplexOptions& options) {
  lp.validate();
  if (auto out = attempt(lp, options, lp.b)) return *out;
  // Retry once on a deterministically perturbed right-hand side; the
  // perturbation is far below the feasibility tolerance.
  Eigen::VectorXd rhs = lp.b;
  for (Eigen::Index i = 0; i < rhs.size(); ++i) {
    const double jitter = 0.5 + 0.5 * std::fmod(0.6180339887498949 * double(i + 1), 1.0);
    rhs[i] += 1e-10 * jitter * (1.0 + std::abs(rhs[i]));
  }
  if (auto out = attempt(lp, options, rhs)) return *out;
  throw NumericalFailure("simplex: no consistent solution after perturbation retry");
}

}  // namespace tgqm::lp

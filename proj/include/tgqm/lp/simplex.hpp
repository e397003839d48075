#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace tgqm::lp {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense linear program
///   optimize c·x  s.t.  A_i·x (rel_i) b_i,  lower <= x <= upper.
/// Bounds may be infinite; by default every variable is nonnegative.
struct LinearProgram {
  Eigen::VectorXd c;
  Sense sense = Sense::Minimize;
  Eigen::MatrixXd A;
  std::vector<Relation> relations;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  LinearProgram() = default;
  /// m constraints (all Equal, zero rhs), n variables in [0, +inf), zero cost.
  LinearProgram(int m, int n);

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }

  void set_free(int j) {
    lower[j] = -kInf;
    upper[j] = kInf;
  }

  /// Throws std::invalid_argument on inconsistent dimensions, non-finite
  /// coefficients or lower > upper.
  void validate() const;
};

struct LpOutcome {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;          // filled when Optimal
  double objective = 0.0;     // in the caller's sense; meaningful when Optimal
  /// Constraint multipliers y when Optimal, one per row, signed so that
  /// c - Aᵀy is the reduced-cost vector of the caller's problem.
  Eigen::VectorXd duals;
  int iterations = 0;
};

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-12;
};

/// Two-phase dense tableau simplex. Dantzig pricing, switching to Bland's
/// rule after 3·(m+n) consecutive pivots without objective progress. Fully
/// deterministic. Throws NumericalFailure when the result cannot be made
/// consistent even after one retry on a slightly perturbed right-hand side.
LpOutcome solve(const LinearProgram& lp, const SimplexOptions& options = {});

/// Largest violation of constraints and bounds by x (0 when feasible).
double max_violation(const LinearProgram& lp, const Eigen::VectorXd& x);

}  // namespace tgqm::lp

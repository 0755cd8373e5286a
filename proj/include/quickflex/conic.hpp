#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace quickflex {

// Standard-form LP/SOCP instance:
//   minimize    c'z
//   subject to  A z = b
//               lo <= z <= hi        (entries may be +-inf)
//               z[t] >= || (z[u], z[v], ...) ||   for each soc block
// Dimension errors are rejected at construction, never inside the solver.

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ConicProblem {
 public:
  ConicProblem() = default;
  explicit ConicProblem(int n_vars);

  int n_vars() const { return n_; }
  int add_var(double lo = -kInf, double hi = kInf);

  void set_objective(int col, double coeff);
  void add_objective(int col, double coeff);
  void clear_objective();
  const Eigen::VectorXd& objective() const { return c_; }

  void set_bounds(int col, double lo, double hi);
  double lower(int col) const { return lo_[col]; }
  double upper(int col) const { return hi_[col]; }

  using Row = std::vector<std::pair<int, double>>;
  int add_equality(const Row& terms, double rhs);
  int eq_count() const { return static_cast<int>(eq_rows_.size()); }

  // Head index first; tail of length >= 1.
  void add_soc(const std::vector<int>& block);
  const std::vector<std::vector<int>>& soc_blocks() const { return soc_; }

  Eigen::MatrixXd eq_matrix() const;
  Eigen::VectorXd eq_rhs() const;
  const std::vector<Row>& eq_rows() const { return eq_rows_; }
  const std::vector<double>& eq_rhs_values() const { return eq_rhs_; }

 private:
  void check_col(int col, const char* where) const;

  int n_ = 0;
  Eigen::VectorXd c_;
  std::vector<double> lo_, hi_;
  std::vector<Row> eq_rows_;
  std::vector<double> eq_rhs_;
  std::vector<std::vector<int>> soc_;
  std::vector<char> soc_head_;   // per-variable flag, heads must be unique
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter, NumericalFailure };

const char* to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd z;
  double objective_value = 0.0;
  double primal_residual = 0.0;   // max |A z - b| and cone/bound slack residual
  double dual_residual = 0.0;
  double gap = 0.0;               // complementarity gap at the returned point
  int iterations = 0;
};

struct SolverOptions {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iter = 100;
};

// Dense primal-dual interior point method (Mehrotra predictor-corrector with
// Nesterov-Todd scaling) on the homogeneous self-dual embedding. Pure
// function of its inputs; deterministic.
Solution solve(const ConicProblem& problem, const SolverOptions& opts = {});

struct ResidualReport {
  double max_eq_residual = 0.0;
  double max_bound_violation = 0.0;
  double max_cone_violation = 0.0;
  double worst() const;
};

// Independent feasibility audit of a candidate point.
ResidualReport check_solution(const ConicProblem& problem, const Eigen::VectorXd& z);

}  // namespace quickflex

#include "quickflex/conic.hpp"

#include <algorithm>
#include <cmath>

namespace quickflex {

// ---------------------------------------------------------------------------
// Problem container

ConicProblem::ConicProblem(int n_vars) {
  if (n_vars < 0) throw std::invalid_argument("ConicProblem: negative variable count");
  n_ = n_vars;
  c_ = Eigen::VectorXd::Zero(n_);
  lo_.assign(static_cast<std::size_t>(n_), -kInf);
  hi_.assign(static_cast<std::size_t>(n_), kInf);
  soc_head_.assign(static_cast<std::size_t>(n_), 0);
}

void ConicProblem::check_col(int col, const char* where) const {
  if (col < 0 || col >= n_)
    throw std::invalid_argument(std::string(where) + ": column " + std::to_string(col) +
                                " out of range (n_vars = " + std::to_string(n_) + ")");
}

int ConicProblem::add_var(double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("add_var: lo > hi");
  c_.conservativeResize(n_ + 1);
  c_[n_] = 0.0;
  lo_.push_back(lo);
  hi_.push_back(hi);
  soc_head_.push_back(0);
  return n_++;
}

void ConicProblem::set_objective(int col, double coeff) {
  check_col(col, "set_objective");
  if (!std::isfinite(coeff)) throw std::invalid_argument("set_objective: non-finite coefficient");
  c_[col] = coeff;
}

void ConicProblem::add_objective(int col, double coeff) {
  check_col(col, "add_objective");
  if (!std::isfinite(coeff)) throw std::invalid_argument("add_objective: non-finite coefficient");
  c_[col] += coeff;
}

void ConicProblem::clear_objective() { c_.setZero(); }

void ConicProblem::set_bounds(int col, double lo, double hi) {
  check_col(col, "set_bounds");
  if (lo > hi) throw std::invalid_argument("set_bounds: lo > hi");
  lo_[static_cast<std::size_t>(col)] = lo;
  hi_[static_cast<std::size_t>(col)] = hi;
}

int ConicProblem::add_equality(const Row& terms, double rhs) {
  for (const auto& [col, coeff] : terms) {
    check_col(col, "add_equality");
    if (!std::isfinite(coeff)) throw std::invalid_argument("add_equality: non-finite coefficient");
  }
  if (!std::isfinite(rhs)) throw std::invalid_argument("add_equality: non-finite rhs");
  eq_rows_.push_back(terms);
  eq_rhs_.push_back(rhs);
  return static_cast<int>(eq_rows_.size()) - 1;
}

void ConicProblem::add_soc(const std::vector<int>& block) {
  if (block.size() < 2) throw std::invalid_argument("add_soc: block needs a head and a tail");
  for (int col : block) check_col(col, "add_soc");
  if (soc_head_[static_cast<std::size_t>(block[0])])
    throw std::invalid_argument("add_soc: variable " + std::to_string(block[0]) +
                                " heads more than one cone");
  soc_head_[static_cast<std::size_t>(block[0])] = 1;
  soc_.push_back(block);
}

Eigen::MatrixXd ConicProblem::eq_matrix() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eq_rows_.size()), n_);
  for (std::size_t r = 0; r < eq_rows_.size(); ++r)
    for (const auto& [col, coeff] : eq_rows_[r]) A(static_cast<Eigen::Index>(r), col) += coeff;
  return A;
}

Eigen::VectorXd ConicProblem::eq_rhs() const {
  return Eigen::Map<const Eigen::VectorXd>(eq_rhs_.data(), static_cast<Eigen::Index>(eq_rhs_.size()));
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

double ResidualReport::worst() const {
  return std::max({max_eq_residual, max_bound_violation, max_cone_violation});
}

ResidualReport check_solution(const ConicProblem& problem, const Eigen::VectorXd& z) {
  if (z.size() != problem.n_vars())
    throw std::invalid_argument("check_solution: point has wrong dimension");
  ResidualReport rep;
  const auto& rows = problem.eq_rows();
  const auto& rhs = problem.eq_rhs_values();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double acc = -rhs[r];
    for (const auto& [col, coeff] : rows[r]) acc += coeff * z[col];
    rep.max_eq_residual = std::max(rep.max_eq_residual, std::abs(acc));
  }
  for (int j = 0; j < problem.n_vars(); ++j) {
    if (std::isfinite(problem.lower(j)))
      rep.max_bound_violation = std::max(rep.max_bound_violation, problem.lower(j) - z[j]);
    if (std::isfinite(problem.upper(j)))
      rep.max_bound_violation = std::max(rep.max_bound_violation, z[j] - problem.upper(j));
  }
  rep.max_bound_violation = std::max(rep.max_bound_violation, 0.0);
  for (const auto& block : problem.soc_blocks()) {
    double tail = 0.0;
    for (std::size_t i = 1; i < block.size(); ++i) tail += z[block[i]] * z[block[i]];
    rep.max_cone_violation = std::max(rep.max_cone_violation, std::sqrt(tail) - z[block[0]]);
  }
  rep.max_cone_violation = std::max(rep.max_cone_violation, 0.0);
  return rep;
}

// ---------------------------------------------------------------------------
// Standard conic form
//
//   min c'x   s.t.  A x = b,   G x + s = h,   s in K = R+^nlin x product of Q
//
// Bounds become orthant rows, soc blocks become identity rows into Q. Fixed
// variables (lo == hi) turn into equality rows.

namespace {

struct StdForm {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  int nlin = 0;
  std::vector<int> soc_dims;
  int m() const { return static_cast<int>(G.rows()); }
  int degree() const { return nlin + static_cast<int>(soc_dims.size()); }
};

StdForm translate(const ConicProblem& p) {
  const int n = p.n_vars();
  StdForm f;
  f.c = p.objective();

  std::vector<std::pair<int, double>> fixed;
  std::vector<std::pair<int, double>> lowers, uppers;
  for (int j = 0; j < n; ++j) {
    const double lo = p.lower(j), hi = p.upper(j);
    if (std::isfinite(lo) && std::isfinite(hi) && lo == hi) {
      fixed.emplace_back(j, lo);
      continue;
    }
    if (std::isfinite(lo)) lowers.emplace_back(j, lo);
    if (std::isfinite(hi)) uppers.emplace_back(j, hi);
  }

  const int p_rows = p.eq_count() + static_cast<int>(fixed.size());
  f.A = Eigen::MatrixXd::Zero(p_rows, n);
  f.b = Eigen::VectorXd::Zero(p_rows);
  const auto& rows = p.eq_rows();
  const auto& rhs = p.eq_rhs_values();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [col, coeff] : rows[r]) f.A(static_cast<Eigen::Index>(r), col) += coeff;
    f.b[static_cast<Eigen::Index>(r)] = rhs[r];
  }
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size() + i);
    f.A(r, fixed[i].first) = 1.0;
    f.b[r] = fixed[i].second;
  }

  f.nlin = static_cast<int>(lowers.size() + uppers.size());
  int soc_total = 0;
  for (const auto& blk : p.soc_blocks()) soc_total += static_cast<int>(blk.size());
  f.G = Eigen::MatrixXd::Zero(f.nlin + soc_total, n);
  f.h = Eigen::VectorXd::Zero(f.nlin + soc_total);

  Eigen::Index r = 0;
  for (const auto& [j, lo] : lowers) {   // s = x_j - lo >= 0
    f.G(r, j) = -1.0;
    f.h[r] = -lo;
    ++r;
  }
  for (const auto& [j, hi] : uppers) {   // s = hi - x_j >= 0
    f.G(r, j) = 1.0;
    f.h[r] = hi;
    ++r;
  }
  for (const auto& blk : p.soc_blocks()) {   // s = x_block in Q
    for (int col : blk) {
      f.G(r, col) = -1.0;
      ++r;
    }
    f.soc_dims.push_back(static_cast<int>(blk.size()));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Cone algebra over stacked slack vectors

struct Cone {
  int nlin = 0;
  std::vector<int> soc_dims;
  int m = 0;

  int degree() const { return nlin + static_cast<int>(soc_dims.size()); }

  Eigen::VectorXd identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e.head(nlin).setOnes();
    int off = nlin;
    for (int d : soc_dims) {
      e[off] = 1.0;
      off += d;
    }
    return e;
  }

  // Largest eigenvalue deficit: amount that must be added along e to reach
  // the interior. Negative when already strictly interior.
  double max_step(const Eigen::VectorXd& u) const {
    double t = -kInf;
    for (int i = 0; i < nlin; ++i) t = std::max(t, -u[i]);
    int off = nlin;
    for (int d : soc_dims) {
      t = std::max(t, u.segment(off + 1, d - 1).norm() - u[off]);
      off += d;
    }
    return t;
  }

  // Jordan product u o v.
  Eigen::VectorXd sprod(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(m);
    out.head(nlin) = u.head(nlin).cwiseProduct(v.head(nlin));
    int off = nlin;
    for (int d : soc_dims) {
      out[off] = u.segment(off, d).dot(v.segment(off, d));
      out.segment(off + 1, d - 1) =
          u[off] * v.segment(off + 1, d - 1) + v[off] * u.segment(off + 1, d - 1);
      off += d;
    }
    return out;
  }

  // Solve lambda o x = v.
  Eigen::VectorXd sinv(const Eigen::VectorXd& lambda, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(m);
    for (int i = 0; i < nlin; ++i) out[i] = v[i] / lambda[i];
    int off = nlin;
    for (int d : soc_dims) {
      const double l0 = lambda[off];
      const auto l1 = lambda.segment(off + 1, d - 1);
      const double a = std::max(l0 * l0 - l1.squaredNorm(), 1e-300);
      const double x0 = (l0 * v[off] - l1.dot(v.segment(off + 1, d - 1))) / a;
      out[off] = x0;
      out.segment(off + 1, d - 1) = (v.segment(off + 1, d - 1) - x0 * l1) / l0;
      off += d;
    }
    return out;
  }

  // sup { a : u + a*du in K }, capped at `cap`.
  double step_to_boundary(const Eigen::VectorXd& u, const Eigen::VectorXd& du, double cap) const {
    double alpha = cap;
    for (int i = 0; i < nlin; ++i)
      if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
    int off = nlin;
    for (int d : soc_dims) {
      const double u0 = u[off];
      const double du0 = du[off];
      const auto u1 = u.segment(off + 1, d - 1);
      const auto du1 = du.segment(off + 1, d - 1);
      if (du0 < 0.0) alpha = std::min(alpha, -u0 / du0);
      const double a = du0 * du0 - du1.squaredNorm();
      const double b = 2.0 * (u0 * du0 - u1.dot(du1));
      const double c = u0 * u0 - u1.squaredNorm();
      double aq = kInf;
      if (std::abs(a) < 1e-14) {
        if (b < 0.0) aq = -c / b;
      } else if (a > 0.0) {
        if (b < 0.0) {
          const double disc = b * b - 4.0 * a * c;
          if (disc > 0.0) aq = (-b - std::sqrt(disc)) / (2.0 * a);
        }
      } else {
        const double disc = b * b - 4.0 * a * c;
        aq = (-b - std::sqrt(std::max(disc, 0.0))) / (2.0 * a);
      }
      if (aq >= 0.0) alpha = std::min(alpha, aq);
      off += d;
    }
    return alpha;
  }
};

// Nesterov-Todd scaling: symmetric W with W z = W^{-1} s = lambda.
struct Scaling {
  Eigen::VectorXd w_orth;                 // diagonal block
  std::vector<Eigen::MatrixXd> W_soc;
  std::vector<Eigen::MatrixXd> Winv_soc;
  Eigen::VectorXd lambda;

  static bool compute(const Cone& K, const Eigen::VectorXd& s, const Eigen::VectorXd& z,
                      Scaling& out) {
    out.w_orth.resize(K.nlin);
    out.W_soc.clear();
    out.Winv_soc.clear();
    out.lambda.resize(K.m);
    for (int i = 0; i < K.nlin; ++i) {
      if (s[i] <= 0.0 || z[i] <= 0.0) return false;
      out.w_orth[i] = std::sqrt(s[i] / z[i]);
      out.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    int off = K.nlin;
    for (int d : K.soc_dims) {
      const auto sb = s.segment(off, d);
      const auto zb = z.segment(off, d);
      const double sres = sb[0] * sb[0] - sb.tail(d - 1).squaredNorm();
      const double zres = zb[0] * zb[0] - zb.tail(d - 1).squaredNorm();
      if (sres <= 0.0 || zres <= 0.0 || sb[0] <= 0.0 || zb[0] <= 0.0) return false;
      const Eigen::VectorXd sbar = sb / std::sqrt(sres);
      const Eigen::VectorXd zbar = zb / std::sqrt(zres);
      const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
      // J-unit scaling point; W is the square root of its quadratic
      // representation, so that W z = W^{-1} s holds exactly.
      Eigen::VectorXd v(d);
      v[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
      v.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2.0 * gamma);
      const double eta = std::pow(sres / zres, 0.25);
      auto sqrt_rep = [d](const Eigen::VectorXd& u) {
        Eigen::MatrixXd M(d, d);
        M(0, 0) = u[0];
        M.row(0).tail(d - 1) = u.tail(d - 1).transpose();
        M.col(0).tail(d - 1) = u.tail(d - 1);
        M.bottomRightCorner(d - 1, d - 1) =
            Eigen::MatrixXd::Identity(d - 1, d - 1) +
            u.tail(d - 1) * u.tail(d - 1).transpose() / (1.0 + u[0]);
        return M;
      };
      Eigen::MatrixXd W = eta * sqrt_rep(v);
      Eigen::VectorXd jv = v;
      jv.tail(d - 1) = -jv.tail(d - 1);
      Eigen::MatrixXd Winv = sqrt_rep(jv) / eta;
      out.lambda.segment(off, d) = W * zb;
      out.W_soc.push_back(std::move(W));
      out.Winv_soc.push_back(std::move(Winv));
      off += d;
    }
    return out.lambda.allFinite();
  }

  Eigen::VectorXd applyW(const Cone& K, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(K.m);
    out.head(K.nlin) = w_orth.cwiseProduct(u.head(K.nlin));
    int off = K.nlin;
    for (std::size_t k = 0; k < K.soc_dims.size(); ++k) {
      const int d = K.soc_dims[k];
      out.segment(off, d) = W_soc[k] * u.segment(off, d);
      off += d;
    }
    return out;
  }

  Eigen::VectorXd applyWinv(const Cone& K, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(K.m);
    out.head(K.nlin) = u.head(K.nlin).cwiseQuotient(w_orth);
    int off = K.nlin;
    for (std::size_t k = 0; k < K.soc_dims.size(); ++k) {
      const int d = K.soc_dims[k];
      out.segment(off, d) = Winv_soc[k] * u.segment(off, d);
      off += d;
    }
    return out;
  }

  Eigen::MatrixXd WtW(const Cone& K) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(K.m, K.m);
    for (int i = 0; i < K.nlin; ++i) M(i, i) = w_orth[i] * w_orth[i];
    int off = K.nlin;
    for (std::size_t k = 0; k < K.soc_dims.size(); ++k) {
      const int d = K.soc_dims[k];
      M.block(off, off, d, d) = W_soc[k] * W_soc[k];
      off += d;
    }
    return M;
  }
};

struct KktSolver {
  // [ dI   A'   G'      ] [ux]   [bx]
  // [ A   -dI   0       ] [uy] = [by]
  // [ G    0   -(WtW+dI)] [uz]   [bz]
  Eigen::MatrixXd K0;   // unregularized, for refinement
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  int n = 0, p = 0, m = 0;

  bool factor(const StdForm& f, const Eigen::MatrixXd& WtW, double reg) {
    n = static_cast<int>(f.A.cols());
    p = static_cast<int>(f.A.rows());
    m = f.m();
    const int N = n + p + m;
    K0 = Eigen::MatrixXd::Zero(N, N);
    K0.block(0, n, n, p) = f.A.transpose();
    K0.block(0, n + p, n, m) = f.G.transpose();
    K0.block(n, 0, p, n) = f.A;
    K0.block(n + p, 0, m, n) = f.G;
    K0.block(n + p, n + p, m, m) = -WtW;
    Eigen::MatrixXd Kreg = K0;
    for (int i = 0; i < n; ++i) Kreg(i, i) += reg;
    for (int i = n; i < N; ++i) Kreg(i, i) -= reg;
    lu.compute(Kreg);
    return lu.matrixLU().allFinite();
  }

  bool solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const Eigen::VectorXd& bz,
             Eigen::VectorXd& ux, Eigen::VectorXd& uy, Eigen::VectorXd& uz) const {
    Eigen::VectorXd rhs(n + p + m);
    rhs << bx, by, bz;
    Eigen::VectorXd sol = lu.solve(rhs);
    for (int round = 0; round < 3; ++round) {
      Eigen::VectorXd resid = rhs - K0 * sol;
      sol += lu.solve(resid);
    }
    if (!sol.allFinite()) return false;
    ux = sol.head(n);
    uy = sol.segment(n, p);
    uz = sol.tail(m);
    return true;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior point loop

Solution solve(const ConicProblem& problem, const SolverOptions& opts) {
  const StdForm f = translate(problem);
  const int n = static_cast<int>(f.A.cols());
  const int p = static_cast<int>(f.A.rows());
  const int m = f.m();

  Cone K{f.nlin, f.soc_dims, m};

  Solution out;
  out.z = Eigen::VectorXd::Zero(problem.n_vars());

  if (m == 0) {
    // Nothing conic to work with; only the degenerate fully-equality case is
    // meaningful and the general path below needs at least one cone row.
    out.status = SolveStatus::NumericalFailure;
    return out;
  }

  double data_norm = 1.0;
  data_norm = std::max(data_norm, f.c.lpNorm<Eigen::Infinity>());
  if (p > 0) {
    data_norm = std::max(data_norm, f.A.lpNorm<Eigen::Infinity>());
    data_norm = std::max(data_norm, f.b.lpNorm<Eigen::Infinity>());
  }
  data_norm = std::max(data_norm, f.G.lpNorm<Eigen::Infinity>());
  data_norm = std::max(data_norm, f.h.lpNorm<Eigen::Infinity>());

  const double reg = 1e-11 * data_norm;
  const Eigen::VectorXd e = K.identity();
  const double deg = K.degree();

  // Initial point: W = I solves for a primal candidate and a dual candidate,
  // each shifted into the cone interior.
  KktSolver kkt;
  if (!kkt.factor(f, Eigen::MatrixXd::Identity(m, m), reg)) {
    out.status = SolveStatus::NumericalFailure;
    return out;
  }
  Eigen::VectorXd x(n), y(p), z(m), s(m), ux, uy, uz;
  if (!kkt.solve(Eigen::VectorXd::Zero(n), f.b, f.h, ux, uy, uz)) {
    out.status = SolveStatus::NumericalFailure;
    return out;
  }
  x = ux;
  s = -uz;
  double shift = K.max_step(s);
  if (shift >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + shift) * e;
  if (!kkt.solve(-f.c, Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(m), ux, uy, uz)) {
    out.status = SolveStatus::NumericalFailure;
    return out;
  }
  y = uy;
  z = uz;
  shift = K.max_step(z);
  if (shift >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + shift) * e;

  double tau = 1.0, kappa = 1.0;

  auto fill_point = [&](Solution& sol) {
    const double t = std::max(tau, 1e-300);
    Eigen::VectorXd X = x / t;
    sol.z = X;
    sol.objective_value = f.c.dot(X);
    Eigen::VectorXd Y = y / t, Z = z / t, S = s / t;
    double pres = (f.G * X + S - f.h).lpNorm<Eigen::Infinity>();
    if (p > 0) pres = std::max(pres, (f.A * X - f.b).lpNorm<Eigen::Infinity>());
    double dres = (f.A.transpose() * Y + f.G.transpose() * Z + f.c).lpNorm<Eigen::Infinity>();
    const double gap_abs = s.dot(z) / (t * t);
    const double relgap = gap_abs / std::max(1.0, std::abs(sol.objective_value));
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    sol.gap = std::min(gap_abs, relgap);
  };

  Scaling W;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    out.iterations = iter;

    // Residuals of the self-dual system.
    Eigen::VectorXd r1 = f.A.transpose() * y + f.G.transpose() * z + f.c * tau;
    Eigen::VectorXd r2 = f.A * x - f.b * tau;
    Eigen::VectorXd r3 = f.G * x + s - f.h * tau;
    const double r4 = f.c.dot(x) + f.b.dot(y) + f.h.dot(z) + kappa;

    if (!r1.allFinite() || !r3.allFinite() || !std::isfinite(r4)) {
      fill_point(out);
      out.status = SolveStatus::NumericalFailure;
      return out;
    }

    // Convergence at the descaled point.
    {
      Solution probe;
      probe.iterations = iter;
      fill_point(probe);
      if (probe.primal_residual <= opts.tol_feas && probe.dual_residual <= opts.tol_feas &&
          probe.gap <= opts.tol_gap) {
        probe.status = SolveStatus::Optimal;
        probe.z.conservativeResize(problem.n_vars());
        out = probe;
        return out;
      }
    }

    // Infeasibility certificates.
    const double bty_htz = f.b.dot(y) + f.h.dot(z);
    if (bty_htz < -1e-12) {
      const double res = (f.A.transpose() * y + f.G.transpose() * z).lpNorm<Eigen::Infinity>() /
                         (-bty_htz);
      if (res <= opts.tol_feas * data_norm) {
        fill_point(out);
        out.status = SolveStatus::Infeasible;
        return out;
      }
    }
    const double ctx = f.c.dot(x);
    if (ctx < -1e-12) {
      double res = (f.G * x + s).lpNorm<Eigen::Infinity>();
      if (p > 0) res = std::max(res, (f.A * x).lpNorm<Eigen::Infinity>());
      if (res / (-ctx) <= opts.tol_feas * data_norm) {
        fill_point(out);
        out.status = SolveStatus::Unbounded;
        return out;
      }
    }

    if (iter == opts.max_iter) break;

    if (!Scaling::compute(K, s, z, W)) {
      fill_point(out);
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
    const double mu = (s.dot(z) + tau * kappa) / (deg + 1.0);

    if (!kkt.factor(f, W.WtW(K), reg)) {
      fill_point(out);
      out.status = SolveStatus::NumericalFailure;
      return out;
    }

    // tau-column solve, shared by both directions this iteration.
    Eigen::VectorXd x1, y1, z1;
    if (!kkt.solve(-f.c, f.b, f.h, x1, y1, z1)) {
      fill_point(out);
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
    const double denom = f.c.dot(x1) + f.b.dot(y1) + f.h.dot(z1) - kappa / tau;

    auto newton = [&](const Eigen::VectorXd& d1, const Eigen::VectorXd& d2,
                      const Eigen::VectorXd& d3, double d4, const Eigen::VectorXd& dsvec,
                      double dkt, Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz,
                      Eigen::VectorXd& ds, double& dtau, double& dkappa) -> bool {
      const Eigen::VectorXd wls = W.applyW(K, K.sinv(W.lambda, dsvec));
      Eigen::VectorXd x0, y0, z0;
      if (!kkt.solve(d1, d2, d3 - wls, x0, y0, z0)) return false;
      const double d4p = d4 - dkt / tau;
      if (std::abs(denom) < 1e-300) return false;
      dtau = (d4p - (f.c.dot(x0) + f.b.dot(y0) + f.h.dot(z0))) / denom;
      dx = x0 + dtau * x1;
      dy = y0 + dtau * y1;
      dz = z0 + dtau * z1;
      ds = wls - W.applyW(K, W.applyW(K, dz));
      dkappa = (dkt - kappa * dtau) / tau;
      return std::isfinite(dtau) && ds.allFinite();
    };

    auto boundary = [&](const Eigen::VectorXd& ds, const Eigen::VectorXd& dz, double dtau,
                        double dkappa, double cap) {
      double a = K.step_to_boundary(s, ds, cap);
      a = K.step_to_boundary(z, dz, a);
      if (dtau < 0.0) a = std::min(a, -tau / dtau);
      if (dkappa < 0.0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    // Predictor.
    Eigen::VectorXd dxa, dya, dza, dsa;
    double dtaua, dkappaa;
    if (!newton(-r1, -r2, -r3, -r4, -K.sprod(W.lambda, W.lambda), -tau * kappa, dxa, dya, dza,
                dsa, dtaua, dkappaa)) {
      fill_point(out);
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
    const double alpha_aff = boundary(dsa, dza, dtaua, dkappaa, 1.0);
    const double gap_now = s.dot(z) + tau * kappa;
    const double gap_aff = (s + alpha_aff * dsa).dot(z + alpha_aff * dza) +
                           (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa);
    double sigma = std::clamp(gap_aff / gap_now, 0.0, 1.0);
    sigma = sigma * sigma * sigma;

    // Corrector.
    Eigen::VectorXd corr = K.sprod(W.applyWinv(K, dsa), W.applyW(K, dza));
    Eigen::VectorXd dsvec = sigma * mu * e - K.sprod(W.lambda, W.lambda) - corr;
    const double dkt = sigma * mu - tau * kappa - dtaua * dkappaa;
    const double rf = 1.0 - sigma;
    Eigen::VectorXd dx, dy, dz, ds;
    double dtau, dkappa;
    if (!newton(-rf * r1, -rf * r2, -rf * r3, -rf * r4, dsvec, dkt, dx, dy, dz, ds, dtau,
                dkappa)) {
      fill_point(out);
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
    double alpha = std::min(1.0, 0.99 * boundary(ds, dz, dtau, dkappa, kInf));
    if (alpha < 1e-10) {
      fill_point(out);
      out.status = SolveStatus::NumericalFailure;
      return out;
    }

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (tau <= 0.0 || kappa < 0.0 || !std::isfinite(tau)) {
      fill_point(out);
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
  }

  fill_point(out);
  out.status = SolveStatus::MaxIter;
  return out;
}

}  // namespace quickflex

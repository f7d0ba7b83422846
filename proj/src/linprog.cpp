#include "ibckit/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ibckit::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration-limit";
  }
  return "?";
}

namespace {

constexpr double kPivotEps = 1e-11;
constexpr int kMaxIterations = 10000;

// x_j = shift + sum coef * y_col
struct VarMap {
  double shift = 0.0;
  std::vector<std::pair<int, double>> terms;
};

class Tableau {
 public:
  Tableau(Mat t, std::vector<int> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  int rows() const { return static_cast<int>(t_.rows()); }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  double rhs(int r) const { return t_(r, cols()); }
  const std::vector<int>& basis() const { return basis_; }

  // Maximizes cost . z over columns with allowed[j]; returns kOptimal or kUnbounded.
  Status optimize(const Vec& cost, const std::vector<bool>& allowed) {
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      int enter = -1;
      for (int j = 0; j < cols(); ++j) {
        if (!allowed[j]) continue;
        double d = cost[j];
        for (int r = 0; r < rows(); ++r) d -= cost[basis_[r]] * t_(r, j);
        if (d > 1e-10) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::kOptimal;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows(); ++r) {
        const double a = t_(r, enter);
        if (a <= kPivotEps) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return Status::kUnbounded;
      pivot(leave, enter);
    }
    return Status::kIterationLimit;
  }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  double entry(int r, int c) const { return t_(r, c); }

  Vec values() const {
    Vec z = Vec::Zero(cols());
    for (int r = 0; r < rows(); ++r) z[basis_[r]] = rhs(r);
    return z;
  }

 private:
  Mat t_;
  std::vector<int> basis_;
};

}  // namespace

Result solve(const Problem& problem) {
  const auto nvars = problem.objective.size();
  const auto ncons = problem.a.rows();
  if (problem.a.cols() != nvars || problem.b.size() != ncons || problem.lower.size() != nvars ||
      problem.upper.size() != nvars)
    throw Error(ErrorCode::kInvalidArgument, "LP dimension mismatch");

  // Map bounded/free variables onto nonnegative ones.
  std::vector<VarMap> maps(nvars);
  std::vector<std::pair<int, double>> extra_rows;  // y_col <= bound
  int ny = 0;
  for (Eigen::Index j = 0; j < nvars; ++j) {
    const double lo = problem.lower[j];
    const double hi = problem.upper[j];
    if (lo > hi) return Result{Status::kInfeasible, Vec(), 0.0};
    if (std::isfinite(lo)) {
      maps[j] = {lo, {{ny, 1.0}}};
      if (std::isfinite(hi)) extra_rows.push_back({ny, hi - lo});
      ++ny;
    } else if (std::isfinite(hi)) {
      maps[j] = {hi, {{ny, -1.0}}};
      ++ny;
    } else {
      maps[j] = {0.0, {{ny, 1.0}, {ny + 1, -1.0}}};
      ny += 2;
    }
  }

  const int m = static_cast<int>(ncons) + static_cast<int>(extra_rows.size());
  Mat ay = Mat::Zero(m, ny);
  Vec by(m);
  for (Eigen::Index i = 0; i < ncons; ++i) {
    double rhs = problem.b[i];
    for (Eigen::Index j = 0; j < nvars; ++j) {
      const double a = problem.a(i, j);
      if (a == 0.0) continue;
      rhs -= a * maps[j].shift;
      for (const auto& [col, coef] : maps[j].terms) ay(i, col) += a * coef;
    }
    by[i] = rhs;
  }
  for (std::size_t k = 0; k < extra_rows.size(); ++k) {
    const int row = static_cast<int>(ncons) + static_cast<int>(k);
    ay(row, extra_rows[k].first) = 1.0;
    by[row] = extra_rows[k].second;
  }

  int nart = 0;
  for (int i = 0; i < m; ++i)
    if (by[i] < 0.0) ++nart;
  const int ncols = ny + m + nart;
  Mat t = Mat::Zero(m, ncols + 1);
  std::vector<int> basis(m);
  int art = ny + m;
  for (int i = 0; i < m; ++i) {
    const double sign = by[i] < 0.0 ? -1.0 : 1.0;
    t.row(i).head(ny) = sign * ay.row(i);
    t(i, ny + i) = sign;
    t(i, ncols) = sign * by[i];
    if (by[i] < 0.0) {
      t(i, art) = 1.0;
      basis[i] = art++;
    } else {
      basis[i] = ny + i;
    }
  }
  Tableau tab(std::move(t), std::move(basis));

  if (nart > 0) {
    Vec cost = Vec::Zero(ncols);
    cost.tail(nart).setConstant(-1.0);
    const std::vector<bool> all(ncols, true);
    const Status s = tab.optimize(cost, all);
    if (s == Status::kIterationLimit) return Result{s, Vec(), 0.0};
    double infeas = 0.0;
    const Vec z = tab.values();
    for (int j = ny + m; j < ncols; ++j) infeas += z[j];
    const double scale = std::max(1.0, by.cwiseAbs().maxCoeff());
    if (infeas > 1e-9 * scale) return Result{Status::kInfeasible, Vec(), 0.0};
    // Drive zero-level artificials out of the basis where possible.
    for (int r = 0; r < tab.rows(); ++r) {
      if (tab.basis()[r] < ny + m) continue;
      for (int j = 0; j < ny + m; ++j) {
        if (std::abs(tab.entry(r, j)) > 1e-9) {
          tab.pivot(r, j);
          break;
        }
      }
    }
  }

  Vec cost = Vec::Zero(ncols);
  for (Eigen::Index j = 0; j < nvars; ++j)
    for (const auto& [col, coef] : maps[j].terms) cost[col] += problem.objective[j] * coef;
  std::vector<bool> allowed(ncols, true);
  for (int j = ny + m; j < ncols; ++j) allowed[j] = false;
  const Status s = tab.optimize(cost, allowed);
  if (s != Status::kOptimal) return Result{s, Vec(), 0.0};

  const Vec z = tab.values();
  Vec x(nvars);
  for (Eigen::Index j = 0; j < nvars; ++j) {
    double v = maps[j].shift;
    for (const auto& [col, coef] : maps[j].terms) v += coef * z[col];
    x[j] = v;
  }
  return Result{Status::kOptimal, x, problem.objective.dot(x)};
}

}  // namespace ibckit::lp

#include "mrules/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrules/error.hpp"

namespace mrules {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-11;
constexpr double kPivotTol = 1e-12;
constexpr double kRelPivotTol = 1e-9;
constexpr int kMaxIterations = 50000;

enum class Sense { kEq, kGe, kLe };

struct Row {
  Vector coeffs;  // over the nonnegative working variables
  Sense sense;
  double rhs;
};

// x_j = offset + sign·y[pos] − y[neg]   (neg only for free variables)
struct VarMap {
  double offset = 0.0;
  double sign = 1.0;
  std::size_t pos = 0;
  std::optional<std::size_t> neg;
};

class Tableau {
 public:
  Tableau(const std::vector<Row>& rows, std::size_t structural)
      : m_(rows.size()), structural_(structural) {
    std::size_t slacks = 0;
    for (const auto& r : rows)
      if (r.sense != Sense::kEq) ++slacks;
    first_art_ = structural_ + slacks;
    cols_ = first_art_ + m_;
    t_ = Matrix(m_, cols_ + 1);
    basis_.resize(m_);
    std::size_t slack = structural_;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < structural_; ++j) t_(i, j) = rows[i].coeffs[j];
      if (rows[i].sense == Sense::kGe) t_(i, slack++) = -1.0;
      if (rows[i].sense == Sense::kLe) t_(i, slack++) = 1.0;
      t_(i, cols_) = rows[i].rhs;
      if (rows[i].rhs < 0.0)
        for (std::size_t j = 0; j <= cols_; ++j) t_(i, j) = -t_(i, j);
      t_(i, first_art_ + i) = 1.0;
      basis_[i] = first_art_ + i;
    }
  }

  enum class Status { kOptimal, kUnbounded };

  // Maximizes cost·y over columns [0, allowed).
  Status run(const Vector& cost, std::size_t allowed) {
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < allowed && !entering; ++j) {
        if (is_basic(j)) continue;
        double d = cost[j];
        for (std::size_t i = 0; i < m_; ++i) d -= cost[basis_[i]] * t_(i, j);
        if (d > kCostTol) entering = j;
      }
      if (!entering) return Status::kOptimal;

      const std::size_t e = *entering;
      double column_scale = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        column_scale = std::max(column_scale, std::abs(t_(i, e)));
      const double pivot_tol = std::max(kPivotTol, kRelPivotTol * column_scale);
      double best = kInf;
      bool tiny_positive = false;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = t_(i, e);
        if (a <= pivot_tol) {
          if (a > 0.0) tiny_positive = true;
          continue;
        }
        best = std::min(best, std::max(0.0, t_(i, cols_)) / a);
      }
      // Bland: among minimum-ratio rows, the smallest basic index leaves.
      std::optional<std::size_t> leave;
      const double slack = 1e-12 * (1.0 + best);
      for (std::size_t i = 0; i < m_ && best < kInf; ++i) {
        const double a = t_(i, e);
        if (a <= pivot_tol) continue;
        if (std::max(0.0, t_(i, cols_)) / a <= best + slack &&
            (!leave || basis_[i] < basis_[*leave]))
          leave = i;
      }
      if (!leave) {
        if (tiny_positive)
          throw NumericalBreakdown("simplex pivot below 1e-12 with no "
                                   "admissible alternative");
        return Status::kUnbounded;
      }
      pivot(*leave, e);
    }
    throw NumericalBreakdown("simplex iteration limit reached");
  }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t_(r, c);
    for (std::size_t j = 0; j <= cols_; ++j) t_(r, j) /= p;
    t_(r, c) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) t_(i, j) -= f * t_(r, j);
      t_(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  double artificial_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= first_art_) s += std::abs(t_(i, cols_));
    return s;
  }

  // Pivots zero-level artificials out of the basis; rows where that is
  // impossible are redundant and get dropped.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_;) {
      if (basis_[i] < first_art_) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < first_art_ && !col; ++j)
        if (std::abs(t_(i, j)) > 1e-9) col = j;
      if (col) {
        pivot(i, *col);
        ++i;
      } else {
        drop_row(i);
      }
    }
  }

  Vector solution() const {
    Vector y(cols_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) y[basis_[i]] = t_(i, cols_);
    return y;
  }

  std::size_t first_artificial() const { return first_art_; }
  std::size_t columns() const { return cols_; }

 private:
  bool is_basic(std::size_t j) const {
    for (std::size_t b : basis_)
      if (b == j) return true;
    return false;
  }

  void drop_row(std::size_t r) {
    Matrix t(m_ - 1, cols_ + 1);
    std::vector<std::size_t> basis;
    for (std::size_t i = 0, k = 0; i < m_; ++i) {
      if (i == r) continue;
      for (std::size_t j = 0; j <= cols_; ++j) t(k, j) = t_(i, j);
      basis.push_back(basis_[i]);
      ++k;
    }
    t_ = std::move(t);
    basis_ = std::move(basis);
    --m_;
  }

  std::size_t m_;
  std::size_t structural_;
  std::size_t first_art_ = 0;
  std::size_t cols_ = 0;
  Matrix t_;
  std::vector<std::size_t> basis_;
};

void check_dimensions(const LpProblem& p) {
  const std::size_t n = p.variables();
  if (!p.eq.empty() && p.eq.cols() != n)
    throw InputError("LP equality block has wrong width");
  if (!p.ge.empty() && p.ge.cols() != n)
    throw InputError("LP inequality block has wrong width");
  if (p.eq.rows() != p.eq_rhs.size() || p.ge.rows() != p.ge_rhs.size())
    throw InputError("LP right-hand side has wrong length");
  if ((!p.lower.empty() && p.lower.size() != n) ||
      (!p.upper.empty() && p.upper.size() != n))
    throw InputError("LP bounds have wrong length");
}

double lower_of(const LpProblem& p, std::size_t j) {
  return p.lower.empty() ? 0.0 : p.lower[j];
}
double upper_of(const LpProblem& p, std::size_t j) {
  return p.upper.empty() ? kInf : p.upper[j];
}

}  // namespace

double lp_residual(const LpProblem& p, const Vector& x) {
  double worst = 0.0;
  auto row_scale = [&](std::span<const double> a, double rhs) {
    double s = 1.0 + std::abs(rhs);
    for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] * x[j]);
    return s;
  };
  for (std::size_t i = 0; i < p.eq.rows(); ++i) {
    const double r = std::abs(dot(p.eq.row(i), x) - p.eq_rhs[i]);
    worst = std::max(worst, r / row_scale(p.eq.row(i), p.eq_rhs[i]));
  }
  for (std::size_t i = 0; i < p.ge.rows(); ++i) {
    const double r = std::max(0.0, p.ge_rhs[i] - dot(p.ge.row(i), x));
    worst = std::max(worst, r / row_scale(p.ge.row(i), p.ge_rhs[i]));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lo = lower_of(p, j), hi = upper_of(p, j);
    if (std::isfinite(lo))
      worst = std::max(worst, (lo - x[j]) / (1.0 + std::abs(lo)));
    if (std::isfinite(hi))
      worst = std::max(worst, (x[j] - hi) / (1.0 + std::abs(hi)));
  }
  return worst;
}

LpOutcome solve_lp(const LpProblem& p) {
  check_dimensions(p);
  const std::size_t n = p.variables();
  for (double c : p.objective)
    if (!std::isfinite(c)) throw InputError("LP objective is not finite");

  // Working variables y ≥ 0.
  std::vector<VarMap> map(n);
  std::size_t ny = 0;
  std::vector<std::pair<std::size_t, double>> upper_rows;  // y_pos ≤ value
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lower_of(p, j), hi = upper_of(p, j);
    if (std::isfinite(lo) && std::isfinite(hi) && !(lo <= hi))
      return LpInfeasible{};
    if (std::isfinite(lo)) {
      map[j] = {lo, 1.0, ny++, std::nullopt};
      if (std::isfinite(hi)) upper_rows.emplace_back(map[j].pos, hi - lo);
    } else if (std::isfinite(hi)) {
      map[j] = {hi, -1.0, ny++, std::nullopt};
    } else {
      map[j] = {0.0, 1.0, ny, ny + 1};
      ny += 2;
    }
  }

  std::vector<Row> rows;
  auto add_row = [&](std::span<const double> a, Sense sense, double rhs) {
    Row r{Vector(ny, 0.0), sense, rhs};
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(a[j])) throw InputError("LP matrix is not finite");
      r.rhs -= a[j] * map[j].offset;
      r.coeffs[map[j].pos] += a[j] * map[j].sign;
      if (map[j].neg) r.coeffs[*map[j].neg] -= a[j];
    }
    rows.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < p.eq.rows(); ++i)
    add_row(p.eq.row(i), Sense::kEq, p.eq_rhs[i]);
  for (std::size_t i = 0; i < p.ge.rows(); ++i)
    add_row(p.ge.row(i), Sense::kGe, p.ge_rhs[i]);
  double rhs_scale = 1.0;
  for (const auto& r : rows) rhs_scale = std::max(rhs_scale, std::abs(r.rhs));
  for (auto [col, value] : upper_rows) {
    Row r{Vector(ny, 0.0), Sense::kLe, value};
    r.coeffs[col] = 1.0;
    rows.push_back(std::move(r));
  }

  Vector cost(ny, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cost[map[j].pos] += p.objective[j] * map[j].sign;
    if (map[j].neg) cost[*map[j].neg] -= p.objective[j];
  }

  Tableau tab(rows, ny);

  if (!rows.empty()) {
    Vector phase1(tab.columns(), 0.0);
    for (std::size_t j = tab.first_artificial(); j < tab.columns(); ++j)
      phase1[j] = -1.0;
    tab.run(phase1, tab.columns());
    if (tab.artificial_sum() > kLpTolerance * rhs_scale) return LpInfeasible{};
    tab.expel_artificials();
  }

  Vector full_cost(tab.columns(), 0.0);
  std::copy(cost.begin(), cost.end(), full_cost.begin());
  if (tab.run(full_cost, tab.first_artificial()) ==
      Tableau::Status::kUnbounded)
    return LpUnbounded{};

  const Vector y = tab.solution();
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = map[j].offset + map[j].sign * y[map[j].pos];
    if (map[j].neg) x[j] -= y[*map[j].neg];
  }
  if (lp_residual(p, x) > kLpTolerance)
    throw NumericalBreakdown("LP solution fails the residual check");
  return LpOptimal{x, dot(p.objective, x)};
}

std::optional<Vector> feasible_point(const Matrix& eq, const Vector& eq_rhs,
                                     const Matrix& ge, const Vector& ge_rhs,
                                     const Vector& lower, const Vector& upper) {
  std::size_t n = std::max(eq.cols(), ge.cols());
  if (n == 0) n = std::max(lower.size(), upper.size());
  LpProblem p{Vector(n, 0.0), eq, eq_rhs, ge, ge_rhs, lower, upper};
  auto outcome = solve_lp(p);
  if (auto* opt = std::get_if<LpOptimal>(&outcome)) return opt->x;
  return std::nullopt;
}

std::optional<Vector> min_l1_point(const Matrix& eq, const Vector& eq_rhs,
                                   const Matrix& ge, const Vector& ge_rhs,
                                   std::size_t n, double bound) {
  // x = x⁺ − x⁻ with both parts in [0, bound].
  auto split = [n](const Matrix& a) {
    Matrix s(a.rows(), 2 * n);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) {
        s(i, j) = a(i, j);
        s(i, n + j) = -a(i, j);
      }
    return s;
  };
  LpProblem p{Vector(2 * n, -1.0), split(eq), eq_rhs, split(ge), ge_rhs,
              Vector(2 * n, 0.0), Vector(2 * n, bound)};
  auto outcome = solve_lp(p);
  const auto* opt = std::get_if<LpOptimal>(&outcome);
  if (opt == nullptr) return std::nullopt;
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = opt->x[j] - opt->x[n + j];
  return x;
}

namespace {

// Row echelon form in place; returns pivot columns by row.
std::vector<std::size_t> eliminate(Matrix& a, double tolerance) {
  double scale = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) scale = std::max(scale, norm_inf(a.row(i)));
  std::vector<std::size_t> pivots;
  if (scale == 0.0) return pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t best = r;
    for (std::size_t i = r + 1; i < a.rows(); ++i)
      if (std::abs(a(i, c)) > std::abs(a(best, c))) best = i;
    if (std::abs(a(best, c)) <= tolerance * scale) continue;
    if (best != r)
      for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(r, j), a(best, j));
    const double p = a(r, c);
    for (std::size_t j = c; j < a.cols(); ++j) a(r, j) /= p;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r) continue;
      const double f = a(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

std::size_t rank(const Matrix& a, double tolerance) {
  Matrix work = a;
  return eliminate(work, tolerance).size();
}

std::optional<Vector> null_vector(const Matrix& a, double tolerance) {
  Matrix work = a;
  const auto pivots = eliminate(work, tolerance);
  if (pivots.size() == a.cols()) return std::nullopt;
  std::size_t free_col = 0;
  while (std::find(pivots.begin(), pivots.end(), free_col) != pivots.end())
    ++free_col;
  Vector x(a.cols(), 0.0);
  x[free_col] = 1.0;
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = -work(r, free_col);
  const double len = norm_1(x);
  double sign = 1.0;
  for (double v : x)
    if (v != 0.0) {
      sign = v > 0.0 ? 1.0 : -1.0;
      break;
    }
  for (double& v : x) v *= sign / len;
  return x;
}

}  // namespace mrules

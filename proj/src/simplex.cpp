#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "gridcascade/lp.hpp"

namespace gridcascade::lp {

std::size_t LinearProgram::add_variable(double lower, double upper, double cost, std::string name) {
  if (lower > upper) {
    throw std::invalid_argument(fmt::format("variable {} has lower {} > upper {}", name, lower, upper));
  }
  variables.push_back({lower, upper, cost, std::move(name)});
  return variables.size() - 1;
}

void LinearProgram::add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name) {
  for (const auto& t : terms) {
    if (t.var >= variables.size()) {
      throw std::out_of_range(fmt::format("constraint {} references variable {}", name, t.var));
    }
  }
  constraints.push_back({std::move(terms), sense, rhs, std::move(name)});
}

double LinearProgram::objective(const std::vector<double>& x) const {
  double z = 0.0;
  for (std::size_t j = 0; j < variables.size(); ++j) z += variables[j].cost * x[j];
  return z;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables.size(); ++j) {
    worst = std::max({worst, variables[j].lower - x[j], x[j] - variables[j].upper});
  }
  for (const auto& c : constraints) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[t.var];
    switch (c.sense) {
      case Sense::less_equal:
        worst = std::max(worst, lhs - c.rhs);
        break;
      case Sense::greater_equal:
        worst = std::max(worst, c.rhs - lhs);
        break;
      case Sense::equal:
        worst = std::max(worst, std::abs(lhs - c.rhs));
        break;
    }
  }
  return worst;
}

const char* to_string(Status status) {
  switch (status) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::unbounded:
      return "unbounded";
    case Status::iteration_limit:
      return "iteration_limit";
    case Status::numerical_error:
      return "numerical_error";
  }
  return "unknown";
}

namespace {

// How an original variable maps onto non-negative standard-form columns.
struct VariableMap {
  enum class Kind { shifted, reflected, split, fixed } kind;
  std::size_t column = 0;  // split uses column and column + 1
  double offset = 0.0;
};

struct StandardForm {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<VariableMap> maps;
  double cost_offset = 0.0;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  std::size_t columns = 0;
  for (const auto& v : lp.variables) {
    VariableMap m;
    const bool lo = std::isfinite(v.lower), hi = std::isfinite(v.upper);
    if (lo && hi && v.lower == v.upper) {
      m = {VariableMap::Kind::fixed, 0, v.lower};
    } else if (lo) {
      m = {VariableMap::Kind::shifted, columns++, v.lower};
    } else if (hi) {
      m = {VariableMap::Kind::reflected, columns++, v.upper};
    } else {
      m = {VariableMap::Kind::split, columns, 0.0};
      columns += 2;
    }
    sf.maps.push_back(m);
  }

  struct Row {
    std::vector<std::pair<std::size_t, double>> coefs;
    Sense sense;
    double rhs;
  };
  std::vector<Row> rows;
  for (const auto& con : lp.constraints) {
    Row row{{}, con.sense, con.rhs};
    for (const auto& t : con.terms) {
      const auto& m = sf.maps[t.var];
      switch (m.kind) {
        case VariableMap::Kind::fixed:
          row.rhs -= t.coef * m.offset;
          break;
        case VariableMap::Kind::shifted:
          row.rhs -= t.coef * m.offset;
          row.coefs.emplace_back(m.column, t.coef);
          break;
        case VariableMap::Kind::reflected:
          row.rhs -= t.coef * m.offset;
          row.coefs.emplace_back(m.column, -t.coef);
          break;
        case VariableMap::Kind::split:
          row.coefs.emplace_back(m.column, t.coef);
          row.coefs.emplace_back(m.column + 1, -t.coef);
          break;
      }
    }
    rows.push_back(std::move(row));
  }
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    const auto& v = lp.variables[j];
    const auto& m = sf.maps[j];
    if (m.kind == VariableMap::Kind::shifted && std::isfinite(v.upper)) {
      rows.push_back({{{m.column, 1.0}}, Sense::less_equal, v.upper - v.lower});
    }
  }

  std::size_t slacks = 0;
  for (const auto& r : rows) slacks += r.sense != Sense::equal;
  const auto m = rows.size();
  const auto n = columns + slacks;
  sf.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  sf.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  sf.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::size_t slack = columns;
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (const auto& [col, coef] : rows[i].coefs) sf.A(ii, static_cast<Eigen::Index>(col)) += coef;
    if (rows[i].sense == Sense::less_equal) sf.A(ii, static_cast<Eigen::Index>(slack++)) = 1.0;
    if (rows[i].sense == Sense::greater_equal) sf.A(ii, static_cast<Eigen::Index>(slack++)) = -1.0;
    sf.b[ii] = rows[i].rhs;
    if (sf.b[ii] < 0) {
      sf.A.row(ii) *= -1.0;
      sf.b[ii] *= -1.0;
    }
  }
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    const auto& v = lp.variables[j];
    const auto& mp = sf.maps[j];
    switch (mp.kind) {
      case VariableMap::Kind::fixed:
        sf.cost_offset += v.cost * mp.offset;
        break;
      case VariableMap::Kind::shifted:
        sf.cost_offset += v.cost * mp.offset;
        sf.c[static_cast<Eigen::Index>(mp.column)] = v.cost;
        break;
      case VariableMap::Kind::reflected:
        sf.cost_offset += v.cost * mp.offset;
        sf.c[static_cast<Eigen::Index>(mp.column)] = -v.cost;
        break;
      case VariableMap::Kind::split:
        sf.c[static_cast<Eigen::Index>(mp.column)] = v.cost;
        sf.c[static_cast<Eigen::Index>(mp.column + 1)] = -v.cost;
        break;
    }
  }
  return sf;
}

// Revised simplex on A y = b, y >= 0, b >= 0. Columns past A are one
// artificial per row. The basis inverse is kept explicitly, updated by
// elementary row operations and recomputed from scratch every few pivots.
class RevisedSimplex {
 public:
  RevisedSimplex(const StandardForm& sf, const DenseSimplex::Options& options)
      : A_(sf.A), b_(sf.b), opt_(options) {
    m_ = static_cast<std::size_t>(A_.rows());
    n_ = static_cast<std::size_t>(A_.cols());
    basis_.assign(m_, 0);
    basic_.assign(n_ + m_, false);
    std::vector<bool> covered(m_, false);
    // a +1 slack with no cost starts basic; other rows take their artificial
    for (std::size_t j = 0; j < n_; ++j) {
      const auto col = A_.col(static_cast<Eigen::Index>(j));
      Eigen::Index row = 0;
      if ((col.array() != 0.0).count() != 1 || sf.c[static_cast<Eigen::Index>(j)] != 0.0) continue;
      col.cwiseAbs().maxCoeff(&row);
      const auto r = static_cast<std::size_t>(row);
      if (col[row] == 1.0 && !covered[r]) {
        covered[r] = true;
        basis_[r] = j;
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (!covered[i]) basis_[i] = n_ + i;
    }
    for (auto j : basis_) basic_[j] = true;
    refactor();
  }

  std::size_t rows() const { return m_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  const Eigen::VectorXd& basic_values() const { return xb_; }
  bool artificial(std::size_t j) const { return j >= n_; }

  double artificial_sum() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (artificial(basis_[i])) sum += std::max(0.0, xb_[static_cast<Eigen::Index>(i)]);
    }
    return sum;
  }

  void refactor() {
    Eigen::MatrixXd B(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    for (std::size_t k = 0; k < m_; ++k) B.col(static_cast<Eigen::Index>(k)) = column(basis_[k]);
    binv_ = Eigen::PartialPivLU<Eigen::MatrixXd>(B).inverse();
    xb_ = binv_ * b_;
    since_refactor_ = 0;
  }

  enum class Outcome { optimal, unbounded, iteration_limit };

  /// Minimizes cost'y; artificial columns never enter.
  Outcome run(const Eigen::VectorXd& cost, std::size_t& iterations) {
    bool bland = false;
    std::size_t degenerate = 0;
    while (true) {
      if (iterations >= opt_.max_iterations) return Outcome::iteration_limit;
      if (since_refactor_ >= 32) refactor();
      const Eigen::VectorXd d = reduced_costs(cost);
      std::size_t enter = n_;
      double most = -opt_.optimality_tolerance;
      for (std::size_t j = 0; j < n_; ++j) {
        if (basic_[j]) continue;
        const double dj = d[static_cast<Eigen::Index>(j)];
        if (bland ? dj < -opt_.optimality_tolerance : dj < most) {
          enter = j;
          most = dj;
          if (bland) break;
        }
      }
      if (enter == n_) return Outcome::optimal;

      const Eigen::VectorXd u = binv_ * column(enter);
      const auto leave = ratio_test(u, bland);
      if (leave == m_) return Outcome::unbounded;
      const double step = std::max(0.0, xb_[static_cast<Eigen::Index>(leave)] / u[static_cast<Eigen::Index>(leave)]);
      pivot(leave, enter, u, step);
      ++iterations;
      degenerate = step <= 1e-12 ? degenerate + 1 : 0;
      // long degenerate stalls switch to Bland's rule, which cannot cycle
      if (degenerate > 50) bland = true;
    }
  }

  /// Pivots basic artificials out where some structural column allows it.
  /// Rows where none does are redundant; their artificial stays basic at 0.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!artificial(basis_[i])) continue;
      const Eigen::RowVectorXd row = binv_.row(static_cast<Eigen::Index>(i)) * A_;
      std::size_t best = n_;
      double size = 1e-7;
      for (std::size_t j = 0; j < n_; ++j) {
        if (!basic_[j] && std::abs(row[static_cast<Eigen::Index>(j)]) > size) {
          size = std::abs(row[static_cast<Eigen::Index>(j)]);
          best = j;
        }
      }
      if (best == n_) continue;
      const Eigen::VectorXd u = binv_ * column(best);
      pivot(i, best, u, xb_[static_cast<Eigen::Index>(i)] / u[static_cast<Eigen::Index>(i)]);
    }
    refactor();
  }

  /// Largest negative reduced cost over structural columns.
  double dual_infeasibility(const Eigen::VectorXd& cost) const {
    const Eigen::VectorXd d = reduced_costs(cost);
    double worst = 0.0;
    for (std::size_t j = 0; j < n_; ++j) worst = std::max(worst, -d[static_cast<Eigen::Index>(j)]);
    return worst;
  }

 private:
  Eigen::VectorXd column(std::size_t j) const {
    if (j < n_) return A_.col(static_cast<Eigen::Index>(j));
    return Eigen::VectorXd::Unit(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(j - n_));
  }

  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) cb[static_cast<Eigen::Index>(i)] = cost[static_cast<Eigen::Index>(basis_[i])];
    const Eigen::RowVectorXd pi = cb.transpose() * binv_;
    Eigen::VectorXd d = cost.head(static_cast<Eigen::Index>(n_)) - (pi * A_).transpose();
    for (std::size_t j = 0; j < n_; ++j) {
      if (basic_[j]) d[static_cast<Eigen::Index>(j)] = 0.0;
    }
    return d;
  }

  std::size_t ratio_test(const Eigen::VectorXd& u, bool bland) const {
    const double tol = opt_.pivot_tolerance * std::max(1.0, u.cwiseAbs().maxCoeff());
    std::size_t leave = m_;
    if (bland) {
      double best = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        if (u[ii] <= tol) continue;
        const double ratio = std::max(0.0, xb_[ii]) / u[ii];
        if (leave == m_ || ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis_[i] < basis_[leave])) {
          best = leave == m_ ? ratio : std::min(best, ratio);
          leave = i;
        }
      }
      return leave;
    }
    // Harris: bound the step with a little slack, then take the largest pivot
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (u[ii] > tol) bound = std::min(bound, (std::max(0.0, xb_[ii]) + 1e-9) / u[ii]);
    }
    double biggest = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (u[ii] > tol && std::max(0.0, xb_[ii]) / u[ii] <= bound && u[ii] > biggest) {
        biggest = u[ii];
        leave = i;
      }
    }
    return leave;
  }

  void pivot(std::size_t row, std::size_t enter, const Eigen::VectorXd& u, double step) {
    const auto r = static_cast<Eigen::Index>(row);
    xb_ -= step * u;
    xb_[r] = step;
    binv_.row(r) /= u[r];
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m_); ++i) {
      if (i != r && u[i] != 0.0) binv_.row(i) -= u[i] * binv_.row(r);
    }
    basic_[basis_[row]] = false;
    basic_[enter] = true;
    basis_[row] = enter;
    ++since_refactor_;
  }

  const Eigen::MatrixXd& A_;
  const Eigen::VectorXd& b_;
  DenseSimplex::Options opt_;
  std::size_t m_ = 0, n_ = 0, since_refactor_ = 0;
  std::vector<std::size_t> basis_;
  std::vector<bool> basic_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
};

}  // namespace

Solution DenseSimplex::solve(const LinearProgram& program) const {
  const auto sf = to_standard_form(program);
  const auto n = sf.A.cols(), m = sf.A.rows();
  RevisedSimplex rs(sf, options_);
  Solution sol;

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  if (rs.run(phase1, sol.iterations) == RevisedSimplex::Outcome::iteration_limit) {
    sol.status = Status::iteration_limit;
    return sol;
  }
  rs.refactor();
  const double scale = std::max(1.0, sf.b.lpNorm<Eigen::Infinity>());
  if (rs.artificial_sum() > options_.feasibility_tolerance * scale) {
    sol.status = Status::infeasible;
    return sol;
  }
  rs.expel_artificials();

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = sf.c;
  const auto outcome = rs.run(phase2, sol.iterations);
  if (outcome != RevisedSimplex::Outcome::optimal) {
    sol.status = outcome == RevisedSimplex::Outcome::unbounded ? Status::unbounded : Status::iteration_limit;
    return sol;
  }
  rs.refactor();
  sol.dual_infeasibility = rs.dual_infeasibility(phase2);

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < rs.rows(); ++i) {
    if (!rs.artificial(rs.basis()[i])) {
      y[static_cast<Eigen::Index>(rs.basis()[i])] = std::max(0.0, rs.basic_values()[static_cast<Eigen::Index>(i)]);
    }
  }

  sol.x.resize(program.variables.size());
  for (std::size_t j = 0; j < program.variables.size(); ++j) {
    const auto& mp = sf.maps[j];
    const auto col = static_cast<Eigen::Index>(mp.column);
    switch (mp.kind) {
      case VariableMap::Kind::fixed:
        sol.x[j] = mp.offset;
        break;
      case VariableMap::Kind::shifted:
        sol.x[j] = mp.offset + y[col];
        break;
      case VariableMap::Kind::reflected:
        sol.x[j] = mp.offset - y[col];
        break;
      case VariableMap::Kind::split:
        sol.x[j] = y[col] - y[col + 1];
        break;
    }
  }
  sol.objective = program.objective(sol.x);
  // a badly conditioned basis can slip past the pivot tolerances; never
  // report such a point as optimal
  sol.status = program.max_violation(sol.x) <= 1e-6 * scale ? Status::optimal : Status::numerical_error;
  return sol;
}

}  // namespace gridcascade::lp

#pragma once

#include <limits>
#include <string>
#include <vector>

namespace gridcascade::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, equal, greater_equal };

struct Term {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::equal;
  double rhs = 0.0;
  std::string name;
};

struct Variable {
  double lower = 0.0;
  double upper = kInfinity;
  double cost = 0.0;
  std::string name;
};

/// minimize c'x subject to the constraints and lower <= x <= upper.
struct LinearProgram {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;

  std::size_t add_variable(double lower, double upper, double cost, std::string name = {});
  void add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

  double objective(const std::vector<double>& x) const;
  /// Largest violation of any constraint or bound at x.
  double max_violation(const std::vector<double>& x) const;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit, numerical_error };

const char* to_string(Status status);

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
  /// Largest negative reduced cost at the final basis (0 proves optimality).
  double dual_infeasibility = 0.0;
};

class Solver {
 public:
  virtual ~Solver() = default;
  virtual Solution solve(const LinearProgram& program) const = 0;
};

/// Two-phase revised primal simplex with a dense, periodically refactored
/// basis inverse. Dantzig pricing with a Harris ratio test; long degenerate
/// stalls fall back to Bland's rule.
class DenseSimplex final : public Solver {
 public:
  struct Options {
    double pivot_tolerance = 1e-9;
    double optimality_tolerance = 1e-9;
    double feasibility_tolerance = 1e-7;
    std::size_t max_iterations = 200000;
  };

  DenseSimplex() = default;
  explicit DenseSimplex(Options options) : options_(options) {}

  Solution solve(const LinearProgram& program) const override;

 private:
  Options options_;
};

}  // namespace gridcascade::lp

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace varkde::optim {

/// Objective to minimize. May return +inf or NaN for infeasible points.
using Objective = std::function<double(std::span<const double>)>;

struct Result {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  double grad_norm = 0.0;  // Euclidean norm of the finite-difference gradient at x
  bool converged = false;
};

struct NelderMeadOptions {
  std::size_t max_evaluations = 2000;
  double initial_step = 0.25;
  double f_tol = 1e-10;
  double x_tol = 1e-8;
};

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {});

struct BfgsOptions {
  std::size_t max_iterations = 200;
  double grad_tol = 1e-7;
  double fd_step = 1e-5;  // relative central-difference step
};

/// Quasi-Newton descent with central-difference gradients and Armijo backtracking.
Result bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& options = {});

std::vector<double> numeric_gradient(const Objective& f, std::span<const double> x, double rel_step,
                                     std::size_t* evaluations = nullptr);

}  // namespace varkde::optim

#pragma once

// Independent reference solvers. They share no code path with the ADMM engine
// or the closed-form prox formulas and exist to check them.

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <utility>

#include "netcvx/graph.hpp"

namespace netcvx::oracle {

/// Exact minimizer of a problem made only of sum_squares (+ linear) node atoms
/// and sq_diff edge atoms, from the stationarity system
///
///   sum 2 w (x_i - a_i) + sum_j 2 w_ij (x_i - x_j) + sum w c_i = 0,
///
/// solved by conjugate gradient to relative residual `tolerance`.
/// Throws NotQuadratic or SingularSystem.
std::map<NodeId, Vector> quadratic_oracle(const ProblemGraph& g, double tolerance = 1e-12);

/// Relative residual ||H x - b|| / ||b|| of the stationarity system at x.
double stationarity_residual(const ProblemGraph& g, const std::map<NodeId, Vector>& x);

using ScalarFn = std::function<long double(long double)>;
using PairFn = std::function<long double(long double, long double)>;

/// argmin_t f(t) + sigma/2 (t - v)^2 over [lower, upper] by ternary search in
/// extended precision. Infinite bounds are replaced by a bracket grown until
/// the objective rises on both sides.
double prox_oracle_1d(const ScalarFn& f, double v, double sigma,
                      double lower = -std::numeric_limits<double>::infinity(),
                      double upper = std::numeric_limits<double>::infinity(), double width = 1e-10);

/// Minimizes a scalar convex function over [lower, upper] by ternary search.
double minimize_1d(const ScalarFn& f, double lower, double upper, double width = 1e-10);

struct Box2 {
  double lo1, hi1, lo2, hi2;
};

struct GridSchedule {
  std::size_t points = 25;    // grid points per axis at each level
  std::size_t keep = 6;       // cells kept on each side of the best point
  double final_width = 1e-9;  // stop once the cell width drops below this
};

/// Coarse-to-fine grid minimization of a two-variable function.
std::pair<double, double> grid_refine_2d(const PairFn& f, Box2 box, const GridSchedule& schedule = {});

}  // namespace netcvx::oracle

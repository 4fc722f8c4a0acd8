#pragma once

// Deep-cut ellipsoid method for minimizing a convex function over the
// nonnegative orthant. Used to minimize Lagrangian dual functions in 2 or 3
// dual dimensions; the implementation is dimension-generic.
//
// Cut policy: if the current center violates a nonnegativity bound, apply a
// deep cut on the most violated coordinate without querying the oracle;
// otherwise query the oracle and apply a (central) objective cut along the
// subgradient. Stops when sqrt(g' P g) <= tol, which bounds the remaining
// objective gap for subgradient cuts, or at max_iter.

#include <Eigen/Dense>
#include <functional>
#include <limits>

namespace noma {

struct EllipsoidCut {
    double value = 0.0;        // objective at the queried point
    Eigen::VectorXd subgrad;   // subgradient at the queried point
};

using EllipsoidOracle = std::function<EllipsoidCut(const Eigen::VectorXd&)>;

struct EllipsoidState {
    Eigen::VectorXd center;
    Eigen::MatrixXd shape;     // P, symmetric positive definite
    int iteration = 0;
    double best_dual = 0.0;
    Eigen::VectorXd best_center;
};

struct EllipsoidOptions {
    double init_radius = 1e3;
    int max_iter = 500;
    double tol = 1e-5;
};

struct EllipsoidResult {
    Eigen::VectorXd best_point;
    double best_value = 0.0;
    int iterations = 0;
    int objective_cuts = 0;
    int feasibility_cuts = 0;
    double final_gap_bound = 0.0;   // last sqrt(g' P g) seen on an objective cut
    bool converged = false;         // tol reached (vs max_iter or collapse)
    bool hit_max_iter = false;
    bool eigen_floor_hit = false;   // shape matrix needed an eigenvalue floor
    bool near_initial_boundary = false;  // best point within 1% of the initial ball edge
    // Early-exit hook fired: best_value fell below the caller's cutoff.
    bool cutoff_hit = false;
};

// Minimizes oracle.value over {x >= 0} starting from a ball of init_radius
// around init_center. If value_cutoff is finite, iteration stops early once a
// feasible query returns a value below it (used for infeasibility
// certificates, where any sufficiently negative dual value is conclusive).
EllipsoidResult ellipsoid_minimize(
    const EllipsoidOracle& oracle, const Eigen::VectorXd& init_center,
    const EllipsoidOptions& options = {},
    double value_cutoff = -std::numeric_limits<double>::infinity());

}  // namespace noma

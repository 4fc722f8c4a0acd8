#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "noma/ellipsoid.hpp"

using namespace noma;

namespace {

EllipsoidOptions tight_options() {
    EllipsoidOptions opts;
    opts.init_radius = 100.0;
    opts.max_iter = 2000;
    opts.tol = 1e-9;
    return opts;
}

}  // namespace

TEST_CASE("recovers the minimum of a smooth quadratic") {
    // min (x - a)' D (x - a) over x >= 0 with an interior optimum.
    Eigen::VectorXd a(3);
    a << 2.0, 0.5, 7.0;
    Eigen::Vector3d diag(1.0, 4.0, 0.25);
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        EllipsoidCut cut;
        const Eigen::VectorXd d = x - a;
        cut.value = d.cwiseProduct(diag.cwiseProduct(d)).sum();
        cut.subgrad = 2.0 * diag.cwiseProduct(d);
        return cut;
    };
    Eigen::VectorXd init(3);
    init << 1.0, 1.0, 1.0;
    const EllipsoidResult res = ellipsoid_minimize(oracle, init, tight_options());
    CHECK(res.converged);
    CHECK(!res.hit_max_iter);
    CHECK(!res.cutoff_hit);
    CHECK(res.best_value <= 1e-7);
    CHECK((res.best_point - a).norm() <= 1e-3);
}

TEST_CASE("clips the optimum onto the nonnegative orthant") {
    // Unconstrained minimum sits at (-3, 2): the constrained one is (0, 2).
    Eigen::VectorXd a(2);
    a << -3.0, 2.0;
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        EllipsoidCut cut;
        cut.value = (x - a).squaredNorm();
        cut.subgrad = 2.0 * (x - a);
        return cut;
    };
    Eigen::VectorXd init(2);
    init << 5.0, 5.0;
    const EllipsoidResult res = ellipsoid_minimize(oracle, init, tight_options());
    CHECK(res.best_point(0) >= 0.0);
    CHECK(res.best_point(1) >= 0.0);
    CHECK(res.best_value == doctest::Approx(9.0).epsilon(1e-5));
    CHECK(res.best_point(0) <= 1e-3);
    CHECK(res.best_point(1) == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(res.feasibility_cuts > 0);
}

TEST_CASE("handles nonsmooth objectives") {
    // Piecewise-linear bowl: max of four affine pieces, minimum value 1 at
    // (1, 1); subgradients come from the active piece.
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        EllipsoidCut cut;
        cut.subgrad = Eigen::VectorXd::Zero(2);
        const double f1 = x(0) - 1.0;
        const double f2 = 1.0 - x(0);
        const double f3 = x(1) - 1.0;
        const double f4 = 1.0 - x(1);
        const double m = std::max({f1, f2, f3, f4, 1.0});
        cut.value = m;
        if (m == f1) cut.subgrad(0) = 1.0;
        else if (m == f2) cut.subgrad(0) = -1.0;
        else if (m == f3) cut.subgrad(1) = 1.0;
        else if (m == f4) cut.subgrad(1) = -1.0;
        // At the flat bottom the zero subgradient is valid and stops progress.
        return cut;
    };
    Eigen::VectorXd init(2);
    init << 30.0, 40.0;
    const EllipsoidResult res = ellipsoid_minimize(oracle, init, tight_options());
    CHECK(res.best_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("negative init center still converges into the orthant") {
    Eigen::VectorXd a(2);
    a << 1.0, 2.0;
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        EllipsoidCut cut;
        cut.value = (x - a).squaredNorm();
        cut.subgrad = 2.0 * (x - a);
        return cut;
    };
    Eigen::VectorXd init(2);
    init << -50.0, -50.0;
    const EllipsoidResult res = ellipsoid_minimize(oracle, init, tight_options());
    CHECK(res.best_value <= 1e-6);
}

TEST_CASE("value cutoff fires and is reported") {
    // Steep linear decrease: values below the cutoff certify "unbounded".
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        EllipsoidCut cut;
        cut.value = -x(0) - x(1);
        cut.subgrad = Eigen::VectorXd::Constant(2, -1.0);
        return cut;
    };
    Eigen::VectorXd init(2);
    init << 1.0, 1.0;
    EllipsoidOptions opts = tight_options();
    const EllipsoidResult res = ellipsoid_minimize(oracle, init, opts, -500.0);
    CHECK(res.cutoff_hit);
    CHECK(res.best_value <= -500.0);
}

TEST_CASE("max_iter is respected and reported") {
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        EllipsoidCut cut;
        cut.value = x.squaredNorm();
        cut.subgrad = 2.0 * x;
        return cut;
    };
    Eigen::VectorXd init(3);
    init << 10.0, 10.0, 10.0;
    EllipsoidOptions opts;
    opts.init_radius = 1e3;
    opts.max_iter = 5;
    opts.tol = 1e-14;
    const EllipsoidResult res = ellipsoid_minimize(oracle, init, opts);
    CHECK(res.hit_max_iter);
    CHECK(res.iterations == 5);
    CHECK(!res.converged);
}

TEST_CASE("solves a small Lagrangian dual against a grid scan") {
    // Four-state toy: maximize sum of per-state concave utilities subject to
    // a power budget. The dual g(lambda, delta) is piecewise smooth convex;
    // compare the ellipsoid minimum against a dense 2-D grid.
    const double gains[4] = {0.5, 1.0, 2.0, 4.0};
    const double pbar = 1.0;
    const double rbar = 0.25;
    const auto dual = [&](double lambda, double delta) {
        // Per state: max_{0 <= p <= 4} (1 + delta) log2(1 + p g) - lambda p,
        // then g(lambda, delta) = mean + lambda pbar - delta rbar... with the
        // stationary point p* = clamp((1 + delta)/(lambda ln 2) - 1/g, 0, 4).
        double total = 0.0;
        for (const double g : gains) {
            double p = (1.0 + delta) / (std::max(lambda, 1e-12) * std::log(2.0)) - 1.0 / g;
            p = std::min(std::max(p, 0.0), 4.0);
            total += 0.25 * ((1.0 + delta) * std::log2(1.0 + p * g) - lambda * p);
        }
        return total + lambda * pbar - delta * 4.0 * rbar * 0.25;
    };
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        // Numeric subgradient is good enough for a smooth-enough toy.
        EllipsoidCut cut;
        cut.value = dual(x(0), x(1));
        cut.subgrad = Eigen::VectorXd(2);
        const double h = 1e-7;
        cut.subgrad(0) = (dual(x(0) + h, x(1)) - dual(std::max(x(0) - h, 0.0), x(1))) /
                         (x(0) < h ? x(0) + h : 2 * h);
        cut.subgrad(1) = (dual(x(0), x(1) + h) - dual(x(0), std::max(x(1) - h, 0.0))) /
                         (x(1) < h ? x(1) + h : 2 * h);
        return cut;
    };
    Eigen::VectorXd init(2);
    init << 1.0, 1.0;
    EllipsoidOptions opts;
    opts.init_radius = 50.0;
    opts.max_iter = 3000;
    opts.tol = 1e-10;
    const EllipsoidResult res = ellipsoid_minimize(oracle, init, opts);

    double grid_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) {
        for (int j = 0; j <= 400; ++j) {
            grid_best = std::min(grid_best, dual(i * 0.01, j * 0.01));
        }
    }
    CHECK(res.best_value <= grid_best + 1e-6);
    CHECK(res.best_value >= grid_best - 0.01);  // grid is only 0.01-resolved
    CHECK(res.best_point(0) >= 0.0);
    CHECK(res.best_point(1) >= 0.0);
}

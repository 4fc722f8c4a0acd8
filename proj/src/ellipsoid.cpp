#include "noma/ellipsoid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace noma {

EllipsoidResult ellipsoid_minimize(const EllipsoidOracle& oracle,
                                   const Eigen::VectorXd& init_center,
                                   const EllipsoidOptions& options,
                                   double value_cutoff) {
    const Eigen::Index n = init_center.size();
    if (n < 2) throw std::invalid_argument("ellipsoid_minimize: need dimension >= 2");
    const double nn = static_cast<double>(n);

    EllipsoidState st;
    st.center = init_center;
    st.shape = Eigen::MatrixXd::Identity(n, n) * (options.init_radius * options.init_radius);
    st.best_dual = std::numeric_limits<double>::infinity();
    st.best_center = init_center;

    EllipsoidResult res;
    res.best_point = init_center;
    res.best_value = std::numeric_limits<double>::infinity();

    for (int it = 0; it < options.max_iter; ++it) {
        st.iteration = it;
        // Choose the cut.
        Eigen::VectorXd g(n);
        double depth = 0.0;  // deep-cut offset h, 0 for objective cuts
        Eigen::Index worst = -1;
        double worst_violation = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (st.center[i] < -worst_violation) {
                worst_violation = -st.center[i];
                worst = i;
            }
        }
        if (worst >= 0) {
            g.setZero();
            g[worst] = -1.0;  // keep {x_i >= 0}
            depth = worst_violation;
            ++res.feasibility_cuts;
        } else {
            const EllipsoidCut cut = oracle(st.center);
            if (cut.subgrad.size() != n)
                throw std::invalid_argument("ellipsoid_minimize: subgradient dimension mismatch");
            if (cut.value < res.best_value) {
                res.best_value = cut.value;
                res.best_point = st.center;
                st.best_dual = cut.value;
                st.best_center = st.center;
            }
            ++res.objective_cuts;
            if (cut.value < value_cutoff) {
                res.cutoff_hit = true;
                res.iterations = it + 1;
                break;
            }
            g = cut.subgrad;
            const double gnorm2 = g.squaredNorm();
            if (gnorm2 == 0.0) {  // exact stationary point
                res.converged = true;
                res.iterations = it + 1;
                res.final_gap_bound = 0.0;
                break;
            }
        }

        const Eigen::VectorXd pg = st.shape * g;
        const double gpg = g.dot(pg);
        if (!(gpg > 0.0)) {  // shape collapsed numerically
            res.iterations = it + 1;
            break;
        }
        const double spread = std::sqrt(gpg);
        if (worst < 0) {
            res.final_gap_bound = spread;
            if (spread <= options.tol) {
                res.converged = true;
                res.iterations = it + 1;
                break;
            }
        }

        const double alpha = depth / spread;
        if (alpha >= 1.0) {
            // The cut excludes the whole ellipsoid; nothing of the orthant is
            // left inside the search region.
            res.iterations = it + 1;
            break;
        }
        const double step = (1.0 + nn * alpha) / (nn + 1.0);
        st.center -= (step / spread) * pg;
        const double scale = nn * nn / (nn * nn - 1.0) * (1.0 - alpha * alpha);
        const double rank1 = 2.0 * (1.0 + nn * alpha) / ((nn + 1.0) * (1.0 + alpha));
        st.shape = scale * (st.shape - (rank1 / gpg) * (pg * pg.transpose()));
        st.shape = 0.5 * (st.shape + st.shape.transpose().eval());  // keep symmetric

        // Eigenvalue floor: extremely anisotropic shapes get their smallest
        // axes clamped so later cuts stay well posed; flagged, never silent.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(st.shape);
        const double floor = 1e-14 * st.shape.trace();
        if (es.eigenvalues().minCoeff() < floor) {
            res.eigen_floor_hit = true;
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
            st.shape = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        }
        res.iterations = it + 1;
    }

    if (res.iterations == options.max_iter && !res.converged && !res.cutoff_hit)
        res.hit_max_iter = true;
    if ((res.best_point - init_center).norm() >= 0.99 * options.init_radius)
        res.near_initial_boundary = true;
    return res;
}

}  // namespace noma

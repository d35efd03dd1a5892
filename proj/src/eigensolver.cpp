#include <cmath>
#include <stdexcept>
#include <string>

#include "ssl_lab/estimators.hpp"
#include "ssl_lab/rng.hpp"

namespace ssllab {

namespace {

void canonicalize_sign(Vector& v) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
}

}  // namespace

EigenPair leading_eigenpair(const Matrix& m, const SolverParams& params) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument("leading_eigenpair: matrix must be square and nonempty");
    }
    if (!m.allFinite()) throw std::invalid_argument("leading_eigenpair: non-finite matrix");
    if (!(params.tol > 0.0)) throw std::invalid_argument("leading_eigenpair: tol must be positive");
    if (params.max_iter < 1) throw std::invalid_argument("leading_eigenpair: max_iter must be >= 1");

    const Eigen::Index d = m.rows();
    Rng rng(params.seed);
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
    if (const double norm = v.norm(); norm > 0.0) {
        v /= norm;
    } else {
        v = Vector::Unit(d, 0);
    }

    Vector w(d);
    for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
        w.noalias() = m * v;
        const double mu = w.norm();
        if (mu == 0.0) {
            // v lies in the null space; every eigenvalue it sees is zero.
            canonicalize_sign(v);
            return {0.0, v};
        }
        Vector next = w / mu;
        // ||Mv - (v.Mv) v|| <= ||Mv - mu v|| = mu ||next - v||.
        if (mu * (next - v).norm() < params.tol) {
            const double lambda = v.dot(w);
            canonicalize_sign(v);
            return {lambda, v};
        }
        v = std::move(next);
    }
    canonicalize_sign(v);
    throw ConvergenceError("leading_eigenpair: no convergence after " +
                               std::to_string(params.max_iter) + " iterations",
                           v, params.max_iter);
}

}  // namespace ssllab

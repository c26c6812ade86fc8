#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "taperfold/errors.hpp"

namespace taperfold {

struct EigenOptions {
    int max_iterations = 400;   // per requested pair
    double tolerance = 1e-10;   // residual, relative to ||A||_inf
    std::uint64_t seed = 0x7a9e5eed11ULL;
    bool allow_dense_fallback = true;
};

struct EigenPairs {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // matching columns, unit 2-norm
};

// k smallest-eigenvalue pairs of the symmetric matrix A, keeping iterates
// orthogonal to span(deflate) (e.g. rigid-body modes of an unconstrained
// system). Shifted inverse iteration with Rayleigh-quotient refinement and
// deflation against converged vectors; the result is certified with an
// inertia count and recomputed densely when the iteration stalls or the
// certificate fails. Throws EigenFailure when no route converges.
EigenPairs smallest_eigenpairs(const Eigen::MatrixXd& A, int k,
                               const Eigen::MatrixXd& deflate = Eigen::MatrixXd(),
                               const EigenOptions& opts = {});

}  // namespace taperfold

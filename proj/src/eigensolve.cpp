#include "taperfold/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace taperfold {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Columns of B orthonormalized by modified Gram-Schmidt; rank-deficient
// directions are dropped.
MatrixXd orthonormalize(const MatrixXd& B) {
    if (B.cols() == 0) return B;
    MatrixXd Q(B.rows(), B.cols());
    int r = 0;
    for (int c = 0; c < B.cols(); ++c) {
        VectorXd v = B.col(c);
        const double norm0 = v.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k < r; ++k) v -= Q.col(k).dot(v) * Q.col(k);
        }
        if (v.norm() > 1e-10 * std::max(norm0, 1.0)) {
            Q.col(r++) = v / v.norm();
        }
    }
    return Q.leftCols(r);
}

void project_out(const MatrixXd& Q, VectorXd& v) {
    for (int pass = 0; pass < 2; ++pass) {
        for (int k = 0; k < Q.cols(); ++k) v -= Q.col(k).dot(v) * Q.col(k);
    }
}

// Number of eigenvalues of A strictly below sigma, from the inertia of the
// shifted LDLT.
int count_below(const MatrixXd& A, double sigma) {
    MatrixXd S = A;
    S.diagonal().array() -= sigma;
    Eigen::LDLT<MatrixXd> ldlt(S);
    int neg = 0;
    const auto d = ldlt.vectorD();
    for (int i = 0; i < d.size(); ++i) {
        if (d[i] < 0.0) ++neg;
    }
    return neg;
}

EigenPairs dense_smallest(const MatrixXd& A, int k, const MatrixXd& Q) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw EigenFailure("dense symmetric decomposition failed");
    EigenPairs out;
    out.values.resize(k);
    out.vectors.resize(A.rows(), k);
    int taken = 0;
    for (int i = 0; i < A.rows() && taken < k; ++i) {
        VectorXd v = es.eigenvectors().col(i);
        if (Q.cols() > 0) {
            const double in_deflated = (Q.transpose() * v).norm();
            if (in_deflated > 0.5) continue;  // a deflated (rigid) direction
            project_out(Q, v);
            const double n = v.norm();
            if (n < 1e-8) continue;
            v /= n;
        }
        out.values[taken] = es.eigenvalues()[i];
        out.vectors.col(taken) = v;
        ++taken;
    }
    if (taken < k) throw EigenFailure("not enough eigenpairs outside the deflated space");
    return out;
}

}  // namespace

EigenPairs smallest_eigenpairs(const MatrixXd& A, int k, const MatrixXd& deflate,
                               const EigenOptions& opts) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw EigenFailure("matrix must be square");
    if (k < 1) throw EigenFailure("k must be at least 1");
    const MatrixXd Q = orthonormalize(deflate);
    if (k > n - Q.cols()) throw EigenFailure("k exceeds the non-deflated dimension");

    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, A.row(i).cwiseAbs().sum());
    if (scale <= 0.0) scale = 1.0;
    const double tol = opts.tolerance * scale;

    MatrixXd V(n, k);
    VectorXd lambda(k);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    bool ok = true;
    for (int mode = 0; mode < k && ok; ++mode) {
        VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        project_out(Q, v);
        for (int m = 0; m < mode; ++m) v -= V.col(m).dot(v) * V.col(m);
        if (v.norm() < 1e-12) {
            ok = false;
            break;
        }
        v.normalize();

        // Start just below the previous eigenvalue so the iteration walks
        // the spectrum from the bottom; refine the shift once close.
        double sigma = (mode == 0) ? -1e-6 * scale : lambda[mode - 1] - 1e-8 * scale;
        bool factored = false;
        Eigen::PartialPivLU<MatrixXd> lu;
        double rho = 0.0;
        bool converged = false;

        for (int it = 0; it < opts.max_iterations; ++it) {
            if (!factored) {
                MatrixXd S = A;
                S.diagonal().array() -= sigma;
                lu.compute(S);
                factored = true;
            }
            VectorXd y = lu.solve(v);
            project_out(Q, y);
            for (int m = 0; m < mode; ++m) y -= V.col(m).dot(y) * V.col(m);
            const double ny = y.norm();
            if (!(ny > 0.0) || !std::isfinite(ny)) {
                // Shift collided with an eigenvalue; nudge and refactor.
                sigma -= 1e-8 * scale;
                factored = false;
                continue;
            }
            v = y / ny;
            rho = v.dot(A * v);
            const double res = (A * v - rho * v).norm();
            if (res < tol) {
                converged = true;
                break;
            }
            if (res < 1e-3 * scale && std::abs(rho - sigma) > 1e-12 * scale) {
                sigma = rho;
                factored = false;
            }
        }
        if (!converged) {
            ok = false;
            break;
        }
        lambda[mode] = rho;
        V.col(mode) = v;
    }

    if (ok) {
        // Sort ascending, then certify with an inertia count: everything at
        // or below the largest reported eigenvalue must be accounted for by
        // the reported set plus deflated directions.
        std::vector<int> order(k);
        for (int i = 0; i < k; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return lambda[a] < lambda[b]; });
        EigenPairs out;
        out.values.resize(k);
        out.vectors.resize(n, k);
        for (int i = 0; i < k; ++i) {
            out.values[i] = lambda[order[i]];
            out.vectors.col(i) = V.col(order[i]);
        }

        const double margin = 1e-7 * scale;
        const double cut = out.values[k - 1] + margin;
        int expected = k;
        for (int c = 0; c < Q.cols(); ++c) {
            const double rq = Q.col(c).dot(A * Q.col(c));
            if (rq < cut) ++expected;
        }
        const int counted = count_below(A, cut);
        if (counted <= expected) return out;
        ok = false;  // missed an eigenvalue below the reported set
    }

    if (!opts.allow_dense_fallback) {
        throw EigenFailure("inverse iteration did not converge within the budget");
    }
    return dense_smallest(A, k, Q);
}

}  // namespace taperfold

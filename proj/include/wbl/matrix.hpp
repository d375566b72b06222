// matrix.hpp — dense complex matrix kernel: general eigendecomposition,
// matrix exponential, linear solves, Hermiticity helpers.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace wbl {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonDiagonalizable : NumericError {
    double condition_estimate;
    explicit NonDiagonalizable(double cond)
        : NumericError("eigenvector matrix singular, condition estimate " +
                       std::to_string(cond)),
          condition_estimate(cond) {}
};

struct SingularMatrix : NumericError {
    double condition_estimate;
    explicit SingularMatrix(double cond)
        : NumericError("matrix singular, condition estimate " +
                       std::to_string(cond)),
          condition_estimate(cond) {}
};

struct ExpOverflow : NumericError {
    using NumericError::NumericError;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline bool all_finite(const CMatrix& a) {
    return a.allFinite();
}

namespace detail {

// Condition estimate from an LU factorization. rcond() alone can report a
// healthy value for an exactly singular matrix, so the U diagonal spread is
// folded in as a second witness.
inline double lu_condition(const Eigen::PartialPivLU<CMatrix>& lu) {
    const double rcond = lu.rcond();
    double est = (rcond > 0.0 && std::isfinite(rcond)) ? 1.0 / rcond
                 : std::numeric_limits<double>::infinity();
    const auto diag = lu.matrixLU().diagonal();
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (Eigen::Index k = 0; k < diag.size(); ++k) {
        const double d = std::abs(diag[k]);
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    const double spread = (dmin > 0.0)
                              ? dmax / dmin
                              : std::numeric_limits<double>::infinity();
    return std::max(est, spread);
}

}  // namespace detail

// ||A - A†||_F
inline double hermiticity_defect(const CMatrix& a) {
    return (a - a.adjoint()).norm();
}

inline bool is_hermitian(const CMatrix& a, double tol = 1e-12) {
    return hermiticity_defect(a) <= tol * std::max(1.0, a.norm());
}

// Decomposition A = V diag(λ) V⁻¹ of a general (non-Hermitian) matrix.
struct EigDecomposition {
    CVector eigenvalues;
    CMatrix right_vectors;    // columns are eigenvectors
    CMatrix inverse_vectors;  // right_vectors⁻¹

    Eigen::Index dim() const { return eigenvalues.size(); }

    // V diag(f(λ)) V⁻¹ for a per-eigenvalue scalar function
    template <typename F>
    CMatrix apply(F&& f) const {
        CVector d(eigenvalues.size());
        for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
            d[k] = f(eigenvalues[k]);
        }
        return right_vectors * d.asDiagonal() * inverse_vectors;
    }
};

inline EigDecomposition eig_general(const CMatrix& a,
                                    double cond_limit = 1e12) {
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("eig_general: matrix must be square");
    }
    if (!all_finite(a)) {
        throw NumericError("eig_general: non-finite entries");
    }
    Eigen::ComplexEigenSolver<CMatrix> solver(a, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        throw NumericError("eig_general: eigensolver did not converge");
    }
    EigDecomposition d;
    d.eigenvalues = solver.eigenvalues();
    d.right_vectors = solver.eigenvectors();
    Eigen::PartialPivLU<CMatrix> lu(d.right_vectors);
    const double cond = detail::lu_condition(lu);
    if (!(cond < cond_limit)) {
        throw NonDiagonalizable(cond);
    }
    d.inverse_vectors = lu.solve(CMatrix::Identity(a.rows(), a.cols()));
    return d;
}

// exp(A), scaling-and-squaring. The norm bound guards against a mis-set
// time step blowing up the propagator argument.
inline CMatrix mat_exp(const CMatrix& a, double norm_bound = 1e4) {
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("mat_exp: matrix must be square");
    }
    const double n = a.norm();
    if (!(n <= norm_bound)) {
        throw ExpOverflow("mat_exp: argument norm " + std::to_string(n) +
                          " exceeds bound " + std::to_string(norm_bound));
    }
    return a.exp();
}

// X with A X = B
inline CMatrix solve(const CMatrix& a, const CMatrix& b,
                     double cond_limit = 1e12) {
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("solve: matrix must be square");
    }
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("solve: dimension mismatch");
    }
    Eigen::PartialPivLU<CMatrix> lu(a);
    const double cond = detail::lu_condition(lu);
    if (!(cond < cond_limit)) {
        throw SingularMatrix(cond);
    }
    return lu.solve(b);
}

}  // namespace wbl

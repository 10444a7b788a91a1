#pragma once

#include <functional>
#include <span>
#include <vector>

#include "treebec/kernels.hpp"
#include "treebec/numerics.hpp"

namespace treebec::spectral {

inline constexpr std::int64_t kDenseLimit = 4096;

// y = Op x for a symmetric operator given only through its action.
using Operator = std::function<void(std::span<const double>, std::span<double>)>;

struct Eigenpair {
    double value = 0.0;
    Vec vector;         // unit 2-norm unless stated otherwise
    double residual = 0.0;  // ||Op v - value v|| / ||v||
    int matvecs = 0;
};

struct LanczosOptions {
    double tol = 1e-10;
    int basis = 0;  // 0 picks a size that fits in memory
    int max_restarts = 400;
};

// Largest eigenvalue by restarted Lanczos with full reorthogonalisation.
Eigenpair top_eigenpair(const Operator& op, std::int64_t n, const LanczosOptions& opt = {},
                        std::span<const double> start = {});

Eigenpair extremal_eig(const CsrMatrix& a, double tol = 1e-10);

// Perron-Frobenius pair of a nonnegative irreducible matrix, scaled so that v[root] = 1.
// Falls back to shifted power iteration if Lanczos leaves a non-positive entry.
Eigenpair pf_vector(const CsrMatrix& a, double tol = 1e-10, std::int64_t root = 0);

// Ascending eigenvalues through LAPACK; refuses above dense_limit.
Vec full_spectrum(const CsrMatrix& a, std::int64_t dense_limit = kDenseLimit);

struct Eigensystem {
    Vec values;
    std::vector<double> vectors;  // column-major n x n
    std::int64_t n = 0;

    double component(std::int64_t row, std::int64_t k) const { return vectors[k * n + row]; }
};
Eigensystem full_eigensystem(const CsrMatrix& a, std::int64_t dense_limit = kDenseLimit);

struct SolveResult {
    Vec x;
    int iterations = 0;
    double residual = 0.0;  // relative
};

// Solves (lambda - A) x = b by Jacobi-preconditioned CG. Vectors in `deflate`
// must be orthonormal eigenvectors of A; the solve runs on their complement.
SolveResult resolvent_solve(const CsrMatrix& a, double lambda, std::span<const double> b,
                            double tol = 1e-10, std::span<const Vec> deflate = {},
                            int max_iter = 0);

// exp(i t H) u with H = reference - A, by a Chebyshev-Bessel expansion.
CVec evolve(const CsrMatrix& a, double t, std::span<const std::complex<double>> u, double reference,
            int degree_cap = 20000);

// p(A) u where p is the Chebyshev series; A's spectrum must lie in [s.lo, s.hi].
Vec chebyshev_apply(const CsrMatrix& a, std::span<const double> u, const numerics::ChebyshevSeries& s);

}  // namespace treebec::spectral

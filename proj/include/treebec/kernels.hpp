#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace treebec {

using Vec = std::vector<double>;
using CVec = std::vector<std::complex<double>>;

// Symmetric sparse matrix in CSR form; both triangles are stored.
struct CsrMatrix {
    std::int64_t n = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;

    std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
};

// Gershgorin interval containing the spectrum.
struct Interval {
    double lo;
    double hi;
};
Interval gershgorin(const CsrMatrix& a);

// Reference implementations. Single thread, fixed summation order.
namespace serial {
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
void spmv(const CsrMatrix& a, std::span<const std::complex<double>> x,
          std::span<std::complex<double>> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace serial

// OpenMP variants. dot() reduces fixed-size blocks in index order, so the
// result does not depend on the thread count.
namespace parallel {
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
void spmv(const CsrMatrix& a, std::span<const std::complex<double>> x,
          std::span<std::complex<double>> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace parallel

// What the solvers call.
using parallel::axpy;
using parallel::dot;
using parallel::spmv;

double norm2(std::span<const double> x);
void scale(double alpha, std::span<double> x);

// Thread count honoured by the parallel kernels; TREEBEC_THREADS overrides.
int worker_count();
void set_worker_count(int n);

}  // namespace treebec

#include "treebec/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace treebec {

namespace {
constexpr std::int64_t kDotBlock = 4096;
}

Interval gershgorin(const CsrMatrix& a) {
    double lo = 0.0, hi = 0.0;
    for (std::int64_t i = 0; i < a.n; ++i) {
        double diag = 0.0, off = 0.0;
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            if (a.col[k] == i) diag += a.val[k];
            else off += std::abs(a.val[k]);
        }
        if (i == 0) {
            lo = diag - off;
            hi = diag + off;
        } else {
            lo = std::min(lo, diag - off);
            hi = std::max(hi, diag + off);
        }
    }
    return {lo, hi};
}

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    for (std::int64_t i = 0; i < a.n; ++i) {
        double s = 0.0;
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
        y[i] = s;
    }
}

void spmv(const CsrMatrix& a, std::span<const std::complex<double>> x,
          std::span<std::complex<double>> y) {
    for (std::int64_t i = 0; i < a.n; ++i) {
        std::complex<double> s = 0.0;
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
        y[i] = s;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<std::int64_t>(x.size());
    double total = 0.0;
    for (std::int64_t b = 0; b < n; b += kDotBlock) {
        double s = 0.0;
        const auto e = std::min(n, b + kDotBlock);
        for (auto i = b; i < e; ++i) s += x[i] * y[i];
        total += s;
    }
    return total;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace serial

namespace parallel {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    const auto n = a.n;
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::int64_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
        y[i] = s;
    }
}

void spmv(const CsrMatrix& a, std::span<const std::complex<double>> x,
          std::span<std::complex<double>> y) {
    const auto n = a.n;
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::int64_t i = 0; i < n; ++i) {
        std::complex<double> s = 0.0;
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
        y[i] = s;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<std::int64_t>(x.size());
    const auto blocks = (n + kDotBlock - 1) / kDotBlock;
    std::vector<double> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::int64_t b = 0; b < blocks; ++b) {
        double s = 0.0;
        const auto e = std::min(n, (b + 1) * kDotBlock);
        for (auto i = b * kDotBlock; i < e; ++i) s += x[i] * y[i];
        partial[b] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace parallel

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void scale(double alpha, std::span<double> x) {
    for (double& v : x) v *= alpha;
}

namespace {
int& worker_setting() {
    static int n = [] {
        if (const char* env = std::getenv("TREEBEC_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) return v;
        }
        return omp_get_max_threads();
    }();
    return n;
}
}  // namespace

int worker_count() { return worker_setting(); }
void set_worker_count(int n) { worker_setting() = std::max(1, n); }

}  // namespace treebec

#include "treebec/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "treebec/error.hpp"

namespace treebec::spectral {

namespace {

int pick_basis(std::int64_t n, int requested) {
    if (requested > 0) return static_cast<int>(std::min<std::int64_t>(requested, n));
    const std::int64_t budget = 40'000'000;  // doubles held by the Krylov basis
    const auto m = std::clamp<std::int64_t>(budget / std::max<std::int64_t>(n, 1), 24, 120);
    return static_cast<int>(std::min(m, n));
}

// Eigen-decomposition of the symmetric tridiagonal (alpha, beta); returns top pair.
std::pair<double, Vec> tridiagonal_top(const Vec& alpha, const Vec& beta, int m) {
    Vec d(alpha.begin(), alpha.begin() + m);
    Vec e(beta.begin(), beta.begin() + std::max(m - 1, 0));
    e.resize(std::max(m, 1));
    Vec z(static_cast<std::size_t>(m) * m);
    const auto info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', m, d.data(), e.data(), z.data(), m);
    if (info != 0) throw ConvergenceError("tridiagonal eigensolver failed", double(info));
    return {d[m - 1], Vec(z.begin() + static_cast<std::ptrdiff_t>(m - 1) * m, z.end())};
}

}  // namespace

Eigenpair top_eigenpair(const Operator& op, std::int64_t n, const LanczosOptions& opt,
                        std::span<const double> start) {
    if (n <= 0) throw PreconditionError("top_eigenpair: empty operator");
    Eigenpair out;
    Vec x(n, 1.0);
    if (!start.empty()) x.assign(start.begin(), start.end());
    scale(1.0 / norm2(x), x);
    Vec w(n);
    if (n == 1) {
        op(x, w);
        out.value = w[0];
        out.vector = x;
        out.matvecs = 1;
        return out;
    }
    const int m = pick_basis(n, opt.basis);
    std::vector<Vec> basis(m, Vec(n));
    Vec alpha(m), beta(m);
    double resid = 0.0;
    for (int restart = 0; restart < opt.max_restarts; ++restart) {
        basis[0] = x;
        int steps = 0;
        for (int j = 0; j < m; ++j) {
            op(basis[j], w);
            ++out.matvecs;
            alpha[j] = dot(w, basis[j]);
            // Two passes of classical Gram-Schmidt against the whole basis.
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i) axpy(-dot(w, basis[i]), basis[i], w);
            beta[j] = norm2(w);
            steps = j + 1;
            if (j + 1 == m || beta[j] < 1e-13 * std::max(1.0, std::abs(alpha[j]))) break;
            basis[j + 1] = w;
            scale(1.0 / beta[j], basis[j + 1]);
        }
        auto [theta, y] = tridiagonal_top(alpha, beta, steps);
        std::fill(x.begin(), x.end(), 0.0);
        for (int i = 0; i < steps; ++i) axpy(y[i], basis[i], x);
        scale(1.0 / norm2(x), x);
        op(x, w);
        ++out.matvecs;
        axpy(-theta, x, w);
        resid = norm2(w);
        out.value = theta;
        if (resid <= opt.tol * std::max(1.0, std::abs(theta))) {
            out.vector = std::move(x);
            out.residual = resid;
            return out;
        }
    }
    throw ConvergenceError("Lanczos did not reach the residual tolerance", resid);
}

Eigenpair extremal_eig(const CsrMatrix& a, double tol) {
    LanczosOptions opt;
    opt.tol = tol;
    auto op = [&a](std::span<const double> x, std::span<double> y) { spmv(a, x, y); };
    auto r = top_eigenpair(op, a.n, opt);
    double s = 0.0;
    for (double v : r.vector) s += v;
    if (s < 0) scale(-1.0, r.vector);
    return r;
}

Eigenpair pf_vector(const CsrMatrix& a, double tol, std::int64_t root) {
    auto r = extremal_eig(a, tol);
    const bool positive = std::all_of(r.vector.begin(), r.vector.end(), [](double v) { return v > 0; });
    if (!positive) {
        // A + sI is entrywise nonnegative, so power iteration keeps the iterate positive.
        const double shift = std::max(0.0, -gershgorin(a).lo);
        Vec x(r.vector.size()), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(std::abs(r.vector[i]), 1e-300);
        scale(1.0 / norm2(x), x);
        double lam = 0.0, res = 0.0;
        const int cap = 200000;
        int it = 0;
        for (; it < cap; ++it) {
            spmv(a, x, y);
            lam = dot(x, y);
            Vec t = y;
            axpy(-lam, x, t);
            res = norm2(t);
            if (res <= tol * std::max(1.0, std::abs(lam))) break;
            axpy(shift, x, y);
            scale(1.0 / norm2(y), y);
            std::swap(x, y);
        }
        if (it == cap) throw ConvergenceError("PF power iteration did not converge", res);
        r.value = lam;
        r.vector = x;
        r.residual = res;
        r.matvecs += it + 1;
    }
    const double anchor = r.vector[root];
    if (!(anchor > 0)) throw ConvergenceError("PF vector vanishes at the root", anchor);
    for (auto& x : r.vector) x /= anchor;
    return r;
}

namespace {
std::vector<double> densify(const CsrMatrix& a, std::int64_t dense_limit) {
    if (a.n > dense_limit)
        throw SizeError("dense eigensolver asked for n=" + std::to_string(a.n) + " above limit " +
                        std::to_string(dense_limit));
    std::vector<double> m(static_cast<std::size_t>(a.n * a.n), 0.0);
    for (std::int64_t i = 0; i < a.n; ++i)
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) m[a.col[k] * a.n + i] = a.val[k];
    return m;
}
}  // namespace

Vec full_spectrum(const CsrMatrix& a, std::int64_t dense_limit) {
    auto m = densify(a, dense_limit);
    Vec w(a.n);
    const auto n = static_cast<lapack_int>(a.n);
    const auto info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, m.data(), n, w.data());
    if (info != 0) throw ConvergenceError("dsyevd failed", double(info));
    return w;
}

Eigensystem full_eigensystem(const CsrMatrix& a, std::int64_t dense_limit) {
    Eigensystem es;
    es.vectors = densify(a, dense_limit);
    es.values.resize(a.n);
    es.n = a.n;
    const auto n = static_cast<lapack_int>(a.n);
    const auto info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, es.vectors.data(), n, es.values.data());
    if (info != 0) throw ConvergenceError("dsyevd failed", double(info));
    return es;
}

SolveResult resolvent_solve(const CsrMatrix& a, double lambda, std::span<const double> b,
                            double tol, std::span<const Vec> deflate, int max_iter) {
    const auto n = a.n;
    if (max_iter <= 0) max_iter = static_cast<int>(std::min<std::int64_t>(100000, 20 * n + 100));
    auto project = [&](Vec& v) {
        for (const auto& d : deflate) axpy(-dot(v, d), d, v);
    };
    Vec inv_diag(n);
    for (std::int64_t i = 0; i < n; ++i) {
        double aii = 0.0;
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col[k] == i) aii = a.val[k];
        const double d = lambda - aii;
        if (!(d > 0)) throw PreconditionError("resolvent_solve: lambda is not above the spectrum");
        inv_diag[i] = 1.0 / d;
    }
    SolveResult out;
    out.x.assign(n, 0.0);
    Vec r(b.begin(), b.end());
    project(r);
    const double bnorm = norm2(r);
    if (bnorm == 0.0) return out;
    Vec z(n), p(n), q(n);
    auto precondition = [&] {
        for (std::int64_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        project(z);
    };
    precondition();
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        spmv(a, p, q);
        for (std::int64_t i = 0; i < n; ++i) q[i] = lambda * p[i] - q[i];
        const double curv = dot(p, q);
        if (!(curv > 0))
            throw PreconditionError("resolvent_solve: lambda - A is not positive definite here");
        const double step = rz / curv;
        axpy(step, p, out.x);
        axpy(-step, q, r);
        out.iterations = it;
        out.residual = norm2(r) / bnorm;
        if (out.residual <= tol) {
            project(out.x);
            return out;
        }
        precondition();
        const double rz_next = dot(r, z);
        const double ratio = rz_next / rz;
        rz = rz_next;
        for (std::int64_t i = 0; i < n; ++i) p[i] = z[i] + ratio * p[i];
    }
    throw ConvergenceError("resolvent_solve: CG iteration cap reached", out.residual);
}

CVec evolve(const CsrMatrix& a, double t, std::span<const std::complex<double>> u, double reference,
            int degree_cap) {
    using C = std::complex<double>;
    const auto box = gershgorin(a);
    const double c = 0.5 * (box.hi + box.lo);
    const double r = std::max(0.5 * (box.hi - box.lo), 1e-300);
    const double omega = t * r;
    const double w = std::abs(omega);
    // J_k(w) decays super-exponentially once k exceeds w.
    int degree = 0;
    while (true) {
        if (degree > degree_cap)
            throw ConvergenceError("evolve: Chebyshev degree cap reached", std::abs(omega));
        if (degree > w && std::abs(std::cyl_bessel_j(double(degree), w)) < 1e-17 &&
            std::abs(std::cyl_bessel_j(double(degree + 1), w)) < 1e-17)
            break;
        ++degree;
    }
    const auto n = a.n;
    CVec t0(u.begin(), u.end()), t1(n), t2(n), tmp(n), out(n);
    auto apply_x = [&](const CVec& in, CVec& res) {
        spmv(a, std::span<const C>(in), std::span<C>(tmp));
        for (std::int64_t i = 0; i < n; ++i) res[i] = (tmp[i] - c * in[i]) / r;
    };
    // exp(-i omega X) = sum_k (2 - delta_k0) (-i)^k J_k(omega) T_k(X)
    auto coef = [&](int k) {
        double j = std::cyl_bessel_j(double(k), w);
        if (omega < 0 && (k % 2)) j = -j;
        static const C minus_i(0.0, -1.0);
        return (k == 0 ? 1.0 : 2.0) * std::pow(minus_i, k) * j;
    };
    for (std::int64_t i = 0; i < n; ++i) out[i] = coef(0) * t0[i];
    if (degree >= 1) {
        apply_x(t0, t1);
        const C c1 = coef(1);
        for (std::int64_t i = 0; i < n; ++i) out[i] += c1 * t1[i];
    }
    for (int k = 2; k <= degree; ++k) {
        apply_x(t1, t2);
        const C ck = coef(k);
        for (std::int64_t i = 0; i < n; ++i) {
            t2[i] = 2.0 * t2[i] - t0[i];
            out[i] += ck * t2[i];
        }
        std::swap(t0, t1);
        std::swap(t1, t2);
    }
    const C phase = std::exp(C(0.0, t * (reference - c)));
    for (auto& v : out) v *= phase;
    return out;
}

Vec chebyshev_apply(const CsrMatrix& a, std::span<const double> u, const numerics::ChebyshevSeries& s) {
    const auto n = a.n;
    const double c = 0.5 * (s.hi + s.lo), r = 0.5 * (s.hi - s.lo);
    Vec t0(u.begin(), u.end()), t1(n), t2(n), out(n);
    auto apply_x = [&](const Vec& in, Vec& res) {
        spmv(a, in, res);
        for (std::int64_t i = 0; i < n; ++i) res[i] = (res[i] - c * in[i]) / r;
    };
    for (std::int64_t i = 0; i < n; ++i) out[i] = s.c[0] * t0[i];
    if (s.c.size() > 1) {
        apply_x(t0, t1);
        axpy(s.c[1], t1, out);
    }
    for (std::size_t k = 2; k < s.c.size(); ++k) {
        apply_x(t1, t2);
        for (std::int64_t i = 0; i < n; ++i) t2[i] = 2.0 * t2[i] - t0[i];
        axpy(s.c[k], t2, out);
        std::swap(t0, t1);
        std::swap(t1, t2);
    }
    return out;
}

}  // namespace treebec::spectral

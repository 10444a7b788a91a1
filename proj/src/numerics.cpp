#include "treebec/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "treebec/error.hpp"

namespace treebec::numerics {

std::vector<double> least_squares(const std::vector<std::vector<double>>& basis,
                                  std::span<const double> values) {
    const auto rows = static_cast<Eigen::Index>(values.size());
    const auto cols = static_cast<Eigen::Index>(basis.size());
    if (cols == 0 || rows < cols) throw PreconditionError("least_squares: underdetermined fit");
    Eigen::MatrixXd m(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        b(i) = values[i];
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = basis[j][i];
    }
    Eigen::VectorXd x = m.colPivHouseholderQr().solve(b);
    return {x.data(), x.data() + x.size()};
}

InverseSquareFit fit_inverse_square(std::span<const double> ns, std::span<const double> values) {
    if (ns.size() != 3 || values.size() != 3)
        throw PreconditionError("fit_inverse_square needs exactly three points");
    const double n1 = ns[0], n2 = ns[1], n3 = ns[2];
    const double d1 = values[1] - values[0], d2 = values[2] - values[1];
    auto inv2 = [](double x) { return 1.0 / (x * x); };
    auto ratio = [&](double c) {
        return (inv2(n1 + c) - inv2(n2 + c)) / (inv2(n2 + c) - inv2(n3 + c));
    };
    double lo = -n1 + 1e-9 * (1.0 + std::abs(n1)), hi = 1e7;
    const double target = d1 / d2;
    if (d2 == 0.0 || !(target < ratio(lo)) || !(target > ratio(hi))) {
        // No exact solution with a finite offset; fall back to c = 0 through the last two points.
        const double amp = d2 / (inv2(n2) - inv2(n3));
        return {values[2] + amp * inv2(n3), amp, 0.0};
    }
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ratio(mid) > target) lo = mid;
        else hi = mid;
    }
    const double c = 0.5 * (lo + hi);
    const double amp = d2 / (inv2(n2 + c) - inv2(n3 + c));
    return {values[2] + amp * inv2(n3 + c), amp, c};
}

double extrapolate_inverse_powers(std::span<const double> ns, std::span<const double> values) {
    std::vector<std::vector<double>> basis(ns.size(), std::vector<double>(ns.size()));
    for (std::size_t k = 0; k < ns.size(); ++k)
        for (std::size_t i = 0; i < ns.size(); ++i) basis[k][i] = std::pow(ns[i], -double(k));
    return least_squares(basis, values)[0];
}

double extrapolate_geometric(std::span<const double> ns, std::span<const double> values,
                             double r) {
    std::vector<std::vector<double>> basis(3, std::vector<double>(ns.size()));
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double g = std::pow(r, ns[i]);
        basis[0][i] = 1.0;
        basis[1][i] = g;
        basis[2][i] = ns[i] * g;
    }
    return least_squares(basis, values)[0];
}

ChebyshevSeries chebyshev_fit(const std::function<double(double)>& f, double lo, double hi,
                              double tol, int max_degree) {
    if (!(hi > lo)) throw PreconditionError("chebyshev_fit: empty interval");
    const double mid = 0.5 * (hi + lo), rad = 0.5 * (hi - lo);
    for (int nodes = 32;; nodes *= 2) {
        std::vector<double> fx(nodes);
        for (int j = 0; j < nodes; ++j)
            fx[j] = f(mid + rad * std::cos(std::numbers::pi * (j + 0.5) / nodes));
        std::vector<double> c(nodes);
        for (int k = 0; k < nodes; ++k) {
            double s = 0.0;
            for (int j = 0; j < nodes; ++j) s += fx[j] * std::cos(std::numbers::pi * k * (j + 0.5) / nodes);
            c[k] = 2.0 * s / nodes;
        }
        c[0] *= 0.5;
        double high = 0.0, scale = 0.0;
        for (int k = 3 * nodes / 4; k < nodes; ++k) high += std::abs(c[k]);
        for (double v : fx) scale = std::max(scale, std::abs(v));
        // coefficients cannot resolve below rounding of the samples
        const double floor = 4.0 * nodes * std::numeric_limits<double>::epsilon() * scale;
        if (high < std::max(0.1 * tol, floor) || nodes >= max_degree) {
            int keep = nodes;
            double tail = 0.0;
            while (keep > 1 && tail + std::abs(c[keep - 1]) < tol) tail += std::abs(c[--keep]);
            if (high >= 0.1 * tol && tail < high) tail = high;
            c.resize(keep);
            return {lo, hi, std::move(c), tail};
        }
    }
}

double chebyshev_eval(const ChebyshevSeries& s, double x) {
    const double t = (2.0 * x - s.hi - s.lo) / (s.hi - s.lo);
    double b1 = 0.0, b2 = 0.0;
    for (auto k = s.c.size(); k-- > 1;) {
        const double b0 = 2.0 * t * b1 - b2 + s.c[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + s.c[0];
}

}  // namespace treebec::numerics

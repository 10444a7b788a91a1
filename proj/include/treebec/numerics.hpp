#pragma once

#include <functional>
#include <span>
#include <vector>

namespace treebec::numerics {

// Least-squares fit of values against basis columns; returns coefficients.
std::vector<double> least_squares(const std::vector<std::vector<double>>& basis,
                                  std::span<const double> values);

// Three points of v(n) = limit - C / (n + c)^2, solved exactly for (limit, C, c).
struct InverseSquareFit {
    double limit;
    double amplitude;
    double offset;
};
InverseSquareFit fit_inverse_square(std::span<const double> ns, std::span<const double> values);

// v(N) = limit + b1/N + b2/N^2 + ... with as many terms as points allow.
double extrapolate_inverse_powers(std::span<const double> ns, std::span<const double> values);

// v(n) = limit + (b + c n) r^n, least squares when more than three points.
double extrapolate_geometric(std::span<const double> ns, std::span<const double> values, double r);

// Chebyshev series of f on [lo, hi]; coefficients already carry the 1/2 on c_0.
struct ChebyshevSeries {
    double lo;
    double hi;
    std::vector<double> c;
    double tail;  // sum of |c_k| over the discarded coefficients
};
ChebyshevSeries chebyshev_fit(const std::function<double(double)>& f, double lo, double hi,
                              double tol, int max_degree = 4096);
double chebyshev_eval(const ChebyshevSeries& s, double x);

}  // namespace treebec::numerics

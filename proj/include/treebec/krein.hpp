#pragma once

#include <complex>
#include <span>
#include <vector>

#include "treebec/graph.hpp"
#include "treebec/kernels.hpp"

namespace treebec::krein {

double branch_point(int Q);

// Kernel functions a(lambda), mu(lambda) of the Q-homogeneous tree Green function.
struct AMu {
    double a;
    double mu;
};
AMu a_mu(double lambda, int Q);

struct CAMu {
    std::complex<double> a;
    std::complex<double> mu;
};
// Principal-branch continuation, analytic off [-2 sqrt(Q-1), 2 sqrt(Q-1)].
CAMu a_mu(std::complex<double> z, int Q);

// Tree Green function <R(lambda) d_x, d_y> at graph distance d.
double green_entry(int Q, double lambda, int d);

// y(x) = (1/mu) sum_t a^{d(x,t)} u(t) on the base geometry, two tree sweeps.
Vec tree_convolve(const graph::BaseGeometry& g, double a, double mu, std::span<const double> u);

// Dense secular matrix a^{d(s,t)}/mu, row-major.
std::vector<double> secular_matrix(const graph::BaseGeometry& g, int Q, double lambda);

// Number of eigenvalues of the secular matrix strictly above `level` (Sylvester inertia).
std::int64_t secular_count_above(const graph::BaseGeometry& g, int Q, double lambda,
                                 double level = 1.0);

// Top eigenvalue of the secular matrix: dense when small, inertia bisection otherwise.
double secular_opnorm(const graph::BaseGeometry& g, int Q, double lambda,
                      std::int64_t dense_limit = 4096);

// lambda where the secular norm crosses 1; NoCrossingError if it is already <= 1 at the branch point.
double secular_root(const graph::BaseGeometry& g, int Q, double tol = 1e-12);

// ||A_Y|| estimated from truncated secular roots with an extrapolation in the truncation level.
struct ModelNorm {
    graph::ModelSpec spec;
    std::vector<int> levels;
    Vec per_level;
    double estimate = 0.0;
    double uncertainty = 0.0;
    bool at_branch_point = false;  // no spectrum above 2 sqrt(Q-1)
};
std::vector<int> default_levels(const graph::ModelSpec& spec);
ModelNorm model_norm(const graph::ModelSpec& spec, std::vector<int> levels = {}, double tol = 1e-12);

enum class Route { Tree, Dense };

// Resolvent entry of the infinite perturbed graph with the base set cut at `truncation`.
// x and y are vertices of m's ball; truncation must be at least m's radius.
double krein_resolvent_entry(const graph::Model& m, double lambda, std::int32_t x, std::int32_t y,
                             int truncation, Route route = Route::Tree,
                             std::int64_t dense_limit = 4096);

// Entry at lambda = ||A_Y|| with the truncation extrapolated away.
struct Extrapolated {
    double value;
    double spread;
};
Extrapolated resolvent_at_norm(const graph::Model& m, const ModelNorm& norm, std::int32_t x,
                               std::int32_t y);

enum class Transience { Transient, Recurrent, Inconclusive };
const char* to_string(Transience t);

struct TransienceReport {
    Transience verdict = Transience::Inconclusive;
    Vec lambdas;
    Vec values;  // root diagonal of the resolvent at each probe
    std::string note;
};
TransienceReport classify_transience(const ModelNorm& norm, int probes = 20,
                                     double cauchy_gap = 1e-3);

struct CircleMax {
    double value;
    double theta;
    bool at_zero;
};
CircleMax circle_max(int Q, double r, int samples = 7200);

// Smallest grid point r >= start with secular norm at most `threshold`.
double neumann_radius(const graph::BaseGeometry& g, int Q, double start, double step = 0.01,
                      double threshold = 0.2);
double neumann_radius(const ModelNorm& norm, double step = 0.01, double threshold = 0.2);

}  // namespace treebec::krein

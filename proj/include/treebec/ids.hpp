#pragma once

#include <string>
#include <vector>

#include "treebec/graph.hpp"
#include "treebec/krein.hpp"
#include "treebec/numerics.hpp"

namespace treebec::ids {

// Energies h = reference - lambda, ascending.
Vec energies(const Vec& adjacency_spectrum, double reference);

// Uniform grid on [lo, hi] with the given jump locations merged in, sorted and deduplicated.
Vec ids_grid(double lo, double hi, int points, const std::vector<const Vec*>& jumps = {});

// Fraction of energies <= x.
double cumulative(const Vec& h_sorted, double x);

struct IdsEstimate {
    Vec grid;
    Vec values;
    std::string source;
    double delta = 0.0;   // ||A_X|| - ||A_Y||
    double gap_em = 0.0;  // E_m
};
IdsEstimate empirical_ids(const Vec& h_sorted, const Vec& grid);

struct PhiValue {
    double value;
    double tail_bound;
};
// Laplace transform of the IDS of the unperturbed Q-tree, H = 2 sqrt(Q-1) - A.
PhiValue phi_series(int Q, double beta, int k_max = 200);

// tau_n(p(A)) by one representative per orbit of the ball's automorphisms fixing S.
// Exact for any polynomial p; classes are (anchor depth, distance to S).
double orbit_trace(const graph::Model& m, const numerics::ChebyshevSeries& p);

// (1/N) sum_k exp(-beta (reference - lambda_k)); dense below the limit, orbit trace above.
double laplace_transform(const graph::Model& m, double beta, double reference,
                         std::int64_t dense_limit = 4096);

struct ShiftCheck {
    int n;
    double sup;
    double delta;
};
ShiftCheck shift_check(const graph::ModelSpec& spec, double lambda_star, int n,
                       int grid_points = 2001, std::int64_t dense_limit = 4096);

struct GapRow {
    int n;
    double lambda_max;
    double e0;  // lambda* - lambda_max
};
struct HiddenGap {
    double em;                 // lambda* - 2 sqrt(Q-1)
    std::vector<GapRow> rows;
    double lambda_from_balls;  // extrapolated ball lambda_max
    double em_from_balls;
};
HiddenGap hidden_gap(const graph::ModelSpec& spec, double lambda_star, const std::vector<int>& ns);

// Fraction of energies inside the open interval (lo, hi).
double gap_mass(const Vec& h_sorted, double lo, double hi);

}  // namespace treebec::ids

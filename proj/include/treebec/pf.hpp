#pragma once

#include <vector>

#include "treebec/graph.hpp"
#include "treebec/krein.hpp"

namespace treebec::pf {

// Spherical function of the q-regular tree at the bottom of its spectrum.
double phi_family(int q, int d);

// phi_{q,y} evaluated on every vertex of a q-regular ball.
Vec phi_on_ball(const graph::TreeBall& ball, std::int32_t y);

// Weight on the base set: HQ uses 1 + (1 - a*) k along the ray, GQq the spherical function.
double closed_w(const graph::ModelSpec& spec, double a_star, int anchor_depth);

// Generalised PF eigenvector a*^{d(x,S)} w(y(x)) on the model's ball.
Vec closed_v(const graph::Model& m, double lambda_star);

// Perturbed ball with its PF data, computed once and shared by later stages.
struct FiniteVolume {
    graph::Model model;
    double lambda_max = 0.0;
    Vec pf;  // positive, pf[root] = 1
    double pf_norm2 = 0.0;
    double residual = 0.0;
};
FiniteVolume make_finite_volume(const graph::ModelSpec& spec, int n, double tol = 1e-10);

struct RatioRow {
    int n;
    double r1;  // ||v restricted to Lambda_n||^2 |S_n| / |Lambda_n|
    double r2;  // ||v_n||^2 |S_n| / |Lambda_n|
    double r3;  // ||v_n||^2 / |Lambda_n|
    double vn_norm2;
    std::int64_t base_size;
    std::int64_t volume;
};
RatioRow ratio_row(const FiniteVolume& fv, const krein::ModelNorm& norm);
std::vector<RatioRow> ratio_series(const graph::ModelSpec& spec, const krein::ModelNorm& norm,
                                   const std::vector<int>& ns);

struct ProbeRow {
    int n;
    Vec vn;
    Vec v;
    Vec error;
};
// Vertex indices are BFS labels, stable across radii, so they must exist in the smallest ball.
std::vector<ProbeRow> vn_vs_v(const graph::ModelSpec& spec, const krein::ModelNorm& norm,
                              const std::vector<std::int32_t>& sample, const std::vector<int>& ns);

struct Domination {
    bool holds;
    double worst_ratio;  // max over S of v_n / v
};
Domination domination_check(const graph::Model& m, const Vec& vn, const Vec& v, double slack = 1e-8);

}  // namespace treebec::pf

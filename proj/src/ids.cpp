#include "treebec/ids.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "treebec/error.hpp"
#include "treebec/spectral.hpp"

namespace treebec::ids {

Vec energies(const Vec& adjacency_spectrum, double reference) {
    Vec h(adjacency_spectrum.size());
    std::transform(adjacency_spectrum.begin(), adjacency_spectrum.end(), h.begin(),
                   [reference](double l) { return reference - l; });
    std::sort(h.begin(), h.end());
    return h;
}

Vec ids_grid(double lo, double hi, int points, const std::vector<const Vec*>& jumps) {
    Vec g;
    for (int i = 0; i < points; ++i) g.push_back(lo + (hi - lo) * i / std::max(points - 1, 1));
    for (const Vec* j : jumps)
        for (double x : *j)
            if (x >= lo && x <= hi) g.push_back(x);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

double cumulative(const Vec& h_sorted, double x) {
    const auto k = std::upper_bound(h_sorted.begin(), h_sorted.end(), x) - h_sorted.begin();
    return double(k) / double(h_sorted.size());
}

IdsEstimate empirical_ids(const Vec& h_sorted, const Vec& grid) {
    if (h_sorted.empty()) throw PreconditionError("empirical_ids: empty spectrum");
    IdsEstimate e;
    e.grid = grid;
    e.values.reserve(grid.size());
    for (double x : grid) e.values.push_back(cumulative(h_sorted, x));
    e.source = "Empirical";
    return e;
}

PhiValue phi_series(int Q, double beta, int k_max) {
    if (Q < 3) throw DomainError("phi_series: Q must be at least 3");
    if (beta < 0 || k_max < 1) throw DomainError("phi_series: need beta >= 0 and kMax >= 1");
    const double b = Q - 1.0, x = 1.0 / b;
    const double pref = (Q - 2.0) * (Q - 2.0) / b;
    const double scale = 4.0 * beta * std::sqrt(b);
    double sum = 0.0, weight = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        weight *= x;
        double inner = 0.0;
        for (int n = 1; n <= k; ++n) {
            const double s = std::sin(n * std::numbers::pi / (2.0 * (k + 1)));
            inner += std::exp(-scale * s * s);
        }
        sum += weight * inner;
    }
    // sum_{k>K} k x^k = x^{K+1} ((K+1) - K x) / (1-x)^2
    const double tail = std::pow(x, k_max + 1) * ((k_max + 1) - k_max * x) / ((1 - x) * (1 - x));
    return {pref * sum, pref * tail};
}

namespace {

struct OrbitClass {
    std::int32_t representative;
    std::int64_t count;
};

std::vector<OrbitClass> orbit_classes(const graph::Model& m) {
    std::map<std::pair<int, int>, std::size_t> index;
    std::vector<OrbitClass> classes;
    graph::BaseDistance bd;
    const bool flat = m.base.empty();
    if (!flat) bd = graph::base_distance(m);
    for (std::int64_t x = 0; x < m.size(); ++x) {
        const std::pair<int, int> key =
            flat ? std::pair{m.ball.depth[x], 0} : std::pair{m.ball.depth[bd.anchor[x]], bd.dist[x]};
        auto [it, fresh] = index.try_emplace(key, classes.size());
        if (fresh) classes.push_back({static_cast<std::int32_t>(x), 0});
        ++classes[it->second].count;
    }
    return classes;
}

}  // namespace

double orbit_trace(const graph::Model& m, const numerics::ChebyshevSeries& p) {
    double total = 0.0;
    Vec e(m.size(), 0.0);
    for (const auto& c : orbit_classes(m)) {
        e[c.representative] = 1.0;
        const auto y = spectral::chebyshev_apply(m.adjacency, e, p);
        e[c.representative] = 0.0;
        total += double(c.count) * y[c.representative];
    }
    return total / double(m.size());
}

double laplace_transform(const graph::Model& m, double beta, double reference,
                         std::int64_t dense_limit) {
    if (m.size() <= dense_limit) {
        const auto spec = spectral::full_spectrum(m.adjacency, dense_limit);
        double s = 0.0;
        for (double l : spec) s += std::exp(-beta * (reference - l));
        return s / double(spec.size());
    }
    const auto box = gershgorin(m.adjacency);
    const auto p = numerics::chebyshev_fit(
        [&](double l) { return std::exp(-beta * (reference - l)); }, box.lo, box.hi, 1e-15);
    return orbit_trace(m, p);
}

ShiftCheck shift_check(const graph::ModelSpec& spec, double lambda_star, int n, int grid_points,
                       std::int64_t dense_limit) {
    const double bp = krein::branch_point(spec.Q);
    const auto y = graph::build_model(spec, n);
    graph::ModelSpec flat = spec;
    flat.kind = graph::Kind::Tree;
    const auto x = graph::build_model(flat, n);
    const auto hy = energies(spectral::full_spectrum(y.adjacency, dense_limit), lambda_star);
    // F_X(h + delta) with delta = -E_m counts bp - lambda <= h - E_m, i.e. lambda* - lambda <= h.
    const auto hx = energies(spectral::full_spectrum(x.adjacency, dense_limit), lambda_star);
    const auto grid = ids_grid(std::min(0.0, hy.front()), lambda_star + spec.Q + 1.0, grid_points,
                               {&hy, &hx});
    double sup = 0.0;
    for (double g : grid) sup = std::max(sup, std::abs(cumulative(hy, g) - cumulative(hx, g)));
    return {n, sup, bp - lambda_star};
}

HiddenGap hidden_gap(const graph::ModelSpec& spec, double lambda_star, const std::vector<int>& ns) {
    HiddenGap out;
    const double bp = krein::branch_point(spec.Q);
    out.em = lambda_star - bp;
    for (int n : ns) {
        const auto m = graph::build_model(spec, n);
        const double lmax = spectral::extremal_eig(m.adjacency).value;
        out.rows.push_back({n, lmax, lambda_star - lmax});
    }
    if (out.rows.size() >= 3) {
        const auto k = out.rows.size();
        const double xs[3] = {double(out.rows[k - 3].n), double(out.rows[k - 2].n), double(out.rows[k - 1].n)};
        const double ys[3] = {out.rows[k - 3].lambda_max, out.rows[k - 2].lambda_max,
                              out.rows[k - 1].lambda_max};
        out.lambda_from_balls = numerics::fit_inverse_square(xs, ys).limit;
    } else {
        out.lambda_from_balls = out.rows.empty() ? bp : out.rows.back().lambda_max;
    }
    out.em_from_balls = out.lambda_from_balls - bp;
    return out;
}

double gap_mass(const Vec& h_sorted, double lo, double hi) {
    const auto first = std::upper_bound(h_sorted.begin(), h_sorted.end(), lo);
    const auto last = std::lower_bound(h_sorted.begin(), h_sorted.end(), hi);
    return last > first ? double(last - first) / double(h_sorted.size()) : 0.0;
}

}  // namespace treebec::ids

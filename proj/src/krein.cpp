#include "treebec/krein.hpp"

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "treebec/error.hpp"
#include "treebec/numerics.hpp"
#include "treebec/spectral.hpp"

namespace treebec::krein {

using graph::BaseGeometry;

double branch_point(int Q) { return 2.0 * std::sqrt(double(Q - 1)); }

AMu a_mu(double lambda, int Q) {
    if (Q < 2) throw DomainError("a_mu: Q must be at least 2");
    const double bp = branch_point(Q);
    const double gap = std::abs(lambda) - bp;
    if (gap < -1e-14 * bp)
        throw DomainError("a_mu: lambda=" + std::to_string(lambda) + " lies on the branch cut");
    const double ratio = bp / lambda;
    const double s = gap <= 0 ? 0.0 : std::sqrt(std::max(0.0, (1.0 - ratio) * (1.0 + ratio)));
    // 2/(lambda (1+s)) avoids the cancellation in (1-s) lambda / (2(Q-1)).
    const double a = 2.0 / (lambda * (1.0 + s));
    const double mu = lambda * ((Q - 2) + Q * s) / (2.0 * (Q - 1));
    return {a, mu};
}

CAMu a_mu(std::complex<double> z, int Q) {
    using C = std::complex<double>;
    if (Q < 2) throw DomainError("a_mu: Q must be at least 2");
    const double bp = branch_point(Q);
    if (std::imag(z) == 0.0 && std::abs(std::real(z)) < bp * (1 - 1e-14))
        throw DomainError("a_mu: point on the branch cut");
    // s is even in z and real-symmetric, so evaluate in the closed first quadrant.
    const C zq(std::abs(z.real()), std::abs(z.imag()));
    C s = std::sqrt(C(1.0) - C(4.0 * (Q - 1)) / (zq * zq));
    if (s.real() < 0) s = -s;
    if (z.imag() < 0) s = std::conj(s);
    const C a = 2.0 / (z * (1.0 + s));
    const C mu = z * (double(Q - 2) + double(Q) * s) / (2.0 * (Q - 1));
    return {a, mu};
}

double green_entry(int Q, double lambda, int d) {
    const auto [a, mu] = a_mu(lambda, Q);
    return std::pow(a, d) / mu;
}

Vec tree_convolve(const BaseGeometry& g, double a, double mu, std::span<const double> u) {
    const auto n = g.size();
    Vec up(u.begin(), u.end());
    for (auto v = n - 1; v >= 1; --v) up[g.parent[v]] += a * up[v];
    Vec out(n);
    if (n == 0) return out;
    out[0] = up[0];
    for (std::int64_t v = 1; v < n; ++v) out[v] = up[v] + a * (out[g.parent[v]] - a * up[v]);
    for (auto& x : out) x /= mu;
    return out;
}

namespace {

// Distances from every vertex, by BFS over the geometry.
std::vector<std::vector<std::int32_t>> adjacency_lists(const BaseGeometry& g) {
    std::vector<std::vector<std::int32_t>> adj(g.size());
    for (std::int64_t v = 1; v < g.size(); ++v) {
        adj[v].push_back(g.parent[v]);
        adj[g.parent[v]].push_back(static_cast<std::int32_t>(v));
    }
    return adj;
}

std::vector<double> power_table(double a, int max_d) {
    std::vector<double> p(max_d + 1, 1.0);
    for (int d = 1; d <= max_d; ++d) p[d] = p[d - 1] * a;
    return p;
}

// Tree-structured LDL^T of P - shift I, where P = T^{-1} and T = [a^{d(s,t)}].
// P = (diag(1 + (deg-1) a^2) - a Adj_S) / (1 - a^2). Returns the pivots; the
// right-hand side (if given) is overwritten with the solution.
Vec tree_ldl(const BaseGeometry& g, double a, double shift, Vec* rhs) {
    const auto n = g.size();
    const double inv = 1.0 / (1.0 - a * a);
    const double off = -a * inv;
    Vec d(n);
    for (std::int64_t v = 0; v < n; ++v) d[v] = (1.0 + (g.degree[v] - 1) * a * a) * inv - shift;
    for (auto v = n - 1; v >= 1; --v) {
        const auto p = g.parent[v];
        d[p] -= off * off / d[v];
        if (rhs) (*rhs)[p] -= off * (*rhs)[v] / d[v];
    }
    if (rhs) {
        auto& x = *rhs;
        x[0] /= d[0];
        for (std::int64_t v = 1; v < n; ++v) x[v] = (x[v] - off * x[g.parent[v]]) / d[v];
    }
    return d;
}

}  // namespace

std::vector<double> secular_matrix(const BaseGeometry& g, int Q, double lambda) {
    const auto [a, mu] = a_mu(lambda, Q);
    const auto n = g.size();
    const auto adj = adjacency_lists(g);
    int max_depth = 0;
    for (auto d : g.depth) max_depth = std::max(max_depth, d);
    const auto pw = power_table(a, 2 * max_depth + 2);
    std::vector<double> k(static_cast<std::size_t>(n * n));
    std::vector<std::int32_t> dist(n), queue(n);
    for (std::int64_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::int64_t head = 0, tail = 0;
        queue[tail++] = static_cast<std::int32_t>(s);
        dist[s] = 0;
        while (head < tail) {
            const auto v = queue[head++];
            for (auto w : adj[v])
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue[tail++] = w;
                }
        }
        for (std::int64_t t = 0; t < n; ++t) k[s * n + t] = pw[dist[t]] / mu;
    }
    return k;
}

std::int64_t secular_count_above(const BaseGeometry& g, int Q, double lambda, double level) {
    if (g.size() == 0) return 0;
    const auto [a, mu] = a_mu(lambda, Q);
    // eig(K) > level  <=>  eig(T) > level*mu  <=>  eig(P) < 1/(level*mu).
    const auto d = tree_ldl(g, a, 1.0 / (level * mu), nullptr);
    return std::count_if(d.begin(), d.end(), [](double p) { return !(p > 0); });
}

double secular_opnorm(const BaseGeometry& g, int Q, double lambda, std::int64_t dense_limit) {
    const auto n = g.size();
    if (n == 0) return 0.0;
    if (n <= dense_limit) {
        auto k = secular_matrix(g, Q, lambda);
        Vec w(n);
        const auto info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'N', 'U', static_cast<lapack_int>(n),
                                         k.data(), static_cast<lapack_int>(n), w.data());
        if (info != 0) throw ConvergenceError("secular_opnorm: dsyevd failed", double(info));
        return w[n - 1];
    }
    // Bisection on the level, each step an exact inertia count.
    const auto [a, mu] = a_mu(lambda, Q);
    double lo = 0.0, hi = 1.0 / (mu * (1.0 - a)) * (1.0 + a);  // >= sup of the symbol
    hi = std::max(hi, 1.0);
    while (secular_count_above(g, Q, lambda, hi) > 0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (secular_count_above(g, Q, lambda, mid) > 0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double secular_root(const BaseGeometry& g, int Q, double tol) {
    if (g.size() == 0) throw NoCrossingError("secular_root: empty base set");
    const double bp = branch_point(Q);
    if (secular_count_above(g, Q, bp) == 0)
        throw NoCrossingError("secular norm is already <= 1 at the branch point");
    double lo = bp, hi = bp + 1.0;
    while (secular_count_above(g, Q, hi) > 0) hi = bp + 2.0 * (hi - bp);
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (secular_count_above(g, Q, mid) > 0) lo = mid;
        else hi = mid;
    }
    // hi has no eigenvalue above 1; confirm the top one is within tol of 1.
    if (secular_count_above(g, Q, hi, 1.0 - tol) == 0)
        throw ConvergenceError("secular_root: bracket closed away from the crossing", hi - lo);
    return hi;
}

std::vector<int> default_levels(const graph::ModelSpec& spec) {
    using graph::Kind;
    if (spec.kind == Kind::Tree) return {};
    if (spec.kind == Kind::HQ) return {4096, 8192, 16384, 32768, 65536};
    if (spec.q == 2) return {2048, 4096, 8192, 16384, 32768};
    int r = 1;
    while (graph::ball_size(spec.q, r + 1) <= 300000) ++r;
    std::vector<int> levels;
    for (int k = std::max(1, r - 4); k <= r; ++k) levels.push_back(k);
    return levels;
}

ModelNorm model_norm(const graph::ModelSpec& spec, std::vector<int> levels, double tol) {
    if (spec.mode != graph::Mode::DiagonalUnit && spec.kind != graph::Kind::Tree)
        throw DomainError("model_norm: the secular route covers DiagonalUnit perturbations only");
    ModelNorm out;
    out.spec = spec;
    const double bp = branch_point(spec.Q);
    if (spec.kind == graph::Kind::Tree) {
        out.estimate = bp;
        out.at_branch_point = true;
        return out;
    }
    if (levels.empty()) levels = default_levels(spec);
    std::sort(levels.begin(), levels.end());
    out.levels = levels;
    // The secular norm grows with the level, so no crossing at the top level means none at all.
    if (secular_count_above(graph::base_geometry(spec, levels.back()), spec.Q, bp) == 0) {
        out.per_level.assign(levels.size(), bp);
        out.estimate = bp;
        out.at_branch_point = true;
        return out;
    }
    for (int n : levels) {
        const auto g = graph::base_geometry(spec, n);
        out.per_level.push_back(secular_count_above(g, spec.Q, bp) == 0 ? bp : secular_root(g, spec.Q, tol));
    }
    const auto k = levels.size();
    if (k < 3) {
        out.estimate = out.per_level.back();
        out.uncertainty = k == 2 ? std::abs(out.per_level[1] - out.per_level[0]) : 0.0;
        return out;
    }
    Vec ns(levels.begin(), levels.end());
    // For a GQq base with q >= 3 the level is a radius; for paths it is the length.
    auto fit = [&](std::size_t from) {
        return numerics::fit_inverse_square(std::span<const double>(ns).subspan(from, 3),
                                            std::span<const double>(out.per_level).subspan(from, 3))
            .limit;
    };
    out.estimate = fit(k - 3);
    const double first = fit(0);
    out.uncertainty = std::max(std::abs(out.estimate - first),
                               std::abs(out.estimate - out.per_level.back()) * 1e-3);
    // Truncated roots increase with the level; never report less than the largest one.
    out.estimate = std::max(out.estimate, out.per_level.back());
    return out;
}

namespace {

struct Site {
    int dist;
    std::int64_t anchor;  // index into the base geometry
};

Site locate(const graph::Model& m, std::int32_t x) {
    int d = 0;
    while (!m.in_base[x]) {
        x = m.ball.parent[x];
        ++d;
    }
    const auto it = std::lower_bound(m.base.begin(), m.base.end(), x);
    return {d, it - m.base.begin()};
}

}  // namespace

double krein_resolvent_entry(const graph::Model& m, double lambda, std::int32_t x, std::int32_t y,
                             int truncation, Route route, std::int64_t dense_limit) {
    const int Q = m.spec.Q;
    const auto [a, mu] = a_mu(lambda, Q);
    const double free = std::pow(a, graph::tree_distance(m.ball, x, y)) / mu;
    if (m.spec.kind == graph::Kind::Tree) return free;
    if (m.spec.mode != graph::Mode::DiagonalUnit)
        throw DomainError("krein_resolvent_entry: DiagonalUnit perturbations only");
    if (truncation < m.radius())
        throw PreconditionError("krein_resolvent_entry: truncation below the ball radius");
    const auto g = graph::base_geometry(m.spec, truncation);
    const Site sx = locate(m, x), sy = locate(m, y);
    const double scale_xy = std::pow(a, sx.dist + sy.dist) / (mu * mu);
    if (route == Route::Tree) {
        // g_x^T (1 - K)^{-1} g_y = a^{dx+dy}/mu^2 * [T (P - I/mu)^{-1}]_{ax,ay}
        Vec rhs(g.size(), 0.0);
        rhs[sy.anchor] = 1.0;
        const auto piv = tree_ldl(g, a, 1.0 / mu, &rhs);
        if (std::any_of(piv.begin(), piv.end(), [](double p) { return !(p > 0); })) {
            const double top = secular_opnorm(g, Q, lambda, 0);
            throw NearSingularError("1 - S(lambda) is not positive definite", 1.0 - top);
        }
        const auto t_z = tree_convolve(g, a, 1.0, rhs);
        return free + scale_xy * t_z[sx.anchor];
    }
    const auto n = g.size();
    if (n > dense_limit) throw SizeError("krein_resolvent_entry: base above the dense limit");
    const auto kv = secular_matrix(g, Q, lambda);
    Eigen::MatrixXd mtx = Eigen::MatrixXd::Identity(n, n) -
                          Eigen::Map<const Eigen::MatrixXd>(kv.data(), n, n);
    Eigen::VectorXd gx(n), gy(n);
    Vec ex(n, 0.0), ey(n, 0.0);
    ex[sx.anchor] = 1.0;
    ey[sy.anchor] = 1.0;
    const auto tx = tree_convolve(g, a, 1.0, ex), ty = tree_convolve(g, a, 1.0, ey);
    for (std::int64_t i = 0; i < n; ++i) {
        gx(i) = std::pow(a, sx.dist) * tx[i] / mu;
        gy(i) = std::pow(a, sy.dist) * ty[i] / mu;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(mtx);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mtx, Eigen::EigenvaluesOnly);
        throw NearSingularError("1 - S(lambda) is not positive definite", es.eigenvalues()(0));
    }
    return free + gx.dot(llt.solve(gy));
}

Extrapolated resolvent_at_norm(const graph::Model& m, const ModelNorm& norm, std::int32_t x,
                               std::int32_t y) {
    if (!(norm.spec == m.spec)) throw StalenessError("norm estimate belongs to a different model");
    if (m.spec.kind == graph::Kind::Tree) {
        const double v = krein_resolvent_entry(m, norm.estimate, x, y, 0);
        return {v, 0.0};
    }
    const int top = std::max(norm.levels.back(), m.radius());
    std::vector<int> cuts;
    const bool path = m.spec.kind == graph::Kind::HQ || m.spec.q == 2;
    if (path) cuts = {top / 4, top / 2, top};
    else cuts = {top - 2, top - 1, top};
    Vec ns, vals;
    for (int c : cuts) {
        if (c < m.radius()) continue;
        ns.push_back(c);
        vals.push_back(krein_resolvent_entry(m, norm.estimate, x, y, c));
    }
    if (vals.size() < 2) return {vals.back(), 0.0};
    // At the norm the truncated entries approach their limit like 1/N.
    const double v = numerics::extrapolate_inverse_powers(ns, vals);
    return {v, std::abs(v - vals.back())};
}

const char* to_string(Transience t) {
    switch (t) {
        case Transience::Transient: return "Transient";
        case Transience::Recurrent: return "Recurrent";
        case Transience::Inconclusive: return "Inconclusive";
    }
    return "?";
}

TransienceReport classify_transience(const ModelNorm& norm, int probes, double cauchy_gap) {
    TransienceReport rep;
    if (probes < 4) throw PreconditionError("classify_transience needs at least four probes");
    const auto root = graph::build_model(norm.spec, 0);
    const int trunc = norm.levels.empty() ? 0 : norm.levels.back();
    try {
        for (int j = 1; j <= probes; ++j) {
            const double lam = norm.estimate + std::ldexp(1.0, -j);
            rep.lambdas.push_back(lam);
            rep.values.push_back(krein_resolvent_entry(root, lam, 0, 0, trunc));
        }
    } catch (const NearSingularError& e) {
        rep.note = std::string("probe below the truncated norm: ") + e.what();
        return rep;
    }
    const auto& g = rep.values;
    const auto J = g.size();
    const double last = g[J - 1] - g[J - 2];
    if (std::abs(last) <= cauchy_gap * std::abs(g[J - 1])) {
        rep.verdict = Transience::Transient;
        return rep;
    }
    bool no_decay = true;
    for (std::size_t j = J - 3; j < J; ++j) {
        const double prev = g[j - 1] - g[j - 2], cur = g[j] - g[j - 1];
        if (!(prev > 0 && cur >= 0.9 * prev)) no_decay = false;
    }
    if (no_decay) rep.verdict = Transience::Recurrent;
    else rep.note = "increments shrink but not below the Cauchy gap";
    return rep;
}

CircleMax circle_max(int Q, double r, int samples) {
    // |a/mu| is even under z -> -z, so theta = pi ties theta = 0; the scan starts at 0
    // and only moves on a gain beyond rounding.
    CircleMax best{-1.0, 0.0, false};
    const double step = 2.0 * std::numbers::pi / samples;
    for (int k = 0; k < samples; ++k) {
        const double th = k < (samples + 1) / 2 ? k * step : (k - samples) * step;
        const auto [a, mu] = a_mu(std::polar(r, th), Q);
        const double v = std::abs(a / mu);
        if (v > best.value * (1.0 + 1e-13)) best = {v, th, false};
    }
    best.at_zero = std::abs(best.theta) <= step;
    return best;
}

double neumann_radius(const BaseGeometry& g, int Q, double start, double step, double threshold) {
    double r = std::ceil(start / step) * step;
    if (g.size() == 0) return r;
    for (int it = 0; it < 1'000'000; ++it, r += step)
        if (secular_count_above(g, Q, r, threshold) == 0) return r;
    throw ConvergenceError("neumann_radius: no radius found", r);
}

double neumann_radius(const ModelNorm& norm, double step, double threshold) {
    const auto g = graph::base_geometry(norm.spec, norm.levels.empty() ? 0 : norm.levels.back());
    return neumann_radius(g, norm.spec.Q, norm.estimate, step, threshold);
}

}  // namespace treebec::krein

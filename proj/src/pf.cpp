#include "treebec/pf.hpp"

#include <cmath>

#include "treebec/error.hpp"
#include "treebec/spectral.hpp"

namespace treebec::pf {

double phi_family(int q, int d) {
    if (q < 2) throw DomainError("phi_family: q must be at least 2");
    return (1.0 + double(q - 2) / q * d) * std::pow(double(q - 1), -0.5 * d);
}

Vec phi_on_ball(const graph::TreeBall& ball, std::int32_t y) {
    Vec out(ball.size());
    for (std::int64_t x = 0; x < ball.size(); ++x)
        out[x] = phi_family(ball.Q, graph::tree_distance(ball, static_cast<std::int32_t>(x), y));
    return out;
}

double closed_w(const graph::ModelSpec& spec, double a_star, int anchor_depth) {
    switch (spec.kind) {
        case graph::Kind::HQ: return 1.0 + (1.0 - a_star) * anchor_depth;
        case graph::Kind::GQq: return phi_family(spec.q, anchor_depth);
        case graph::Kind::Tree: return 1.0;
    }
    return 1.0;
}

Vec closed_v(const graph::Model& m, double lambda_star) {
    const double a = krein::a_mu(lambda_star, m.spec.Q).a;
    Vec v(m.size());
    if (m.spec.kind == graph::Kind::Tree) {
        for (std::int64_t x = 0; x < m.size(); ++x) v[x] = phi_family(m.spec.Q, m.ball.depth[x]);
        return v;
    }
    const auto bd = graph::base_distance(m);
    for (std::int64_t x = 0; x < m.size(); ++x)
        v[x] = std::pow(a, bd.dist[x]) * closed_w(m.spec, a, m.ball.depth[bd.anchor[x]]);
    return v;
}

FiniteVolume make_finite_volume(const graph::ModelSpec& spec, int n, double tol) {
    FiniteVolume fv;
    fv.model = graph::build_model(spec, n);
    auto pair = spectral::pf_vector(fv.model.adjacency, tol);
    fv.lambda_max = pair.value;
    fv.residual = pair.residual;
    fv.pf = std::move(pair.vector);
    fv.pf_norm2 = dot(fv.pf, fv.pf);
    return fv;
}

RatioRow ratio_row(const FiniteVolume& fv, const krein::ModelNorm& norm) {
    const auto v = closed_v(fv.model, norm.estimate);
    const double vol = double(fv.model.size());
    const double sn = double(fv.model.base.size());
    return {fv.model.radius(), dot(v, v) * sn / vol, fv.pf_norm2 * sn / vol, fv.pf_norm2 / vol,
            fv.pf_norm2, static_cast<std::int64_t>(fv.model.base.size()), fv.model.size()};
}

std::vector<RatioRow> ratio_series(const graph::ModelSpec& spec, const krein::ModelNorm& norm,
                                   const std::vector<int>& ns) {
    std::vector<RatioRow> rows;
    for (int n : ns) rows.push_back(ratio_row(make_finite_volume(spec, n), norm));
    return rows;
}

std::vector<ProbeRow> vn_vs_v(const graph::ModelSpec& spec, const krein::ModelNorm& norm,
                              const std::vector<std::int32_t>& sample, const std::vector<int>& ns) {
    std::vector<ProbeRow> rows;
    for (int n : ns) {
        const auto fv = make_finite_volume(spec, n);
        const auto v = closed_v(fv.model, norm.estimate);
        ProbeRow row{n, {}, {}, {}};
        for (auto x : sample) {
            if (x < 0 || x >= fv.model.size())
                throw PreconditionError("vn_vs_v: probe vertex outside the ball");
            row.vn.push_back(fv.pf[x]);
            row.v.push_back(v[x]);
            row.error.push_back(std::abs(fv.pf[x] - v[x]));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Domination domination_check(const graph::Model& m, const Vec& vn, const Vec& v, double slack) {
    Domination d{true, 0.0};
    for (auto s : m.base) {
        const double r = vn[s] / v[s];
        d.worst_ratio = std::max(d.worst_ratio, r);
        if (r > 1.0 + slack) d.holds = false;
    }
    return d;
}

}  // namespace treebec::pf

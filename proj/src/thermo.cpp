#include "treebec/thermo.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "treebec/error.hpp"
#include "treebec/ids.hpp"
#include "treebec/numerics.hpp"

namespace treebec::thermo {

double bose_regular(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return -0.5 + x / 12.0 * (1.0 - x2 / 60.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 40.0)));
    }
    return 1.0 / std::expm1(x) - 1.0 / x;
}

double bose(double x) {
    if (x < 0) throw DomainError("bose: negative argument");
    if (x == 0) return std::numeric_limits<double>::infinity();
    return 1.0 / std::expm1(x);
}

BoseSplit bose_split(double x) {
    if (x < 0) throw DomainError("bose_split: negative argument");
    return {bose(x), bose_regular(x)};
}

double finite_density(const Vec& h, double beta, double mu) {
    if (h.empty()) throw PreconditionError("finite_density: empty spectrum");
    const double hmin = *std::min_element(h.begin(), h.end());
    if (!(mu < hmin)) throw PreconditionError("finite_density: mu must lie below the spectrum");
    double s = 0.0;
    for (double e : h) s += bose(beta * (e - mu));
    return s / double(h.size());
}

double solve_chemical(const Vec& h, double beta, double rho) {
    if (!(rho > 0)) throw DomainError("solve_chemical: density must be positive");
    const double hmin = *std::min_element(h.begin(), h.end());
    // Bisect geometrically in t = hmin - mu, where the density is decreasing.
    auto density = [&](double t) { return finite_density(h, beta, hmin - t); };
    double t_hi = 1.0;
    while (density(t_hi) > rho) t_hi *= 2.0;
    double t_lo = t_hi;
    while (density(t_lo) < rho) t_lo *= 0.5;
    for (int it = 0; it < 400; ++it) {
        const double t = std::sqrt(t_lo * t_hi);
        const double d = density(t);
        if (std::abs(d - rho) <= 1e-13 * rho || t_hi / t_lo - 1.0 < 1e-15) return hmin - t;
        if (d > rho) t_lo = t;
        else t_hi = t;
    }
    return hmin - std::sqrt(t_lo * t_hi);
}

double mollifier(double h, double eps) {
    if (h <= 0.5 * eps) return 0.0;
    if (h >= eps) return 1.0;
    return (h - 0.5 * eps) / (0.5 * eps);
}

DenseVolume dense_volume(const graph::ModelSpec& spec, int n, double lambda_star,
                         std::int64_t dense_limit) {
    DenseVolume v;
    v.n = n;
    const auto m = graph::build_model(spec, n);
    v.size = m.size();
    const auto lam = spectral::full_spectrum(m.adjacency, dense_limit);
    v.lambda_max = lam.back();
    v.h = ids::energies(lam, lambda_star);
    graph::ModelSpec flat = spec;
    flat.kind = graph::Kind::Tree;
    const auto free = graph::build_model(flat, n);
    v.h_free = ids::energies(spectral::full_spectrum(free.adjacency, dense_limit), lambda_star);
    return v;
}

SeriesDensity critical_density_series(int Q, double em, double beta, double tol, int k_max,
                                      double cap, int max_terms) {
    SeriesDensity out{0.0, 0.0, 0, false};
    if (em <= 0) {
        for (int j = 1; j <= max_terms; ++j) {
            const auto phi = ids::phi_series(Q, j * beta, k_max);
            out.value += phi.value;
            out.terms = j;
            if (out.value > cap) {
                out.divergent = true;
                return out;
            }
        }
        out.error = std::numeric_limits<double>::infinity();
        return out;
    }
    const double q = std::exp(-beta * em);
    int J = 1;
    while (std::pow(q, J + 1) / (1.0 - q) > tol) ++J;
    double phi_tails = 0.0;
    for (int j = 1; j <= J; ++j) {
        const auto phi = ids::phi_series(Q, j * beta, k_max);
        const double w = std::pow(q, j);
        out.value += phi.value * w;
        phi_tails += phi.tail_bound * w;
    }
    out.terms = J;
    out.error = std::pow(q, J + 1) / (1.0 - q) + phi_tails;
    return out;
}

namespace {

MollifiedTable mollified(const std::vector<DenseVolume>& vols, int Q, double em, double beta,
                         const Vec& mus, const Vec& eps_fractions, bool low) {
    if (vols.empty() || vols.size() != mus.size())
        throw PreconditionError("mollified table: one mu per volume required");
    MollifiedTable t;
    for (const auto& v : vols) t.ns.push_back(v.n);
    Vec ns(t.ns.begin(), t.ns.end());
    for (double frac : eps_fractions) {
        const double eps = frac * em;
        t.eps.push_back(eps);
        Vec row;
        for (std::size_t k = 0; k < vols.size(); ++k) {
            double s = 0.0;
            for (double h : vols[k].h) {
                const double w = low ? 1.0 - mollifier(h, eps) : mollifier(h, eps);
                if (w > 0) s += w * bose(beta * (h - mus[k]));
            }
            row.push_back(s / double(vols[k].size));
        }
        // Small radii are pre-asymptotic; the fit uses the three largest volumes only.
        const std::size_t k = row.size();
        const double ext = k >= 3 ? numerics::extrapolate_geometric(std::span(ns).subspan(k - 3),
                                                                    std::span(row).subspan(k - 3),
                                                                    1.0 / (Q - 1))
                                  : row.back();
        t.n_residual = std::max(t.n_residual, std::abs(ext - row.back()));
        t.per_eps.push_back(ext);
        t.raw.push_back(std::move(row));
    }
    if (t.eps.size() >= 2) {
        const std::vector<std::vector<double>> basis{Vec(t.eps.size(), 1.0), t.eps};
        const auto c = numerics::least_squares(basis, t.per_eps);
        t.value = c[0];
        for (std::size_t e = 0; e < t.eps.size(); ++e)
            t.eps_residual = std::max(t.eps_residual, std::abs(c[0] + c[1] * t.eps[e] - t.per_eps[e]));
    } else {
        t.value = t.per_eps.front();
    }
    return t;
}

}  // namespace

MollifiedTable critical_density_mollified(const std::vector<DenseVolume>& vols, int Q, double em,
                                          double beta, const Vec& mus, const Vec& eps_fractions) {
    return mollified(vols, Q, em, beta, mus, eps_fractions, false);
}

MollifiedTable condensate_fraction(const std::vector<DenseVolume>& vols, int Q, double em,
                                   double beta, const Vec& mus, const Vec& eps_fractions) {
    return mollified(vols, Q, em, beta, mus, eps_fractions, true);
}

ScheduleRule parse_rule(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("schedule must look like name:value");
    const auto name = text.substr(0, colon);
    double value = 0.0;
    try {
        value = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("schedule parameter is not a number: " + text);
    }
    ScheduleRule r{Rule::Fixed, value};
    if (name == "fixed") r.rule = Rule::Fixed;
    else if (name == "density") r.rule = Rule::TargetDensity;
    else if (name == "fregg1") r.rule = Rule::Fregg1;
    else if (name == "fregg3") r.rule = Rule::Fregg3;
    else throw ConfigError("unknown schedule '" + name + "'");
    if (r.rule != Rule::Fixed && !(value > 0)) throw ConfigError("schedule parameter must be positive");
    return r;
}

std::string rule_token(const ScheduleRule& r) {
    const char* names[] = {"fixed", "density", "fregg1", "fregg3"};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s:%.17g", names[int(r.rule)], r.param);
    return buf;
}

double realize_mu(const ScheduleRule& rule, const krein::ModelNorm& norm, const graph::Model& m,
                  double lambda_max, double pf_norm2, double beta, const Vec* h) {
    if (!(norm.spec == m.spec)) throw StalenessError("norm estimate was computed for another model");
    const double e0 = norm.estimate - lambda_max;
    if (!(e0 > 0))
        throw StalenessError("norm estimate does not exceed the finite-volume top eigenvalue");
    double mu = 0.0;
    switch (rule.rule) {
        case Rule::Fixed: mu = rule.param; break;
        case Rule::Fregg1: mu = e0 - 1.0 / (rule.param * double(m.size())); break;
        case Rule::Fregg3: mu = e0 - 1.0 / (rule.param * pf_norm2); break;
        case Rule::TargetDensity:
            if (!h) throw PreconditionError("TargetDensity needs the finite-volume spectrum");
            mu = solve_chemical(*h, beta, rule.param);
            break;
    }
    if (!(mu < e0)) throw PreconditionError("schedule value is not below E0 of the finite volume");
    return mu;
}

MuSchedule mu_schedule(const krein::ModelNorm& norm, const std::vector<pf::FiniteVolume>& fvs,
                       const ScheduleRule& rule, double beta) {
    MuSchedule s;
    s.rule = rule;
    for (const auto& fv : fvs) {
        Vec h;
        if (rule.rule == Rule::TargetDensity)
            h = ids::energies(spectral::full_spectrum(fv.model.adjacency), norm.estimate);
        const double mu = realize_mu(rule, norm, fv.model, fv.lambda_max, fv.pf_norm2, beta, &h);
        s.ns.push_back(fv.model.radius());
        s.mu.push_back(mu);
        s.lambda_n.push_back(norm.estimate - mu);
    }
    return s;
}

BoseOperator::BoseOperator(const pf::FiniteVolume& fv, double lambda_star, double beta, double mu,
                           const GibbsOptions& opt)
    : fv_(fv), lambda_n_(lambda_star - mu), beta_(beta), opt_(opt) {
    if (!(lambda_n_ > fv.lambda_max))
        throw PreconditionError("gibbs: mu must lie below E0 = lambda* - lambda_max");
    if (opt.eigensystem) {
        eig_ = opt.eigensystem;
    } else if (fv.model.size() <= opt.dense_limit) {
        owned_ = std::make_shared<spectral::Eigensystem>(
            spectral::full_eigensystem(fv.model.adjacency, opt.dense_limit));
        eig_ = owned_.get();
    } else {
        pf_unit_ = fv.pf;
        scale(1.0 / norm2(pf_unit_), pf_unit_);
        const double lo = gershgorin(fv.model.adjacency).lo;
        const double hi = fv.lambda_max + 1e-12 * (1.0 + std::abs(fv.lambda_max));
        const double ln = lambda_n_, b = beta_;
        f_series_ = numerics::chebyshev_fit([ln, b](double s) { return bose_regular(b * (ln - s)); },
                                            lo, hi, 1e-14);
    }
}

Vec BoseOperator::apply(const Vec& u) const {
    const auto n = fv_.model.size();
    if (eig_) {
        Vec out(n, 0.0);
        for (std::int64_t k = 0; k < n; ++k) {
            const double* phi = eig_->vectors.data() + k * n;
            double c = 0.0;
            for (std::int64_t i = 0; i < n; ++i) c += phi[i] * u[i];
            c *= bose(beta_ * (lambda_n_ - eig_->values[k]));
            for (std::int64_t i = 0; i < n; ++i) out[i] += c * phi[i];
        }
        return out;
    }
    // b(beta h) = f(beta h) + 1/(beta h): Chebyshev for f, resolvent split along the PF mode.
    Vec out = spectral::chebyshev_apply(fv_.model.adjacency, u, f_series_);
    const double along = dot(pf_unit_, u);
    std::vector<Vec> defl{pf_unit_};
    const auto solve = spectral::resolvent_solve(fv_.model.adjacency, lambda_n_, u, opt_.tol, defl);
    axpy(1.0 / beta_, solve.x, out);
    axpy(along / (beta_ * (lambda_n_ - fv_.lambda_max)), pf_unit_, out);
    return out;
}

double gibbs_two_point(const pf::FiniteVolume& fv, double lambda_star, double beta, double mu,
                       std::int32_t x, std::int32_t y, const GibbsOptions& opt) {
    const BoseOperator op(fv, lambda_star, beta, mu, opt);
    Vec e(fv.model.size(), 0.0);
    e[y] = 1.0;
    return op.apply(e)[x];
}

double gibbs_form(const BoseOperator& op, const CVec& u) {
    Vec re(u.size()), im(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        re[i] = u[i].real();
        im[i] = u[i].imag();
    }
    return dot(op.apply(re), re) + dot(op.apply(im), im);
}

namespace {
int depth_of_label(int Q, std::int32_t x) {
    int d = 0;
    while (graph::ball_size(Q, d) <= x) ++d;
    return d;
}
}  // namespace

OmegaD omega_D(const krein::ModelNorm& norm, const krein::TransienceReport& transience, double D,
               std::int32_t x, std::int32_t y) {
    if (transience.verdict != krein::Transience::Transient)
        throw RefusalError(std::string("omega_D: the model is classified ") +
                           krein::to_string(transience.verdict) +
                           "; no locally normal condensate state exists on a recurrent graph");
    const auto& spec = norm.spec;
    const double ls = norm.estimate;
    const double bp = krein::branch_point(spec.Q);
    // A_Y >= A >= -2 sqrt(Q-1), so the series only has to be accurate on [-bp, lambda*].
    const auto series =
        numerics::chebyshev_fit([ls](double s) { return bose_regular(ls - s); }, -bp, ls, 1e-13);
    const int degree = static_cast<int>(series.c.size()) - 1;
    const int dx = depth_of_label(spec.Q, x), dy = depth_of_label(spec.Q, y);
    // A polynomial of degree m only sees walks of length m, which stay within m/2 of x and y.
    const int radius = std::max(dx, dy) + degree / 2 + 1;
    const auto big = graph::build_model(spec, radius);
    Vec e(big.size(), 0.0);
    e[y] = 1.0;
    const double bounded = spectral::chebyshev_apply(big.adjacency, e, series)[x];
    const auto small = graph::build_model(spec, std::max(dx, dy));
    const double resolvent = krein::resolvent_at_norm(small, norm, x, y).value;
    const auto v = pf::closed_v(small, ls);
    const double cond = D * v[x] * v[y];
    return {bounded + resolvent + cond, bounded, resolvent, cond, degree, radius};
}

Decomposition density_decomposition(const DenseVolume& vol, double beta, double mu, double rho_c) {
    Decomposition d;
    d.rho_c = rho_c;
    d.rho = finite_density(vol.h, beta, mu);
    d.term3 = 1.0 / (double(vol.size) * (vol.h.front() - mu));
    d.a_proxy = finite_density(vol.h_free, beta, mu) - rho_c;
    d.term2 = d.rho - rho_c - d.term3 - d.a_proxy;
    d.residual = (d.a_proxy + d.term2 + d.term3) - (d.rho - rho_c);
    return d;
}

DivergenceProbe divergence_probe(const krein::ModelNorm& norm, const std::vector<pf::FiniteVolume>& fvs,
                                 const ScheduleRule& rule, std::int32_t x, double beta, double factor,
                                 const GibbsOptions& opt) {
    DivergenceProbe p{};
    for (const auto& fv : fvs) {
        Vec h;
        if (rule.rule == Rule::TargetDensity)
            h = ids::energies(spectral::full_spectrum(fv.model.adjacency), norm.estimate);
        const double mu = realize_mu(rule, norm, fv.model, fv.lambda_max, fv.pf_norm2, beta, &h);
        const double value = gibbs_two_point(fv, norm.estimate, beta, mu, x, x, opt);
        const double witness = 1.0 / (fv.pf_norm2 * (norm.estimate - fv.lambda_max - mu));
        p.rows.push_back({fv.model.radius(), mu, value, witness});
    }
    if (p.rows.empty()) return p;
    p.growth = p.rows.back().value / p.rows.front().value;
    const bool rising = p.rows.size() < 2 || p.rows.back().value > p.rows[p.rows.size() - 2].value;
    p.diverging = p.growth >= factor && rising;
    return p;
}

double condensate_density(const graph::Model& m, double lambda_star, double D) {
    const auto v = pf::closed_v(m, lambda_star);
    return D * dot(v, v) / double(m.size());
}

std::vector<KorilaRow> korila_table(const graph::ModelSpec& spec, int n, double gamma, int samples) {
    const auto y = graph::build_model(spec, n);
    graph::ModelSpec flat = spec;
    flat.kind = graph::Kind::Tree;
    const auto b = graph::build_model(flat, n);
    const auto es = spectral::full_eigensystem(b.adjacency);
    const double lb = es.values.back();
    const double ly = spectral::extremal_eig(y.adjacency, 1e-12).value;
    const auto s = static_cast<lapack_int>(y.base.size());
    auto secular_norm = [&](double lambda) {
        std::vector<double> k(static_cast<std::size_t>(s) * s, 0.0);
        for (std::int64_t j = 0; j < es.n; ++j) {
            const double w = 1.0 / (lambda - es.values[j]);
            for (lapack_int p = 0; p < s; ++p)
                for (lapack_int q = 0; q < s; ++q)
                    k[p * s + q] += w * es.component(y.base[p], j) * es.component(y.base[q], j);
        }
        Vec ev(s);
        LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'N', 'U', s, k.data(), s, ev.data());
        return ev.back();
    };
    const double at_gamma = 1.0 - secular_norm(gamma);
    std::vector<KorilaRow> rows;
    for (int i = 1; i <= samples; ++i) {
        const double lam = ly + (gamma - ly) * double(i) / samples;
        const double lhs = 1.0 / (1.0 - secular_norm(lam));
        rows.push_back({lam, lhs, (gamma - lb) / (lam - ly), (gamma - ly) / ((lam - ly) * at_gamma)});
    }
    return rows;
}

}  // namespace treebec::thermo

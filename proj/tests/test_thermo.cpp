#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "treebec/error.hpp"
#include "treebec/ids.hpp"
#include "treebec/thermo.hpp"

using namespace treebec;
using namespace treebec::thermo;

namespace {

const graph::ModelSpec hq3{graph::Kind::HQ, 3, 2, graph::Mode::DiagonalUnit};
const graph::ModelSpec gq32{graph::Kind::GQq, 3, 2, graph::Mode::DiagonalUnit};

const krein::ModelNorm& hq3_norm() {
    static const auto n = krein::model_norm(hq3);
    return n;
}

}  // namespace

TEST_CASE("occupation numbers") {
    CHECK(bose_split(std::log(2.0)).b == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bose_split(0.0).f == -0.5);
    CHECK(bose(1.0) == doctest::Approx(0.5819767068693265).epsilon(1e-14));
    CHECK_THROWS_AS(bose_split(-1.0), DomainError);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 10000; ++i) {
        double x = u(rng);
        if (x == 0.0) x = 1e-3;
        const auto s = bose_split(x);
        CHECK(std::abs(s.b * std::exp(x) - (s.b + 1.0)) <= 1e-12 * std::max(1.0, s.b));
        CHECK(std::abs(s.b - (s.f + 1.0 / x)) <= 1e-12 * std::max(1.0, s.b));
    }
    for (double x : {-0.0101, -0.0099, 0.0099, 0.0101, 0.003})
        CHECK(bose_regular(x) == doctest::Approx(oracle::bose(x) - 1.0 / x).epsilon(1e-9));
    for (double x = -5.0; x < 60.0; x += 0.37) {
        const double f = bose_regular(x);
        CHECK((f < 0.0 && f > -1.0));
        CHECK(f + bose_regular(-x) == doctest::Approx(-1.0).epsilon(1e-12));
    }
}

TEST_CASE("finite densities") {
    CHECK(finite_density({std::log(2.0)}, 1.0, 0.0) == doctest::Approx(1.0));
    CHECK(finite_density({1.0, 1.0}, 1.0, 0.0) == doctest::Approx(0.5819767068693265));
    CHECK(finite_density({1.0, 2.0}, 1.0, -800.0) < 1e-300);
    CHECK_THROWS_AS(finite_density({1.0}, 1.0, 1.0), PreconditionError);

    const auto h = ids::energies(spectral::full_spectrum(graph::build_model(hq3, 7).adjacency), oracle::hq3_lambda_star);
    double prev = 0.0;
    for (double mu = -3.0; mu < h.front(); mu += 0.01) {
        const double r = finite_density(h, 1.0, mu);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("chemical potential") {
    CHECK(solve_chemical({1.0}, 1.0, 1.0) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-12));
    CHECK(std::abs(solve_chemical({1.0}, 1.0, bose(1.0))) < 1e-12);
    CHECK_THROWS_AS(solve_chemical({1.0}, 1.0, 0.0), DomainError);
    const auto h = ids::energies(spectral::full_spectrum(graph::build_model(hq3, 7).adjacency), oracle::hq3_lambda_star);
    for (double beta : {0.5, 1.0, 3.0})
        for (double mu : {-2.0, -0.1, 0.0, 0.5 * h.front(), h.front() - 1e-6}) {
            const double back = solve_chemical(h, beta, finite_density(h, beta, mu));
            CHECK(std::abs(back - mu) < 1e-9);
        }
}

TEST_CASE("mollifier") {
    CHECK(mollifier(0.1, 0.4) == 0.0);
    CHECK(mollifier(0.3, 0.4) == doctest::Approx(0.5));
    CHECK(mollifier(0.5, 0.4) == 1.0);
}

TEST_CASE("schedule rules") {
    const auto r = parse_rule("fregg3:2.5");
    CHECK(r.rule == Rule::Fregg3);
    CHECK(r.param == 2.5);
    CHECK(parse_rule(rule_token(parse_rule("fixed:-0.5"))).param == -0.5);
    CHECK(parse_rule("density:2").rule == Rule::TargetDensity);
    CHECK(parse_rule("fregg1:1").rule == Rule::Fregg1);
    CHECK_THROWS_AS(parse_rule("foo:1"), ConfigError);
    CHECK_THROWS_AS(parse_rule("fregg1:-1"), ConfigError);
    CHECK_THROWS_AS(parse_rule("fregg1"), ConfigError);
}

TEST_CASE("realized chemical potentials") {
    const auto& norm = hq3_norm();
    const auto fv = pf::make_finite_volume(hq3, 8);
    const double e0 = norm.estimate - fv.lambda_max;
    const double m1 = realize_mu({Rule::Fregg1, 2.0}, norm, fv.model, fv.lambda_max, fv.pf_norm2, 1.0);
    CHECK(1.0 / (double(fv.model.size()) * (e0 - m1)) == doctest::Approx(2.0));
    const double m3 = realize_mu({Rule::Fregg3, 1.0}, norm, fv.model, fv.lambda_max, fv.pf_norm2, 1.0);
    CHECK(1.0 / (fv.pf_norm2 * (e0 - m3)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(realize_mu({Rule::Fixed, e0 + 0.1}, norm, fv.model, fv.lambda_max, fv.pf_norm2, 1.0), PreconditionError);
    CHECK_THROWS_AS(realize_mu({Rule::Fixed, -1.0}, norm, fv.model, norm.estimate + 0.1, fv.pf_norm2, 1.0), StalenessError);
    const auto other = krein::model_norm({graph::Kind::HQ, 4, 2, graph::Mode::DiagonalUnit});
    CHECK_THROWS_AS(realize_mu({Rule::Fixed, -1.0}, other, fv.model, fv.lambda_max, fv.pf_norm2, 1.0), StalenessError);
    CHECK_THROWS_AS(realize_mu({Rule::TargetDensity, 1.0}, norm, fv.model, fv.lambda_max, fv.pf_norm2, 1.0), PreconditionError);

    const auto h = ids::energies(spectral::full_spectrum(fv.model.adjacency), norm.estimate);
    const double md = realize_mu({Rule::TargetDensity, 0.3}, norm, fv.model, fv.lambda_max, fv.pf_norm2, 1.0, &h);
    CHECK(finite_density(h, 1.0, md) == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("schedules go to zero") {
    std::vector<pf::FiniteVolume> fvs;
    for (int n : {6, 8, 10, 12}) fvs.push_back(pf::make_finite_volume(hq3, n));
    for (const auto& rule : {ScheduleRule{Rule::Fregg1, 1.0}, ScheduleRule{Rule::Fregg3, 1.0}}) {
        const auto s = mu_schedule(hq3_norm(), fvs, rule);
        for (std::size_t k = 0; k < s.mu.size(); ++k) {
            CHECK(s.lambda_n[k] > fvs[k].lambda_max);
            if (k) CHECK(std::abs(s.mu[k]) < std::abs(s.mu[k - 1]));
        }
    }
}

TEST_CASE("critical density series") {
    const double em = oracle::hq3_em;
    const auto s = critical_density_series(3, em, 1.0);
    CHECK(s.value == doctest::Approx(oracle::rho_c_hq3_beta1).epsilon(1e-12));
    CHECK(s.error < 1e-12);
    CHECK(!s.divergent);
    CHECK(critical_density_series(3, 2.0 * em, 1.0).value < s.value);
    CHECK(critical_density_series(3, em, 30.0).value < 1e-6);
    CHECK(critical_density_series(3, 0.0, 1.0, 1e-13, 200, 0.2, 1000).divergent);
}

TEST_CASE("condensate fraction vanishes for a fixed negative chemical potential") {
    std::vector<DenseVolume> vols;
    for (int n : {6, 7, 8, 9, 10}) vols.push_back(dense_volume(hq3, n, oracle::hq3_lambda_star));
    const auto t = condensate_fraction(vols, 3, oracle::hq3_em, 1.0, Vec(vols.size(), -0.5), {0.4, 0.2, 0.1});
    CHECK(std::abs(t.value) < 1e-3);
    // The low-energy mass grows with the mollifier width.
    for (std::size_t k = 0; k < t.ns.size(); ++k) {
        CHECK(t.raw[1][k] <= t.raw[0][k]);
        CHECK(t.raw[2][k] <= t.raw[1][k]);
    }
}

TEST_CASE("Gibbs operator routes agree") {
    const auto& norm = hq3_norm();
    const auto fv = pf::make_finite_volume(hq3, 9, 1e-13);
    const double mu = realize_mu({Rule::Fregg3, 1.0}, norm, fv.model, fv.lambda_max, fv.pf_norm2, 1.0);
    GibbsOptions split;
    split.dense_limit = 100;
    split.tol = 1e-12;
    const BoseOperator a(fv, norm.estimate, 1.0, mu), b(fv, norm.estimate, 1.0, mu, split);
    CHECK(a.dense());
    CHECK(!b.dense());
    Vec u(fv.model.size(), 0.0);
    u[0] = 1.0;
    u[7] = -0.5;
    const auto ya = a.apply(u), yb = b.apply(u);
    for (std::int64_t i = 0; i < fv.model.size(); i += 37) CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("Gibbs diagonal is invariant under the evolution") {
    const auto& norm = hq3_norm();
    const auto fv = pf::make_finite_volume(hq3, 9);
    const double mu = -0.2;
    for (const std::int64_t limit : {std::int64_t(4096), std::int64_t(100)}) {
        GibbsOptions opt;
        opt.dense_limit = limit;
        const BoseOperator op(fv, norm.estimate, 1.0, mu, opt);
        CVec d(fv.model.size(), 0.0);
        d[3] = 1.0;
        const double base = gibbs_form(op, d);
        for (double t : {1.0, 5.0}) {
            const auto u = spectral::evolve(fv.model.adjacency, t, d, norm.estimate);
            CHECK(gibbs_form(op, u) == doctest::Approx(base).epsilon(1e-7));
        }
    }
}

TEST_CASE("mu = 0 diagonal values settle in n") {
    const auto& norm = hq3_norm();
    Vec vals;
    for (int n : {8, 10, 12, 14}) vals.push_back(gibbs_two_point(pf::make_finite_volume(hq3, n), norm.estimate, 1.0, 0.0, 0, 0));
    for (std::size_t k = 2; k < vals.size(); ++k) CHECK(std::abs(vals[k] - vals[k - 1]) < std::abs(vals[k - 1] - vals[k - 2]));
}

TEST_CASE("limit state") {
    const auto& norm = hq3_norm();
    const auto tr = krein::classify_transience(norm);
    const auto w = omega_D(norm, tr, 1.0, 0, 0);
    CHECK(w.condensate_part == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.bounded_part == doctest::Approx(oracle::bounded_root_hq3).epsilon(1e-10));
    CHECK(w.value == doctest::Approx(oracle::omega_root_hq3_D1).epsilon(1e-6));
    const auto w0 = omega_D(norm, tr, 0.0, 0, 0);
    CHECK(w0.value == doctest::Approx(w.value - 1.0).epsilon(1e-12));

    const auto rec = krein::model_norm(gq32);
    CHECK_THROWS_AS(omega_D(rec, krein::classify_transience(rec), 1.0, 0, 0), RefusalError);
}

TEST_CASE("density decomposition bookkeeping") {
    const auto vol = dense_volume(hq3, 8, oracle::hq3_lambda_star);
    const auto d = density_decomposition(vol, 1.0, 0.01, oracle::rho_c_hq3_beta1);
    CHECK(std::abs(d.residual) < 1e-14);
    CHECK(d.term3 == doctest::Approx(1.0 / (double(vol.size) * (vol.h.front() - 0.01))));
    CHECK(d.rho == doctest::Approx(finite_density(vol.h, 1.0, 0.01)));
}

TEST_CASE("Fregg3 keeps the root value bounded") {
    std::vector<pf::FiniteVolume> fvs;
    for (int n : {6, 8, 10}) fvs.push_back(pf::make_finite_volume(hq3, n));
    const auto p = divergence_probe(hq3_norm(), fvs, {Rule::Fregg3, 1.0}, 0);
    CHECK(!p.diverging);
    for (const auto& r : p.rows) CHECK(r.witness == doctest::Approx(1.0));
}

TEST_CASE("condensate density vanishes") {
    double prev = 1e9;
    for (int n : {6, 9, 12, 15}) {
        const double c = condensate_density(graph::build_model(hq3, n), oracle::hq3_lambda_star, 1.0);
        CHECK(c < prev);
        prev = c;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("concavity chord bound on the secular norm") {
    for (int n : {6, 8}) {
        const auto rows = korila_table(hq3, n, oracle::hq3_lambda_star, 24);
        for (const auto& r : rows) {
            CHECK(r.lhs >= 1.0);
            CHECK(r.lhs <= r.chord * (1.0 + 1e-9));
        }
    }
}

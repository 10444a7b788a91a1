#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "treebec/error.hpp"
#include "treebec/graph.hpp"
#include "treebec/spectral.hpp"

using namespace treebec;
using namespace treebec::spectral;

namespace {

const graph::ModelSpec hq3{graph::Kind::HQ, 3, 2, graph::Mode::DiagonalUnit};

CsrMatrix star() { return graph::tree_adjacency(graph::build_ball(3, 1)); }

Eigen::MatrixXd dense(const CsrMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.n, a.n);
    for (std::int64_t r = 0; r < a.n; ++r)
        for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) m(r, a.col[k]) += a.val[k];
    return m;
}

}  // namespace

TEST_CASE("star graph") {
    const auto a = star();
    CHECK(extremal_eig(a).value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    const auto centre = pf_vector(a);
    CHECK(centre.vector[0] == 1.0);
    for (int i = 1; i <= 3; ++i) CHECK(centre.vector[i] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-10));
    const auto leaf = pf_vector(a, 1e-12, 1);
    CHECK(leaf.vector[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
    CHECK(leaf.vector[2] == doctest::Approx(1.0).epsilon(1e-10));
    const auto s = full_spectrum(a);
    const double expect[] = {-std::sqrt(3.0), 0.0, 0.0, std::sqrt(3.0)};
    for (int i = 0; i < 4; ++i) CHECK(s[i] == doctest::Approx(expect[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("trivial matrices") {
    const auto single = graph::tree_adjacency(graph::build_ball(3, 0));
    CHECK(extremal_eig(single).value == 0.0);
    const double b[] = {1.0};
    CHECK(resolvent_solve(single, 2.0, b).x[0] == doctest::Approx(0.5));

    CsrMatrix p2{2, {0, 1, 2}, {1, 0}, {1.0, 1.0}};
    const auto s = full_spectrum(p2);
    CHECK(s[0] == doctest::Approx(-1.0));
    CHECK(s[1] == doctest::Approx(1.0));
}

TEST_CASE("ball spectrum extremes") {
    const auto s = full_spectrum(graph::tree_adjacency(graph::build_ball(3, 2)));
    CHECK(s.front() == doctest::Approx(-std::sqrt(5.0)).epsilon(1e-12));
    CHECK(s.back() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("unperturbed ball norms increase below the tree norm") {
    double prev = 0.0;
    for (int n = 1; n <= 8; ++n) {
        const auto e = extremal_eig(graph::tree_adjacency(graph::build_ball(3, n)));
        CHECK(e.value > prev);
        CHECK(e.value < 2.0 * std::sqrt(2.0));
        CHECK(e.residual <= 1e-10);
        prev = e.value;
    }
}

TEST_CASE("perturbed ball norms increase and PF vectors are positive") {
    double prev = 0.0;
    for (int n = 2; n <= 11; ++n) {
        const auto m = graph::build_model(hq3, n);
        const auto v = pf_vector(m.adjacency);
        CHECK(v.value > prev);
        CHECK(v.vector[0] == 1.0);
        CHECK(*std::min_element(v.vector.begin(), v.vector.end()) > 0.0);
        prev = v.value;
    }
}

TEST_CASE("Lanczos agrees with LAPACK") {
    const auto m = graph::build_model({graph::Kind::GQq, 4, 3, graph::Mode::DiagonalUnit}, 4);
    const auto s = full_spectrum(m.adjacency);
    CHECK(extremal_eig(m.adjacency, 1e-12).value == doctest::Approx(s.back()).epsilon(1e-11));
}

TEST_CASE("trace identities") {
    const auto m = graph::build_model(hq3, 7);
    const auto s = full_spectrum(m.adjacency);
    double t1 = 0, t2 = 0, tr = 0, fro = 0;
    for (double l : s) t1 += l, t2 += l * l;
    const auto& a = m.adjacency;
    for (std::int64_t r = 0; r < a.n; ++r)
        for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            fro += a.val[k] * a.val[k];
            if (a.col[k] == r) tr += a.val[k];
        }
    CHECK(t1 == doctest::Approx(tr).epsilon(1e-8));
    CHECK(t2 == doctest::Approx(fro).epsilon(1e-8));
}

TEST_CASE("eigensystem reconstructs the matrix") {
    const auto m = graph::build_model(hq3, 4);
    const auto es = full_eigensystem(m.adjacency);
    const auto d = dense(m.adjacency);
    double worst = 0.0;
    for (std::int64_t i = 0; i < es.n; ++i)
        for (std::int64_t j = 0; j < es.n; ++j) {
            double s = 0.0;
            for (std::int64_t k = 0; k < es.n; ++k) s += es.component(i, k) * es.values[k] * es.component(j, k);
            worst = std::max(worst, std::abs(s - d(i, j)));
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("dense limit is enforced") {
    const auto m = graph::build_model(hq3, 11);
    CHECK_THROWS_AS(full_spectrum(m.adjacency), SizeError);
}

TEST_CASE("resolvent solve against a dense inverse") {
    const auto m = graph::build_model(hq3, 7);
    const double lambda = m.size() ? 3.5 : 0.0;
    Vec b(m.size(), 0.0);
    b[0] = 1.0;
    b[5] = -2.0;
    const auto r = resolvent_solve(m.adjacency, lambda, b, 1e-12);
    const Eigen::MatrixXd shifted = lambda * Eigen::MatrixXd::Identity(m.size(), m.size()) - dense(m.adjacency);
    const Eigen::VectorXd x = shifted.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), m.size()));
    for (std::int64_t i = 0; i < m.size(); ++i) CHECK(r.x[i] == doctest::Approx(x(i)).epsilon(1e-9).scale(1.0));

    // (lambda - A) x recovers b.
    Vec ax(m.size());
    spmv(m.adjacency, r.x, ax);
    double err = 0.0;
    for (std::int64_t i = 0; i < m.size(); ++i) err += std::pow(lambda * r.x[i] - ax[i] - b[i], 2);
    CHECK(std::sqrt(err) <= 1e-9 * norm2(b));
}

TEST_CASE("deflated solve below the top eigenvalue") {
    const auto m = graph::build_model(hq3, 8);
    auto top = pf_vector(m.adjacency, 1e-13);
    scale(1.0 / norm2(top.vector), top.vector);
    const double lambda = top.value + 1e-6;
    Vec b(m.size(), 0.0);
    b[0] = 1.0;
    const std::vector<Vec> defl{top.vector};
    const auto r = resolvent_solve(m.adjacency, lambda, b, 1e-12, defl);
    const auto es = full_eigensystem(m.adjacency);
    double expect = 0.0;
    for (std::int64_t k = 0; k + 1 < es.n; ++k) expect += es.component(0, k) * es.component(0, k) / (lambda - es.values[k]);
    CHECK(r.x[0] == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("evolution") {
    const auto m = graph::build_model(hq3, 8);
    const double ref = 3.38;
    CVec u(m.size(), 0.0);
    u[0] = {0.6, 0.0};
    u[3] = {0.0, 0.8};
    const auto same = evolve(m.adjacency, 0.0, u, ref);
    for (std::int64_t i = 0; i < m.size(); ++i) CHECK(std::abs(same[i] - u[i]) == 0.0);

    auto norm = [](const CVec& v) {
        double s = 0.0;
        for (const auto& z : v) s += std::norm(z);
        return std::sqrt(s);
    };
    const auto a = evolve(m.adjacency, 4.0, u, ref);
    CHECK(std::abs(norm(a) - 1.0) < 1e-8);

    const auto ab = evolve(m.adjacency, -2.5, a, ref);
    const auto direct = evolve(m.adjacency, 1.5, u, ref);
    double diff = 0.0;
    for (std::int64_t i = 0; i < m.size(); ++i) diff = std::max(diff, std::abs(ab[i] - direct[i]));
    CHECK(diff < 1e-7);

    // Against the eigendecomposition.
    const auto es = full_eigensystem(m.adjacency);
    std::complex<double> root{0.0, 0.0};
    for (std::int64_t k = 0; k < es.n; ++k) {
        std::complex<double> c{0.0, 0.0};
        for (std::int64_t i = 0; i < es.n; ++i) c += es.component(i, k) * u[i];
        root += std::exp(std::complex<double>(0.0, 4.0 * (ref - es.values[k]))) * c * es.component(0, k);
    }
    CHECK(std::abs(root - a[0]) < 1e-9);
}

TEST_CASE("chebyshev apply equals the spectral function") {
    const auto m = graph::build_model(hq3, 6);
    const auto box = gershgorin(m.adjacency);
    const auto s = numerics::chebyshev_fit([](double x) { return std::exp(0.5 * x); }, box.lo, box.hi, 1e-15);
    Vec e(m.size(), 0.0);
    e[2] = 1.0;
    const auto y = chebyshev_apply(m.adjacency, e, s);
    const auto es = full_eigensystem(m.adjacency);
    double expect = 0.0;
    for (std::int64_t k = 0; k < es.n; ++k) expect += std::exp(0.5 * es.values[k]) * es.component(2, k) * es.component(2, k);
    CHECK(y[2] == doctest::Approx(expect).epsilon(1e-12));
}

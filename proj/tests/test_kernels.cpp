#include <random>

#include "doctest.h"
#include "treebec/graph.hpp"
#include "treebec/kernels.hpp"

using namespace treebec;

namespace {

Vec random_vec(std::int64_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec x(n);
    for (auto& v : x) v = u(rng);
    return x;
}

}  // namespace

TEST_CASE("parallel spmv matches the serial reference") {
    const auto m = graph::build_model({graph::Kind::HQ, 3, 2, graph::Mode::DiagonalUnit}, 11);
    const auto x = random_vec(m.size(), 1);
    Vec ys(m.size()), yp(m.size());
    serial::spmv(m.adjacency, x, ys);
    parallel::spmv(m.adjacency, x, yp);
    for (std::int64_t i = 0; i < m.size(); ++i) CHECK(ys[i] == yp[i]);

    CVec cx(m.size()), cs(m.size()), cp(m.size());
    for (std::int64_t i = 0; i < m.size(); ++i) cx[i] = {x[i], -0.5 * x[i]};
    serial::spmv(m.adjacency, cx, cs);
    parallel::spmv(m.adjacency, cx, cp);
    for (std::int64_t i = 0; i < m.size(); ++i) CHECK(cs[i] == cp[i]);
}

TEST_CASE("dot and axpy agree with the serial reference") {
    const auto x = random_vec(100003, 2), y = random_vec(100003, 3);
    CHECK(parallel::dot(x, y) == doctest::Approx(serial::dot(x, y)).epsilon(1e-13));
    Vec a = y, b = y;
    serial::axpy(0.75, x, a);
    parallel::axpy(0.75, x, b);
    CHECK(a == b);
}

TEST_CASE("parallel dot does not depend on the thread count") {
    const auto x = random_vec(1 << 18, 4), y = random_vec(1 << 18, 5);
    const int before = worker_count();
    set_worker_count(1);
    const double one = parallel::dot(x, y);
    set_worker_count(4);
    const double four = parallel::dot(x, y);
    set_worker_count(before);
    CHECK(one == four);
}

TEST_CASE("gershgorin box of a perturbed ball") {
    const auto m = graph::build_model({graph::Kind::HQ, 3, 2, graph::Mode::DiagonalUnit}, 4);
    const auto box = gershgorin(m.adjacency);
    CHECK(box.hi == doctest::Approx(4.0));
    CHECK(box.lo == doctest::Approx(-3.0));
}

TEST_CASE("norm and scale") {
    Vec x{3.0, 4.0};
    CHECK(norm2(x) == doctest::Approx(5.0));
    scale(2.0, x);
    CHECK(x[1] == 8.0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "embviz/error.hpp"
#include "embviz/tsne.hpp"
#include "embviz/yoke.hpp"
#include "support.hpp"

using namespace embviz;
using namespace embviz::yoke;

namespace {

YokeConfig fast_config(double lambda) {
    YokeConfig cfg;
    cfg.lambda = lambda;
    cfg.base.iterations = 100;
    cfg.base.exaggeration_iters = 25;
    cfg.base.perplexity = 6.0;
    cfg.base.seed = 5;
    return cfg;
}

/// The same clustered point set pushed through two random linear maps.
std::pair<Matrix, Matrix> two_view_input(Rng& rng, std::size_t n, std::size_t dim) {
    Matrix base(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % 3;
        for (std::size_t d = 0; d < dim; ++d)
            base(i, d) = (c == d % 3 ? 2.0 : -1.0) + 0.2 * rng.gaussian();
    }
    const Matrix map_a = testsupport::random_matrix(rng, dim, dim, 0.6);
    const Matrix map_b = testsupport::random_matrix(rng, dim, dim, 0.6);
    return {matmul(base, map_a), matmul(base, map_b)};
}

} // namespace

TEST_CASE("lambda = 0 reproduces two independent runs bitwise") {
    Rng rng(1);
    const auto [va, vb] = two_view_input(rng, 30, 5);
    const YokeConfig cfg = fast_config(0.0);

    const YokedResult yoked = yoked_run(va, vb, cfg);

    tsne::TsneConfig cfg_a = cfg.base;
    cfg_a.seed = cfg.base.seed;
    tsne::TsneConfig cfg_b = cfg.base;
    cfg_b.seed = cfg.base.seed + 1;
    const tsne::TsneResult solo_a = tsne::run(va, cfg_a);
    const tsne::TsneResult solo_b = tsne::run(vb, cfg_b);

    CHECK(yoked.map_a.coords == solo_a.coords);
    CHECK(yoked.map_b.coords == solo_b.coords);
    CHECK(yoked.map_a.kl_trace == solo_a.kl_trace);
    CHECK(yoked.map_b.kl_trace == solo_b.kl_trace);
}

TEST_CASE("identical inputs with identical seeds stay bitwise locked for any lambda") {
    Rng rng(2);
    const auto [va, vb] = two_view_input(rng, 24, 4);
    for (const double lambda : {0.0, 0.05, 1.0}) {
        const YokedResult r = yoked_run_seeded(va, va, fast_config(lambda), 7, 7);
        CHECK(r.map_a.coords == r.map_b.coords);
        CHECK(r.map_a.kl_trace == r.map_b.kl_trace);
        CHECK(r.mean_displacement == 0.0);
    }
}

TEST_CASE("total cost gradient (KL + penalty) matches finite differences") {
    Rng rng(3);
    const std::size_t n = 6;
    const Matrix va = testsupport::random_matrix(rng, n, 3);
    const Matrix vb = testsupport::random_matrix(rng, n, 3);
    tsne::TsneConfig cfg;
    cfg.perplexity = 3.0;
    const Matrix pa = tsne::joint_probabilities(va, cfg);
    const Matrix pb = tsne::joint_probabilities(vb, cfg);

    for (const double lambda : {0.0, 0.1, 2.0}) {
        Matrix ya = testsupport::random_matrix(rng, n, 2);
        Matrix yb = testsupport::random_matrix(rng, n, 2);

        const auto cost = [&] {
            double penalty = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < 2; ++k) {
                    const double diff = ya(i, k) - yb(i, k);
                    penalty += diff * diff;
                }
            return tsne::kl_divergence(pa, tsne::q_matrix(ya).q) +
                   tsne::kl_divergence(pb, tsne::q_matrix(yb).q) +
                   lambda / (2.0 * n) * penalty;
        };

        // analytic gradient: per-map KL gradient plus the coupling term
        const Matrix ga = tsne::kl_gradient(pa, ya);
        const Matrix gb = tsne::kl_gradient(pb, yb);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < 2; ++k) {
                const double pull = lambda / n * (ya(i, k) - yb(i, k));
                const double analytic_a = ga(i, k) + pull;
                const double analytic_b = gb(i, k) - pull;
                CHECK(testsupport::rel_error(analytic_a,
                                             testsupport::central_diff(cost, ya(i, k))) < 1e-4);
                CHECK(testsupport::rel_error(analytic_b,
                                             testsupport::central_diff(cost, yb(i, k))) < 1e-4);
            }
        }
    }
}

TEST_CASE("alignment weight reduces the mean displacement") {
    Rng rng(4);
    const auto [va, vb] = two_view_input(rng, 45, 6);
    YokeConfig cfg = fast_config(0.0);
    cfg.base.iterations = 220;
    cfg.base.exaggeration_iters = 50;
    const double unyoked = yoked_run(va, vb, cfg).mean_displacement;
    cfg.lambda = 0.1;
    const double yoked = yoked_run(va, vb, cfg).mean_displacement;
    CHECK(yoked < unyoked);
}

TEST_CASE("displacement basics and brute-force agreement") {
    Matrix a(3, 2, 0.0);
    const Displacement zero = displacement(a, a);
    CHECK(zero.mean == 0.0);
    for (const double d : zero.per_point) CHECK(d == 0.0);

    Matrix b = a;
    for (std::size_t i = 0; i < 3; ++i) {
        b(i, 0) += 3.0;
        b(i, 1) += 4.0;
    }
    const Displacement shifted = displacement(a, b);
    CHECK(shifted.mean == doctest::Approx(5.0).epsilon(1e-15));
    for (const double d : shifted.per_point) CHECK(d == doctest::Approx(5.0).epsilon(1e-15));

    Rng rng(5);
    const Matrix ra = testsupport::random_matrix(rng, 20, 2, 2.0);
    const Matrix rb = testsupport::random_matrix(rng, 20, 2, 2.0);
    const Displacement got = displacement(ra, rb);
    double mean = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        const double dx = ra(i, 0) - rb(i, 0);
        const double dy = ra(i, 1) - rb(i, 1);
        const double expected = std::sqrt(dx * dx + dy * dy);
        CHECK(got.per_point[i] == doctest::Approx(expected).epsilon(1e-14));
        mean += expected;
    }
    CHECK(got.mean == doctest::Approx(mean / 20.0).epsilon(1e-14));

    CHECK_THROWS_AS(displacement(ra, Matrix(3, 2, 0.0)), Error);
}

TEST_CASE("yoked_run validates inputs") {
    Rng rng(6);
    const Matrix va = testsupport::random_matrix(rng, 10, 3);
    const Matrix vb = testsupport::random_matrix(rng, 9, 3);
    CHECK_THROWS_WITH_AS(yoked_run(va, vb, fast_config(0.0)), doctest::Contains("row count"),
                         Error);

    YokeConfig bad = fast_config(-0.5);
    CHECK_THROWS_AS(yoked_run(va, va, bad), Error);
}

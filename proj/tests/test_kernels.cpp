#include "laplim/kernels.hpp"

#include <doctest.h>

#include <cmath>

using namespace laplim;
using namespace laplim::kernels;

namespace {

// Independent oracle for the level-measure moments: for decreasing K0,
// integral u^j dη = j * integral t^{j-1} K0(t) dt (Fubini over the level
// decomposition), evaluated by quadrature on the kernel itself.
double moment_by_quadrature(const BaseKernel& k, int j) {
    return j * adaptive_simpson([&](double t) { return std::pow(t, j - 1) * k.eval(t); }, 0.0,
                                k.support_radius() * (1.0 + 1e-12), 1e-12);
}

manifolds::ScalarField truncated_normal_field(double sigma, double lo, double hi) {
    manifolds::ScalarField f;
    f.name = "truncnorm";
    const double c = 0.5 * (lo + hi);
    const double z = std::erf((hi - c) / (sigma * std::sqrt(2.0)));
    f.value = [sigma, c, z](const Vec& x) {
        return std::exp(-0.5 * sq((x[0] - c) / sigma)) / (sigma * std::sqrt(2.0 * M_PI) * z);
    };
    f.grad = [f, sigma, c](const Vec& x) {
        Vec g(1);
        g << -(x[0] - c) / (sigma * sigma) * f.value(x);
        return g;
    };
    return f;
}

manifolds::ScalarField power_of(const manifolds::ScalarField& p, double e, const std::string& name) {
    manifolds::ScalarField f;
    f.name = name;
    f.value = [p, e](const Vec& x) { return std::pow(p.value(x), e); };
    f.grad = [p, e](const Vec& x) {
        return Vec(e * std::pow(p.value(x), e - 1.0) * p.grad(x));
    };
    return f;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("indicator constants: C = C' = 1, Z = m+2") {
    for (int m = 1; m <= 5; ++m) {
        const auto kc = base_kernel_constants(BaseKernel::indicator(), m);
        CHECK(kc.C == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(kc.Cprime == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(kc.Z == doctest::Approx(m + 2.0).epsilon(1e-14));
    }
    CHECK(base_kernel_constants(BaseKernel::indicator(), 2).Z == doctest::Approx(4.0));
}

TEST_CASE("constants agree with the quadrature oracle for all kinds") {
    const std::vector<BaseKernel> kinds = {
        BaseKernel::indicator(),
        BaseKernel::step_sum({{1.0, 1.0}, {0.5, 2.0}}),
        BaseKernel::truncated_gaussian(3.0),
        BaseKernel::truncated_gaussian(1.5),
    };
    for (const auto& k : kinds) {
        for (int m : {1, 2, 3}) {
            const auto kc = base_kernel_constants(k, m);
            CHECK(kc.C == doctest::Approx(moment_by_quadrature(k, m + 2)).epsilon(1e-9));
            CHECK(kc.Cprime == doctest::Approx(moment_by_quadrature(k, m)).epsilon(1e-9));
            CHECK(kc.Z == doctest::Approx((m + 2) * kc.Cprime / kc.C).epsilon(1e-14));
        }
    }
}

TEST_CASE("step_sum {(1,1)} reproduces the indicator exactly") {
    const auto ind = BaseKernel::indicator();
    const auto step = BaseKernel::step_sum({{1.0, 1.0}});
    for (int m : {1, 2, 3, 4}) {
        const auto a = base_kernel_constants(ind, m);
        const auto b = base_kernel_constants(step, m);
        CHECK(a.C == b.C);
        CHECK(a.Cprime == b.Cprime);
        CHECK(a.Z == b.Z);
    }
    for (double u : {0.0, 0.5, 0.999, 1.0, 1.5}) CHECK(ind.eval(u) == step.eval(u));
}

TEST_CASE("level reconstruction matches direct evaluation") {
    Rng rng(23);
    SUBCASE("indicator and step_sum to 1e-12") {
        for (const auto& k :
             {BaseKernel::indicator(), BaseKernel::step_sum({{0.3, 0.5}, {1.0, 1.0}, {0.5, 2.0}})}) {
            for (int i = 0; i < 1000; ++i) {
                const double u = rng.uniform(0.0, k.support_radius() * 1.2);
                CHECK(std::abs(k.eval(u) - k.eval_from_levels(u)) < 1e-12);
            }
        }
    }
    SUBCASE("truncated gaussian staircase within its resolution bound") {
        const auto k = BaseKernel::truncated_gaussian(3.0);
        const double bound = k.staircase_resolution();
        CHECK(bound < 1.2e-2);  // max kernel slope x cell width, 256 levels over [0, 3]
        for (int i = 0; i < 1000; ++i) {
            const double u = rng.uniform(0.0, 3.3);
            CHECK(std::abs(k.eval(u) - k.eval_from_levels(u)) <= bound);
        }
    }
}

TEST_CASE("eval_kernel support and values") {
    KernelSpec spec;
    spec.base = BaseKernel::indicator();
    spec.bandwidth = BandwidthField::constant(1.0, 1);
    spec.weight = WeightField::constant(1.0, 1);
    spec.h = 0.5;
    Vec x = Vec::Zero(2), y = Vec::Zero(2);
    y[0] = 0.3;
    CHECK(eval_kernel(spec, x, y) == 1.0);
    y[0] = 0.6;
    CHECK(eval_kernel(spec, x, y) == 0.0);
    y[0] = 0.5;  // boundary: exactly zero
    CHECK(eval_kernel(spec, x, y) == 0.0);

    spec.base = BaseKernel::step_sum({{1.0, 1.0}, {0.5, 2.0}});
    spec.weight = WeightField::constant(2.0, 1);
    spec.h = 1.0;
    y[0] = 1.5;
    CHECK(eval_kernel(spec, x, y) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("symmetric fields give a symmetric kernel") {
    // Product-form bandwidth/weight over a sample-backed cloud.
    auto cloud = std::make_shared<manifolds::PointCloud>();
    const int n = 40;
    Rng rng(9);
    cloud->points.resize(n, 3);
    cloud->chart.resize(n, 1);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < 3; ++d) cloud->points(i, d) = rng.normal();
        cloud->chart(i, 0) = 0.0;
    }
    Vec bw_vals(n), wt_vals(n);
    for (int i = 0; i < n; ++i) {
        bw_vals[i] = rng.uniform(0.5, 2.0);
        wt_vals[i] = rng.uniform(0.1, 3.0);
    }
    KernelSpec spec;
    spec.base = BaseKernel::truncated_gaussian(3.0);
    spec.bandwidth = BandwidthField::from_samples(cloud, bw_vals, "test");
    spec.weight = WeightField::from_samples(cloud, wt_vals, "test");
    spec.h = 1.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int i = static_cast<int>(rng.uniform_int(n));
        const int j = static_cast<int>(rng.uniform_int(n));
        const Vec xi = cloud->points.row(i).transpose();
        const Vec xj = cloud->points.row(j).transpose();
        CHECK(std::abs(eval_kernel(spec, xi, xj) - eval_kernel(spec, xj, xi)) < 1e-12);
    }
}

TEST_CASE("designer: q = p^2, g = p recovers the plain kernel") {
    const auto p = truncated_normal_field(0.5, 0.0, 4.0);
    const auto q = power_of(p, 2.0, "p^2");
    const auto [bw, wt] = design_bandwidth_weight(p, q, p, 1);
    for (double x : {0.5, 1.0, 2.0, 3.1, 3.9}) {
        Vec c(1);
        c << x;
        CHECK(bw.diag(c) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(wt.diag(c) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(bw.diag_grad(c).norm() < 1e-10);
        CHECK(wt.diag_grad(c).norm() < 1e-10);
    }
}

TEST_CASE("designer: constant inputs give constant fields") {
    const auto one = manifolds::ScalarField::constant(1.0, 1);
    const auto half = manifolds::ScalarField::constant(0.5, 1);
    const auto [bw, wt] = design_bandwidth_weight(half, one, one, 2);
    Vec c(1);
    c << 0.3;
    CHECK(bw.diag(c) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(bw.diag_grad(c).norm() == 0.0);
    CHECK(wt.diag_grad(c).norm() == 0.0);
}

TEST_CASE("designer round trip: p^2 w g^{m+2} = q and p w g^m = g on a grid") {
    const auto p = truncated_normal_field(0.5, 0.0, 4.0);
    const auto q_uniform = manifolds::ScalarField::constant(0.25, 1);
    const auto g_one = manifolds::ScalarField::constant(1.0, 1);
    const auto p_sq = power_of(p, 2.0, "p^2");
    const auto p_half = power_of(p, 0.5, "sqrt_p");

    struct Triple {
        manifolds::ScalarField q, g;
        int m;
    };
    const std::vector<Triple> triples = {
        {p_sq, p, 1}, {q_uniform, g_one, 2}, {p_half, p_sq, 3}};
    for (const auto& [q, g, m] : triples) {
        const auto [bw, wt] = design_bandwidth_weight(p, q, g, m);
        for (int i = 0; i <= 100; ++i) {
            Vec c(1);
            c << 0.2 + 3.6 * i / 100.0;
            const double gamma = bw.diag(c);
            const double omega = wt.diag(c);
            const double q_check = sq(p.value(c)) * omega * std::pow(gamma, m + 2);
            const double g_check = p.value(c) * omega * std::pow(gamma, m);
            CHECK(std::abs(q_check - q.value(c)) < 1e-10 * std::max(1.0, std::abs(q.value(c))));
            CHECK(std::abs(g_check - g.value(c)) < 1e-10 * std::max(1.0, std::abs(g.value(c))));
        }
    }
}

TEST_CASE("designer rejects non-positive inputs") {
    const auto p = truncated_normal_field(0.5, 0.0, 4.0);
    manifolds::ScalarField bad;
    bad.name = "bad";
    bad.value = [](const Vec& x) { return x[0] - 1.0; };  // negative below 1
    bad.grad = [](const Vec&) { return Vec::Ones(1); };
    Vec lo(1), hi(1);
    lo << 0.0;
    hi << 4.0;
    CHECK_THROWS_AS(validate_design_inputs(p, bad, p, lo, hi, 64), DataError);
}

TEST_CASE("non-normalizable decomposition is rejected") {
    CHECK_THROWS(BaseKernel::step_sum({{-1.0, 1.0}}));
    CHECK_THROWS(BaseKernel::step_sum({}));
}

}  // TEST_SUITE

#include "laplim/limits.hpp"

#include <doctest.h>

#include <cmath>

using namespace laplim;
using namespace laplim::limits;
using laplim::graphs::Construction;
using laplim::manifolds::DensityModel;
using laplim::manifolds::ManifoldSpec;
using laplim::manifolds::ScalarField;

namespace {

Vec chart1(double t) {
    Vec c(1);
    c << t;
    return c;
}

ScalarField power_of_density(const ManifoldSpec& spec, double e, const std::string& name) {
    ScalarField f;
    f.name = name;
    f.value = [spec, e](const Vec& c) { return std::pow(spec.density(c), e); };
    f.grad = [spec, e](const Vec& c) {
        return Vec(e * std::pow(spec.density(c), e) * spec.grad_log_density(c));
    };
    return f;
}

}  // namespace

TEST_SUITE("limits") {

TEST_CASE("differential machinery against closed forms") {
    SUBCASE("circle: gradient and Laplacian of sin(theta)") {
        const auto spec = ManifoldSpec::circle(2.0);
        auto f = [](const Vec& c) { return std::sin(c[0]); };
        // d/ds = (1/R) d/dtheta, Laplacian = (1/R^2) d^2/dtheta^2
        for (double t : {0.0, 0.7, 2.1, -1.3}) {
            CHECK(gradient_s(spec, f, chart1(t))[0] ==
                  doctest::Approx(std::cos(t) / 2.0).epsilon(1e-8));
            CHECK(laplace_s(spec, f, chart1(t)) ==
                  doctest::Approx(-std::sin(t) / 4.0).epsilon(1e-6));
        }
    }
    SUBCASE("helix: arc-length derivative of the chart coordinate") {
        const auto spec = ManifoldSpec::toroidal_helix(2.0, 0.5, 10);
        auto f = [](const Vec& c) { return c[0]; };
        for (double t : {0.1, 1.0, -2.0}) {
            CHECK(gradient_s(spec, f, chart1(t))[0] ==
                  doctest::Approx(1.0 / spec.speed(t)).epsilon(1e-7));
        }
    }
    SUBCASE("sheet: flat Laplacian") {
        const auto spec = ManifoldSpec::gauss_sheet(2.5);
        auto f = [](const Vec& c) { return c[0] * c[0] + 3.0 * c[1]; };
        Vec c(2);
        c << 0.4, -1.1;
        CHECK(laplace_s(spec, f, c) == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(gradient_s(spec, f, c)[0] == doctest::Approx(0.8).epsilon(1e-8));
        CHECK(gradient_s(spec, f, c)[1] == doctest::Approx(3.0).epsilon(1e-8));
    }
}

TEST_CASE("limit_from_fields") {
    const int m = 1;
    SUBCASE("constant fields, uniform density: zero drift, unit diffusion") {
        const auto spec = ManifoldSpec::circle(1.0);
        const auto op = limit_from_fields(kernels::BandwidthField::constant(1.0, m),
                                          kernels::WeightField::constant(1.0, m), spec);
        for (double t : {0.0, 1.0, 2.5}) {
            CHECK(op.drift(chart1(t)).norm() == 0.0);
            CHECK(op.diffusion(chart1(t)) == 1.0);
        }
    }
    SUBCASE("constant fields, general density: drift = grad p / p") {
        const auto spec = ManifoldSpec::circle(1.0, DensityModel::cosine_bump(0.5));
        const auto op = limit_from_fields(kernels::BandwidthField::constant(1.0, m),
                                          kernels::WeightField::constant(1.0, m), spec);
        for (double t : {0.3, 1.2, -2.0}) {
            CHECK(op.drift(chart1(t))[0] ==
                  doctest::Approx(spec.grad_log_density(chart1(t))[0]).epsilon(1e-12));
        }
    }
    SUBCASE("directed kNN fields: drift and diffusion carry c^2 p^{-2/m}") {
        const auto spec =
            ManifoldSpec::flat_interval(4.0, DensityModel::truncated_normal(0.5));
        const double c_const = 1.0 / unit_ball_volume(1);  // V_1^{-1}
        kernels::BandwidthField bw;
        bw.name = "knn_directed_limit";
        bw.symmetric = false;
        bw.diag = [spec, c_const](const Vec& c) {
            return c_const * std::pow(spec.density(c), -1.0);
        };
        bw.diag_grad = [](const Vec&) { return Vec::Zero(1); };  // no y-dependence
        const auto op = limit_from_fields(bw, kernels::WeightField::constant(1.0, m), spec);
        for (double t : {1.0, 1.7, 2.4, 3.0}) {
            const Vec c = chart1(t);
            const double gamma2 = sq(c_const) * std::pow(spec.density(c), -2.0);
            CHECK(op.diffusion(c) == doctest::Approx(gamma2).epsilon(1e-12));
            CHECK(op.drift(c)[0] ==
                  doctest::Approx(gamma2 * spec.grad_log_density(c)[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("catalogue agrees with limit_from_fields where fields are unambiguous") {
    const auto specs = {ManifoldSpec::flat_interval(4.0, DensityModel::truncated_normal(0.5)),
                        ManifoldSpec::circle(1.0, DensityModel::cosine_bump(0.5))};
    for (const auto& spec : specs) {
        const int m = spec.intrinsic_dim();
        SUBCASE("r-neighborhood") {
            const auto cat = catalog_limit(Construction::RNeighborhood, spec);
            const auto fields = limit_from_fields(kernels::BandwidthField::constant(1.0, m),
                                                  kernels::WeightField::constant(1.0, m), spec);
            for (int i = 1; i < 20; ++i) {
                const Vec c = chart1(spec.chart_lower()[0] +
                                     (spec.chart_upper()[0] - spec.chart_lower()[0]) * i / 20.0);
                CHECK(std::abs(cat.drift(c)[0] - fields.drift(c)[0]) < 1e-8);
                CHECK(std::abs(cat.diffusion(c) - fields.diffusion(c)) < 1e-8);
            }
        }
        SUBCASE("directed kNN") {
            const auto cat = catalog_limit(Construction::KnnDirected, spec);
            const double c_const = std::pow(unit_ball_volume(m), -1.0 / m);
            kernels::BandwidthField bw;
            bw.symmetric = false;
            bw.diag = [spec, c_const, m](const Vec& c) {
                return c_const * std::pow(spec.density(c), -1.0 / m);
            };
            bw.diag_grad = [m](const Vec&) { return Vec::Zero(m); };
            const auto fields = limit_from_fields(bw, kernels::WeightField::constant(1.0, m), spec);
            for (int i = 1; i < 20; ++i) {
                const Vec c = chart1(spec.chart_lower()[0] +
                                     (spec.chart_upper()[0] - spec.chart_lower()[0]) * i / 20.0);
                CHECK(std::abs(cat.drift(c)[0] - fields.drift(c)[0]) < 1e-8);
                CHECK(std::abs(cat.diffusion(c) - fields.diffusion(c)) < 1e-8);
            }
        }
    }
}

TEST_CASE("catalogue structure") {
    SUBCASE("OR-kNN drift flips sign for m = 1") {
        const auto spec = ManifoldSpec::circle(1.0, DensityModel::cosine_bump(0.5));
        const auto op = catalog_limit(Construction::KnnUndirectedOr, spec);
        for (double t : {0.4, 1.1, 2.0, -0.9}) {
            const Vec c = chart1(t);
            const double glp = spec.grad_log_density(c)[0];
            if (std::abs(glp) > 1e-6) {
                CHECK(op.drift(c)[0] * glp < 0.0);  // drift away from density
            }
        }
    }
    SUBCASE("self-tuning has the same drift/diffusion as OR-kNN") {
        const auto spec = ManifoldSpec::circle(1.0, DensityModel::cosine_bump(0.5));
        const auto a = catalog_limit(Construction::KnnUndirectedOr, spec);
        const auto b = catalog_limit(Construction::SelfTuning, spec);
        for (double t : {0.2, 0.9, -1.7}) {
            const Vec c = chart1(t);
            CHECK(a.drift(c)[0] == b.drift(c)[0]);
            CHECK(a.diffusion(c) == b.diffusion(c));
            CHECK(a.q(c) == b.q(c));
        }
    }
    SUBCASE("pilot-weighted kNN on the sheet has positive drift coefficient (m = 2)") {
        const auto spec = ManifoldSpec::gauss_sheet(2.5);
        const auto pilot = catalog_limit(Construction::PilotWeightedKnn, spec);
        const auto orknn = catalog_limit(Construction::KnnUndirectedOr, spec);
        Vec c(2);
        c << 1.0, 0.5;
        // m = 2: OR-kNN drift vanishes; pilot weighting restores half the
        // density gradient per unit diffusion.
        CHECK(orknn.drift(c).norm() == 0.0);
        const Vec expected = 0.5 * pilot.diffusion(c) * spec.grad_log_density(c);
        CHECK((pilot.drift(c) - expected).norm() < 1e-12);
    }
}

TEST_CASE("weighted Laplace-Beltrami") {
    SUBCASE("uniform q on the unit circle: Delta sin = -sin") {
        const auto spec = ManifoldSpec::circle(1.0);
        const auto q = ScalarField::constant(1.0, 1);
        auto f = [](const Vec& c) { return std::sin(c[0]); };
        for (double t : {0.0, 0.8, 2.2}) {
            CHECK(apply_weighted_LB(spec, q, f, chart1(t)) ==
                  doctest::Approx(-std::sin(t)).epsilon(1e-6));
        }
    }
    SUBCASE("constant f maps to zero") {
        const auto spec = ManifoldSpec::circle(1.0);
        const auto q = ScalarField::constant(2.0, 1);
        auto f = [](const Vec&) { return 3.3; };
        CHECK(std::abs(apply_weighted_LB(spec, q, f, chart1(0.5))) < 1e-10);
    }
    SUBCASE("flat interval, q = p^2, f = x^2: closed form") {
        const auto spec = ManifoldSpec::flat_interval(4.0, DensityModel::truncated_normal(0.5));
        const auto q = power_of_density(spec, 2.0, "p^2");
        auto f = [](const Vec& c) { return c[0] * c[0]; };
        for (double x : {1.2, 2.0, 2.9}) {
            // f'' + (grad q / q) f' with grad q / q = 2 grad p / p = -2(x-2)/sigma^2
            const double expected = 2.0 + (-2.0 * (x - 2.0) / 0.25) * (2.0 * x);
            CHECK(apply_weighted_LB(spec, q, f, chart1(x)) ==
                  doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("smoothness functional") {
    SUBCASE("constants have zero roughness") {
        const auto spec = ManifoldSpec::circle(1.0);
        CHECK(std::abs(smoothness_functional(spec, ScalarField::constant(1.0, 1),
                                             [](const Vec&) { return 2.0; })) < 1e-12);
    }
    SUBCASE("f = x on the unit interval with uniform q gives 1") {
        const auto spec = ManifoldSpec::flat_interval(1.0);
        CHECK(smoothness_functional(spec, ScalarField::constant(1.0, 1),
                                    [](const Vec& c) { return c[0]; }) ==
              doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("discrete form is PSD and tracks the integral") {
        const auto spec = ManifoldSpec::flat_interval(1.0);
        const int n = 4000;
        const auto cloud = manifolds::sample_points(spec, n, 51);
        const double h = 0.05;
        const auto g = graphs::build_r_neighborhood(cloud.points, h);
        const auto scaling =
            laplacians::GeneratorScaling::from_kernel(kernels::BaseKernel::indicator(), 1, h);
        const laplacians::LaplacianMatrix lu(g, laplacians::LapKind::Unnormalized, scaling);
        Vec f(n);
        for (int i = 0; i < n; ++i) f[i] = std::sin(M_PI * cloud.chart(i, 0));
        const double discrete = discrete_smoothness(lu, f, 1.0);
        CHECK(discrete >= 0.0);
        // integral of pi^2 cos^2(pi x) over [0,1] with q = p^2 = 1: pi^2/2
        CHECK(std::abs(discrete - M_PI * M_PI / 2.0) / (M_PI * M_PI / 2.0) < 0.2);
    }
}

TEST_CASE("Green's identity at desk scale") {
    // <f, A f>_{L2(q)} = -||grad f||^2_{L2(q)} with A = Delta_q, within 2%.
    struct Case {
        ManifoldSpec spec;
        ScalarField q;
    };
    const auto circle_uniform = ManifoldSpec::circle(1.0);
    const auto circle_bump = ManifoldSpec::circle(1.0, DensityModel::cosine_bump(0.5));
    const auto interval = ManifoldSpec::flat_interval(4.0, DensityModel::truncated_normal(0.5));
    std::vector<Case> cases;
    cases.push_back({circle_uniform, ScalarField::constant(1.0 / (2 * M_PI), 1)});
    cases.push_back({circle_bump, power_of_density(circle_bump, 2.0, "p^2")});
    cases.push_back({interval, power_of_density(interval, 2.0, "p^2")});
    for (const auto& [spec, q] : cases) {
        const auto f = make_test_function(spec.periodic() ? "sin_theta" : "sin_pi_rel0", spec);
        const double lhs = integrate_on_manifold(spec, [&](const Vec& c) {
            return f.fn(c) * apply_weighted_LB(spec, q, f.fn, c) * q.value(c);
        });
        const double rhs = -smoothness_functional(spec, q, f.fn);
        CAPTURE(spec.name());
        CHECK(std::abs(lhs - rhs) <= 0.02 * std::abs(rhs));
    }
}

TEST_CASE("self-adjointness diagnostic in L2(p)") {
    const auto spec = ManifoldSpec::circle(1.0, DensityModel::cosine_bump(0.5));
    auto f = [](const Vec& c) { return std::sin(c[0]); };
    auto g = [](const Vec& c) { return std::cos(2.0 * c[0]); };
    auto pairing = [&](const LimitOperator& op, const ChartFunction& a, const ChartFunction& b) {
        return integrate_on_manifold(spec, [&](const Vec& c) {
            return a(c) * op.apply(spec, b, c) * spec.density(c);
        });
    };
    SUBCASE("directed kNN limit is not self-adjoint") {
        const auto op = catalog_limit(Construction::KnnDirected, spec);
        const double asym = std::abs(pairing(op, f, g) - pairing(op, g, f));
        CHECK(asym > 1e-3);
    }
    SUBCASE("OR-kNN limit is self-adjoint to quadrature tolerance") {
        const auto op = catalog_limit(Construction::KnnUndirectedOr, spec);
        const double asym = std::abs(pairing(op, f, g) - pairing(op, g, f));
        CHECK(asym < 1e-6);
    }
}

}  // TEST_SUITE

#include "laplim/validate.hpp"

#include "laplim/density.hpp"

#include <doctest.h>

#include <cmath>

using namespace laplim;
using namespace laplim::validate;
using laplim::graphs::Construction;
using laplim::laplacians::GeneratorScaling;
using laplim::manifolds::DensityModel;
using laplim::manifolds::ManifoldSpec;

TEST_SUITE("validate") {

TEST_CASE("empirical moments: two-point graph by hand") {
    PointMatrix pts(2, 2);
    pts << 0.0, 0.0, 1.0, 0.5;
    const auto g = graphs::build_r_neighborhood(pts, 5.0);
    const GeneratorScaling s{2.0, 1.0, 1};
    const auto est = empirical_moments(g, pts, s);
    CHECK(est.drift_hat(0, 0) == doctest::Approx(2.0 * 1.0));
    CHECK(est.drift_hat(0, 1) == doctest::Approx(2.0 * 0.5));
    CHECK(est.drift_hat(1, 0) == doctest::Approx(-2.0));
    // Variance form vanishes for a single neighbor.
    CHECK(est.diff_hat[0].lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("drift rows equal the generator applied to coordinates, bitwise") {
    const auto spec = ManifoldSpec::circle(1.0, DensityModel::cosine_bump(0.5));
    const auto cloud = manifolds::sample_points(spec, 500, 3);
    const auto g = graphs::build_knn_undirected_or(cloud.points, 8);
    const auto s = GeneratorScaling::from_knn(1, 8, 500);
    const auto est = empirical_moments(g, cloud.points, s);
    const laplacians::LaplacianMatrix rw(g, laplacians::LapKind::RandomWalk, s);
    for (int c = 0; c < 2; ++c) {
        Vec coord(500);
        for (int i = 0; i < 500; ++i) coord[i] = cloud.points(i, c);
        const Vec gen = rw.apply(coord);
        for (int i = 0; i < 500; ++i) CHECK(gen[i] == est.drift_hat(i, c));
    }
}

TEST_CASE("diffusion slices are symmetric PSD") {
    const auto spec = ManifoldSpec::gauss_sheet(2.5);
    const auto cloud = manifolds::sample_points(spec, 400, 5);
    const auto g = graphs::build_knn_undirected_or(cloud.points, 12);
    const auto est = empirical_moments(g, cloud.points, GeneratorScaling::from_knn(2, 12, 400));
    for (int i = 0; i < 400; ++i) {
        CHECK((est.diff_hat[i] - est.diff_hat[i].transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Mat> es(est.diff_hat[i]);
        CHECK(es.eigenvalues().minCoeff() >=
              -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()));
    }
}

TEST_CASE("scale equivariance: W -> 2W leaves all moments unchanged") {
    const auto spec = ManifoldSpec::circle(1.0);
    const auto cloud = manifolds::sample_points(spec, 300, 7);
    const auto g = graphs::build_self_tuning(cloud.points, 9);
    const auto scaled = g.scaled(2.0);
    const auto s = GeneratorScaling::self_tuning(1, 9, 300);
    const auto a = empirical_moments(g, cloud.points, s);
    const auto b = empirical_moments(scaled, cloud.points, s);
    CHECK((a.drift_hat - b.drift_hat).lpNorm<Eigen::Infinity>() == 0.0);
    for (int i = 0; i < 300; ++i)
        CHECK((a.diff_hat[i] - b.diff_hat[i]).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("uniform interval: interior drift within Monte-Carlo noise") {
    const auto spec = ManifoldSpec::flat_interval(1.0);
    const int n = 3000;
    const auto cloud = manifolds::sample_points(spec, n, 9);
    const double h = 0.05;
    const auto g = graphs::build_r_neighborhood(cloud.points, h);
    const auto s = GeneratorScaling::from_kernel(kernels::BaseKernel::indicator(), 1, h);
    const auto est = empirical_moments(g, cloud.points, s);
    const auto tm = project_to_tangent(est, spec, cloud.chart);
    std::vector<double> interior;
    for (int i = 0; i < n; ++i)
        if (cloud.chart(i, 0) > 2 * h && cloud.chart(i, 0) < 1 - 2 * h)
            interior.push_back(tm.drift(i, 0));
    double mean = 0.0, var = 0.0;
    for (double v : interior) mean += v;
    mean /= interior.size();
    for (double v : interior) var += sq(v - mean);
    var /= interior.size() - 1;
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(var / interior.size()));
}

TEST_CASE("circle diffusion scale approaches 1 for the r-neighborhood graph") {
    // Indicator second moment h^2/3 times c_n = 3/h^2 gives diffusion 1
    // tangentially (m = 1, Z = 3).
    const auto spec = ManifoldSpec::circle(1.0);
    const int n = 4000;
    const double h = 0.05;
    const auto cloud = manifolds::sample_points(spec, n, 11);
    const auto g = graphs::build_r_neighborhood(cloud.points, h);
    const auto s = GeneratorScaling::from_kernel(kernels::BaseKernel::indicator(), 1, h);
    const auto est = empirical_moments(g, cloud.points, s);
    const auto tm = project_to_tangent(est, spec, cloud.chart);
    CHECK(std::abs(tm.diffusion_scale.mean() - 1.0) < 0.05);
    SUBCASE("normal component of the diffusion is an O(h^2) residual") {
        CHECK(tm.diff_normal_fraction.mean() < 0.05);
    }
}

TEST_CASE("tangent projection diagnostics") {
    SUBCASE("flat manifold: zero normal residual") {
        const auto spec = ManifoldSpec::flat_interval(1.0);
        const auto cloud = manifolds::sample_points(spec, 500, 13);
        const auto g = graphs::build_r_neighborhood(cloud.points, 0.08);
        const auto est = empirical_moments(
            g, cloud.points, GeneratorScaling::from_kernel(kernels::BaseKernel::indicator(), 1, 0.08));
        const auto tm = project_to_tangent(est, spec, cloud.chart);
        CHECK(tm.drift_normal_norm.maxCoeff() < 1e-12);
        CHECK(tm.diff_normal_fraction.maxCoeff() < 1e-12);
    }
    SUBCASE("projector idempotence: projecting twice changes nothing") {
        const auto spec = ManifoldSpec::circle(1.0);
        const auto cloud = manifolds::sample_points(spec, 200, 15);
        const auto g = graphs::build_r_neighborhood(cloud.points, 0.1);
        const auto est = empirical_moments(
            g, cloud.points, GeneratorScaling::from_kernel(kernels::BaseKernel::indicator(), 1, 0.1));
        const auto tm = project_to_tangent(est, spec, cloud.chart);
        for (int i = 0; i < 200; ++i) {
            const auto frame = manifolds::tangent_frame(spec, cloud.chart.row(i).transpose());
            const Mat pi = frame.projector();
            const Mat projected = frame.H.transpose() * (pi * est.diff_hat[i] * pi) * frame.H;
            CHECK((projected - tm.diff[i]).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }
}

TEST_CASE("sphere moment oracle") {
    SUBCASE("pure sphere reproduces the closed-form moments (m = 1, 2, 3)") {
        for (int m : {1, 2, 3}) {
            const double h = 1.0;
            const auto mom = sphere_moment_oracle(m, h, Vec::Zero(m), 0.0, Vec::Unit(m, 0), 0.0,
                                                  1000000, 100 + m);
            CHECK(std::abs(mom.m0 - 1.0) <= 3.0 * mom.m0_se);
            for (int d = 0; d < m; ++d) CHECK(std::abs(mom.m1[d]) <= 3.0 * mom.m1_se[d]);
            for (int d = 0; d < m; ++d)
                for (int dd = 0; dd < m; ++dd) {
                    const double expected = d == dd ? 1.0 / (m + 2) : 0.0;
                    CHECK(std::abs(mom.m2(d, dd) - expected) <=
                          3.0 * std::max(mom.m2_se(d, dd), 1e-12));
                }
        }
    }
    SUBCASE("shifted sphere first moment tracks h^{m+2} v_c") {
        const int m = 2;
        const double h = 0.1;
        Vec shift = Vec::Zero(m);
        shift[0] = 0.01 * h * h;
        const auto mom = sphere_moment_oracle(m, h, shift, 0.0, Vec::Unit(m, 0), 0.0, 1000000, 7);
        const double expected = std::pow(h, m + 2) * shift[0];
        CHECK(std::abs(mom.m1[0] - expected) <= 3.0 * mom.m1_se[0]);
    }
    SUBCASE("kinked sphere: zeroth-moment shift within the analytic envelope") {
        const int m = 2;
        const double h = 0.3;
        const double big_c = 0.01;
        const double alpha = big_c * h * h;
        // Common random numbers isolate the kink effect.
        const auto base =
            sphere_moment_oracle(m, h, Vec::Zero(m), 0.0, Vec::Unit(m, 0), 0.0, 2000000, 77);
        const auto kinked =
            sphere_moment_oracle(m, h, Vec::Zero(m), alpha, Vec::Unit(m, 0), 0.0, 2000000, 77);
        const double diff = std::abs(kinked.m0 - base.m0);
        const double kappa = 2.0 * m * unit_ball_volume(m - 1) / unit_ball_volume(m);
        const double envelope = kappa * big_c * std::pow(h, m + 1);
        CHECK(diff <= envelope + 3.0 * std::hypot(base.m0_se, kinked.m0_se));
    }
    SUBCASE("too few samples rejected") {
        CHECK_THROWS_AS(sphere_moment_oracle(1, 1.0, Vec::Zero(1), 0.0, Vec::Unit(1, 0), 0.0, 100, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("degree limit checks") {
    SUBCASE("uniform circle + r-neighborhood: degrees concentrate") {
        const auto spec = ManifoldSpec::circle(1.0);
        const int n = 5000;
        const auto cloud = manifolds::sample_points(spec, n, 17);
        const double h = 0.1;
        const auto g = graphs::build_r_neighborhood(cloud.points, h);
        const auto s = GeneratorScaling::from_kernel(kernels::BaseKernel::indicator(), 1, h);
        const auto check =
            degree_limit_check(g, spec, cloud.chart, s, limits::catalog_limit(Construction::RNeighborhood, spec));
        CHECK(check.coefficient_of_variation < 0.10);
        // chord-vs-arc bias stays inside a few percent at h = 0.1
        CHECK(check.median_abs_error < 0.05);
    }
    SUBCASE("directed kNN raw degrees are exactly k") {
        const auto spec = ManifoldSpec::circle(1.0);
        const auto cloud = manifolds::sample_points(spec, 400, 19);
        const auto g = graphs::build_knn_directed(cloud.points, 11);
        const Vec d = laplacians::degree_vector(g);
        for (int i = 0; i < 400; ++i) CHECK(d[i] == 11.0);
    }
    SUBCASE("self-tuning degrees vary less than r-neighborhood degrees on the sheet") {
        const auto spec = ManifoldSpec::gauss_sheet(2.5);
        const int n = 2000;
        const auto cloud = manifolds::sample_points(spec, n, 21);
        const int k = 60;
        const auto st = graphs::build_self_tuning(cloud.points, k);
        const auto rn = graphs::build_r_neighborhood(cloud.points, 0.35);
        auto cv = [](const Vec& d) {
            const double mean = d.mean();
            double var = 0.0;
            for (int i = 0; i < d.size(); ++i) var += sq(d[i] - mean);
            return std::sqrt(var / d.size()) / mean;
        };
        CHECK(cv(st.degrees()) < cv(rn.degrees()));
    }
}

TEST_CASE("interior selection") {
    const auto spec = ManifoldSpec::flat_interval(1.0);
    PointMatrix chart(4, 1);
    chart << 0.05, 0.3, 0.7, 0.97;
    const auto keep = interior_points(spec, chart, [](int) { return 0.05; });
    CHECK(keep == std::vector<int>{1, 2});
    // Closed manifolds keep everything.
    const auto circle = ManifoldSpec::circle(1.0);
    const auto all = interior_points(circle, chart, [](int) { return 0.3; });
    CHECK(all.size() == 4);
}

TEST_CASE("fast convergence run: errors shrink on a two-point grid") {
    const auto spec = ManifoldSpec::flat_interval(4.0, DensityModel::truncated_normal(0.5));
    ConvergenceConfig cfg;
    cfg.construction = Construction::RNeighborhood;
    cfg.grid = {{500, std::pow(500.0, -0.2)}, {4000, std::pow(4000.0, -0.2)}};
    cfg.seeds = {1, 2};
    cfg.test_functions = {"sin_pi_rel0"};
    const auto report = run_convergence(spec, cfg);
    REQUIRE(report.drift_err_by_grid.size() == 2);
    CHECK(report.drift_err_by_grid[1] < report.drift_err_by_grid[0]);
    REQUIRE(report.generator_err_by_grid.size() == 2);
    CHECK(report.generator_err_by_grid[1] < report.generator_err_by_grid[0]);
    for (const auto& cell : report.cells) CHECK(cell.interior_count > 0);
    // JSON serialization keeps the cell grid.
    const auto j = report.to_json();
    CHECK(j.at("cells").size() == 4);
}

TEST_CASE("diffusion-normalized drift") {
    TangentMoments tm;
    tm.drift.resize(2, 1);
    tm.drift << 3.0, -1.0;
    tm.diffusion_scale.resize(2);
    tm.diffusion_scale << 1.5, 0.5;
    const Mat norm = diffusion_normalized_drift(tm);
    CHECK(norm(0, 0) == doctest::Approx(2.0));
    CHECK(norm(1, 0) == doctest::Approx(-2.0));
}

}  // TEST_SUITE

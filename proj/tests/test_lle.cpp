#include "laplim/lle.hpp"

#include "laplim/manifolds.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace laplim;
using namespace laplim::lle;
using laplim::manifolds::ManifoldSpec;

namespace {

PointMatrix uniform_grid_1d(int n, double spacing) {
    PointMatrix pts(n, 2);
    for (int i = 0; i < n; ++i) {
        pts(i, 0) = i * spacing;
        pts(i, 1) = 0.0;
    }
    return pts;
}

Vec row_sums(const graphs::SparseGraph& w) {
    Vec s = Vec::Zero(w.n);
    for (int i = 0; i < w.n; ++i)
        for (std::size_t p = w.row_ptr[i]; p < w.row_ptr[i + 1]; ++p) s[i] += w.val[p];
    return s;
}

}  // namespace

TEST_SUITE("lle") {

TEST_CASE("three equally spaced collinear points, k = 2, reg = 0: weights (1/2, 1/2)") {
    const auto pts = uniform_grid_1d(3, 1.0);
    const auto model = fit_lle(pts, 2, 0.0);
    // middle point reconstructs exactly from its two neighbors
    for (std::size_t p = model.W.row_ptr[1]; p < model.W.row_ptr[2]; ++p)
        CHECK(model.W.val[p] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(model.residuals[1] < 1e-12);
}

TEST_CASE("row sums: W1 = 1 and M1 = 0") {
    const auto spec = ManifoldSpec::toroidal_helix(2.0, 0.5, 10);
    const auto cloud = manifolds::sample_points(spec, 400, 3);
    const auto model = fit_lle(cloud.points, 8, 1e-3);
    const Vec sums = row_sums(model.W);
    for (int i = 0; i < 400; ++i) CHECK(std::abs(sums[i] - 1.0) < 1e-10);
    const Vec m1 = model.apply_m(Vec::Constant(400, 4.2));
    CHECK(m1.lpNorm<Eigen::Infinity>() == 0.0);  // exact by the difference form
}

TEST_CASE("large regularization drives weights to 1/k") {
    const auto spec = ManifoldSpec::circle(1.0);
    const auto cloud = manifolds::sample_points(spec, 200, 5);
    const int k = 6;
    const auto model = fit_lle(cloud.points, k, 1e6);
    for (std::size_t p = 0; p < model.W.nnz(); ++p)
        CHECK(model.W.val[p] == doctest::Approx(1.0 / k).epsilon(1e-3));
}

TEST_CASE("translation invariance") {
    const auto spec = ManifoldSpec::toroidal_helix(2.0, 0.5, 10);
    const auto cloud = manifolds::sample_points(spec, 300, 7);
    const auto a = fit_lle(cloud.points, 8, 1e-3);
    PointMatrix shifted = cloud.points;
    shifted.rowwise() += Eigen::RowVector3d(11.0, -3.0, 0.5);
    const auto b = fit_lle(shifted, 8, 1e-3);
    for (std::size_t p = 0; p < a.W.nnz(); ++p) {
        CHECK(a.W.col[p] == b.W.col[p]);
        CHECK(std::abs(a.W.val[p] - b.W.val[p]) < 1e-10);
    }
}

TEST_CASE("uniform 1-D grid: M acts like half the second difference") {
    const int n = 60;
    const auto pts = uniform_grid_1d(n, 0.1);
    const auto model = fit_lle(pts, 2, 0.0);
    Vec f(n);
    for (int i = 0; i < n; ++i) f[i] = std::sin(0.3 * i);
    const Vec mf = model.apply_m(f);
    for (int i = 2; i < n - 2; ++i) {
        const double second_diff = f[i - 1] - 2.0 * f[i] + f[i + 1];
        CHECK(mf[i] == doctest::Approx(-0.5 * second_diff).epsilon(1e-9));
    }
}

TEST_CASE("M^T M is PSD with the constant vector in its kernel") {
    const auto spec = ManifoldSpec::toroidal_helix(2.0, 0.5, 10);
    const auto cloud = manifolds::sample_points(spec, 250, 9);
    const auto model = fit_lle(cloud.points, 8, 1e-3);
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        Vec f(250);
        for (int i = 0; i < 250; ++i) f[i] = rng.normal();
        CHECK(f.dot(model.apply_mtm(f)) >= -1e-10 * f.squaredNorm());
    }
    CHECK(model.apply_mtm(Vec::Ones(250)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("split M = A+ - A- into row-sum-zero generators") {
    const auto spec = ManifoldSpec::toroidal_helix(2.0, 0.5, 10);
    const auto cloud = manifolds::sample_points(spec, 200, 13);
    const auto model = fit_lle(cloud.points, 8, 1e-4);
    Rng rng(15);
    Vec f(200);
    for (int i = 0; i < 200; ++i) f[i] = rng.normal();
    const Vec recomposed = model.apply_a_plus(f) - model.apply_a_minus(f);
    const Vec mf = model.apply_m(f);
    CHECK((recomposed - mf).lpNorm<Eigen::Infinity>() < 1e-12);
    // Each split part kills constants.
    CHECK(model.apply_a_plus(Vec::Ones(200)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(model.apply_a_minus(Vec::Ones(200)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("degeneracy report: cancellation grows as regularization shrinks") {
    const auto spec = ManifoldSpec::toroidal_helix(2.0, 0.5, 10);
    const int n = 800;
    const auto cloud = manifolds::sample_points(spec, n, 17);
    const int k = 10;
    const auto g = graphs::build_knn_undirected_or(cloud.points, k);
    const auto scaling = laplacians::GeneratorScaling::from_knn(1, k, n);
    const laplacians::LaplacianMatrix rw(g, laplacians::LapKind::RandomWalk, scaling);
    std::vector<limits::TestFunction> fns = {limits::make_test_function("sin_theta", spec),
                                             limits::make_test_function("cos_theta", spec)};
    const auto strong = lle_degeneracy_report(fit_lle(cloud.points, k, 1e-3), cloud.points, rw,
                                              fns, cloud.chart);
    const auto weak = lle_degeneracy_report(fit_lle(cloud.points, k, 1e-6), cloud.points, rw, fns,
                                            cloud.chart);
    for (std::size_t i = 0; i < fns.size(); ++i) {
        CHECK(weak.entries[i].cancellation_ratio < strong.entries[i].cancellation_ratio);
    }
    const auto j = weak.to_json();
    CHECK(j.at("entries").size() == fns.size());
}

TEST_CASE("constant function: M f = 0 exactly") {
    const auto pts = uniform_grid_1d(40, 0.25);
    const auto model = fit_lle(pts, 3, 1e-3);
    CHECK(model.apply_m(Vec::Constant(40, -2.5)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("embedding") {
    const auto spec = ManifoldSpec::toroidal_helix(2.0, 0.5, 10);
    const int n = 600;
    const auto cloud = manifolds::sample_points(spec, n, 19);
    SUBCASE("output shape") {
        const auto model = fit_lle(cloud.points, 10, 1e-3);
        const Mat coords = embed_lle(model, 2);
        CHECK(coords.rows() == n);
        CHECK(coords.cols() == 2);
    }
    SUBCASE("flat grid: constant vector is the bottom eigenvector") {
        const auto pts = uniform_grid_1d(80, 0.5);
        const auto model = fit_lle(pts, 2, 1e-3);
        const Vec ones = Vec::Ones(80);
        CHECK(model.apply_mtm(ones).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

}  // TEST_SUITE

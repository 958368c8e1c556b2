#pragma once

#include "laplim/core.hpp"
#include "laplim/graphs.hpp"
#include "laplim/laplacians.hpp"
#include "laplim/limits.hpp"
#include "laplim/manifolds.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace laplim::validate {

/// Per-point one-step moment estimates of the graph random walk: with
/// P = D^{-1} W,
///   drift_hat_i   = c_n  sum_j P_ij (x_j - x_i)
///   diff_hat_i    = c_n [sum_j P_ij (x_j - x_i)(x_j - x_i)^T] - drift drift^T / c_n
///   degree_hat_i  = d_i / (n V_m h^m)
struct MomentEstimates {
    Mat drift_hat;               // n x b
    std::vector<Mat> diff_hat;   // n slices, b x b
    Vec degree_hat;
    double c_n = 0.0;
};

MomentEstimates empirical_moments(const graphs::SparseGraph& g, const PointMatrix& points,
                                  const laplacians::GeneratorScaling& scaling);

/// Moments mapped to tangent coordinates per point, with the normal-component
/// residuals kept as a curvature diagnostic.
struct TangentMoments {
    Mat drift;                   // n x m, H^T mu
    std::vector<Mat> diff;       // n slices, m x m, H^T Sigma H
    Vec diffusion_scale;         // trace(diff)/m
    Vec drift_normal_norm;       // ||(I - Pi) mu||
    Vec diff_normal_fraction;    // off-tangent mass of Sigma relative to its trace
};

TangentMoments project_to_tangent(const MomentEstimates& est, const manifolds::ManifoldSpec& spec,
                                  const PointMatrix& chart);

/// Indicator-kernel moments over a shifted, kinked, perturbed sphere:
/// support { s : ||s - v_c + sign(s.u) beta u|| < h + h^3 delta }, normalized
/// by 1/V_m. Monte-Carlo with standard errors; exact limits are
/// M0 = h^m, M1 = h^{m+2} v_c, M2 = h^{m+2}/(m+2) I (plus error terms).
struct SphereMoments {
    double m0 = 0.0, m0_se = 0.0;
    Vec m1, m1_se;
    Mat m2, m2_se;
};

SphereMoments sphere_moment_oracle(int m, double h, const Vec& shift, double kink_alpha,
                                   const Vec& kink_u, double delta, std::int64_t samples,
                                   std::uint64_t seed);

/// A single convergence-experiment cell: one (n, param, seed) run.
struct ConvergenceCell {
    int n = 0;
    double param = 0.0;  // r for r-neighborhood; k for kNN-family
    std::uint64_t seed = 0;
    int interior_count = 0;
    double drift_sup_err = 0.0;
    double drift_median_err = 0.0;
    double diffusion_median_err = 0.0;
    std::map<std::string, double> generator_sup_err;
    std::map<std::string, double> generator_median_err;
    bool regime_ok = true;
    double seconds = 0.0;
};

struct ConvergenceReport {
    std::string manifold;
    std::string construction;
    std::vector<ConvergenceCell> cells;
    /// Medians over seeds of the per-cell median errors, keyed by grid index.
    std::vector<double> drift_err_by_grid;
    std::vector<double> generator_err_by_grid;

    nlohmann::json to_json() const;
};

struct ConvergenceConfig {
    graphs::Construction construction = graphs::Construction::RNeighborhood;
    std::vector<std::pair<int, double>> grid;  // (n, param)
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> test_functions;
};

ConvergenceReport run_convergence(const manifolds::ManifoldSpec& spec,
                                  const ConvergenceConfig& config);

/// Interior mask: chart points whose distance to the chart boundary is at
/// least twice the construction's local bandwidth (2h for fixed-bandwidth
/// graphs, 2 rho_n(x_i) for kNN-family graphs). Closed manifolds are all
/// interior.
std::vector<int> interior_points(const manifolds::ManifoldSpec& spec, const PointMatrix& chart,
                                 const std::function<double(int)>& local_bandwidth);

struct DegreeCheck {
    Vec relative_error;       // per point vs the analytic degree limit
    double median_abs_error = 0.0;
    double coefficient_of_variation = 0.0;  // spread of scaled degrees
};

DegreeCheck degree_limit_check(const graphs::SparseGraph& g, const manifolds::ManifoldSpec& spec,
                               const PointMatrix& chart,
                               const laplacians::GeneratorScaling& scaling,
                               const limits::LimitOperator& limit);

/// Drift rescaled by its own empirical diffusion (the unit-diffusion time
/// change), comparable across constructions with different diffusion scales.
Mat diffusion_normalized_drift(const TangentMoments& tm);

}  // namespace laplim::validate

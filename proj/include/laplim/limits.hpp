#pragma once

#include "laplim/core.hpp"
#include "laplim/graphs.hpp"
#include "laplim/kernels.hpp"
#include "laplim/laplacians.hpp"
#include "laplim/manifolds.hpp"

#include <string>

namespace laplim::limits {

using ChartFunction = std::function<double(const Vec&)>;

/// Named chart test functions for convergence and degeneracy experiments.
struct TestFunction {
    std::string name;
    ChartFunction fn;
};

/// Registry lookup; names: coord0, coord1, sin_theta, cos_theta, sin_pi_rel0,
/// gauss_bump, quadratic0.
TestFunction make_test_function(const std::string& name, const manifolds::ManifoldSpec& spec);

/// Gradient of a chart function with respect to normal (arc-length)
/// coordinates, by 5-point central differences (relative step 1e-4).
Vec gradient_s(const manifolds::ManifoldSpec& spec, const ChartFunction& f, const Vec& chart);

/// Laplace-Beltrami of a chart function at a chart point, using the exact
/// 1-D arc-length parameterization (curved manifolds) or the flat metric.
double laplace_s(const manifolds::ManifoldSpec& spec, const ChartFunction& f, const Vec& chart);

/// Analytic limit of the scaled random-walk generator: drift mu_s and
/// diffusion scale r_x(x)^2 in normal coordinates, the degree limit, and the
/// weighted-operator density q when one exists.
struct LimitOperator {
    int m = 1;
    std::function<Vec(const Vec&)> drift;          // mu_s(x)
    std::function<double(const Vec&)> diffusion;   // r_x(x)^2
    std::function<double(const Vec&)> degree_fn;   // C' r^m w p
    std::function<double(const Vec&)> q;           // weighted LB density (may be null)
    std::function<double(const Vec&)> prefactor;   // scalar in A = prefactor * Delta_q (may be null)

    /// Generator action A f = (1/2) diffusion * Laplace_s f + drift . grad_s f.
    double apply(const manifolds::ManifoldSpec& spec, const ChartFunction& f, const Vec& chart) const;
};

/// Theorem-level drift/diffusion from analytic bandwidth and weight fields:
/// mu_s = r^2 (grad p / p + grad w / w + (m+2) r_dot / r), sigma sigma^T = r^2 I.
LimitOperator limit_from_fields(const kernels::BandwidthField& bw, const kernels::WeightField& wt,
                                const manifolds::ManifoldSpec& spec, double c_prime = 1.0);

/// Closed-form catalogue for the shipped graph constructions. kNN-family
/// operators carry the constant c = V_m^{-1/m} from rho_n / h_n -> c p^{-1/m}.
LimitOperator catalog_limit(graphs::Construction construction, const manifolds::ManifoldSpec& spec);

/// Weighted Laplace-Beltrami applied to f at a chart point:
/// Delta_q f = Laplace f + (grad q / q) . grad f (unit diffusion; the sign
/// convention under which <f, Delta_q f>_{L2(q)} = -||grad f||^2_{L2(q)}).
double apply_weighted_LB(const manifolds::ManifoldSpec& spec, const manifolds::ScalarField& q,
                         const ChartFunction& f, const Vec& chart);

/// Quadrature of integrand(chart) * density-free volume element over the
/// manifold (trapezoid on periodic charts, Simpson otherwise).
double integrate_on_manifold(const manifolds::ManifoldSpec& spec,
                             const std::function<double(const Vec&)>& integrand, int n_quad = 0);

/// Smoothness functional ||grad f||^2_{L2(q)} by quadrature.
double smoothness_functional(const manifolds::ManifoldSpec& spec, const manifolds::ScalarField& q,
                             const ChartFunction& f, int n_quad = 0);

/// Discrete analogue of the smoothness functional from the unnormalized
/// Laplacian: (2 / (n^2 V_m C')) f^T (c_n' L_u) f, which estimates
/// ||grad f||^2_{L2(q)} for q = p^2 omega gamma^{m+2}.
double discrete_smoothness(const laplacians::LaplacianMatrix& unnormalized, const Vec& f_values,
                           double c_prime_constant);

}  // namespace laplim::limits

#pragma once

#include "laplim/core.hpp"
#include "laplim/manifolds.hpp"

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace laplim::kernels {

/// Base kernel K0 of bounded variation with compact support, represented by
/// its level-set decomposition K0(u) = ∫ 1(u < z) dη(z).
class BaseKernel {
public:
    enum class Kind { Indicator, TruncatedGaussian, StepSum };

    /// An atom of the level measure η: `mass` at radius `radius`.
    struct LevelAtom {
        double mass;
        double radius;
    };

    static BaseKernel indicator();
    /// exp(-u^2) for u < cutoff, 0 beyond.
    static BaseKernel truncated_gaussian(double cutoff);
    /// Sum of indicator steps: K0(u) = Σ height_i · 1(u < radius_i).
    static BaseKernel step_sum(std::vector<std::pair<double, double>> height_radius);

    Kind kind() const { return kind_; }
    double support_radius() const { return support_; }
    double cutoff() const { return cutoff_; }

    double eval(double u) const;

    /// Discrete atoms of the level decomposition. Exact for indicator and
    /// step_sum; a 256-level staircase for the truncated Gaussian, whose
    /// reconstruction error is bounded by staircase_resolution().
    const std::vector<LevelAtom>& level_decomposition() const { return levels_; }
    double eval_from_levels(double u) const;
    /// Sup-norm bound on |eval - eval_from_levels|.
    double staircase_resolution() const;

    nlohmann::json to_json() const;
    static BaseKernel from_json(const nlohmann::json& j);

private:
    Kind kind_ = Kind::Indicator;
    double support_ = 1.0;
    double cutoff_ = 3.0;                              // TruncatedGaussian only
    std::vector<std::pair<double, double>> steps_;     // StepSum only
    std::vector<LevelAtom> levels_;
};

/// Moment constants of the level measure: C = ∫ u^{m+2} dη, C' = ∫ u^m dη,
/// Z = (m+2) C'/C. These drive the generator scaling c_n = Z / h^2.
struct KernelConstants {
    double C;
    double Cprime;
    double Z;

    double c_n(double h) const { return Z / (h * h); }
    double c_n_prime(double h, int m) const { return c_n(h) / std::pow(h, m); }
};

/// Exact for indicator/step_sum; adaptive quadrature (abs tol 1e-10) of the
/// continuous level density for the truncated Gaussian.
KernelConstants base_kernel_constants(const BaseKernel& base, int m);

/// Location-dependent bandwidth field r_x(y) together with its diagonal
/// r_x(x) and the tangent-coordinate gradient r_dot(x). The ambient-pair form
/// may be absent for fields only defined through chart data.
struct BandwidthField {
    std::string name = "constant";
    bool symmetric = true;
    std::function<double(const Vec& x, const Vec& y)> value;  // r_x(y), ambient
    std::function<double(const Vec& chart)> diag;             // r_x(x)
    std::function<Vec(const Vec& chart)> diag_grad;           // r_dot(x), normal coords

    static BandwidthField constant(double r, int m);
    /// Product field sqrt(v(x) v(y)) from per-sample values; off-sample
    /// ambient evaluation uses the nearest sample.
    static BandwidthField from_samples(std::shared_ptr<const manifolds::PointCloud> cloud,
                                       Vec per_sample_values, std::string name);
};

/// Weight field w_x(y) with diagonal and gradient, mirroring BandwidthField.
struct WeightField {
    std::string name = "constant";
    bool symmetric = true;
    std::function<double(const Vec& x, const Vec& y)> value;
    std::function<double(const Vec& chart)> diag;   // w_x(x)
    std::function<Vec(const Vec& chart)> diag_grad; // grad w_x(x), normal coords

    static WeightField constant(double w, int m);
    static WeightField from_samples(std::shared_ptr<const manifolds::PointCloud> cloud,
                                    Vec per_sample_values, std::string name);
};

/// The generalized kernel K(x,y) = w_x(y) K0(||y-x|| / (h r_x(y))).
struct KernelSpec {
    BaseKernel base;
    BandwidthField bandwidth;
    WeightField weight;
    double h = 1.0;

    /// Upper bound on r over the data, used to bound neighbor searches.
    double bandwidth_upper_bound = 1.0;

    nlohmann::json to_json() const;
};

double eval_kernel(const KernelSpec& spec, const Vec& x, const Vec& y);

/// Bandwidth/weight designer: given target functions q (weighted-operator
/// density) and g (degree limit), returns the symmetric fields
///   gamma = sqrt(q/(p g)),  r_x(y) = sqrt(gamma(x) gamma(y)),
///   omega = (p g / q)^{m/2} g / p,  w_x(y) = sqrt(omega(x) omega(y)),
/// so that p^2 omega gamma^{m+2} = q and p omega gamma^m = g.
std::pair<BandwidthField, WeightField> design_bandwidth_weight(const manifolds::ScalarField& p,
                                                               const manifolds::ScalarField& q,
                                                               const manifolds::ScalarField& g,
                                                               int m);

/// Validates positivity of p, q, g on a grid over the chart box; throws
/// DataError on violation.
void validate_design_inputs(const manifolds::ScalarField& p, const manifolds::ScalarField& q,
                            const manifolds::ScalarField& g, const Vec& lo, const Vec& hi,
                            int grid_points);

}  // namespace laplim::kernels

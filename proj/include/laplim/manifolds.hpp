#pragma once

#include "laplim/core.hpp"

#include <optional>
#include <string>

#include <json.hpp>

namespace laplim::manifolds {

/// A scalar field on a chart together with its gradient taken with respect
/// to normal (arc-length) coordinates. Gradients are supplied analytically.
struct ScalarField {
    std::string name;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;  // d/ds, normal coordinates

    static ScalarField constant(double c, int m);
};

enum class ManifoldKind { Circle, ToroidalHelix, GaussSheet, FlatInterval };
enum class DensityKind { Uniform, TruncatedNormal, CosineBump };

/// Sampling density in chart coordinates, taken with respect to the manifold
/// volume element. TruncatedNormal: centered product normal truncated to the
/// chart box. CosineBump: p ∝ 1 + amplitude·cos(θ) (circle / helix charts).
struct DensityModel {
    DensityKind kind = DensityKind::Uniform;
    double sigma = 1.0;      // TruncatedNormal
    double amplitude = 0.5;  // CosineBump, must be in (-1, 1)

    static DensityModel uniform() { return {}; }
    static DensityModel truncated_normal(double sigma) {
        return {DensityKind::TruncatedNormal, sigma, 0.0};
    }
    static DensityModel cosine_bump(double amplitude) {
        return {DensityKind::CosineBump, 1.0, amplitude};
    }
};

/// Analytic synthetic manifold: embedding, tangent machinery, and a sampling
/// density whose log-gradient is known in closed form. Immutable after
/// construction; safe to share across threads.
class ManifoldSpec {
public:
    static ManifoldSpec circle(double radius, DensityModel density = DensityModel::uniform());
    static ManifoldSpec toroidal_helix(double big_radius, double small_radius, int windings,
                                       DensityModel density = DensityModel::uniform());
    /// Flat 2-D sheet [-bound, bound]^2 x {0} in R^3, truncated standard
    /// normal product density by default.
    static ManifoldSpec gauss_sheet(double bound);
    static ManifoldSpec flat_interval(double length, DensityModel density = DensityModel::uniform());

    ManifoldKind kind() const { return kind_; }
    int intrinsic_dim() const { return m_; }
    int ambient_dim() const { return b_; }

    Vec embed(const Vec& chart) const;
    Mat jacobian(const Vec& chart) const;  // b x m, full rank on the chart
    /// sqrt(det g): the chart-coordinate volume element.
    double volume_element(const Vec& chart) const;
    /// Speed |d embed / dt| for 1-D manifolds.
    double speed(double t) const;

    double density(const Vec& chart) const;
    /// d log p / ds in normal coordinates.
    Vec grad_log_density(const Vec& chart) const;
    ScalarField density_field() const;

    Vec chart_lower() const { return lo_; }
    Vec chart_upper() const { return hi_; }
    bool periodic() const { return periodic_; }
    /// Fixed per-manifold chart radius (h0): farthest chart separation for
    /// which normal coordinates are taken as valid.
    double chart_radius() const { return chart_radius_; }
    /// Known bound on the norm of the second fundamental form.
    double curvature_bound() const { return curvature_bound_; }
    /// Chart-space distance respecting periodic wrap-around.
    double chart_distance(const Vec& a, const Vec& b) const;
    /// Distance from a chart point to the chart boundary (infinity when the
    /// manifold is closed).
    double boundary_distance(const Vec& chart) const;
    /// Inverse of the embedding where a closed form exists.
    std::optional<Vec> chart_from_ambient(const Vec& x) const;

    const DensityModel& density_model() const { return density_; }
    std::string name() const;
    nlohmann::json to_json() const;
    static ManifoldSpec from_json(const nlohmann::json& j);

private:
    ManifoldSpec() = default;
    void finalize();  // normalizes the density and validates it

    ManifoldKind kind_ = ManifoldKind::FlatInterval;
    DensityModel density_;
    int m_ = 1, b_ = 2;
    double radius_ = 1.0;            // circle
    double helix_R_ = 2.0, helix_r_ = 0.5;
    int helix_windings_ = 10;
    double bound_ = 2.5;             // gauss_sheet
    double length_ = 1.0;            // flat_interval
    Vec lo_, hi_;
    bool periodic_ = false;
    double chart_radius_ = 0.0;
    double curvature_bound_ = 0.0;
    double density_norm_ = 1.0;      // normalizing constant for p * volume element
    double helix_arc_length_ = 0.0;
};

/// n sample points: extrinsic coordinates plus the chart coordinates they
/// came from (retained for validation).
struct PointCloud {
    PointMatrix points;  // n x b
    PointMatrix chart;   // n x m
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(points.rows()); }
};

/// Orthonormal tangent basis at a point; projector() = H H^T.
struct TangentFrame {
    Vec x;  // base point, extrinsic
    Mat H;  // b x m, orthonormal columns

    Mat projector() const { return H * H.transpose(); }
};

/// i.i.d. draws from the spec density via rejection sampling in chart
/// coordinates. Deterministic given the seed. max_attempts caps the total
/// number of proposals; exceeding it signals a misconfigured density.
PointCloud sample_points(const ManifoldSpec& spec, int n, std::uint64_t seed,
                         std::uint64_t max_attempts = 0);

TangentFrame tangent_frame(const ManifoldSpec& spec, const Vec& chart_point);

/// Tangent-space log-map approximation: the chord y-x expressed in the
/// H-basis direction of its tangent projection, rescaled to chord length, so
/// that ||y-x - H s|| = O(||s||^2). Throws DataError beyond the chart radius.
Vec normal_displacement(const ManifoldSpec& spec, const Vec& x_chart, const Vec& y_chart);

}  // namespace laplim::manifolds

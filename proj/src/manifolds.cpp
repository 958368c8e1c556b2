#include "laplim/manifolds.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace laplim::manifolds {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }
double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double wrap_angle(double a) {
    a = std::fmod(a + M_PI, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a - M_PI;
}

}  // namespace

ScalarField ScalarField::constant(double c, int m) {
    ScalarField f;
    f.name = "constant";
    f.value = [c](const Vec&) { return c; };
    f.grad = [m](const Vec&) { return Vec::Zero(m); };
    return f;
}

ManifoldSpec ManifoldSpec::circle(double radius, DensityModel density) {
    if (radius <= 0) throw std::invalid_argument("circle: radius must be positive");
    ManifoldSpec s;
    s.kind_ = ManifoldKind::Circle;
    s.density_ = density;
    s.m_ = 1;
    s.b_ = 2;
    s.radius_ = radius;
    s.lo_ = Vec::Constant(1, -M_PI);
    s.hi_ = Vec::Constant(1, M_PI);
    s.periodic_ = true;
    s.chart_radius_ = M_PI / 2.0;
    s.curvature_bound_ = 1.0 / radius;
    s.finalize();
    return s;
}

ManifoldSpec ManifoldSpec::toroidal_helix(double big_radius, double small_radius, int windings,
                                          DensityModel density) {
    if (big_radius <= small_radius || small_radius <= 0 || windings < 2)
        throw std::invalid_argument("toroidal_helix: need R > r > 0 and windings >= 2");
    ManifoldSpec s;
    s.kind_ = ManifoldKind::ToroidalHelix;
    s.density_ = density;
    s.m_ = 1;
    s.b_ = 3;
    s.helix_R_ = big_radius;
    s.helix_r_ = small_radius;
    s.helix_windings_ = windings;
    s.lo_ = Vec::Constant(1, -M_PI);
    s.hi_ = Vec::Constant(1, M_PI);
    s.periodic_ = true;
    s.chart_radius_ = M_PI / windings;  // half the winding pitch
    s.finalize();
    return s;
}

ManifoldSpec ManifoldSpec::gauss_sheet(double bound) {
    if (bound <= 0) throw std::invalid_argument("gauss_sheet: bound must be positive");
    ManifoldSpec s;
    s.kind_ = ManifoldKind::GaussSheet;
    s.density_ = DensityModel::truncated_normal(1.0);
    s.m_ = 2;
    s.b_ = 3;
    s.bound_ = bound;
    s.lo_ = Vec::Constant(2, -bound);
    s.hi_ = Vec::Constant(2, bound);
    s.periodic_ = false;
    s.chart_radius_ = 2.0 * std::sqrt(2.0) * bound;  // full domain
    s.curvature_bound_ = 0.0;
    s.finalize();
    return s;
}

ManifoldSpec ManifoldSpec::flat_interval(double length, DensityModel density) {
    if (length <= 0) throw std::invalid_argument("flat_interval: length must be positive");
    ManifoldSpec s;
    s.kind_ = ManifoldKind::FlatInterval;
    s.density_ = density;
    s.m_ = 1;
    s.b_ = 2;
    s.length_ = length;
    s.lo_ = Vec::Constant(1, 0.0);
    s.hi_ = Vec::Constant(1, length);
    s.periodic_ = false;
    s.chart_radius_ = length;  // full domain
    s.curvature_bound_ = 0.0;
    s.finalize();
    return s;
}

Vec ManifoldSpec::embed(const Vec& chart) const {
    switch (kind_) {
        case ManifoldKind::Circle: {
            Vec y(2);
            y << radius_ * std::cos(chart[0]), radius_ * std::sin(chart[0]);
            return y;
        }
        case ManifoldKind::ToroidalHelix: {
            const double t = chart[0];
            const double rho = helix_R_ + helix_r_ * std::cos(helix_windings_ * t);
            Vec y(3);
            y << rho * std::cos(t), rho * std::sin(t), helix_r_ * std::sin(helix_windings_ * t);
            return y;
        }
        case ManifoldKind::GaussSheet: {
            Vec y(3);
            y << chart[0], chart[1], 0.0;
            return y;
        }
        case ManifoldKind::FlatInterval: {
            Vec y(2);
            y << chart[0], 0.0;
            return y;
        }
    }
    throw std::logic_error("unreachable");
}

Mat ManifoldSpec::jacobian(const Vec& chart) const {
    switch (kind_) {
        case ManifoldKind::Circle: {
            Mat j(2, 1);
            j << -radius_ * std::sin(chart[0]), radius_ * std::cos(chart[0]);
            return j;
        }
        case ManifoldKind::ToroidalHelix: {
            const double t = chart[0];
            const int nw = helix_windings_;
            const double rho = helix_R_ + helix_r_ * std::cos(nw * t);
            const double drho = -helix_r_ * nw * std::sin(nw * t);
            Mat j(3, 1);
            j << drho * std::cos(t) - rho * std::sin(t), drho * std::sin(t) + rho * std::cos(t),
                helix_r_ * nw * std::cos(nw * t);
            return j;
        }
        case ManifoldKind::GaussSheet: {
            Mat j = Mat::Zero(3, 2);
            j(0, 0) = 1.0;
            j(1, 1) = 1.0;
            return j;
        }
        case ManifoldKind::FlatInterval: {
            Mat j(2, 1);
            j << 1.0, 0.0;
            return j;
        }
    }
    throw std::logic_error("unreachable");
}

double ManifoldSpec::speed(double t) const {
    if (m_ != 1) throw std::logic_error("speed: 1-D manifolds only");
    Vec c(1);
    c << t;
    return jacobian(c).col(0).norm();
}

double ManifoldSpec::volume_element(const Vec& chart) const {
    switch (kind_) {
        case ManifoldKind::Circle:
            return radius_;
        case ManifoldKind::ToroidalHelix:
            return speed(chart[0]);
        case ManifoldKind::GaussSheet:
        case ManifoldKind::FlatInterval:
            return 1.0;
    }
    throw std::logic_error("unreachable");
}

double ManifoldSpec::density(const Vec& chart) const {
    switch (density_.kind) {
        case DensityKind::Uniform:
            return 1.0 / density_norm_;
        case DensityKind::TruncatedNormal: {
            const double s = density_.sigma;
            double v = 1.0;
            for (int d = 0; d < m_; ++d) {
                const double c = 0.5 * (lo_[d] + hi_[d]);
                v *= std_normal_pdf((chart[d] - c) / s);
            }
            return v / density_norm_;
        }
        case DensityKind::CosineBump:
            return (1.0 + density_.amplitude * std::cos(chart[0])) / density_norm_;
    }
    throw std::logic_error("unreachable");
}

Vec ManifoldSpec::grad_log_density(const Vec& chart) const {
    Vec g = Vec::Zero(m_);
    switch (density_.kind) {
        case DensityKind::Uniform:
            return g;
        case DensityKind::TruncatedNormal: {
            const double s2 = sq(density_.sigma);
            for (int d = 0; d < m_; ++d) {
                const double c = 0.5 * (lo_[d] + hi_[d]);
                g[d] = -(chart[d] - c) / s2;
            }
            return g;  // chart coordinates are arc length on flat manifolds
        }
        case DensityKind::CosineBump: {
            const double a = density_.amplitude;
            const double dtheta = -a * std::sin(chart[0]) / (1.0 + a * std::cos(chart[0]));
            g[0] = dtheta / volume_element(chart);  // d/ds = (1/speed) d/dtheta
            return g;
        }
    }
    throw std::logic_error("unreachable");
}

ScalarField ManifoldSpec::density_field() const {
    ScalarField f;
    f.name = "density";
    const ManifoldSpec spec = *this;
    f.value = [spec](const Vec& c) { return spec.density(c); };
    f.grad = [spec](const Vec& c) { return Vec(spec.density(c) * spec.grad_log_density(c)); };
    return f;
}

double ManifoldSpec::chart_distance(const Vec& a, const Vec& b) const {
    if (periodic_) return std::abs(wrap_angle(a[0] - b[0]));
    return (a - b).norm();
}

double ManifoldSpec::boundary_distance(const Vec& chart) const {
    if (periodic_) return std::numeric_limits<double>::infinity();
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m_; ++i)
        d = std::min({d, chart[i] - lo_[i], hi_[i] - chart[i]});
    return d;
}

std::optional<Vec> ManifoldSpec::chart_from_ambient(const Vec& x) const {
    switch (kind_) {
        case ManifoldKind::Circle: {
            Vec c(1);
            c << std::atan2(x[1], x[0]);
            return c;
        }
        case ManifoldKind::GaussSheet: {
            Vec c(2);
            c << x[0], x[1];
            return c;
        }
        case ManifoldKind::FlatInterval: {
            Vec c(1);
            c << x[0];
            return c;
        }
        case ManifoldKind::ToroidalHelix:
            return std::nullopt;  // no closed-form inverse
    }
    throw std::logic_error("unreachable");
}

void ManifoldSpec::finalize() {
    if (density_.kind == DensityKind::CosineBump &&
        (density_.amplitude <= -1.0 || density_.amplitude >= 1.0))
        throw std::invalid_argument("cosine_bump amplitude must lie in (-1, 1)");
    if (density_.kind == DensityKind::TruncatedNormal && density_.sigma <= 0)
        throw std::invalid_argument("truncated_normal sigma must be positive");
    if (density_.kind == DensityKind::TruncatedNormal && periodic_)
        throw std::invalid_argument("truncated_normal density requires a chart with boundary");
    if (density_.kind == DensityKind::CosineBump && !periodic_)
        throw std::invalid_argument("cosine_bump density requires an angular chart");

    // Normalizing constant of p relative to the volume element.
    switch (density_.kind) {
        case DensityKind::Uniform: {
            if (m_ == 1) {
                density_norm_ = adaptive_simpson(
                    [this](double t) {
                        Vec c(1);
                        c << t;
                        return volume_element(c);
                    },
                    lo_[0], hi_[0], 1e-12);
            } else {
                density_norm_ = (hi_ - lo_).prod();
            }
            break;
        }
        case DensityKind::TruncatedNormal: {
            const double s = density_.sigma;
            double v = 1.0;
            for (int d = 0; d < m_; ++d) {
                const double half = 0.5 * (hi_[d] - lo_[d]);
                v *= s * (std_normal_cdf(half / s) - std_normal_cdf(-half / s));
            }
            density_norm_ = v;
            break;
        }
        case DensityKind::CosineBump: {
            density_norm_ = adaptive_simpson(
                [this](double t) {
                    Vec c(1);
                    c << t;
                    return (1.0 + density_.amplitude * std::cos(t)) * volume_element(c);
                },
                lo_[0], hi_[0], 1e-12);
            break;
        }
    }

    if (kind_ == ManifoldKind::ToroidalHelix) {
        helix_arc_length_ = adaptive_simpson([this](double t) { return speed(t); }, -M_PI, M_PI, 1e-12);
        double max_curv = 0.0;
        const int grid = 4096;
        for (int i = 0; i < grid; ++i) {
            const double t = -M_PI + kTwoPi * i / grid;
            const int nw = helix_windings_;
            const double rho = helix_R_ + helix_r_ * std::cos(nw * t);
            const double drho = -helix_r_ * nw * std::sin(nw * t);
            const double ddrho = -helix_r_ * nw * nw * std::cos(nw * t);
            Eigen::Vector3d g1(drho * std::cos(t) - rho * std::sin(t),
                               drho * std::sin(t) + rho * std::cos(t),
                               helix_r_ * nw * std::cos(nw * t));
            Eigen::Vector3d g2(ddrho * std::cos(t) - 2.0 * drho * std::sin(t) - rho * std::cos(t),
                               ddrho * std::sin(t) + 2.0 * drho * std::cos(t) - rho * std::sin(t),
                               -helix_r_ * nw * nw * std::sin(nw * t));
            max_curv = std::max(max_curv, g1.cross(g2).norm() / std::pow(g1.norm(), 3));
        }
        curvature_bound_ = 1.05 * max_curv;
    }

    // Validate that density * volume element integrates to 1.
    double total;
    if (m_ == 1) {
        total = adaptive_simpson(
            [this](double t) {
                Vec c(1);
                c << t;
                return density(c) * volume_element(c);
            },
            lo_[0], hi_[0], 1e-8);
    } else {
        total = adaptive_simpson(
            [this](double u) {
                return adaptive_simpson(
                    [this, u](double v) {
                        Vec c(2);
                        c << u, v;
                        return density(c) * volume_element(c);
                    },
                    lo_[1], hi_[1], 1e-9);
            },
            lo_[0], hi_[0], 1e-7);
    }
    if (std::abs(total - 1.0) > 1e-4)
        throw DataError("manifold density does not integrate to 1 (got " + std::to_string(total) + ")");
}

std::string ManifoldSpec::name() const {
    switch (kind_) {
        case ManifoldKind::Circle:
            return "circle";
        case ManifoldKind::ToroidalHelix:
            return "toroidal_helix";
        case ManifoldKind::GaussSheet:
            return "gauss_sheet";
        case ManifoldKind::FlatInterval:
            return "flat_interval";
    }
    throw std::logic_error("unreachable");
}

nlohmann::json ManifoldSpec::to_json() const {
    nlohmann::json d;
    switch (density_.kind) {
        case DensityKind::Uniform:
            d = {{"kind", "uniform"}};
            break;
        case DensityKind::TruncatedNormal:
            d = {{"kind", "truncated_normal"}, {"sigma", density_.sigma}};
            break;
        case DensityKind::CosineBump:
            d = {{"kind", "cosine_bump"}, {"amplitude", density_.amplitude}};
            break;
    }
    nlohmann::json j{{"kind", name()}, {"density", d}};
    switch (kind_) {
        case ManifoldKind::Circle:
            j["radius"] = radius_;
            break;
        case ManifoldKind::ToroidalHelix:
            j["big_radius"] = helix_R_;
            j["small_radius"] = helix_r_;
            j["windings"] = helix_windings_;
            break;
        case ManifoldKind::GaussSheet:
            j["bound"] = bound_;
            break;
        case ManifoldKind::FlatInterval:
            j["length"] = length_;
            break;
    }
    return j;
}

ManifoldSpec ManifoldSpec::from_json(const nlohmann::json& j) {
    DensityModel d;
    if (j.contains("density")) {
        const auto& jd = j.at("density");
        const std::string dk = jd.at("kind").get<std::string>();
        if (dk == "uniform")
            d = DensityModel::uniform();
        else if (dk == "truncated_normal")
            d = DensityModel::truncated_normal(jd.at("sigma").get<double>());
        else if (dk == "cosine_bump")
            d = DensityModel::cosine_bump(jd.at("amplitude").get<double>());
        else
            throw DataError("unknown density kind: " + dk);
    }
    const std::string k = j.at("kind").get<std::string>();
    if (k == "circle") return circle(j.at("radius").get<double>(), d);
    if (k == "toroidal_helix")
        return toroidal_helix(j.at("big_radius").get<double>(), j.at("small_radius").get<double>(),
                              j.at("windings").get<int>(), d);
    if (k == "gauss_sheet") return gauss_sheet(j.at("bound").get<double>());
    if (k == "flat_interval") return flat_interval(j.at("length").get<double>(), d);
    throw DataError("unknown manifold kind: " + k);
}

PointCloud sample_points(const ManifoldSpec& spec, int n, std::uint64_t seed,
                         std::uint64_t max_attempts) {
    if (n < 1) throw std::invalid_argument("sample_points: n must be >= 1");
    const int m = spec.intrinsic_dim();
    const Vec lo = spec.chart_lower();
    const Vec hi = spec.chart_upper();

    // Upper bound for p * volume element over the chart: grid scan with a
    // safety factor (the shipped densities are smooth, the grid is fine).
    double bound = 0.0;
    const int grid = (m == 1) ? 4096 : 256;
    Vec c(m);
    if (m == 1) {
        for (int i = 0; i <= grid; ++i) {
            c[0] = lo[0] + (hi[0] - lo[0]) * i / grid;
            bound = std::max(bound, spec.density(c) * spec.volume_element(c));
        }
    } else {
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j) {
                c[0] = lo[0] + (hi[0] - lo[0]) * i / grid;
                c[1] = lo[1] + (hi[1] - lo[1]) * j / grid;
                bound = std::max(bound, spec.density(c) * spec.volume_element(c));
            }
    }
    bound *= 1.2;

    if (max_attempts == 0)
        max_attempts = std::max<std::uint64_t>(1000000, 1000ULL * static_cast<std::uint64_t>(n));

    PointCloud cloud;
    cloud.seed = seed;
    cloud.chart.resize(n, m);
    cloud.points.resize(n, spec.ambient_dim());
    Rng rng(seed);
    std::uint64_t attempts = 0;
    for (int i = 0; i < n; ++i) {
        for (;;) {
            if (++attempts > max_attempts)
                throw NumericError("rejection sampler exceeded retry cap; density misconfigured?");
            for (int d = 0; d < m; ++d) c[d] = rng.uniform(lo[d], hi[d]);
            const double u = rng.uniform();
            if (u * bound < spec.density(c) * spec.volume_element(c)) break;
        }
        cloud.chart.row(i) = c.transpose();
        cloud.points.row(i) = spec.embed(c).transpose();
    }
    return cloud;
}

TangentFrame tangent_frame(const ManifoldSpec& spec, const Vec& chart_point) {
    const Mat j = spec.jacobian(chart_point);
    const int m = spec.intrinsic_dim();
    TangentFrame frame;
    frame.x = spec.embed(chart_point);
    if (m == 1) {
        const double nrm = j.col(0).norm();
        if (nrm < 1e-14) throw DataError("tangent_frame: rank-deficient Jacobian");
        frame.H = j / nrm;
        return frame;
    }
    Eigen::HouseholderQR<Mat> qr(j);
    Mat q = qr.householderQ() * Mat::Identity(j.rows(), m);
    const Mat r = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
    for (int c = 0; c < m; ++c) {
        if (std::abs(r(c, c)) < 1e-12) throw DataError("tangent_frame: rank-deficient Jacobian");
        if (r(c, c) < 0) q.col(c) *= -1.0;  // deterministic orientation
    }
    frame.H = q;
    return frame;
}

Vec normal_displacement(const ManifoldSpec& spec, const Vec& x_chart, const Vec& y_chart) {
    if (spec.chart_distance(x_chart, y_chart) > spec.chart_radius())
        throw DataError("normal_displacement: point beyond chart radius");
    const Vec d = spec.embed(y_chart) - spec.embed(x_chart);
    const double dn = d.norm();
    if (dn == 0.0) return Vec::Zero(spec.intrinsic_dim());
    const TangentFrame frame = tangent_frame(spec, x_chart);
    Vec t = frame.H.transpose() * d;
    const double tn = t.norm();
    if (tn < 1e-14 * dn)
        throw DataError("normal_displacement: displacement orthogonal to tangent plane");
    return t * (dn / tn);
}

}  // namespace laplim::manifolds

#include "laplim/limits.hpp"

#include <cmath>

namespace laplim::limits {

using manifolds::ManifoldKind;
using manifolds::ManifoldSpec;

namespace {

double fd_step(double t) { return 1e-4 * std::max(1.0, std::abs(t)); }

double deriv1(const std::function<double(double)>& f, double t) {
    const double h = fd_step(t);
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}

double deriv2(const std::function<double(double)>& f, double t) {
    const double h = fd_step(t);
    return (-f(t + 2 * h) + 16 * f(t + h) - 30 * f(t) + 16 * f(t - h) - f(t - 2 * h)) /
           (12 * h * h);
}

std::function<double(double)> slice(const ChartFunction& f, const Vec& chart, int axis) {
    return [&f, chart, axis](double t) {
        Vec c = chart;
        c[axis] = t;
        return f(c);
    };
}

}  // namespace

TestFunction make_test_function(const std::string& name, const ManifoldSpec& spec) {
    const Vec lo = spec.chart_lower();
    const Vec hi = spec.chart_upper();
    if (name == "coord0") return {name, [](const Vec& c) { return c[0]; }};
    if (name == "coord1") {
        if (spec.intrinsic_dim() < 2) throw DataError("coord1 needs a 2-D chart");
        return {name, [](const Vec& c) { return c[1]; }};
    }
    if (name == "sin_theta") return {name, [](const Vec& c) { return std::sin(c[0]); }};
    if (name == "cos_theta") return {name, [](const Vec& c) { return std::cos(c[0]); }};
    if (name == "sin_pi_rel0") {
        const double a = lo[0], w = hi[0] - lo[0];
        return {name, [a, w](const Vec& c) { return std::sin(M_PI * (c[0] - a) / w); }};
    }
    if (name == "gauss_bump") return {name, [](const Vec& c) { return std::exp(-0.5 * c.squaredNorm()); }};
    if (name == "quadratic0") return {name, [](const Vec& c) { return c[0] * c[0]; }};
    throw DataError("unknown test function: " + name);
}

Vec gradient_s(const ManifoldSpec& spec, const ChartFunction& f, const Vec& chart) {
    const int m = spec.intrinsic_dim();
    Vec g(m);
    for (int d = 0; d < m; ++d) g[d] = deriv1(slice(f, chart, d), chart[d]);
    if (m == 1) g[0] /= spec.volume_element(chart);  // d/ds = (1/speed) d/dt
    return g;
}

double laplace_s(const ManifoldSpec& spec, const ChartFunction& f, const Vec& chart) {
    const int m = spec.intrinsic_dim();
    if (m == 1) {
        const double t = chart[0];
        const double v = spec.volume_element(chart);
        const auto f1 = slice(f, chart, 0);
        const double fp = deriv1(f1, t);
        const double fpp = deriv2(f1, t);
        double vp = 0.0;
        if (spec.kind() == ManifoldKind::ToroidalHelix)
            vp = deriv1([&spec](double s) { return spec.speed(s); }, t);
        return fpp / (v * v) - vp * fp / (v * v * v);
    }
    // Flat 2-D sheets: chart coordinates are normal coordinates.
    double lap = 0.0;
    for (int d = 0; d < m; ++d) lap += deriv2(slice(f, chart, d), chart[d]);
    return lap;
}

double LimitOperator::apply(const ManifoldSpec& spec, const ChartFunction& f,
                            const Vec& chart) const {
    const Vec g = gradient_s(spec, f, chart);
    const double lap = laplace_s(spec, f, chart);
    return 0.5 * diffusion(chart) * lap + drift(chart).dot(g);
}

LimitOperator limit_from_fields(const kernels::BandwidthField& bw, const kernels::WeightField& wt,
                                const ManifoldSpec& spec, double c_prime) {
    if (!bw.diag || !bw.diag_grad || !wt.diag || !wt.diag_grad)
        throw std::invalid_argument("limit_from_fields: fields must supply diagonals and gradients");
    const int m = spec.intrinsic_dim();
    LimitOperator op;
    op.m = m;
    op.drift = [bw, wt, spec, m](const Vec& c) {
        const double r = bw.diag(c);
        const double w = wt.diag(c);
        const Vec glp = spec.grad_log_density(c);
        const Vec gw = wt.diag_grad(c);
        const Vec rd = bw.diag_grad(c);
        return Vec(r * r * (glp + gw / w + (m + 2) * rd / r));
    };
    op.diffusion = [bw](const Vec& c) { return sq(bw.diag(c)); };
    op.degree_fn = [bw, wt, spec, m, c_prime](const Vec& c) {
        return c_prime * std::pow(bw.diag(c), m) * wt.diag(c) * spec.density(c);
    };
    if (bw.symmetric && wt.symmetric) {
        op.q = [bw, wt, spec, m](const Vec& c) {
            return sq(spec.density(c)) * wt.diag(c) * std::pow(bw.diag(c), m + 2);
        };
        op.prefactor = [bw](const Vec& c) { return 0.5 * sq(bw.diag(c)); };
    }
    return op;
}

LimitOperator catalog_limit(graphs::Construction construction, const ManifoldSpec& spec) {
    using graphs::Construction;
    const int m = spec.intrinsic_dim();
    const double vm = unit_ball_volume(m);
    const double c2 = std::pow(vm, -2.0 / m);  // (V_m^{-1/m})^2
    LimitOperator op;
    op.m = m;

    auto p = [spec](const Vec& c) { return spec.density(c); };
    auto glp = [spec](const Vec& c) { return spec.grad_log_density(c); };
    // kNN-family diffusion scale gamma^2 = c^2 p^{-2/m}.
    auto gamma2 = [spec, c2, m](const Vec& c) {
        return c2 * std::pow(spec.density(c), -2.0 / m);
    };

    switch (construction) {
        case Construction::RNeighborhood: {
            op.drift = [glp](const Vec& c) { return glp(c); };
            op.diffusion = [](const Vec&) { return 1.0; };
            op.degree_fn = p;
            op.q = [p](const Vec& c) { return sq(p(c)); };
            op.prefactor = [](const Vec&) { return 0.5; };
            return op;
        }
        case Construction::KnnDirected: {
            op.drift = [glp, gamma2](const Vec& c) { return Vec(gamma2(c) * glp(c)); };
            op.diffusion = gamma2;
            op.degree_fn = [vm](const Vec&) { return 1.0 / vm; };
            op.q = [p](const Vec& c) { return sq(p(c)); };
            op.prefactor = [gamma2](const Vec& c) { return 0.5 * gamma2(c); };
            return op;
        }
        case Construction::KnnUndirectedOr:
        case Construction::SelfTuning: {
            // r_dot/r = -(1/(2m)) grad p / p, so the drift coefficient is
            // (m-2)/(2m); for m = 1 the drift points away from high density.
            const double coeff = (m - 2.0) / (2.0 * m);
            op.drift = [glp, gamma2, coeff](const Vec& c) { return Vec(coeff * gamma2(c) * glp(c)); };
            op.diffusion = gamma2;
            if (construction == Construction::SelfTuning) {
                const double cp =
                    kernels::base_kernel_constants(
                        kernels::BaseKernel::truncated_gaussian(graphs::kSelfTuningCutoff), m)
                        .Cprime;
                op.degree_fn = [vm, cp](const Vec&) { return cp / vm; };
            } else {
                op.degree_fn = [vm](const Vec&) { return 1.0 / vm; };
            }
            op.q = [p, m](const Vec& c) { return std::pow(p(c), 1.0 - 2.0 / m); };
            op.prefactor = [gamma2](const Vec& c) { return 0.5 * gamma2(c); };
            return op;
        }
        case Construction::PilotWeightedKnn: {
            // w = sqrt(p(x)p(y)): grad w / w = grad p / (2p); drift coefficient
            // 1 + 1/2 - (m+2)/(2m) = (m-1)/m.
            const double coeff = (m - 1.0) / m;
            op.drift = [glp, gamma2, coeff](const Vec& c) { return Vec(coeff * gamma2(c) * glp(c)); };
            op.diffusion = gamma2;
            op.degree_fn = [p, vm](const Vec& c) { return p(c) / vm; };
            op.q = [p, m](const Vec& c) { return std::pow(p(c), 2.0 - 2.0 / m); };
            op.prefactor = [gamma2](const Vec& c) { return 0.5 * gamma2(c); };
            return op;
        }
        case Construction::GenericKernel:
            throw std::invalid_argument("catalog_limit: generic kernels need limit_from_fields");
    }
    throw std::logic_error("unreachable");
}

double apply_weighted_LB(const ManifoldSpec& spec, const manifolds::ScalarField& q,
                         const ChartFunction& f, const Vec& chart) {
    if (spec.boundary_distance(chart) < 0)
        throw DataError("apply_weighted_LB: point outside chart");
    const double qv = q.value(chart);
    if (qv <= 0) throw DataError("apply_weighted_LB: q must be positive");
    const Vec g = gradient_s(spec, f, chart);
    return laplace_s(spec, f, chart) + (q.grad(chart) / qv).dot(g);
}

double integrate_on_manifold(const ManifoldSpec& spec,
                             const std::function<double(const Vec&)>& integrand, int n_quad) {
    const int m = spec.intrinsic_dim();
    const Vec lo = spec.chart_lower();
    const Vec hi = spec.chart_upper();
    if (m == 1) {
        if (n_quad == 0) n_quad = 2048;
        auto g = [&](double t) {
            Vec c(1);
            c << t;
            return integrand(c) * spec.volume_element(c);
        };
        if (spec.periodic()) return periodic_trapezoid(g, lo[0], hi[0], n_quad);
        // Composite Simpson over the interval.
        if (n_quad % 2 == 1) ++n_quad;
        const double h = (hi[0] - lo[0]) / n_quad;
        double s = g(lo[0]) + g(hi[0]);
        for (int i = 1; i < n_quad; ++i) s += g(lo[0] + i * h) * (i % 2 ? 4.0 : 2.0);
        return s * h / 3.0;
    }
    if (n_quad == 0) n_quad = 256;
    if (n_quad % 2 == 1) ++n_quad;
    const double hu = (hi[0] - lo[0]) / n_quad;
    const double hv = (hi[1] - lo[1]) / n_quad;
    double total = 0.0;
    for (int i = 0; i <= n_quad; ++i) {
        const double wi = (i == 0 || i == n_quad) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        for (int j = 0; j <= n_quad; ++j) {
            const double wj = (j == 0 || j == n_quad) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            Vec c(2);
            c << lo[0] + i * hu, lo[1] + j * hv;
            total += wi * wj * integrand(c) * spec.volume_element(c);
        }
    }
    return total * hu * hv / 9.0;
}

double smoothness_functional(const ManifoldSpec& spec, const manifolds::ScalarField& q,
                             const ChartFunction& f, int n_quad) {
    return integrate_on_manifold(
        spec,
        [&](const Vec& c) { return gradient_s(spec, f, c).squaredNorm() * q.value(c); },
        n_quad);
}

double discrete_smoothness(const laplacians::LaplacianMatrix& unnormalized, const Vec& f_values,
                           double c_prime_constant) {
    if (unnormalized.kind() != laplacians::LapKind::Unnormalized)
        throw std::invalid_argument("discrete_smoothness: unnormalized Laplacian required");
    const double n = unnormalized.n();
    const double vm = unit_ball_volume(unnormalized.scaling_inputs().m);
    return 2.0 * f_values.dot(unnormalized.apply(f_values)) / (n * n * vm * c_prime_constant);
}

}  // namespace laplim::limits

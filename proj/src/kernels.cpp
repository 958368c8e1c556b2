#include "laplim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace laplim::kernels {

namespace {

int nearest_sample(const manifolds::PointCloud& cloud, const Vec& x) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cloud.n(); ++i) {
        const double d = (cloud.points.row(i).transpose() - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

BaseKernel BaseKernel::indicator() {
    BaseKernel k;
    k.kind_ = Kind::Indicator;
    k.support_ = 1.0;
    k.levels_ = {{1.0, 1.0}};
    return k;
}

BaseKernel BaseKernel::truncated_gaussian(double cutoff) {
    if (cutoff <= 0) throw std::invalid_argument("truncated_gaussian: cutoff must be positive");
    BaseKernel k;
    k.kind_ = Kind::TruncatedGaussian;
    k.cutoff_ = cutoff;
    k.support_ = cutoff;
    // 256-level staircase: on each radius cell the staircase takes the
    // midpoint kernel value, so reconstruction error is bounded by the
    // largest kernel decrement across a cell.
    const int n_levels = 256;
    std::vector<double> stair(n_levels + 1, 0.0);
    for (int j = 1; j <= n_levels; ++j) {
        const double mid = cutoff * (j - 0.5) / n_levels;
        stair[j - 1] = std::exp(-mid * mid);
    }
    k.levels_.reserve(n_levels);
    for (int j = 1; j <= n_levels; ++j) {
        const double mass = stair[j - 1] - stair[j];
        k.levels_.push_back({mass, cutoff * j / n_levels});
    }
    return k;
}

BaseKernel BaseKernel::step_sum(std::vector<std::pair<double, double>> height_radius) {
    if (height_radius.empty()) throw std::invalid_argument("step_sum: empty step list");
    BaseKernel k;
    k.kind_ = Kind::StepSum;
    k.steps_ = std::move(height_radius);
    k.support_ = 0.0;
    for (const auto& [h, r] : k.steps_) {
        if (h <= 0 || r <= 0) throw std::invalid_argument("step_sum: heights and radii must be positive");
        k.support_ = std::max(k.support_, r);
        k.levels_.push_back({h, r});
    }
    return k;
}

double BaseKernel::eval(double u) const {
    u = std::abs(u);
    switch (kind_) {
        case Kind::Indicator:
            return u < 1.0 ? 1.0 : 0.0;
        case Kind::TruncatedGaussian:
            return u < cutoff_ ? std::exp(-u * u) : 0.0;
        case Kind::StepSum: {
            double v = 0.0;
            for (const auto& [h, r] : steps_)
                if (u < r) v += h;
            return v;
        }
    }
    throw std::logic_error("unreachable");
}

double BaseKernel::eval_from_levels(double u) const {
    u = std::abs(u);
    double v = 0.0;
    for (const auto& atom : levels_)
        if (u < atom.radius) v += atom.mass;
    return v;
}

double BaseKernel::staircase_resolution() const {
    if (kind_ != Kind::TruncatedGaussian) return 0.0;
    double worst = 0.0;
    double prev_r = 0.0;
    for (const auto& atom : levels_) {
        worst = std::max(worst, std::exp(-prev_r * prev_r) - std::exp(-atom.radius * atom.radius));
        prev_r = atom.radius;
    }
    return worst;
}

nlohmann::json BaseKernel::to_json() const {
    switch (kind_) {
        case Kind::Indicator:
            return {{"kind", "indicator"}};
        case Kind::TruncatedGaussian:
            return {{"kind", "truncated_gaussian"}, {"cutoff", cutoff_}};
        case Kind::StepSum: {
            nlohmann::json steps = nlohmann::json::array();
            for (const auto& [h, r] : steps_) steps.push_back({h, r});
            return {{"kind", "step_sum"}, {"steps", steps}};
        }
    }
    throw std::logic_error("unreachable");
}

BaseKernel BaseKernel::from_json(const nlohmann::json& j) {
    const std::string k = j.at("kind").get<std::string>();
    if (k == "indicator") return indicator();
    if (k == "truncated_gaussian") return truncated_gaussian(j.at("cutoff").get<double>());
    if (k == "step_sum") {
        std::vector<std::pair<double, double>> steps;
        for (const auto& s : j.at("steps")) steps.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
        return step_sum(std::move(steps));
    }
    throw DataError("unknown base kernel kind: " + k);
}

KernelConstants base_kernel_constants(const BaseKernel& base, int m) {
    if (m < 1) throw std::invalid_argument("base_kernel_constants: m must be >= 1");
    KernelConstants kc{0.0, 0.0, 0.0};
    switch (base.kind()) {
        case BaseKernel::Kind::Indicator:
        case BaseKernel::Kind::StepSum: {
            for (const auto& atom : base.level_decomposition()) {
                kc.C += atom.mass * std::pow(atom.radius, m + 2);
                kc.Cprime += atom.mass * std::pow(atom.radius, m);
            }
            break;
        }
        case BaseKernel::Kind::TruncatedGaussian: {
            // dη = 2u e^{-u^2} du on (0, R) plus an atom e^{-R^2} at R.
            const double R = base.cutoff();
            kc.C = adaptive_simpson(
                       [m](double u) { return std::pow(u, m + 2) * 2.0 * u * std::exp(-u * u); }, 0.0,
                       R, 1e-12) +
                   std::pow(R, m + 2) * std::exp(-R * R);
            kc.Cprime = adaptive_simpson(
                            [m](double u) { return std::pow(u, m) * 2.0 * u * std::exp(-u * u); },
                            0.0, R, 1e-12) +
                        std::pow(R, m) * std::exp(-R * R);
            break;
        }
    }
    if (!(kc.C > 0.0) || !(kc.Cprime > 0.0))
        throw DataError("base kernel has a non-normalizable level decomposition");
    kc.Z = (m + 2) * kc.Cprime / kc.C;
    return kc;
}

BandwidthField BandwidthField::constant(double r, int m) {
    if (r <= 0) throw std::invalid_argument("bandwidth must be positive");
    BandwidthField f;
    f.name = "constant";
    f.symmetric = true;
    f.value = [r](const Vec&, const Vec&) { return r; };
    f.diag = [r](const Vec&) { return r; };
    f.diag_grad = [m](const Vec&) { return Vec::Zero(m); };
    return f;
}

BandwidthField BandwidthField::from_samples(std::shared_ptr<const manifolds::PointCloud> cloud,
                                            Vec per_sample_values, std::string name) {
    if (per_sample_values.size() != cloud->n())
        throw std::invalid_argument("from_samples: value count mismatch");
    if (per_sample_values.minCoeff() <= 0)
        throw DataError("bandwidth samples must be positive");
    BandwidthField f;
    f.name = std::move(name);
    f.symmetric = true;
    auto vals = std::make_shared<Vec>(std::move(per_sample_values));
    f.value = [cloud, vals](const Vec& x, const Vec& y) {
        return std::sqrt((*vals)[nearest_sample(*cloud, x)] * (*vals)[nearest_sample(*cloud, y)]);
    };
    return f;
}

WeightField WeightField::constant(double w, int m) {
    if (w < 0) throw std::invalid_argument("weight must be non-negative");
    WeightField f;
    f.name = "constant";
    f.symmetric = true;
    f.value = [w](const Vec&, const Vec&) { return w; };
    f.diag = [w](const Vec&) { return w; };
    f.diag_grad = [m](const Vec&) { return Vec::Zero(m); };
    return f;
}

WeightField WeightField::from_samples(std::shared_ptr<const manifolds::PointCloud> cloud,
                                      Vec per_sample_values, std::string name) {
    if (per_sample_values.size() != cloud->n())
        throw std::invalid_argument("from_samples: value count mismatch");
    if (per_sample_values.minCoeff() < 0) throw DataError("weight samples must be non-negative");
    WeightField f;
    f.name = std::move(name);
    f.symmetric = true;
    auto vals = std::make_shared<Vec>(std::move(per_sample_values));
    f.value = [cloud, vals](const Vec& x, const Vec& y) {
        return std::sqrt((*vals)[nearest_sample(*cloud, x)] * (*vals)[nearest_sample(*cloud, y)]);
    };
    return f;
}

nlohmann::json KernelSpec::to_json() const {
    return {{"base", base.to_json()},
            {"h", h},
            {"bandwidth", {{"name", bandwidth.name}, {"symmetric", bandwidth.symmetric}}},
            {"weight", {{"name", weight.name}, {"symmetric", weight.symmetric}}}};
}

double eval_kernel(const KernelSpec& spec, const Vec& x, const Vec& y) {
    if (!spec.bandwidth.value || !spec.weight.value)
        throw std::invalid_argument("eval_kernel: fields lack ambient-pair evaluators");
    const double dist = (y - x).norm();
    const double r = spec.bandwidth.value(x, y);
    const double u = dist / (spec.h * r);
    if (u >= spec.base.support_radius()) return 0.0;
    return spec.weight.value(x, y) * spec.base.eval(u);
}

std::pair<BandwidthField, WeightField> design_bandwidth_weight(const manifolds::ScalarField& p,
                                                               const manifolds::ScalarField& q,
                                                               const manifolds::ScalarField& g,
                                                               int m) {
    auto gamma = [p, q, g](const Vec& c) {
        const double pv = p.value(c), qv = q.value(c), gv = g.value(c);
        if (pv <= 0 || qv <= 0 || gv <= 0) throw DataError("designer inputs must be positive");
        return std::sqrt(qv / (pv * gv));
    };
    auto omega = [p, q, g, m](const Vec& c) {
        const double pv = p.value(c), qv = q.value(c), gv = g.value(c);
        if (pv <= 0 || qv <= 0 || gv <= 0) throw DataError("designer inputs must be positive");
        return std::pow(pv * gv / qv, 0.5 * m) * gv / pv;
    };
    auto log_grads = [p, q, g](const Vec& c) {
        const double pv = p.value(c), qv = q.value(c), gv = g.value(c);
        return std::tuple<Vec, Vec, Vec>{p.grad(c) / pv, q.grad(c) / qv, g.grad(c) / gv};
    };

    BandwidthField bw;
    bw.name = "designed:" + q.name + "," + g.name;
    bw.symmetric = true;
    bw.diag = gamma;
    bw.diag_grad = [gamma, log_grads](const Vec& c) {
        const auto [lp, lq, lg] = log_grads(c);
        // r_x(y) = sqrt(gamma(x) gamma(y)) so r_dot = grad(gamma)/2.
        return Vec(0.5 * gamma(c) * 0.5 * (lq - lp - lg));
    };

    WeightField wt;
    wt.name = bw.name;
    wt.symmetric = true;
    wt.diag = omega;
    wt.diag_grad = [omega, log_grads, m](const Vec& c) {
        const auto [lp, lq, lg] = log_grads(c);
        const Vec dlog_omega = 0.5 * m * (lp + lg - lq) + lg - lp;
        return Vec(0.5 * omega(c) * dlog_omega);
    };
    return {bw, wt};
}

void validate_design_inputs(const manifolds::ScalarField& p, const manifolds::ScalarField& q,
                            const manifolds::ScalarField& g, const Vec& lo, const Vec& hi,
                            int grid_points) {
    const int m = static_cast<int>(lo.size());
    auto check = [&](const Vec& c) {
        if (p.value(c) <= 0 || q.value(c) <= 0 || g.value(c) <= 0)
            throw DataError("designer inputs must be positive on the chart");
    };
    Vec c(m);
    if (m == 1) {
        for (int i = 0; i <= grid_points; ++i) {
            c[0] = lo[0] + (hi[0] - lo[0]) * i / grid_points;
            check(c);
        }
    } else {
        for (int i = 0; i <= grid_points; ++i)
            for (int j = 0; j <= grid_points; ++j) {
                c[0] = lo[0] + (hi[0] - lo[0]) * i / grid_points;
                c[1] = lo[1] + (hi[1] - lo[1]) * j / grid_points;
                check(c);
            }
    }
}

}  // namespace laplim::kernels

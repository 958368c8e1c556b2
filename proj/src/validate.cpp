#include "laplim/validate.hpp"

#include "laplim/density.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace laplim::validate {

using laplacians::GeneratorScaling;

MomentEstimates empirical_moments(const graphs::SparseGraph& g, const PointMatrix& points,
                                  const GeneratorScaling& scaling) {
    const int n = g.n;
    const int b = static_cast<int>(points.cols());
    if (points.rows() != n) throw std::invalid_argument("empirical_moments: size mismatch");
    const Vec d = laplacians::degree_vector(g);

    MomentEstimates est;
    est.c_n = scaling.c_n;
    est.drift_hat.resize(n, b);
    est.diff_hat.assign(n, Mat::Zero(b, b));
    est.degree_hat.resize(n);
    const double degree_scale = n * unit_ball_volume(scaling.m) * std::pow(scaling.h, scaling.m);
    const double c_n = scaling.c_n;

    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        Vec m1(b);
        Mat m2(b, b);
        for (std::size_t i = lo; i < hi; ++i) {
            m1.setZero();
            m2.setZero();
            for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
                const int j = g.col[p];
                const double w = g.value(p);
                for (int c = 0; c < b; ++c) {
                    const double delta_c = points(j, c) - points(i, c);
                    m1[c] += w * delta_c;
                    for (int cc = 0; cc <= c; ++cc)
                        m2(c, cc) += w * delta_c * (points(j, cc) - points(i, cc));
                }
            }
            for (int c = 0; c < b; ++c)
                for (int cc = c + 1; cc < b; ++cc) m2(c, cc) = m2(cc, c);
            for (int c = 0; c < b; ++c) est.drift_hat(i, c) = c_n * (m1[c] / d[i]);
            const Vec drift_row = est.drift_hat.row(i).transpose();
            est.diff_hat[i] = c_n * (m2 / d[i]) - drift_row * drift_row.transpose() / c_n;
            est.degree_hat[i] = d[i] / degree_scale;
        }
    });
    return est;
}

TangentMoments project_to_tangent(const MomentEstimates& est, const manifolds::ManifoldSpec& spec,
                                  const PointMatrix& chart) {
    const int n = static_cast<int>(chart.rows());
    const int m = spec.intrinsic_dim();
    if (est.drift_hat.rows() != n) throw std::invalid_argument("project_to_tangent: size mismatch");
    TangentMoments tm;
    tm.drift.resize(n, m);
    tm.diff.assign(n, Mat::Zero(m, m));
    tm.diffusion_scale.resize(n);
    tm.drift_normal_norm.resize(n);
    tm.diff_normal_fraction.resize(n);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto frame = manifolds::tangent_frame(spec, chart.row(i).transpose());
            const Vec mu = est.drift_hat.row(i).transpose();
            const Vec t = frame.H.transpose() * mu;
            tm.drift.row(i) = t.transpose();
            tm.drift_normal_norm[i] = (mu - frame.H * t).norm();
            const Mat sig_t = frame.H.transpose() * est.diff_hat[i] * frame.H;
            tm.diff[i] = sig_t;
            tm.diffusion_scale[i] = sig_t.trace() / m;
            const double full_trace = est.diff_hat[i].trace();
            tm.diff_normal_fraction[i] =
                full_trace > 0 ? std::max(0.0, (full_trace - sig_t.trace()) / full_trace) : 0.0;
        }
    });
    return tm;
}

SphereMoments sphere_moment_oracle(int m, double h, const Vec& shift, double kink_alpha,
                                   const Vec& kink_u, double delta, std::int64_t samples,
                                   std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("sphere_moment_oracle: m must be >= 1");
    if (samples < 10000) throw std::invalid_argument("sphere_moment_oracle: need at least 1e4 samples");
    if (h <= 0) throw std::invalid_argument("sphere_moment_oracle: h must be positive");
    if (shift.size() != m || kink_u.size() != m)
        throw std::invalid_argument("sphere_moment_oracle: dimension mismatch");
    if (shift.norm() >= h || std::abs(kink_alpha) >= h || delta >= 1.0)
        throw std::invalid_argument("sphere_moment_oracle: perturbations out of range");

    const double radius = h + h * h * h * delta + shift.norm() + std::abs(kink_alpha);
    const double support = h + h * h * h * delta;
    const double vol_factor = std::pow(radius, m);  // Vol(sampling ball)/V_m

    Rng rng(seed);
    double s0 = 0.0, s0_sq = 0.0;
    Vec s1 = Vec::Zero(m), s1_sq = Vec::Zero(m);
    Mat s2 = Mat::Zero(m, m), s2_sq = Mat::Zero(m, m);
    Vec s(m);
    const bool kinked = kink_alpha != 0.0 && kink_u.norm() > 0;
    const Vec u = kinked ? Vec(kink_u / kink_u.norm()) : kink_u;

    for (std::int64_t it = 0; it < samples; ++it) {
        double nrm2;
        do {
            for (int d = 0; d < m; ++d) s[d] = rng.normal();
            nrm2 = s.squaredNorm();
        } while (nrm2 == 0.0);
        s *= radius * std::pow(rng.uniform(), 1.0 / m) / std::sqrt(nrm2);

        Vec q = s - shift;
        if (kinked) q += (s.dot(u) > 0 ? kink_alpha : -kink_alpha) * u;
        const double inside = q.norm() < support ? 1.0 : 0.0;

        const double v0 = vol_factor * inside;
        s0 += v0;
        s0_sq += v0 * v0;
        for (int d = 0; d < m; ++d) {
            const double v1 = v0 * s[d];
            s1[d] += v1;
            s1_sq[d] += v1 * v1;
            for (int dd = 0; dd < m; ++dd) {
                const double v2 = v0 * s[d] * s[dd];
                s2(d, dd) += v2;
                s2_sq(d, dd) += v2 * v2;
            }
        }
    }

    const double inv_n = 1.0 / static_cast<double>(samples);
    auto standard_error = [&](double sum, double sum_sq) {
        const double mean = sum * inv_n;
        const double var = std::max(0.0, sum_sq * inv_n - mean * mean);
        return std::sqrt(var * inv_n);
    };
    SphereMoments out;
    out.m0 = s0 * inv_n;
    out.m0_se = standard_error(s0, s0_sq);
    out.m1 = s1 * inv_n;
    out.m1_se.resize(m);
    out.m2 = s2 * inv_n;
    out.m2_se.resize(m, m);
    for (int d = 0; d < m; ++d) {
        out.m1_se[d] = standard_error(s1[d], s1_sq[d]);
        for (int dd = 0; dd < m; ++dd) out.m2_se(d, dd) = standard_error(s2(d, dd), s2_sq(d, dd));
    }
    return out;
}

std::vector<int> interior_points(const manifolds::ManifoldSpec& spec, const PointMatrix& chart,
                                 const std::function<double(int)>& local_bandwidth) {
    std::vector<int> keep;
    const int n = static_cast<int>(chart.rows());
    for (int i = 0; i < n; ++i) {
        if (spec.boundary_distance(chart.row(i).transpose()) >= 2.0 * local_bandwidth(i))
            keep.push_back(i);
    }
    return keep;
}

nlohmann::json ConvergenceReport::to_json() const {
    nlohmann::json cells_json = nlohmann::json::array();
    for (const auto& c : cells) {
        cells_json.push_back({{"n", c.n},
                              {"param", c.param},
                              {"seed", c.seed},
                              {"interior_count", c.interior_count},
                              {"drift_sup_err", c.drift_sup_err},
                              {"drift_median_err", c.drift_median_err},
                              {"diffusion_median_err", c.diffusion_median_err},
                              {"generator_sup_err", c.generator_sup_err},
                              {"generator_median_err", c.generator_median_err},
                              {"regime_ok", c.regime_ok},
                              {"seconds", c.seconds}});
    }
    return {{"manifold", manifold},
            {"construction", construction},
            {"cells", cells_json},
            {"drift_err_by_grid", drift_err_by_grid},
            {"generator_err_by_grid", generator_err_by_grid}};
}

namespace {

graphs::SparseGraph build_for(graphs::Construction construction, const PointMatrix& points,
                              double param) {
    using graphs::Construction;
    switch (construction) {
        case Construction::RNeighborhood:
            return graphs::build_r_neighborhood(points, param);
        case Construction::KnnDirected:
            return graphs::build_knn_directed(points, static_cast<int>(std::lround(param)));
        case Construction::KnnUndirectedOr:
            return graphs::build_knn_undirected_or(points, static_cast<int>(std::lround(param)));
        case Construction::SelfTuning:
            return graphs::build_self_tuning(points, static_cast<int>(std::lround(param)));
        default:
            throw std::invalid_argument("run_convergence: unsupported construction");
    }
}

}  // namespace

ConvergenceReport run_convergence(const manifolds::ManifoldSpec& spec,
                                  const ConvergenceConfig& config) {
    using graphs::Construction;
    const int m = spec.intrinsic_dim();
    ConvergenceReport report;
    report.manifold = spec.name();
    report.construction = graphs::construction_name(config.construction);
    const limits::LimitOperator limit = limits::catalog_limit(config.construction, spec);

    std::vector<limits::TestFunction> fns;
    for (const auto& name : config.test_functions) fns.push_back(limits::make_test_function(name, spec));

    for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
        const auto [n, param] = config.grid[gi];
        for (const auto seed : config.seeds) {
            const auto t0 = std::chrono::steady_clock::now();
            ConvergenceCell cell;
            cell.n = n;
            cell.param = param;
            cell.seed = seed;

            const auto cloud = manifolds::sample_points(spec, n, seed);
            graphs::SparseGraph g;
            std::optional<graphs::KnnRadii> radii;
            if (config.construction == Construction::PilotWeightedKnn) {
                const int k = static_cast<int>(std::lround(param));
                const graphs::NeighborIndex index(cloud.points);
                const auto est = density::knn_density(index, k, m);
                g = graphs::build_pilot_weighted_knn(cloud.points, k, est.values);
                radii = graphs::knn_radii(index, k, m);
            } else {
                g = build_for(config.construction, cloud.points, param);
                if (config.construction != Construction::RNeighborhood) {
                    const graphs::NeighborIndex index(cloud.points);
                    radii = graphs::knn_radii(index, static_cast<int>(std::lround(param)), m);
                }
            }
            const auto scaling = GeneratorScaling::for_construction(g, m);
            cell.regime_ok =
                n * std::pow(scaling.h, m + 2) / std::log(std::max(3.0, double(n))) >= 1.0;

            const auto est = empirical_moments(g, cloud.points, scaling);
            const auto tm = project_to_tangent(est, spec, cloud.chart);

            const auto local_bw = [&](int i) -> double {
                if (config.construction == Construction::RNeighborhood) return param;
                return radii ? (*radii).rho[i] : scaling.h;
            };
            const auto interior = interior_points(spec, cloud.chart, local_bw);
            if (interior.empty()) throw DataError("run_convergence: empty interior set");
            cell.interior_count = static_cast<int>(interior.size());

            std::vector<double> drift_errs, diff_errs;
            drift_errs.reserve(interior.size());
            for (const int i : interior) {
                const Vec c = cloud.chart.row(i).transpose();
                drift_errs.push_back((tm.drift.row(i).transpose() - limit.drift(c)).norm());
                diff_errs.push_back(std::abs(tm.diffusion_scale[i] - limit.diffusion(c)));
            }
            cell.drift_sup_err = *std::max_element(drift_errs.begin(), drift_errs.end());
            cell.drift_median_err = median(drift_errs);
            cell.diffusion_median_err = median(diff_errs);

            if (!fns.empty()) {
                const laplacians::LaplacianMatrix lap(g, laplacians::LapKind::RandomWalk, scaling);
                for (const auto& tf : fns) {
                    Vec fv(n);
                    for (int i = 0; i < n; ++i) fv[i] = tf.fn(cloud.chart.row(i).transpose());
                    const Vec gen = lap.apply(fv);
                    std::vector<double> errs;
                    errs.reserve(interior.size());
                    for (const int i : interior) {
                        const Vec c = cloud.chart.row(i).transpose();
                        errs.push_back(std::abs(gen[i] - limit.apply(spec, tf.fn, c)));
                    }
                    cell.generator_sup_err[tf.name] = *std::max_element(errs.begin(), errs.end());
                    cell.generator_median_err[tf.name] = median(errs);
                }
            }
            cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            report.cells.push_back(std::move(cell));
        }
    }

    for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
        std::vector<double> drift_meds, gen_meds;
        for (const auto& c : report.cells) {
            if (c.n != config.grid[gi].first || c.param != config.grid[gi].second) continue;
            drift_meds.push_back(c.drift_median_err);
            if (!c.generator_median_err.empty()) {
                double s = 0.0;
                for (const auto& [k, v] : c.generator_median_err) s += v;
                gen_meds.push_back(s / c.generator_median_err.size());
            }
        }
        report.drift_err_by_grid.push_back(median(drift_meds));
        if (!gen_meds.empty()) report.generator_err_by_grid.push_back(median(gen_meds));
    }
    return report;
}

DegreeCheck degree_limit_check(const graphs::SparseGraph& g, const manifolds::ManifoldSpec& spec,
                               const PointMatrix& chart, const GeneratorScaling& scaling,
                               const limits::LimitOperator& limit) {
    const Vec d = laplacians::degree_vector(g);
    const double degree_scale = g.n * unit_ball_volume(scaling.m) * std::pow(scaling.h, scaling.m);
    DegreeCheck out;
    out.relative_error.resize(g.n);
    std::vector<double> abs_errs(g.n);
    double mean = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double scaled = d[i] / degree_scale;
        const double ref = limit.degree_fn(chart.row(i).transpose());
        out.relative_error[i] = (scaled - ref) / ref;
        abs_errs[i] = std::abs(out.relative_error[i]);
        mean += scaled;
    }
    mean /= g.n;
    double var = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double scaled = d[i] / degree_scale;
        var += sq(scaled - mean);
    }
    out.coefficient_of_variation = std::sqrt(var / g.n) / mean;
    out.median_abs_error = median(abs_errs);
    return out;
}

Mat diffusion_normalized_drift(const TangentMoments& tm) {
    Mat out = tm.drift;
    for (int i = 0; i < out.rows(); ++i) {
        const double scale = tm.diffusion_scale[i];
        if (scale <= 0) throw NumericError("diffusion_normalized_drift: non-positive diffusion");
        out.row(i) /= scale;
    }
    return out;
}

}  // namespace laplim::validate

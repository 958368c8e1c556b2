#include "laplim/lle.hpp"

#include "laplim/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace laplim::lle {

LleModel fit_lle(const PointMatrix& points, int k, double reg) {
    const graphs::NeighborIndex index(points);
    const int n = index.n();
    const int b = static_cast<int>(points.cols());
    if (k < 1 || k > n - 1) throw std::invalid_argument("fit_lle: need 1 <= k <= n-1");
    if (reg < 0) throw std::invalid_argument("fit_lle: reg must be >= 0");

    std::vector<std::vector<std::int32_t>> cols(n);
    std::vector<std::vector<double>> vals(n);
    Vec residuals(n);
    std::vector<std::string> row_error(n);

    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        Mat eta(k, b);
        for (std::size_t i = lo; i < hi; ++i) {
            const auto nbrs = index.knn_of(static_cast<int>(i), k);
            for (int a = 0; a < k; ++a)
                eta.row(a) = points.row(nbrs[a].second) - points.row(i);
            Mat gram = eta * eta.transpose();
            if (reg > 0.0) gram += (reg * gram.trace() / k) * Mat::Identity(k, k);

            Vec w;
            const Eigen::LDLT<Mat> ldlt(gram);
            bool usable = ldlt.info() == Eigen::Success && ldlt.isPositive();
            if (usable) {
                w = ldlt.solve(Vec::Ones(k));
                usable = w.allFinite() && (gram * w - Vec::Ones(k)).norm() <= 1e-6 * k;
            }
            if (!usable) {
                if (reg > 0.0) {
                    row_error[i] = "fit_lle: regularized local system unsolvable";
                    continue;
                }
                // reg = 0 with a singular Gram: minimum-norm least squares.
                w = gram.completeOrthogonalDecomposition().solve(Vec::Ones(k));
            }
            const double sum = w.sum();
            if (!std::isfinite(sum) || std::abs(sum) < 1e-12 * k) {
                row_error[i] = "fit_lle: singular local system at point " + std::to_string(i) +
                               " (weight sum vanishes; increase reg)";
                continue;
            }
            w /= sum;

            cols[i].resize(k);
            vals[i].resize(k);
            std::vector<int> perm(k);
            for (int a = 0; a < k; ++a) perm[a] = a;
            std::sort(perm.begin(), perm.end(),
                      [&](int x, int y) { return nbrs[x].second < nbrs[y].second; });
            for (int a = 0; a < k; ++a) {
                cols[i][a] = static_cast<std::int32_t>(nbrs[perm[a]].second);
                vals[i][a] = w[perm[a]];
            }
            residuals[i] = (eta.transpose() * w).norm();
        }
    });
    for (int i = 0; i < n; ++i)
        if (!row_error[i].empty()) throw NumericError(row_error[i]);

    LleModel model;
    model.k = k;
    model.reg = reg;
    model.residuals = std::move(residuals);
    model.W.n = n;
    model.W.construction = graphs::Construction::GenericKernel;
    model.W.symmetric = false;
    model.W.params = {{"lle_k", k}, {"lle_reg", reg}};
    model.W.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) model.W.row_ptr[i + 1] = model.W.row_ptr[i] + cols[i].size();
    model.W.col.resize(model.W.row_ptr[n]);
    model.W.val.resize(model.W.row_ptr[n]);
    for (int i = 0; i < n; ++i) {
        std::copy(cols[i].begin(), cols[i].end(), model.W.col.begin() + model.W.row_ptr[i]);
        std::copy(vals[i].begin(), vals[i].end(), model.W.val.begin() + model.W.row_ptr[i]);
    }
    return model;
}

namespace {

// Row sums of W accumulated in storage order; using these as the diagonal of
// M makes M 1 = 0 hold exactly in floating point.
Vec stored_row_sums(const graphs::SparseGraph& w) {
    Vec s = Vec::Zero(w.n);
    for (int i = 0; i < w.n; ++i) {
        double acc = 0.0;
        for (std::size_t p = w.row_ptr[i]; p < w.row_ptr[i + 1]; ++p) acc += w.val[p];
        s[i] = acc;
    }
    return s;
}

}  // namespace

Vec LleModel::apply_m(const Vec& f) const {
    if (f.size() != W.n) throw std::invalid_argument("apply_m: dimension mismatch");
    Vec out(W.n);
    for (int i = 0; i < W.n; ++i) {
        // Difference form sum_j w_ij (f_i - f_j): identical to (I - W) f up
        // to the rounding of the row sum, and exactly 0 on constants.
        double acc = 0.0;
        for (std::size_t p = W.row_ptr[i]; p < W.row_ptr[i + 1]; ++p)
            acc += W.val[p] * (f[i] - f[W.col[p]]);
        out[i] = acc;
    }
    return out;
}

Vec LleModel::apply_mtm(const Vec& f) const {
    const Vec mf = apply_m(f);
    // M^T y with the same difference-form convention.
    const Vec diag = stored_row_sums(W);
    Vec out = Vec::Zero(W.n);
    for (int i = 0; i < W.n; ++i) {
        out[i] += diag[i] * mf[i];
        for (std::size_t p = W.row_ptr[i]; p < W.row_ptr[i + 1]; ++p)
            out[W.col[p]] -= W.val[p] * mf[i];
    }
    return out;
}

Vec LleModel::apply_a_plus(const Vec& f) const {
    // Generator built from the negative weight parts: off-diagonal entries
    // max(-w_ij, 0) with the diagonal absorbing the row sum.
    Vec out = Vec::Zero(W.n);
    for (int i = 0; i < W.n; ++i) {
        double acc = 0.0;
        for (std::size_t p = W.row_ptr[i]; p < W.row_ptr[i + 1]; ++p)
            if (W.val[p] < 0.0) acc += (-W.val[p]) * (f[W.col[p]] - f[i]);
        out[i] = acc;
    }
    return out;
}

Vec LleModel::apply_a_minus(const Vec& f) const {
    Vec out = Vec::Zero(W.n);
    for (int i = 0; i < W.n; ++i) {
        double acc = 0.0;
        for (std::size_t p = W.row_ptr[i]; p < W.row_ptr[i + 1]; ++p)
            if (W.val[p] > 0.0) acc += W.val[p] * (f[W.col[p]] - f[i]);
        out[i] = acc;
    }
    return out;
}

nlohmann::json DegeneracyReport::to_json() const {
    nlohmann::json entries_json = nlohmann::json::array();
    for (const auto& e : entries) {
        entries_json.push_back({{"function", e.function},
                                {"m_action_norm", e.m_action_norm},
                                {"laplacian_action_norm", e.laplacian_action_norm},
                                {"cancellation_ratio", e.cancellation_ratio},
                                {"split_plus_norm", e.split_plus_norm},
                                {"split_minus_norm", e.split_minus_norm},
                                {"split_cancellation", e.split_cancellation}});
    }
    return {{"reg", reg}, {"entries", entries_json}};
}

DegeneracyReport lle_degeneracy_report(const LleModel& model, const PointMatrix& points,
                                       const laplacians::LaplacianMatrix& reference,
                                       const std::vector<limits::TestFunction>& fns,
                                       const PointMatrix& chart) {
    const int n = model.W.n;
    if (reference.n() != n || points.rows() != n || chart.rows() != n)
        throw std::invalid_argument("lle_degeneracy_report: dimension mismatch");
    const double c_n = reference.scaling_inputs().c_n;
    const double root_n = std::sqrt(static_cast<double>(n));

    DegeneracyReport report;
    report.reg = model.reg;
    for (const auto& tf : fns) {
        Vec fv(n);
        for (int i = 0; i < n; ++i) fv[i] = tf.fn(chart.row(i).transpose());
        const Vec mf = model.apply_m(fv);
        const Vec lf = reference.apply(fv);
        const Vec pf = model.apply_a_plus(fv);
        const Vec nf = model.apply_a_minus(fv);
        DegeneracyEntry e;
        e.function = tf.name;
        e.m_action_norm = c_n * mf.norm() / root_n;
        e.laplacian_action_norm = lf.norm() / root_n;
        e.cancellation_ratio = e.laplacian_action_norm > 0
                                   ? e.m_action_norm / e.laplacian_action_norm
                                   : std::numeric_limits<double>::infinity();
        e.split_plus_norm = c_n * pf.norm() / root_n;
        e.split_minus_norm = c_n * nf.norm() / root_n;
        const double denom = e.split_plus_norm + e.split_minus_norm;
        e.split_cancellation = denom > 0 ? e.m_action_norm / denom : 0.0;
        report.entries.push_back(std::move(e));
    }
    return report;
}

Mat embed_lle(const LleModel& model, int dim, std::uint64_t seed) {
    const int n = model.W.n;
    if (dim < 1 || dim >= n - 1) throw std::invalid_argument("embed_lle: bad dim");
    spectral::LinearOperator op;
    op.n = n;
    op.apply = [&model](const Vec& f) { return model.apply_mtm(f); };
    // Gershgorin-style bound: ||M||_1 ||M||_inf with |diag| + sum|w| per row.
    double row_abs_max = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t p = model.W.row_ptr[i]; p < model.W.row_ptr[i + 1]; ++p)
            s += std::abs(model.W.val[p]);
        row_abs_max = std::max(row_abs_max, 1.0 + s);
    }
    op.norm_bound = row_abs_max * row_abs_max;

    const auto eig = spectral::smallest_eigenpairs(op, dim + 1, 1e-9, seed);
    Mat coords(n, dim);
    for (int d = 0; d < dim; ++d) coords.col(d) = eig.eigenvectors.col(d + 1);
    return coords;
}

}  // namespace laplim::lle

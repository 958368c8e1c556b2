#include "laplim/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace laplim::spectral {

namespace {

Vec random_unit(int n, Rng& rng) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    const double nn = v.norm();
    if (nn == 0) return Vec::Unit(n, 0);
    return v / nn;
}

// Orthogonalize w against the first j columns of V (two MGS passes).
void reorthogonalize(const Mat& V, int j, Vec& w) {
    for (int pass = 0; pass < 2; ++pass)
        for (int c = 0; c < j; ++c) w -= V.col(c).dot(w) * V.col(c);
}

}  // namespace

EigenResult smallest_eigenpairs(const LinearOperator& op, int count, double tol,
                                std::uint64_t seed) {
    const int n = op.n;
    if (count < 1 || count >= n)
        throw std::invalid_argument("smallest_eigenpairs: need 1 <= count < n");
    const double sigma = op.norm_bound;
    const int j_max = std::min(n, std::max(8 * count + 80, 120));

    Rng rng(seed);
    Mat V(n, j_max);
    Vec alpha(j_max), beta(j_max);
    V.col(0) = random_unit(n, rng);
    int j = 0;
    EigenResult result;

    auto shifted_apply = [&](const Vec& v) -> Vec { return sigma * v - op.apply(v); };

    Mat tridiag_vecs;
    Vec theta;
    auto solve_tridiag = [&](int size) {
        Mat t = Mat::Zero(size, size);
        for (int i = 0; i < size; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < size) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(t);
        theta = es.eigenvalues();    // ascending for B; largest = smallest of A
        tridiag_vecs = es.eigenvectors();
    };

    bool converged = false;
    while (j < j_max && !converged) {
        Vec w = shifted_apply(V.col(j));
        alpha[j] = V.col(j).dot(w);
        reorthogonalize(V, j + 1, w);
        double b = w.norm();
        if (j + 1 < j_max) {
            if (b < 1e-12 * std::max(1.0, sigma)) {
                // Invariant subspace exhausted: restart with a fresh direction.
                Vec fresh = random_unit(n, rng);
                reorthogonalize(V, j + 1, fresh);
                const double fn = fresh.norm();
                if (fn < 1e-12) {  // full space spanned
                    beta[j] = 0.0;
                    ++j;
                    break;
                }
                V.col(j + 1) = fresh / fn;
                beta[j] = 0.0;
            } else {
                V.col(j + 1) = w / b;
                beta[j] = b;
            }
        } else {
            beta[j] = b;
        }
        ++j;

        if (j >= count + 2 && (j % 10 == 0 || j == j_max)) {
            solve_tridiag(j);
            converged = true;
            for (int i = 0; i < count; ++i) {
                const int col = j - 1 - i;  // largest thetas of B
                const double bound = std::abs(beta[j - 1] * tridiag_vecs(j - 1, col));
                if (bound > tol * std::max(1.0, sigma)) {
                    converged = false;
                    break;
                }
            }
        }
    }
    if (theta.size() != j) solve_tridiag(j);

    result.iterations = j;
    result.eigenvalues.resize(count);
    result.eigenvectors.resize(n, count);
    result.residuals.resize(count);
    for (int i = 0; i < count; ++i) {
        const int col = j - 1 - i;
        result.eigenvalues[i] = sigma - theta[col];
        Vec y = V.leftCols(j) * tridiag_vecs.col(col);
        y /= y.norm();
        result.eigenvectors.col(i) = y;
        result.residuals[i] = (op.apply(y) - result.eigenvalues[i] * y).norm();
    }
    for (int i = 0; i < count; ++i) {
        if (result.residuals[i] > 10.0 * tol * std::max(1.0, sigma))
            throw NumericError("smallest_eigenpairs: residual " +
                               std::to_string(result.residuals[i]) + " did not converge");
    }
    return result;
}

EigenResult smallest_eigenpairs(const laplacians::LaplacianMatrix& lap, int count, double tol,
                                std::uint64_t seed) {
    if (lap.kind() == laplacians::LapKind::RandomWalk)
        throw std::invalid_argument("smallest_eigenpairs: random-walk Laplacian is not symmetric");
    if (lap.source().asymmetry() > 1e-10)
        throw std::invalid_argument("smallest_eigenpairs: graph is not symmetric");
    LinearOperator op;
    op.n = lap.n();
    op.apply = [&lap](const Vec& f) { return lap.apply_unscaled(f); };
    op.norm_bound = lap.kind() == laplacians::LapKind::Normalized
                        ? 2.0
                        : 2.0 * lap.degree().maxCoeff();  // Gershgorin
    return smallest_eigenpairs(op, count, tol, seed);
}

Mat laplacian_eigenmap(const graphs::SparseGraph& g, int dim, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("laplacian_eigenmap: dim must be >= 1");
    if (g.asymmetry() != 0.0)
        throw std::invalid_argument("laplacian_eigenmap: graph must be symmetric");
    if (g.component_count() > 1)
        throw DataError("laplacian_eigenmap: disconnected graph");

    const laplacians::LaplacianMatrix lap(g, laplacians::LapKind::Normalized,
                                          {1.0, 1.0, 1});
    LinearOperator op;
    op.n = g.n;
    op.apply = [&lap](const Vec& f) { return lap.apply_unscaled(f); };
    op.norm_bound = 2.0;
    const auto eig = smallest_eigenpairs(op, dim + 1, 1e-9, seed);
    if (eig.eigenvalues[1] <= 1e-8 * 2.0)
        throw DataError("laplacian_eigenmap: multiplicity of eigenvalue 0 exceeds 1");

    const Vec inv_sqrt_d = lap.degree().array().rsqrt();
    Mat coords(g.n, dim);
    for (int d = 0; d < dim; ++d) {
        Vec v = eig.eigenvectors.col(d + 1).cwiseProduct(inv_sqrt_d);
        coords.col(d) = v / v.norm();
    }
    return coords;
}

CircleFit fit_circle(const Mat& xy) {
    if (xy.cols() != 2 || xy.rows() < 3) throw std::invalid_argument("fit_circle: need n x 2");
    const int n = static_cast<int>(xy.rows());
    Mat a(n, 3);
    Vec b(n);
    for (int i = 0; i < n; ++i) {
        a(i, 0) = 2.0 * xy(i, 0);
        a(i, 1) = 2.0 * xy(i, 1);
        a(i, 2) = 1.0;
        b[i] = xy.row(i).squaredNorm();
    }
    const Vec sol = a.colPivHouseholderQr().solve(b);
    CircleFit fit;
    fit.cx = sol[0];
    fit.cy = sol[1];
    fit.radius = std::sqrt(std::max(0.0, sol[2] + sol[0] * sol[0] + sol[1] * sol[1]));
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = std::hypot(xy(i, 0) - fit.cx, xy(i, 1) - fit.cy);
        ss += sq(r - fit.radius);
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

double procrustes_distance(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("procrustes_distance: shape mismatch");
    Mat ac = a.rowwise() - a.colwise().mean();
    Mat bc = b.rowwise() - b.colwise().mean();
    Eigen::JacobiSVD<Mat> svd(ac.transpose() * bc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Mat rot = svd.matrixU() * svd.matrixV().transpose();
    const double scale = svd.singularValues().sum() / ac.squaredNorm();
    return (scale * ac * rot - bc).norm() / bc.norm();
}

}  // namespace laplim::spectral

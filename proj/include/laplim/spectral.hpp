#pragma once

#include "laplim/core.hpp"
#include "laplim/graphs.hpp"
#include "laplim/laplacians.hpp"

namespace laplim::spectral {

/// Symmetric operator given by its action and a (possibly loose) upper bound
/// on its spectral norm.
struct LinearOperator {
    int n = 0;
    std::function<Vec(const Vec&)> apply;
    double norm_bound = 1.0;
};

struct EigenResult {
    Vec eigenvalues;   // ascending
    Mat eigenvectors;  // n x count, unit columns
    Vec residuals;     // ||A v - lambda v|| per pair
    int iterations = 0;
};

/// count smallest eigenpairs of a symmetric operator via Lanczos with full
/// reorthogonalization on the shifted operator (norm_bound I - A).
/// Deterministic given the start-vector seed. Throws NumericError if the
/// residual bound tol * norm_bound is not reached within the iteration cap.
EigenResult smallest_eigenpairs(const LinearOperator& op, int count, double tol = 1e-9,
                                std::uint64_t seed = 12345);

/// Overload for symmetric graph adjacency-backed Laplacians; checks symmetry
/// of the stored pattern first.
EigenResult smallest_eigenpairs(const laplacians::LaplacianMatrix& lap, int count,
                                double tol = 1e-9, std::uint64_t seed = 12345);

/// Embedding from eigenvectors 2..dim+1 of the normalized Laplacian,
/// degree-rescaled to the random-walk convention. Errors on disconnected
/// graphs.
Mat laplacian_eigenmap(const graphs::SparseGraph& g, int dim, std::uint64_t seed = 12345);

/// Best-fit circle (algebraic least squares). Returns {center_x, center_y,
/// radius, rms_radial_residual}.
struct CircleFit {
    double cx = 0.0, cy = 0.0, radius = 0.0, rms = 0.0;
};
CircleFit fit_circle(const Mat& xy);

/// Orthogonal Procrustes distance between two point sets of equal shape:
/// min over rotation/reflection R and scale s of ||s A R - B||_F / ||B||_F,
/// after centering both.
double procrustes_distance(const Mat& a, const Mat& b);

}  // namespace laplim::spectral

#pragma once

#include "laplim/core.hpp"
#include "laplim/graphs.hpp"
#include "laplim/laplacians.hpp"
#include "laplim/limits.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace laplim::lle {

/// LLE reconstruction weights W (rows sum to 1 over each point's k nearest
/// neighbors) and M = I - W with the diagonal set to the stored row sum so
/// that M 1 = 0 exactly as assembled.
struct LleModel {
    graphs::SparseGraph W;  // reconstruction weights, k entries per row
    int k = 0;
    double reg = 0.0;
    Vec residuals;  // ||x_i - sum_j w_ij x_j||

    /// M f = f - W f computed with the exact-diagonal convention.
    Vec apply_m(const Vec& f) const;
    /// M^T M f (the LLE quadratic form operator).
    Vec apply_mtm(const Vec& f) const;
    /// Split M = A_plus - A_minus into row-sum-zero generators built from the
    /// negative and positive weight parts, diagonals absorbed.
    Vec apply_a_plus(const Vec& f) const;
    Vec apply_a_minus(const Vec& f) const;
};

/// Per-point constrained least-squares weight fit over the k nearest
/// neighbors, with ridge term reg * trace(G)/k. With reg = 0 a singular local
/// Gram matrix is resolved by the minimum-norm least-squares solution;
/// normalization failing (weight sum ~ 0) is an error.
LleModel fit_lle(const PointMatrix& points, int k, double reg);

struct DegeneracyEntry {
    std::string function;
    double m_action_norm = 0.0;        // ||c_n M f||_2 / sqrt(n)
    double laplacian_action_norm = 0.0;// ||c_n L_rw f||_2 / sqrt(n)
    double cancellation_ratio = 0.0;   // ||M f|| / ||L_rw f||
    double split_plus_norm = 0.0;      // ||A+ f||
    double split_minus_norm = 0.0;     // ||A- f||
    /// ||M f|| relative to the magnitude of the split parts: small values
    /// mean A+ f and A- f cancel.
    double split_cancellation = 0.0;
};

struct DegeneracyReport {
    double reg = 0.0;
    std::vector<DegeneracyEntry> entries;
    nlohmann::json to_json() const;
};

DegeneracyReport lle_degeneracy_report(const LleModel& model, const PointMatrix& points,
                                       const laplacians::LaplacianMatrix& reference,
                                       const std::vector<limits::TestFunction>& fns,
                                       const PointMatrix& chart);

/// Bottom non-trivial eigenvectors of M^T M (the constant vector spans the
/// exact kernel and is skipped).
Mat embed_lle(const LleModel& model, int dim, std::uint64_t seed = 12345);

}  // namespace laplim::lle

#pragma once

#include "laplim/core.hpp"
#include "laplim/kernels.hpp"

#include <cstdint>
#include <vector>

#include <json.hpp>

namespace laplim::graphs {

/// Exact nearest-neighbor queries over a point set (kd-tree). k-NN results
/// are sorted by ascending distance with ties broken by point index.
class NeighborIndex {
public:
    explicit NeighborIndex(const PointMatrix& points);

    int n() const { return n_; }
    int dim() const { return dim_; }
    const PointMatrix& points() const { return pts_; }

    /// k nearest neighbors of an arbitrary query point. exclude may be -1.
    std::vector<std::pair<double, int>> knn(const Vec& query, int k, int exclude = -1) const;
    std::vector<std::pair<double, int>> knn_of(int i, int k) const;

    /// All points with 0 <= ||x - query|| < radius (strict), excluding
    /// `exclude`, sorted by index.
    std::vector<int> radius_query(const Vec& query, double radius, int exclude = -1) const;

private:
    struct Node {
        int lo, hi;          // range in order_
        int axis = -1;       // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        Vec box_lo, box_hi;
    };
    int build_node(int lo, int hi);

    PointMatrix pts_;
    int n_ = 0, dim_ = 0;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

/// Distances to the k-th nearest neighbor (query point excluded) and the
/// associated bandwidth scaling h_n = (k/n)^{1/m}.
struct KnnRadii {
    Vec rho;
    int k = 0;
    int n = 0;
    double h_n = 0.0;
};

KnnRadii knn_radii(const NeighborIndex& index, int k, int m);

enum class Construction {
    RNeighborhood,
    KnnDirected,
    KnnUndirectedOr,
    SelfTuning,
    PilotWeightedKnn,
    GenericKernel,
};

std::string construction_name(Construction c);
Construction construction_from_name(const std::string& name);

/// Weighted adjacency in CSR form. An empty `val` array means all stored
/// entries are 1 (unit-weight graphs). No diagonal entries are stored.
struct SparseGraph {
    int n = 0;
    Construction construction = Construction::GenericKernel;
    bool symmetric = false;
    nlohmann::json params;

    std::vector<std::size_t> row_ptr;  // size n+1
    std::vector<std::int32_t> col;
    std::vector<double> val;           // empty => unit weights

    std::size_t nnz() const { return col.size(); }
    bool unit_weights() const { return val.empty(); }
    double value(std::size_t pos) const { return val.empty() ? 1.0 : val[pos]; }

    Vec degrees() const;
    Vec matvec(const Vec& f) const;
    SparseGraph transpose() const;
    /// Max-norm of W - W^T (0 exactly for symmetric constructions).
    double asymmetry() const;
    /// Entrywise maximum with the transpose (the OR symmetrization).
    SparseGraph symmetrize_max() const;
    /// Reweight entries to W_ij / (d_i d_j)^lambda.
    SparseGraph normalize_by_degree(double lambda) const;
    /// Multiply all weights by a constant.
    SparseGraph scaled(double factor) const;

    /// Connected components of the pattern (union-find).
    int component_count() const;
};

SparseGraph build_r_neighborhood(const PointMatrix& points, double r);
SparseGraph build_knn_directed(const PointMatrix& points, int k);
SparseGraph build_knn_undirected_or(const PointMatrix& points, int k);
/// exp(-||x-y||^2 / (rho_i rho_j)) with rho the kNN radii, truncated below
/// e^-9 to restore compact support.
SparseGraph build_self_tuning(const PointMatrix& points, int k);
SparseGraph build_pilot_weighted_knn(const PointMatrix& points, int k, const Vec& pilot);
SparseGraph build_kernel_graph(const PointMatrix& points, const kernels::KernelSpec& spec);

/// Truncation threshold of the self-tuning construction.
inline constexpr double kSelfTuningCutoff = 3.0;  // weights below exp(-9) dropped

/// Median over points of sqrt(mean squared one-step displacement) in the
/// OR-kNN graph; the default bandwidth heuristic for Gaussian-kernel graphs.
double median_one_step_std(const PointMatrix& points, int k);

}  // namespace laplim::graphs

#pragma once

#include "laplim/core.hpp"
#include "laplim/graphs.hpp"
#include "laplim/kernels.hpp"
#include "laplim/manifolds.hpp"

namespace laplim::density {

/// Balloon kNN density estimate: p_hat(x_i) = k / (n V_m rho(x_i)^m), with
/// rho the distance to the k-th nearest neighbor and V_m the unit-ball
/// volume. m is the intrinsic dimension, supplied by the caller.
struct DensityEstimate {
    Vec values;
    int k = 0;
    int m = 0;
};

DensityEstimate knn_density(const PointMatrix& points, int k, int m);
DensityEstimate knn_density(const graphs::NeighborIndex& index, int k, int m);

/// Symmetric weight field sqrt(p_hat(x) p_hat(y)) over the sample points,
/// extended off-sample by nearest-sample lookup.
kernels::WeightField pilot_weights(const DensityEstimate& est,
                                   std::shared_ptr<const manifolds::PointCloud> cloud);

}  // namespace laplim::density

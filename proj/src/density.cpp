#include "laplim/density.hpp"

namespace laplim::density {

DensityEstimate knn_density(const graphs::NeighborIndex& index, int k, int m) {
    if (m < 1) throw std::invalid_argument("knn_density: m must be >= 1");
    const int n = index.n();
    if (k < 1 || k > n - 1) throw std::invalid_argument("knn_density: need 1 <= k <= n-1");
    const graphs::KnnRadii radii = graphs::knn_radii(index, k, m);
    const double vm = unit_ball_volume(m);
    DensityEstimate est;
    est.k = k;
    est.m = m;
    est.values.resize(n);
    for (int i = 0; i < n; ++i) {
        const double rho = radii.rho[i];
        if (rho <= 0) throw DataError("knn_density: zero kNN radius (duplicate points)");
        est.values[i] = k / (n * vm * std::pow(rho, m));
    }
    return est;
}

DensityEstimate knn_density(const PointMatrix& points, int k, int m) {
    return knn_density(graphs::NeighborIndex(points), k, m);
}

kernels::WeightField pilot_weights(const DensityEstimate& est,
                                   std::shared_ptr<const manifolds::PointCloud> cloud) {
    if (est.values.size() != cloud->n())
        throw std::invalid_argument("pilot_weights: estimate/cloud size mismatch");
    return kernels::WeightField::from_samples(std::move(cloud), est.values, "pilot");
}

}  // namespace laplim::density

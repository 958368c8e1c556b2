#pragma once

#include "laplim/core.hpp"
#include "laplim/graphs.hpp"
#include "laplim/laplacians.hpp"
#include "laplim/manifolds.hpp"

#include <json.hpp>

#include <string>

namespace laplim::io {

/// Shortest round-trip-exact decimal form of a double.
std::string format_double(double v);

std::uint64_t config_hash(const nlohmann::json& config);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/// CSV, one row per point: extrinsic coordinates then chart coordinates.
/// The JSON sidecar carries the manifold spec, seed and config hash.
void write_point_cloud(const std::string& csv_path, const std::string& json_path,
                       const manifolds::PointCloud& cloud, const manifolds::ManifoldSpec& spec,
                       const nlohmann::json& config);
std::pair<manifolds::PointCloud, manifolds::ManifoldSpec> read_point_cloud(
    const std::string& csv_path, const std::string& json_path);

/// Matrix Market coordinate format (1-based, real general).
void write_matrix_market(const std::string& path, const graphs::SparseGraph& g);
graphs::SparseGraph read_matrix_market(const std::string& path);
void write_graph_sidecar(const std::string& json_path, const graphs::SparseGraph& g,
                         const nlohmann::json& config);

void write_laplacian_matrix_market(const std::string& path,
                                   const laplacians::LaplacianMatrix& lap);

/// Single-column CSV aligned with the point cloud rows.
void write_column_csv(const std::string& path, const Vec& column, const std::string& name);
Vec read_column_csv(const std::string& path);

void write_matrix_csv(const std::string& path, const Mat& m, const std::string& header);
Mat read_matrix_csv(const std::string& path);

}  // namespace laplim::io

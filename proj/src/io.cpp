#include "laplim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace laplim::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

std::uint64_t config_hash(const nlohmann::json& config) {
    return fnv1a_hash(config.dump());  // dump() sorts object keys
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_write(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "w"));
    if (!f) throw DataError("cannot open for writing: " + path);
    return f;
}

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError("malformed CSV cell '" + cell + "' in " + path);
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void write_json(const std::string& path, const nlohmann::json& j) {
    auto f = open_write(path);
    const std::string s = j.dump(2);
    std::fwrite(s.data(), 1, s.size(), f.get());
    std::fputc('\n', f.get());
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in " + path + ": " + e.what());
    }
}

void write_point_cloud(const std::string& csv_path, const std::string& json_path,
                       const manifolds::PointCloud& cloud, const manifolds::ManifoldSpec& spec,
                       const nlohmann::json& config) {
    auto f = open_write(csv_path);
    std::fprintf(f.get(), "# extrinsic[%d], chart[%d]\n", spec.ambient_dim(), spec.intrinsic_dim());
    for (int i = 0; i < cloud.n(); ++i) {
        for (int c = 0; c < cloud.points.cols(); ++c)
            std::fprintf(f.get(), "%s%s", c ? "," : "", format_double(cloud.points(i, c)).c_str());
        for (int c = 0; c < cloud.chart.cols(); ++c)
            std::fprintf(f.get(), ",%s", format_double(cloud.chart(i, c)).c_str());
        std::fputc('\n', f.get());
    }
    nlohmann::json meta{{"manifold", spec.to_json()},
                        {"n", cloud.n()},
                        {"seed", cloud.seed},
                        {"config_hash", hash_hex(config_hash(config))}};
    write_json(json_path, meta);
}

std::pair<manifolds::PointCloud, manifolds::ManifoldSpec> read_point_cloud(
    const std::string& csv_path, const std::string& json_path) {
    const nlohmann::json meta = read_json(json_path);
    manifolds::ManifoldSpec spec = manifolds::ManifoldSpec::from_json(meta.at("manifold"));
    const auto rows = read_csv_rows(csv_path);
    const int n = static_cast<int>(rows.size());
    const int b = spec.ambient_dim();
    const int m = spec.intrinsic_dim();
    manifolds::PointCloud cloud;
    cloud.seed = meta.value("seed", 0ULL);
    cloud.points.resize(n, b);
    cloud.chart.resize(n, m);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != b + m)
            throw DataError("point cloud row width mismatch in " + csv_path);
        for (int c = 0; c < b; ++c) cloud.points(i, c) = rows[i][c];
        for (int c = 0; c < m; ++c) cloud.chart(i, c) = rows[i][b + c];
    }
    return {std::move(cloud), std::move(spec)};
}

void write_matrix_market(const std::string& path, const graphs::SparseGraph& g) {
    auto f = open_write(path);
    std::fprintf(f.get(), "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f.get(), "%d %d %zu\n", g.n, g.n, g.nnz());
    for (int i = 0; i < g.n; ++i)
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p)
            std::fprintf(f.get(), "%d %d %s\n", i + 1, g.col[p] + 1,
                         format_double(g.value(p)).c_str());
}

graphs::SparseGraph read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw DataError("not a Matrix Market file: " + path);
    do {
        if (!std::getline(in, line)) throw DataError("truncated Matrix Market file: " + path);
    } while (!line.empty() && line[0] == '%');
    std::istringstream header(line);
    int rows = 0, cols = 0;
    std::size_t nnz = 0;
    header >> rows >> cols >> nnz;
    if (rows != cols || rows <= 0) throw DataError("expected a square matrix in " + path);

    std::vector<std::vector<std::pair<std::int32_t, double>>> by_row(rows);
    for (std::size_t e = 0; e < nnz; ++e) {
        int i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw DataError("truncated entries in " + path);
        if (i < 1 || i > rows || j < 1 || j > cols) throw DataError("entry out of range in " + path);
        by_row[i - 1].emplace_back(j - 1, v);
    }
    graphs::SparseGraph g;
    g.n = rows;
    g.row_ptr.assign(rows + 1, 0);
    for (int i = 0; i < rows; ++i) {
        std::sort(by_row[i].begin(), by_row[i].end());
        g.row_ptr[i + 1] = g.row_ptr[i] + by_row[i].size();
    }
    g.col.resize(g.row_ptr[rows]);
    g.val.resize(g.row_ptr[rows]);
    for (int i = 0; i < rows; ++i)
        for (std::size_t a = 0; a < by_row[i].size(); ++a) {
            g.col[g.row_ptr[i] + a] = by_row[i][a].first;
            g.val[g.row_ptr[i] + a] = by_row[i][a].second;
        }
    g.symmetric = g.asymmetry() == 0.0;
    return g;
}

void write_graph_sidecar(const std::string& json_path, const graphs::SparseGraph& g,
                         const nlohmann::json& config) {
    write_json(json_path, nlohmann::json{{"construction", graphs::construction_name(g.construction)},
                                         {"params", g.params},
                                         {"symmetric", g.symmetric},
                                         {"n", g.n},
                                         {"nnz", g.nnz()},
                                         {"config_hash", hash_hex(config_hash(config))}});
}

void write_laplacian_matrix_market(const std::string& path,
                                   const laplacians::LaplacianMatrix& lap) {
    const auto& g = lap.source();
    const Vec& d = lap.degree();
    auto f = open_write(path);
    std::fprintf(f.get(), "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f.get(), "%d %d %zu\n", g.n, g.n, g.nnz() + g.n);
    for (int i = 0; i < g.n; ++i) {
        const double diag = lap.kind() == laplacians::LapKind::Unnormalized ? d[i] : 1.0;
        std::fprintf(f.get(), "%d %d %s\n", i + 1, i + 1, format_double(diag).c_str());
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
            const int j = g.col[p];
            double v = -g.value(p);
            switch (lap.kind()) {
                case laplacians::LapKind::RandomWalk:
                    v /= d[i];
                    break;
                case laplacians::LapKind::Normalized:
                    v /= std::sqrt(d[i] * d[j]);
                    break;
                case laplacians::LapKind::Unnormalized:
                    break;
            }
            std::fprintf(f.get(), "%d %d %s\n", i + 1, j + 1, format_double(v).c_str());
        }
    }
}

void write_column_csv(const std::string& path, const Vec& column, const std::string& name) {
    auto f = open_write(path);
    std::fprintf(f.get(), "# %s\n", name.c_str());
    for (int i = 0; i < column.size(); ++i)
        std::fprintf(f.get(), "%s\n", format_double(column[i]).c_str());
}

Vec read_column_csv(const std::string& path) {
    const auto rows = read_csv_rows(path);
    Vec v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 1) throw DataError("expected a single column in " + path);
        v[i] = rows[i][0];
    }
    return v;
}

void write_matrix_csv(const std::string& path, const Mat& m, const std::string& header) {
    auto f = open_write(path);
    if (!header.empty()) std::fprintf(f.get(), "# %s\n", header.c_str());
    for (int i = 0; i < m.rows(); ++i) {
        for (int c = 0; c < m.cols(); ++c)
            std::fprintf(f.get(), "%s%s", c ? "," : "", format_double(m(i, c)).c_str());
        std::fputc('\n', f.get());
    }
}

Mat read_matrix_csv(const std::string& path) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw DataError("empty CSV: " + path);
    Mat m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw DataError("ragged CSV: " + path);
        for (std::size_t c = 0; c < rows[i].size(); ++c) m(i, c) = rows[i][c];
    }
    return m;
}

}  // namespace laplim::io

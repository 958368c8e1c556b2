#include "laplim/density.hpp"
#include "laplim/graphs.hpp"
#include "laplim/io.hpp"
#include "laplim/kernels.hpp"
#include "laplim/laplacians.hpp"
#include "laplim/limits.hpp"
#include "laplim/lle.hpp"
#include "laplim/manifolds.hpp"
#include "laplim/spectral.hpp"
#include "laplim/validate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace laplim;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct ManifoldFlags {
    std::string name = "circle";
    double radius = 1.0;
    double length = 1.0;
    double bound = 2.5;
    double big_radius = 2.0;
    double small_radius = 0.5;
    int windings = 10;
    std::string density = "uniform";
    double sigma = 0.5;
    double amplitude = 0.5;

    void attach(CLI::App* cmd) {
        cmd->add_option("--manifold", name, "circle | toroidal_helix | gauss_sheet | flat_interval")
            ->required();
        cmd->add_option("--radius", radius, "circle radius");
        cmd->add_option("--length", length, "flat interval length");
        cmd->add_option("--bound", bound, "gauss sheet truncation bound (in sigmas)");
        cmd->add_option("--big-radius", big_radius, "helix major radius");
        cmd->add_option("--small-radius", small_radius, "helix minor radius");
        cmd->add_option("--windings", windings, "helix winding count");
        cmd->add_option("--density", density, "uniform | truncated_normal | cosine_bump");
        cmd->add_option("--sigma", sigma, "truncated normal sigma");
        cmd->add_option("--amplitude", amplitude, "cosine bump amplitude");
    }

    manifolds::ManifoldSpec build() const {
        manifolds::DensityModel d;
        if (density == "uniform")
            d = manifolds::DensityModel::uniform();
        else if (density == "truncated_normal")
            d = manifolds::DensityModel::truncated_normal(sigma);
        else if (density == "cosine_bump")
            d = manifolds::DensityModel::cosine_bump(amplitude);
        else
            throw DataError("unknown density: " + density);
        if (name == "circle") return manifolds::ManifoldSpec::circle(radius, d);
        if (name == "toroidal_helix")
            return manifolds::ManifoldSpec::toroidal_helix(big_radius, small_radius, windings, d);
        if (name == "gauss_sheet") return manifolds::ManifoldSpec::gauss_sheet(bound);
        if (name == "flat_interval") return manifolds::ManifoldSpec::flat_interval(length, d);
        throw DataError("unknown manifold: " + name);
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

int cmd_sample(const ManifoldFlags& mf, int n, std::uint64_t seed, const std::string& out) {
    const auto spec = mf.build();
    const auto cloud = manifolds::sample_points(spec, n, seed);
    ensure_dir(out);
    const json config{{"command", "sample"}, {"manifold", spec.to_json()}, {"n", n}, {"seed", seed}};
    io::write_point_cloud(out + "/points.csv", out + "/points.json", cloud, spec, config);
    std::printf("wrote %d points to %s/points.csv (hash %s)\n", cloud.n(), out.c_str(),
                hash_hex(io::config_hash(config)).c_str());
    return 0;
}

int cmd_build(const std::string& points_csv, const std::string& points_json,
              const std::string& construction, int k, double h, const std::string& base,
              double cutoff, const std::string& pilot_csv, const std::string& out) {
    auto [cloud, spec] = io::read_point_cloud(points_csv, points_json);
    const auto c = graphs::construction_from_name(construction);
    graphs::SparseGraph g;
    switch (c) {
        case graphs::Construction::RNeighborhood:
            g = graphs::build_r_neighborhood(cloud.points, h);
            break;
        case graphs::Construction::KnnDirected:
            g = graphs::build_knn_directed(cloud.points, k);
            break;
        case graphs::Construction::KnnUndirectedOr:
            g = graphs::build_knn_undirected_or(cloud.points, k);
            break;
        case graphs::Construction::SelfTuning:
            g = graphs::build_self_tuning(cloud.points, k);
            break;
        case graphs::Construction::PilotWeightedKnn: {
            Vec pilot;
            if (!pilot_csv.empty())
                pilot = io::read_column_csv(pilot_csv);
            else
                pilot = density::knn_density(cloud.points, k, spec.intrinsic_dim()).values;
            g = graphs::build_pilot_weighted_knn(cloud.points, k, pilot);
            break;
        }
        case graphs::Construction::GenericKernel: {
            kernels::KernelSpec ks;
            ks.base = base == "truncated_gaussian" ? kernels::BaseKernel::truncated_gaussian(cutoff)
                                                   : kernels::BaseKernel::indicator();
            ks.bandwidth = kernels::BandwidthField::constant(1.0, spec.intrinsic_dim());
            ks.weight = kernels::WeightField::constant(1.0, spec.intrinsic_dim());
            ks.h = h;
            ks.bandwidth_upper_bound = 1.0;
            g = graphs::build_kernel_graph(cloud.points, ks);
            break;
        }
    }
    ensure_dir(out);
    const json config{{"command", "build"}, {"construction", construction}, {"k", k},
                      {"h", h},             {"base", base},                 {"cutoff", cutoff}};
    io::write_matrix_market(out + "/graph.mtx", g);
    io::write_graph_sidecar(out + "/graph.json", g, config);
    std::printf("graph: n=%d nnz=%zu symmetric=%d\n", g.n, g.nnz(), g.symmetric ? 1 : 0);
    return 0;
}

int cmd_laplacian(const std::string& graph_mtx, const std::string& graph_json,
                  const std::string& kind, int m, const std::string& out) {
    graphs::SparseGraph g = io::read_matrix_market(graph_mtx);
    const json sidecar = io::read_json(graph_json);
    g.construction = graphs::construction_from_name(sidecar.at("construction").get<std::string>());
    g.params = sidecar.at("params");
    const auto scaling = laplacians::GeneratorScaling::for_construction(g, m);
    const auto lk = laplacians::lap_kind_from_name(kind);
    const laplacians::LaplacianMatrix lap(std::move(g), lk, scaling);
    ensure_dir(out);
    const json config{{"command", "laplacian"}, {"kind", kind}, {"m", m},
                      {"source", sidecar.value("config_hash", "")}};
    io::write_laplacian_matrix_market(out + "/laplacian.mtx", lap);
    io::write_json(out + "/laplacian.json",
                   json{{"kind", kind},
                        {"scaling", lap.scaling()},
                        {"c_n", scaling.c_n},
                        {"h", scaling.h},
                        {"m", m},
                        {"source_graph_hash", sidecar.value("config_hash", "")},
                        {"config_hash", hash_hex(io::config_hash(config))}});
    std::printf("laplacian: kind=%s scaling=%s\n", kind.c_str(),
                io::format_double(lap.scaling()).c_str());
    return 0;
}

int cmd_density(const std::string& points_csv, const std::string& points_json, int k, int m,
                const std::string& out) {
    auto [cloud, spec] = io::read_point_cloud(points_csv, points_json);
    const auto est = density::knn_density(cloud.points, k, m > 0 ? m : spec.intrinsic_dim());
    ensure_dir(out);
    const json config{{"command", "density"}, {"k", k}, {"m", est.m}};
    io::write_column_csv(out + "/density.csv", est.values, "knn_density");
    io::write_json(out + "/density.json", json{{"k", est.k},
                                               {"m", est.m},
                                               {"method", "knn_balloon"},
                                               {"config_hash", hash_hex(io::config_hash(config))}});
    std::printf("density: n=%d k=%d m=%d\n", cloud.n(), est.k, est.m);
    return 0;
}

int cmd_embed(const std::string& graph_mtx, const std::string& points_csv,
              const std::string& points_json, const std::string& method, int dim, int k, double reg,
              const std::string& out) {
    ensure_dir(out);
    Mat coords;
    json config{{"command", "embed"}, {"method", method}, {"dim", dim}};
    if (method == "eigenmap") {
        if (graph_mtx.empty()) throw DataError("embed eigenmap: --graph required");
        const graphs::SparseGraph g = io::read_matrix_market(graph_mtx);
        coords = spectral::laplacian_eigenmap(g, dim);
    } else if (method == "lle") {
        if (points_csv.empty()) throw DataError("embed lle: --points required");
        auto [cloud, spec] = io::read_point_cloud(points_csv, points_json);
        config["k"] = k;
        config["reg"] = reg;
        const auto model = lle::fit_lle(cloud.points, k, reg);
        coords = lle::embed_lle(model, dim);
    } else {
        throw DataError("unknown embed method: " + method);
    }
    io::write_matrix_csv(out + "/embedding.csv", coords, "embedding dim=" + std::to_string(dim));
    io::write_json(out + "/embedding.json",
                   json{{"method", method},
                        {"dim", dim},
                        {"config_hash", hash_hex(io::config_hash(config))}});
    std::printf("embedding: %ld x %d via %s\n", static_cast<long>(coords.rows()), dim,
                method.c_str());
    return 0;
}

int run_validate_config(const std::string& config_path) {
    const json cfg = io::read_json(config_path);
    if (cfg.value("schema_version", 0) != 1) throw DataError("unsupported config schema_version");
    const std::string suite = cfg.at("suite").get<std::string>();
    const auto spec = manifolds::ManifoldSpec::from_json(cfg.at("manifold"));
    const std::string out = cfg.value("out", ".");
    ensure_dir(out);

    if (suite == "convergence") {
        validate::ConvergenceConfig vc;
        vc.construction = graphs::construction_from_name(cfg.at("construction").get<std::string>());
        for (const auto& g : cfg.at("grid"))
            vc.grid.emplace_back(g.at(0).get<int>(), g.at(1).get<double>());
        for (const auto& s : cfg.at("seeds")) vc.seeds.push_back(s.get<std::uint64_t>());
        if (cfg.contains("functions"))
            for (const auto& f : cfg.at("functions")) vc.test_functions.push_back(f.get<std::string>());
        const auto report = validate::run_convergence(spec, vc);
        json rj = report.to_json();
        rj["config_hash"] = hash_hex(io::config_hash(cfg));
        io::write_json(out + "/convergence.json", rj);
        std::printf("%-8s %-12s %-18s %-18s\n", "n", "param", "drift_median_err", "gen_median_err");
        for (std::size_t gi = 0; gi < vc.grid.size(); ++gi)
            std::printf("%-8d %-12s %-18s %-18s\n", vc.grid[gi].first,
                        io::format_double(vc.grid[gi].second).c_str(),
                        io::format_double(report.drift_err_by_grid[gi]).c_str(),
                        gi < report.generator_err_by_grid.size()
                            ? io::format_double(report.generator_err_by_grid[gi]).c_str()
                            : "-");
        return 0;
    }
    if (suite == "degree") {
        const int n = cfg.at("n").get<int>();
        const double param = cfg.at("param").get<double>();
        const std::uint64_t seed = cfg.value("seed", 1ULL);
        const auto construction =
            graphs::construction_from_name(cfg.at("construction").get<std::string>());
        const auto cloud = manifolds::sample_points(spec, n, seed);
        graphs::SparseGraph g;
        switch (construction) {
            case graphs::Construction::RNeighborhood:
                g = graphs::build_r_neighborhood(cloud.points, param);
                break;
            case graphs::Construction::KnnDirected:
                g = graphs::build_knn_directed(cloud.points, static_cast<int>(param));
                break;
            case graphs::Construction::KnnUndirectedOr:
                g = graphs::build_knn_undirected_or(cloud.points, static_cast<int>(param));
                break;
            case graphs::Construction::SelfTuning:
                g = graphs::build_self_tuning(cloud.points, static_cast<int>(param));
                break;
            default:
                throw DataError("degree suite: unsupported construction");
        }
        const auto scaling = laplacians::GeneratorScaling::for_construction(g, spec.intrinsic_dim());
        const auto limit = limits::catalog_limit(construction, spec);
        const auto check = validate::degree_limit_check(g, spec, cloud.chart, scaling, limit);
        io::write_json(out + "/degree.json",
                       json{{"median_abs_relative_error", check.median_abs_error},
                            {"coefficient_of_variation", check.coefficient_of_variation},
                            {"config_hash", hash_hex(io::config_hash(cfg))}});
        std::printf("degree check: median |rel err| = %s, CV = %s\n",
                    io::format_double(check.median_abs_error).c_str(),
                    io::format_double(check.coefficient_of_variation).c_str());
        return 0;
    }
    if (suite == "sphere_moments") {
        const int m = cfg.at("m").get<int>();
        const double h = cfg.at("h").get<double>();
        Vec shift = Vec::Zero(m);
        if (cfg.contains("shift"))
            for (int d = 0; d < m; ++d) shift[d] = cfg.at("shift").at(d).get<double>();
        const double alpha = cfg.value("alpha", 0.0);
        Vec u = Vec::Unit(m, 0);
        const double delta = cfg.value("delta", 0.0);
        const std::int64_t samples = cfg.value("samples", 1000000LL);
        const std::uint64_t seed = cfg.value("seed", 1ULL);
        const auto mom = validate::sphere_moment_oracle(m, h, shift, alpha, u, delta, samples, seed);
        io::write_json(out + "/sphere_moments.json",
                       json{{"m0", mom.m0},
                            {"m0_se", mom.m0_se},
                            {"m1", std::vector<double>(mom.m1.data(), mom.m1.data() + m)},
                            {"config_hash", hash_hex(io::config_hash(cfg))}});
        std::printf("M0 = %s (se %s); expected h^m = %s\n", io::format_double(mom.m0).c_str(),
                    io::format_double(mom.m0_se).c_str(), io::format_double(std::pow(h, m)).c_str());
        return 0;
    }
    throw DataError("unknown validate suite: " + suite);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph Laplacian limits: manifold sampling, graph construction, "
                 "drift/diffusion validation, spectral embeddings"};
    app.require_subcommand(1);

    // sample
    auto* sample = app.add_subcommand("sample", "sample a point cloud from a manifold density");
    ManifoldFlags mf;
    mf.attach(sample);
    int n = 1000;
    std::uint64_t seed = 1;
    std::string out = "out";
    sample->add_option("--n", n, "number of points")->required();
    sample->add_option("--seed", seed, "RNG seed");
    sample->add_option("--out", out, "output directory")->required();

    // build
    auto* build = app.add_subcommand("build", "build a graph from a point cloud");
    std::string points_csv, points_json, construction = "knn_undirected_or", pilot_csv;
    std::string base = "indicator";
    int k = 10;
    double h = 0.1, cutoff = 3.0;
    build->add_option("--points", points_csv, "points.csv from `sample`")->required();
    build->add_option("--points-meta", points_json, "points.json sidecar (default: alongside csv)");
    build->add_option("--construction", construction,
                      "r_neighborhood | knn_directed | knn_undirected_or | self_tuning | "
                      "pilot_weighted_knn | generic_kernel")
        ->required();
    build->add_option("--k", k, "neighbor count (kNN-family)");
    build->add_option("--h", h, "radius / bandwidth (r-neighborhood, generic kernel)");
    build->add_option("--base", base, "generic kernel base: indicator | truncated_gaussian");
    build->add_option("--cutoff", cutoff, "truncated gaussian cutoff");
    build->add_option("--pilot", pilot_csv, "pilot density CSV (pilot_weighted_knn)");
    build->add_option("--out", out, "output directory")->required();

    // laplacian
    auto* lap = app.add_subcommand("laplacian", "assemble a Laplacian from a graph");
    std::string graph_mtx, graph_json, kind = "random_walk";
    int m_dim = 1;
    lap->add_option("--graph", graph_mtx, "graph.mtx from `build`")->required();
    lap->add_option("--graph-meta", graph_json, "graph.json sidecar (default: alongside mtx)");
    lap->add_option("--kind", kind, "random_walk | unnormalized | normalized");
    lap->add_option("--m", m_dim, "intrinsic dimension (for the generator scaling)")->required();
    lap->add_option("--out", out, "output directory")->required();

    // density
    auto* dens = app.add_subcommand("density", "kNN density estimate over a point cloud");
    dens->add_option("--points", points_csv)->required();
    dens->add_option("--points-meta", points_json);
    dens->add_option("--k", k)->required();
    dens->add_option("--m", m_dim, "intrinsic dimension (default: from the manifold spec)");
    dens->add_option("--out", out)->required();

    // embed
    auto* embed = app.add_subcommand("embed", "spectral embedding (eigenmap or LLE)");
    std::string method = "eigenmap";
    int dim = 2;
    double reg = 1e-3;
    embed->add_option("--graph", graph_mtx, "graph.mtx (eigenmap)");
    embed->add_option("--points", points_csv, "points.csv (lle)");
    embed->add_option("--points-meta", points_json);
    embed->add_option("--method", method, "eigenmap | lle")->required();
    embed->add_option("--dim", dim, "embedding dimension");
    embed->add_option("--k", k, "LLE neighbor count");
    embed->add_option("--reg", reg, "LLE ridge regularization");
    embed->add_option("--out", out)->required();

    // validate
    auto* val = app.add_subcommand("validate", "run a validation suite from a config file");
    std::string config_path;
    val->add_option("--config", config_path, "experiment config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sample->parsed()) {
            if (m_dim < 0) throw std::invalid_argument("bad m");
            return cmd_sample(mf, n, seed, out);
        }
        if (build->parsed()) {
            if (points_json.empty()) points_json = points_csv.substr(0, points_csv.rfind('.')) + ".json";
            return cmd_build(points_csv, points_json, construction, k, h, base, cutoff, pilot_csv, out);
        }
        if (lap->parsed()) {
            if (graph_json.empty()) graph_json = graph_mtx.substr(0, graph_mtx.rfind('.')) + ".json";
            return cmd_laplacian(graph_mtx, graph_json, kind, m_dim, out);
        }
        if (dens->parsed()) {
            if (points_json.empty()) points_json = points_csv.substr(0, points_csv.rfind('.')) + ".json";
            return cmd_density(points_csv, points_json, k, dens->count("--m") ? m_dim : 0, out);
        }
        if (embed->parsed()) {
            if (points_json.empty() && !points_csv.empty())
                points_json = points_csv.substr(0, points_csv.rfind('.')) + ".json";
            return cmd_embed(graph_mtx, points_csv, points_json, method, dim, k, reg, out);
        }
        if (val->parsed()) return run_validate_config(config_path);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}

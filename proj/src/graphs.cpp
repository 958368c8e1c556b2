#include "laplim/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace laplim::graphs {

namespace {

constexpr int kLeafSize = 16;

// (squared distance, index) ordering: ascending distance, ties by index.
using DistIdx = std::pair<double, int>;

}  // namespace

NeighborIndex::NeighborIndex(const PointMatrix& points)
    : pts_(points), n_(static_cast<int>(points.rows())), dim_(static_cast<int>(points.cols())) {
    if (n_ == 0) throw std::invalid_argument("NeighborIndex: empty point set");
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * n_ / kLeafSize + 4);
    root_ = build_node(0, n_);
}

int NeighborIndex::build_node(int lo, int hi) {
    Node node;
    node.lo = lo;
    node.hi = hi;
    node.box_lo = Vec::Constant(dim_, std::numeric_limits<double>::infinity());
    node.box_hi = Vec::Constant(dim_, -std::numeric_limits<double>::infinity());
    for (int i = lo; i < hi; ++i) {
        for (int d = 0; d < dim_; ++d) {
            const double v = pts_(order_[i], d);
            node.box_lo[d] = std::min(node.box_lo[d], v);
            node.box_hi[d] = std::max(node.box_hi[d], v);
        }
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (hi - lo <= kLeafSize) return id;

    int axis = 0;
    double extent = -1.0;
    for (int d = 0; d < dim_; ++d) {
        const double e = node.box_hi[d] - node.box_lo[d];
        if (e > extent) {
            extent = e;
            axis = d;
        }
    }
    if (extent <= 0.0) return id;  // all points identical: keep as leaf

    const int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) {
                         const double va = pts_(a, axis), vb = pts_(b, axis);
                         return va < vb || (va == vb && a < b);
                     });
    const double split = pts_(order_[mid], axis);
    const int left = build_node(lo, mid);
    const int right = build_node(mid, hi);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

namespace {

double box_sq_distance(const Vec& q, const Vec& lo, const Vec& hi) {
    double d2 = 0.0;
    for (int d = 0; d < q.size(); ++d) {
        double delta = 0.0;
        if (q[d] < lo[d])
            delta = lo[d] - q[d];
        else if (q[d] > hi[d])
            delta = q[d] - hi[d];
        d2 += delta * delta;
    }
    return d2;
}

}  // namespace

std::vector<DistIdx> NeighborIndex::knn(const Vec& query, int k, int exclude) const {
    if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    k = std::min(k, exclude >= 0 ? n_ - 1 : n_);
    std::priority_queue<DistIdx> heap;  // top = current worst (largest (d2, idx))

    std::function<void(int)> visit = [&](int id) {
        const Node& node = nodes_[id];
        if (static_cast<int>(heap.size()) == k &&
            box_sq_distance(query, node.box_lo, node.box_hi) > heap.top().first)
            return;
        if (node.axis < 0) {
            for (int i = node.lo; i < node.hi; ++i) {
                const int p = order_[i];
                if (p == exclude) continue;
                const double d2 = (pts_.row(p).transpose() - query).squaredNorm();
                const DistIdx cand{d2, p};
                if (static_cast<int>(heap.size()) < k)
                    heap.push(cand);
                else if (cand < heap.top()) {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        const bool left_first = query[node.axis] <= node.split;
        visit(left_first ? node.left : node.right);
        visit(left_first ? node.right : node.left);
    };
    visit(root_);

    std::vector<DistIdx> out(heap.size());
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
        *it = heap.top();
        heap.pop();
    }
    for (auto& [d2, idx] : out) d2 = std::sqrt(d2);
    return out;
}

std::vector<DistIdx> NeighborIndex::knn_of(int i, int k) const {
    return knn(pts_.row(i).transpose(), k, i);
}

std::vector<int> NeighborIndex::radius_query(const Vec& query, double radius, int exclude) const {
    const double r2 = radius * radius;
    std::vector<int> out;
    std::function<void(int)> visit = [&](int id) {
        const Node& node = nodes_[id];
        if (box_sq_distance(query, node.box_lo, node.box_hi) >= r2) return;
        if (node.axis < 0) {
            for (int i = node.lo; i < node.hi; ++i) {
                const int p = order_[i];
                if (p == exclude) continue;
                if ((pts_.row(p).transpose() - query).squaredNorm() < r2) out.push_back(p);
            }
            return;
        }
        visit(node.left);
        visit(node.right);
    };
    visit(root_);
    std::sort(out.begin(), out.end());
    return out;
}

KnnRadii knn_radii(const NeighborIndex& index, int k, int m) {
    const int n = index.n();
    if (k < 1 || k > n - 1) throw std::invalid_argument("knn_radii: need 1 <= k <= n-1");
    if (m < 1) throw std::invalid_argument("knn_radii: m must be >= 1");
    KnnRadii out;
    out.k = k;
    out.n = n;
    out.h_n = std::pow(static_cast<double>(k) / n, 1.0 / m);
    out.rho.resize(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            out.rho[i] = index.knn_of(static_cast<int>(i), k).back().first;
    });
    return out;
}

std::string construction_name(Construction c) {
    switch (c) {
        case Construction::RNeighborhood: return "r_neighborhood";
        case Construction::KnnDirected: return "knn_directed";
        case Construction::KnnUndirectedOr: return "knn_undirected_or";
        case Construction::SelfTuning: return "self_tuning";
        case Construction::PilotWeightedKnn: return "pilot_weighted_knn";
        case Construction::GenericKernel: return "generic_kernel";
    }
    throw std::logic_error("unreachable");
}

Construction construction_from_name(const std::string& name) {
    for (Construction c : {Construction::RNeighborhood, Construction::KnnDirected,
                           Construction::KnnUndirectedOr, Construction::SelfTuning,
                           Construction::PilotWeightedKnn, Construction::GenericKernel})
        if (construction_name(c) == name) return c;
    throw DataError("unknown construction: " + name);
}

Vec SparseGraph::degrees() const {
    Vec d = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += value(p);
        d[i] = s;
    }
    return d;
}

Vec SparseGraph::matvec(const Vec& f) const {
    if (f.size() != n) throw std::invalid_argument("matvec: dimension mismatch");
    Vec out(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double s = 0.0;
            for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += value(p) * f[col[p]];
            out[i] = s;
        }
    });
    return out;
}

SparseGraph SparseGraph::transpose() const {
    SparseGraph t;
    t.n = n;
    t.construction = construction;
    t.symmetric = symmetric;
    t.params = params;
    t.row_ptr.assign(n + 1, 0);
    for (const auto c : col) ++t.row_ptr[c + 1];
    for (int i = 0; i < n; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
    t.col.resize(col.size());
    if (!val.empty()) t.val.resize(val.size());
    std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int i = 0; i < n; ++i) {
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            const std::size_t q = cursor[col[p]]++;
            t.col[q] = static_cast<std::int32_t>(i);
            if (!val.empty()) t.val[q] = val[p];
        }
    }
    return t;
}

double SparseGraph::asymmetry() const {
    const SparseGraph t = transpose();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        std::size_t pa = row_ptr[i], pb = t.row_ptr[i];
        const std::size_t ea = row_ptr[i + 1], eb = t.row_ptr[i + 1];
        while (pa < ea || pb < eb) {
            const int ca = pa < ea ? col[pa] : n;
            const int cb = pb < eb ? t.col[pb] : n;
            if (ca == cb) {
                worst = std::max(worst, std::abs(value(pa) - t.value(pb)));
                ++pa;
                ++pb;
            } else if (ca < cb) {
                worst = std::max(worst, std::abs(value(pa)));
                ++pa;
            } else {
                worst = std::max(worst, std::abs(t.value(pb)));
                ++pb;
            }
        }
    }
    return worst;
}

SparseGraph SparseGraph::symmetrize_max() const {
    const SparseGraph t = transpose();
    SparseGraph out;
    out.n = n;
    out.construction = construction;
    out.symmetric = true;
    out.params = params;
    out.row_ptr.assign(n + 1, 0);
    const bool units = unit_weights();
    for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < n; ++i) {
            std::size_t pa = row_ptr[i], pb = t.row_ptr[i];
            const std::size_t ea = row_ptr[i + 1], eb = t.row_ptr[i + 1];
            while (pa < ea || pb < eb) {
                const int ca = pa < ea ? col[pa] : n;
                const int cb = pb < eb ? t.col[pb] : n;
                int c;
                double v;
                if (ca == cb) {
                    c = ca;
                    v = std::max(value(pa), t.value(pb));
                    ++pa;
                    ++pb;
                } else if (ca < cb) {
                    c = ca;
                    v = value(pa);
                    ++pa;
                } else {
                    c = cb;
                    v = t.value(pb);
                    ++pb;
                }
                if (pass == 0) {
                    ++out.row_ptr[i + 1];
                } else {
                    const std::size_t q = out.row_ptr[i]++;
                    out.col[q] = static_cast<std::int32_t>(c);
                    if (!units) out.val[q] = v;
                }
            }
        }
        if (pass == 0) {
            for (int i = 0; i < n; ++i) out.row_ptr[i + 1] += out.row_ptr[i];
            out.col.resize(out.row_ptr[n]);
            if (!units) out.val.resize(out.row_ptr[n]);
        } else {
            // restore row_ptr shifted by the fill cursor
            for (int i = n; i > 0; --i) out.row_ptr[i] = out.row_ptr[i - 1];
            out.row_ptr[0] = 0;
        }
    }
    return out;
}

SparseGraph SparseGraph::normalize_by_degree(double lambda) const {
    const Vec d = degrees();
    for (int i = 0; i < n; ++i)
        if (d[i] <= 0) throw DataError("normalize_by_degree: zero-degree vertex");
    Vec dl(n);
    for (int i = 0; i < n; ++i) dl[i] = std::pow(d[i], lambda);
    SparseGraph out = *this;
    out.val.resize(col.size());
    for (int i = 0; i < n; ++i)
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            out.val[p] = value(p) / (dl[i] * dl[col[p]]);
    out.params["degree_normalized"] = lambda;
    return out;
}

SparseGraph SparseGraph::scaled(double factor) const {
    SparseGraph out = *this;
    out.val.resize(col.size());
    for (std::size_t p = 0; p < col.size(); ++p) out.val[p] = factor * value(p);
    return out;
}

int SparseGraph::component_count() const {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < n; ++i)
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            const int a = find(i), b = find(col[p]);
            if (a != b) parent[a] = b;
        }
    int c = 0;
    for (int i = 0; i < n; ++i)
        if (find(i) == i) ++c;
    return c;
}

namespace {

SparseGraph assemble_rows(int n, Construction construction, bool symmetric, nlohmann::json params,
                          std::vector<std::vector<std::int32_t>> cols,
                          std::vector<std::vector<double>>* vals) {
    SparseGraph g;
    g.n = n;
    g.construction = construction;
    g.symmetric = symmetric;
    g.params = std::move(params);
    g.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) g.row_ptr[i + 1] = g.row_ptr[i] + cols[i].size();
    g.col.resize(g.row_ptr[n]);
    if (vals) g.val.resize(g.row_ptr[n]);
    for (int i = 0; i < n; ++i) {
        std::copy(cols[i].begin(), cols[i].end(), g.col.begin() + g.row_ptr[i]);
        if (vals) std::copy((*vals)[i].begin(), (*vals)[i].end(), g.val.begin() + g.row_ptr[i]);
    }
    return g;
}

}  // namespace

SparseGraph build_r_neighborhood(const PointMatrix& points, double r) {
    if (r <= 0) throw std::invalid_argument("build_r_neighborhood: r must be positive");
    const NeighborIndex index(points);
    const int n = index.n();
    std::vector<std::vector<std::int32_t>> rows(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Vec q = points.row(i).transpose();
            for (int j : index.radius_query(q, r, static_cast<int>(i))) {
                if ((points.row(j).transpose() - q).squaredNorm() > 0.0)
                    rows[i].push_back(static_cast<std::int32_t>(j));
            }
        }
    });
    return assemble_rows(n, Construction::RNeighborhood, true, {{"r", r}}, std::move(rows), nullptr);
}

SparseGraph build_knn_directed(const PointMatrix& points, int k) {
    const NeighborIndex index(points);
    const int n = index.n();
    if (k < 1 || k > n - 1) throw std::invalid_argument("build_knn_directed: need 1 <= k <= n-1");
    std::vector<std::vector<std::int32_t>> rows(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            auto nb = index.knn_of(static_cast<int>(i), k);
            rows[i].reserve(nb.size());
            for (const auto& [d, j] : nb) rows[i].push_back(static_cast<std::int32_t>(j));
            std::sort(rows[i].begin(), rows[i].end());
        }
    });
    SparseGraph g =
        assemble_rows(n, Construction::KnnDirected, false, {{"k", k}}, std::move(rows), nullptr);
    g.symmetric = g.asymmetry() == 0.0;
    return g;
}

SparseGraph build_knn_undirected_or(const PointMatrix& points, int k) {
    SparseGraph g = build_knn_directed(points, k).symmetrize_max();
    g.construction = Construction::KnnUndirectedOr;
    g.params = {{"k", k}};
    return g;
}

SparseGraph build_self_tuning(const PointMatrix& points, int k) {
    const NeighborIndex index(points);
    const int n = index.n();
    if (k < 1 || k > n - 1) throw std::invalid_argument("build_self_tuning: need 1 <= k <= n-1");
    Vec rho(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) rho[i] = index.knn_of(static_cast<int>(i), k).back().first;
    });
    if (rho.minCoeff() <= 0) throw DataError("build_self_tuning: zero kNN radius (duplicate points)");
    const double rho_max = rho.maxCoeff();
    std::vector<std::vector<std::int32_t>> cols(n);
    std::vector<std::vector<double>> vals(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Vec q = points.row(i).transpose();
            const double reach = kSelfTuningCutoff * std::sqrt(rho[i] * rho_max);
            for (int j : index.radius_query(q, reach, static_cast<int>(i))) {
                const double d2 = (points.row(j).transpose() - q).squaredNorm();
                const double denom = rho[i] * rho[j];
                if (d2 < 9.0 * denom) {
                    cols[i].push_back(static_cast<std::int32_t>(j));
                    vals[i].push_back(std::exp(-d2 / denom));
                }
            }
        }
    });
    return assemble_rows(n, Construction::SelfTuning, true, {{"k", k}}, std::move(cols), &vals);
}

SparseGraph build_pilot_weighted_knn(const PointMatrix& points, int k, const Vec& pilot) {
    if (pilot.size() != points.rows())
        throw std::invalid_argument("build_pilot_weighted_knn: pilot size mismatch");
    if (pilot.minCoeff() <= 0) throw DataError("build_pilot_weighted_knn: pilot must be positive");
    SparseGraph g = build_knn_undirected_or(points, k);
    g.construction = Construction::PilotWeightedKnn;
    g.params = {{"k", k}};
    g.val.resize(g.col.size());
    for (int i = 0; i < g.n; ++i)
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p)
            g.val[p] = std::sqrt(pilot[i] * pilot[g.col[p]]);
    return g;
}

SparseGraph build_kernel_graph(const PointMatrix& points, const kernels::KernelSpec& spec) {
    const NeighborIndex index(points);
    const int n = index.n();
    const double reach =
        spec.h * spec.base.support_radius() * spec.bandwidth_upper_bound * (1.0 + 1e-12);
    if (!(reach > 0)) throw std::invalid_argument("build_kernel_graph: non-positive reach");
    std::vector<std::vector<std::int32_t>> cols(n);
    std::vector<std::vector<double>> vals(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Vec q = points.row(i).transpose();
            for (int j : index.radius_query(q, reach, static_cast<int>(i))) {
                const double w = kernels::eval_kernel(spec, q, points.row(j).transpose());
                if (w > 0.0) {
                    cols[i].push_back(static_cast<std::int32_t>(j));
                    vals[i].push_back(w);
                }
            }
        }
    });
    return assemble_rows(n, Construction::GenericKernel,
                         spec.bandwidth.symmetric && spec.weight.symmetric, spec.to_json(),
                         std::move(cols), &vals);
}

double median_one_step_std(const PointMatrix& points, int k) {
    const SparseGraph g = build_knn_undirected_or(points, k);
    std::vector<double> stds(g.n);
    for (int i = 0; i < g.n; ++i) {
        double s = 0.0;
        std::size_t cnt = 0;
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p, ++cnt)
            s += (points.row(g.col[p]) - points.row(i)).squaredNorm();
        stds[i] = cnt ? std::sqrt(s / cnt) : 0.0;
    }
    return median(stds);
}

}  // namespace laplim::graphs

#include "mangen/generator.hpp"
#include "mangen/geodesic.hpp"
#include "mangen/hausdorff.hpp"
#include "mangen/rng.hpp"
#include "mangen/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace mangen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Edge {
    std::uint32_t to;
    double weight;
};

std::vector<double> dijkstra(const std::vector<std::vector<Edge>>& graph, std::size_t source) {
    std::vector<double> dist(graph.size(), kInf);
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, static_cast<std::uint32_t>(source));
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (const Edge& e : graph[u]) {
            const double nd = d + e.weight;
            if (nd < dist[e.to]) {
                dist[e.to] = nd;
                heap.emplace(nd, e.to);
            }
        }
    }
    return dist;
}

double radical_inverse(std::size_t i, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % static_cast<std::size_t>(base));
        i /= static_cast<std::size_t>(base);
        f *= inv;
    }
    return r;
}

} // namespace

DiameterEstimate estimate_diameter(const EmbeddedManifold& m, std::size_t sample_count, int k_neighbors,
                                   std::uint64_t seed) {
    if (k_neighbors < 1) throw ArgumentError("k_neighbors must be positive");
    if (sample_count < 10 * static_cast<std::size_t>(k_neighbors)) {
        throw ArgumentError("diameter estimation needs sample_count >= 10 * k_neighbors");
    }
    Rng rng(seed);
    const PointCloud cloud = embed_all(m, sample_rejection(m, m.chart_domain, sample_count, rng));
    const std::size_t n = cloud.size();
    const auto k = static_cast<std::size_t>(k_neighbors);

    // k nearest neighbours per point, plus the largest chord in the sample
    std::vector<std::vector<Edge>> nearest(n);
    double max_chord_sq = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_chord_sq)
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::uint32_t>> row;
        row.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dsq = squared_distance(cloud.point(i), cloud.point(j));
            max_chord_sq = std::max(max_chord_sq, dsq);
            row.emplace_back(dsq, static_cast<std::uint32_t>(j));
        }
        const std::size_t keep = std::min(k, row.size());
        std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep), row.end());
        for (std::size_t r = 0; r < keep; ++r) nearest[i].push_back({row[r].second, std::sqrt(row[r].first)});
    }
    std::vector<std::vector<Edge>> graph(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const Edge& e : nearest[i]) {
            graph[i].push_back(e);
            graph[e.to].push_back({static_cast<std::uint32_t>(i), e.weight});
        }
    }

    // farthest-point sources in Euclidean distance
    const std::size_t source_count = std::min<std::size_t>(kDiameterSources, n);
    std::vector<std::size_t> sources{0};
    std::vector<double> gap(n, kInf);
    while (sources.size() < source_count) {
        const std::size_t last = sources.back();
        std::size_t far = 0;
        for (std::size_t j = 0; j < n; ++j) {
            gap[j] = std::min(gap[j], squared_distance(cloud.point(j), cloud.point(last)));
            if (gap[j] > gap[far]) far = j;
        }
        sources.push_back(far);
    }

    std::vector<double> longest(source_count, 0.0);
    std::vector<std::size_t> unreachable(source_count, 0);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t s = 0; s < source_count; ++s) {
        const auto dist = dijkstra(graph, sources[s]);
        for (double d : dist) {
            if (d == kInf) ++unreachable[s];
            else longest[s] = std::max(longest[s], d);
        }
    }
    for (std::size_t s = 0; s < source_count; ++s) {
        if (unreachable[s] > 0) {
            std::ostringstream os;
            os << "k-NN graph on " << m.id << " is disconnected (" << unreachable[s]
               << " points unreachable with k = " << k_neighbors << "); try a larger k";
            throw ConnectivityError(os.str());
        }
    }

    DiameterEstimate est;
    est.graph_diameter = *std::max_element(longest.begin(), longest.end());
    est.value = kDiameterSafetyFactor * est.graph_diameter;
    est.max_chord = std::sqrt(max_chord_sq);
    est.sample_count = sample_count;
    est.k_neighbors = k_neighbors;
    return est;
}

Matrix orthonormal_frame(const EmbeddedManifold& m, const ChartPoint& q) {
    const Matrix g = metric(m, q);
    const int d = m.dim;
    const double scale = std::max(g.diagonal().maxCoeff(), 1e-300);
    Matrix frame = Matrix::Identity(d, d);
    for (int j = 0; j < d; ++j) {
        Vector u = frame.col(j);
        for (int i = 0; i < j; ++i) {
            const Vector fi = frame.col(i);
            u -= (u.dot(g * fi)) * fi;
        }
        const double norm_sq = u.dot(g * u);
        if (!(norm_sq > 1e-24 * scale)) {
            std::ostringstream os;
            os << "degenerate metric of " << m.id << " at (" << q.transpose() << ")";
            throw SingularityError(os.str());
        }
        frame.col(j) = u / std::sqrt(norm_sq);
    }
    return frame;
}

GeneratorMap::GeneratorMap(EmbeddedManifold manifold, ChartPoint base, double radius)
    : manifold_(std::move(manifold)), base_(std::move(base)), radius_(radius) {
    if (!(radius_ >= 0.0) || !std::isfinite(radius_)) throw ArgumentError("generator radius must be finite and >= 0");
    require_in_domain(manifold_, base_);
    frame_ = orthonormal_frame(manifold_, base_);
}

AmbientPoint GeneratorMap::operator()(const Vector& z) const {
    if (z.size() != manifold_.dim) throw ShapeError("latent point must have " + std::to_string(manifold_.dim) + " entries");
    return exp_map(manifold_, base_, tangent(z));
}

GeneratorMap build_generator(const EmbeddedManifold& m, const ChartPoint& q, double radius) {
    if (!(radius > 0.0)) throw ArgumentError("generator radius R0 must be positive");
    return GeneratorMap(m, q, radius);
}

std::vector<Vector> latent_grid(int dim, int resolution) {
    if (dim < 1 || resolution < 1) throw ArgumentError("latent grid needs positive dimension and resolution");
    const double count = std::pow(static_cast<double>(resolution), dim);
    if (count > 1e7) throw ResourceError("latent grid of resolution^d > 1e7 points");
    const auto n = static_cast<std::size_t>(count);
    std::vector<Vector> out;
    out.reserve(n);
    auto coord = [resolution](std::size_t i) {
        return resolution == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / (resolution - 1);
    };
    if (dim <= 2) {
        for (std::size_t flat = 0; flat < n; ++flat) {
            Vector z(dim);
            std::size_t rest = flat;
            for (int a = dim - 1; a >= 0; --a) {
                z[a] = coord(rest % static_cast<std::size_t>(resolution));
                rest /= static_cast<std::size_t>(resolution);
            }
            out.push_back(z);
        }
        return out;
    }
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (dim > 16) throw ArgumentError("low-discrepancy latent sampling supports up to 16 dimensions");
    for (std::size_t i = 0; i < n; ++i) {
        Vector z(dim);
        for (int a = 0; a < dim; ++a) z[a] = -1.0 + 2.0 * radical_inverse(i + 1, primes[a]);
        out.push_back(z);
    }
    return out;
}

double verify_surjectivity(const GeneratorMap& gen, int grid_resolution, std::size_t manifold_sample_count,
                           std::uint64_t seed) {
    if (grid_resolution < 1 || manifold_sample_count < 1) throw ArgumentError("resolutions must be positive");
    const auto& m = gen.manifold();
    const PointCloud image = evaluate_latents(gen, latent_grid(m.dim, grid_resolution), m.ambient_dim, "generated");
    const PointCloud target = sample_manifold(m, manifold_sample_count, seed, m.id);
    return hausdorff(image, target);
}

} // namespace mangen

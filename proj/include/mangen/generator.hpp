#pragma once

#include "mangen/manifold.hpp"
#include "mangen/point_cloud.hpp"

#include <cstdint>
#include <vector>

namespace mangen {

inline constexpr double kDiameterSafetyFactor = 1.2;
inline constexpr int kDiameterSources = 16;

struct DiameterEstimate {
    double value = 0.0;           // R0 = safety_factor * graph_diameter
    double graph_diameter = 0.0;  // longest shortest path found in the k-NN graph
    double max_chord = 0.0;       // largest Euclidean distance in the sample
    std::size_t sample_count = 0;
    int k_neighbors = 0;
    double safety_factor = kDiameterSafetyFactor;
};

/// Riemannian diameter bound from shortest paths in a k-nearest-neighbour
/// graph over a volume-uniform sample, run from 16 farthest-point sources.
DiameterEstimate estimate_diameter(const EmbeddedManifold& m, std::size_t sample_count, int k_neighbors,
                                   std::uint64_t seed);

/// z in [-1, 1]^d  ->  exp_q(R0 * F z), with F a g(q)-orthonormal frame.
/// The unit Euclidean ball sits inside the cube and F maps it onto the unit
/// g-ball, so the cube's image covers every tangent vector of norm <= R0.
class GeneratorMap {
public:
    GeneratorMap(EmbeddedManifold manifold, ChartPoint base, double radius);

    AmbientPoint operator()(const Vector& z) const;
    /// The tangent vector R0 F z the latent point is sent to before exp.
    Vector tangent(const Vector& z) const { return radius_ * (frame_ * z); }

    const EmbeddedManifold& manifold() const { return manifold_; }
    const ChartPoint& base_point() const { return base_; }
    double radius() const { return radius_; }
    const Matrix& frame() const { return frame_; }
    int latent_dim() const { return manifold_.dim; }

private:
    EmbeddedManifold manifold_;
    ChartPoint base_;
    double radius_;
    Matrix frame_;
};

/// g-orthonormal frame from Gram-Schmidt on the coordinate basis.
Matrix orthonormal_frame(const EmbeddedManifold& m, const ChartPoint& q);

GeneratorMap build_generator(const EmbeddedManifold& m, const ChartPoint& q, double radius);

/// Tensor grid with `resolution` points per axis (endpoints included) for
/// d <= 2; the first resolution^d points of a Halton sequence for d >= 3.
std::vector<Vector> latent_grid(int dim, int resolution);

/// Evaluates any latent map on a list of latents, OpenMP-parallel; output
/// order follows input order.
template <class Map>
PointCloud evaluate_latents(const Map& map, const std::vector<Vector>& latents, int ambient_dim,
                            std::string label = {}) {
    std::vector<Vector> out(latents.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < latents.size(); ++i) out[i] = map(latents[i]);
    PointCloud cloud(ambient_dim, std::move(label));
    cloud.reserve(out.size());
    for (const auto& p : out) cloud.push_back(p);
    return cloud;
}

namespace serial {
template <class Map>
PointCloud evaluate_latents(const Map& map, const std::vector<Vector>& latents, int ambient_dim,
                            std::string label = {}) {
    PointCloud cloud(ambient_dim, std::move(label));
    cloud.reserve(latents.size());
    for (const auto& z : latents) cloud.push_back(map(z));
    return cloud;
}
} // namespace serial

/// Hausdorff distance between the generator image of the latent grid and a
/// volume-uniform manifold sample.
double verify_surjectivity(const GeneratorMap& gen, int grid_resolution, std::size_t manifold_sample_count,
                           std::uint64_t seed);

} // namespace mangen

#pragma once

#include "mangen/core.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mangen {

/// Finite set of points of equal dimension, stored row-major.
class PointCloud {
public:
    explicit PointCloud(int dim = 0, std::string label = {}) : dim_(dim), label_(std::move(label)) {}

    static PointCloud from_points(const std::vector<Vector>& points, std::string label = {});

    int dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_); }
    bool empty() const { return coords_.empty(); }
    const std::string& label() const { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    Vector row(std::size_t i) const;
    void push_back(std::span<const double> p);
    void push_back(const Vector& p);
    void reserve(std::size_t n) { coords_.reserve(n * static_cast<std::size_t>(dim_)); }
    const std::vector<double>& data() const { return coords_; }

    /// Throws ArgumentError if any coordinate is NaN or infinite.
    void require_finite() const;

private:
    int dim_;
    std::string label_;
    std::vector<double> coords_;
};

/// CSV layout: a "# dim=<n> label=<text>" header line, then one point per row.
void write_csv(const PointCloud& cloud, std::ostream& out);
PointCloud read_csv(std::istream& in);
void save_csv(const PointCloud& cloud, const std::string& path);
PointCloud load_csv(const std::string& path);

/// Largest nearest-neighbour gap inside the cloud (0 for fewer than 2 points).
double net_fineness(const PointCloud& cloud);

} // namespace mangen

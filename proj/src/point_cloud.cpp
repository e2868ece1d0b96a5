#include "mangen/point_cloud.hpp"
#include "mangen/hausdorff.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mangen {

PointCloud PointCloud::from_points(const std::vector<Vector>& points, std::string label) {
    if (points.empty()) return PointCloud(0, std::move(label));
    PointCloud cloud(static_cast<int>(points.front().size()), std::move(label));
    cloud.reserve(points.size());
    for (const auto& p : points) cloud.push_back(p);
    return cloud;
}

Vector PointCloud::row(std::size_t i) const {
    const auto p = point(i);
    return Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
}

void PointCloud::push_back(std::span<const double> p) {
    if (static_cast<int>(p.size()) != dim_) {
        throw ShapeError("point of dimension " + std::to_string(p.size()) + " added to a cloud of dimension " +
                         std::to_string(dim_));
    }
    coords_.insert(coords_.end(), p.begin(), p.end());
}

void PointCloud::push_back(const Vector& p) {
    push_back(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

void PointCloud::require_finite() const {
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (!std::isfinite(coords_[i])) {
            throw ArgumentError("non-finite coordinate in point " + std::to_string(i / dim_) + " of cloud '" +
                                label_ + "'");
        }
    }
}

void write_csv(const PointCloud& cloud, std::ostream& out) {
    out << "# dim=" << cloud.dim() << " label=" << cloud.label() << '\n';
    char buf[32];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto p = cloud.point(i);
        for (std::size_t j = 0; j < p.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", p[j]);
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

PointCloud read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# dim=", 0) != 0) {
        throw IoError("point cloud CSV must start with a '# dim=<n> label=<text>' header");
    }
    int dim = 0;
    std::string label;
    {
        const auto label_pos = line.find(" label=");
        const std::string dim_text = line.substr(6, label_pos == std::string::npos ? std::string::npos : label_pos - 6);
        try {
            dim = std::stoi(dim_text);
        } catch (const std::exception&) {
            throw IoError("bad dimension in point cloud header: " + line);
        }
        if (label_pos != std::string::npos) label = line.substr(label_pos + 7);
    }
    if (dim < 1) throw IoError("point cloud dimension must be positive");
    PointCloud cloud(dim, label);
    std::vector<double> row;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        row.clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw IoError("unparsable value '" + cell + "' on line " + std::to_string(line_no));
            row.push_back(v);
        }
        if (static_cast<int>(row.size()) != dim) {
            throw IoError("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                          " columns, header says " + std::to_string(dim));
        }
        cloud.push_back(row);
    }
    return cloud;
}

void save_csv(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_csv(cloud, out);
}

PointCloud load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_csv(in);
}

double net_fineness(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    if (n < 2) return 0.0;
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            best = std::min(best, squared_distance(cloud.point(i), cloud.point(j)));
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

} // namespace mangen

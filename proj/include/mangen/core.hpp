#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mangen {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base for every error raised by the library. `kind()` is a short stable tag
/// ("domain", "shape", ...) used in CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + " error: " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MANGEN_DEFINE_ERROR(Name, tag)                                         \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(tag, what) {}           \
    }

MANGEN_DEFINE_ERROR(DomainError, "domain");
MANGEN_DEFINE_ERROR(SingularityError, "singularity");
MANGEN_DEFINE_ERROR(ShapeError, "shape");
MANGEN_DEFINE_ERROR(ArgumentError, "argument");
MANGEN_DEFINE_ERROR(ResourceError, "resource");
MANGEN_DEFINE_ERROR(ConnectivityError, "connectivity");
MANGEN_DEFINE_ERROR(InfeasibleError, "infeasible");
MANGEN_DEFINE_ERROR(PrecisionError, "precision");
MANGEN_DEFINE_ERROR(SchemaError, "schema");
MANGEN_DEFINE_ERROR(IoError, "io");

#undef MANGEN_DEFINE_ERROR

/// Raised when a geodesic leaves a non-periodic chart axis.
class EscapeError : public Error {
public:
    EscapeError(const std::string& what, double exit_time)
        : Error("escape", what), exit_time_(exit_time) {}
    double exit_time() const noexcept { return exit_time_; }

private:
    double exit_time_;
};

/// Raised when a training loss becomes NaN or infinite.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch)
        : Error("divergence", what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

} // namespace mangen

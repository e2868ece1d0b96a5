#pragma once

#include "mangen/network.hpp"

#include <iosfwd>
#include <string>

namespace mangen {

/// Checkpoint layout: one line of compact JSON describing the layers, seed and
/// parameter count, a newline, then every parameter as a little-endian
/// IEEE-754 double in flatten_parameters() order.
void write_checkpoint(const NetworkSpec& net, std::ostream& out);
NetworkSpec read_checkpoint(std::istream& in);
void save_checkpoint(const NetworkSpec& net, const std::string& path);
NetworkSpec load_checkpoint(const std::string& path);

} // namespace mangen

#include "mangen/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

namespace mangen {

namespace {

constexpr const char* kFormat = "mangen-network";
constexpr int kVersion = 1;

nlohmann::json layer_header(const LayerSpec& l) {
    nlohmann::json j;
    j["kind"] = to_string(l.kind);
    j["activation"] = to_string(l.activation);
    if (l.kind == LayerKind::fully_connected) {
        j["in_features"] = l.in_features;
        j["out_features"] = l.out_features;
    } else {
        j["size"] = l.conv_size;
        j["in_channels"] = l.conv_in_channels;
        j["out_channels"] = l.conv_out_channels;
        j["kernel"] = l.kernel;
        j["stride"] = l.stride;
    }
    return j;
}

LayerSpec layer_from_header(const nlohmann::json& j) {
    const LayerKind kind = layer_kind_from_string(j.at("kind").get<std::string>());
    const Activation act = activation_from_string(j.at("activation").get<std::string>());
    if (kind == LayerKind::fully_connected) {
        return LayerSpec::fully_connected(j.at("in_features").get<int>(), j.at("out_features").get<int>(), act);
    }
    const int size = j.at("size").get<int>(), k = j.at("in_channels").get<int>(), l = j.at("out_channels").get<int>();
    const int s = j.at("kernel").get<int>(), st = j.at("stride").get<int>();
    return kind == LayerKind::conv ? LayerSpec::conv(size, k, l, s, st, act)
                                   : LayerSpec::conv_transpose(size, k, l, s, st, act);
}

void put_le(std::ostream& out, double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>(bits & 0xff);
        bits >>= 8;
    }
    out.write(bytes, 8);
}

double get_le(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (in.gcount() != 8) throw IoError("checkpoint parameter block is truncated");
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
    return std::bit_cast<double>(bits);
}

} // namespace

void write_checkpoint(const NetworkSpec& net, std::ostream& out) {
    net.validate();
    nlohmann::json header;
    header["format"] = kFormat;
    header["version"] = kVersion;
    header["seed"] = net.seed;
    header["parameter_count"] = net.parameter_count();
    header["layers"] = nlohmann::json::array();
    for (const auto& l : net.layers) header["layers"].push_back(layer_header(l));
    out << header.dump() << '\n';
    for (double p : flatten_parameters(net)) put_le(out, p);
    if (!out) throw IoError("failed writing checkpoint");
}

NetworkSpec read_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("checkpoint is empty");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    if (header.value("format", "") != kFormat || header.value("version", 0) != kVersion) {
        throw IoError("unsupported checkpoint format");
    }
    NetworkSpec net;
    try {
        net.seed = header.at("seed").get<std::uint64_t>();
        for (const auto& lj : header.at("layers")) net.layers.push_back(layer_from_header(lj));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed checkpoint header: ") + e.what());
    }
    net.validate();
    const auto expected = header.at("parameter_count").get<std::size_t>();
    if (expected != net.parameter_count()) throw IoError("checkpoint parameter count does not match its layers");
    std::vector<double> flat(expected);
    for (double& p : flat) p = get_le(in);
    set_parameters(net, flat);
    return net;
}

void save_checkpoint(const NetworkSpec& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_checkpoint(net, out);
}

NetworkSpec load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_checkpoint(in);
}

} // namespace mangen

#include "hoconv/cli/checkpoint.hpp"

#include <string>

#include "hoconv/core/errors.hpp"

namespace hoconv::cli {

using nlohmann::json;

Bytes encode_checkpoint(network::Model& model) {
    const auto refs = model.state();
    json arrays = json::array();
    for (const auto& r : refs) arrays.push_back({{"name", r.name}, {"length", r.value->size()}});
    const std::string header = json{{"model", model.describe()}, {"arrays", arrays}}.dump();

    ByteWriter w;
    w.raw("HOCK", 4);
    w.u8(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(header.size()));
    w.raw(header.data(), header.size());
    for (const auto& r : refs)
        for (double v : *r.value) w.f64(v);
    return w.take();
}

network::Model decode_checkpoint(const Bytes& bytes) {
    ByteReader r(bytes);
    char magic[4];
    r.raw(magic, 4);
    if (std::string_view(magic, 4) != "HOCK") throw FormatError("not a HOCK checkpoint (bad magic)");
    if (const auto v = r.u8(); v != kCheckpointVersion) {
        throw FormatError("unsupported HOCK version " + std::to_string(v));
    }
    std::string text(r.u32(), '\0');
    r.raw(text.data(), text.size());

    json header;
    try {
        header = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("HOCK header is not valid JSON: ") + e.what());
    }
    network::Model model;
    try {
        model = network::Model::from_description(header.at("model"));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("HOCK model description rejected: ") + e.what());
    } catch (const json::exception& e) {
        throw FormatError(std::string("HOCK header incomplete: ") + e.what());
    }

    auto refs = model.state();
    const json& arrays = header.value("arrays", json::array());
    if (arrays.size() != refs.size()) {
        throw FormatError("HOCK manifest lists " + std::to_string(arrays.size()) + " arrays, model has " +
                          std::to_string(refs.size()));
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto name = arrays[i].value("name", std::string{});
        const auto length = arrays[i].value("length", std::size_t{0});
        if (name != refs[i].name || length != refs[i].value->size()) {
            throw FormatError("HOCK manifest entry " + std::to_string(i) + " (" + name + ", " +
                              std::to_string(length) + ") does not match model array " + refs[i].name + " of length " +
                              std::to_string(refs[i].value->size()));
        }
    }
    for (auto& ref : refs)
        for (auto& v : *ref.value) v = r.f64();
    if (r.remaining() != 0) throw FormatError("HOCK: trailing bytes after weights");
    return model;
}

void write_checkpoint(const std::filesystem::path& path, network::Model& model) {
    write_file_atomic(path, encode_checkpoint(model));
}

network::Model read_checkpoint(const std::filesystem::path& path) {
    try {
        return decode_checkpoint(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace hoconv::cli

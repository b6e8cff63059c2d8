#include "hoconv/network/builders.hpp"

#include "hoconv/core/errors.hpp"

namespace hoconv::network {

using nlohmann::json;

TextureModelKind TextureModelKind::parse(std::string_view name) {
    if (name == "cnn") return {0};
    if (name.size() == 6 && name.substr(0, 5) == "hocnn" && name[5] >= '1' && name[5] <= '4') {
        return {name[5] - '0'};
    }
    throw ParameterError("unknown model kind '" + std::string(name) + "' (expected cnn or hocnn1..hocnn4)");
}

std::string TextureModelKind::name() const { return order == 0 ? "cnn" : "hocnn" + std::to_string(order); }

json texture_model_description(TextureModelKind kind, std::string_view first_activation, int height, int width) {
    if (kind.order < 0 || kind.order > 4) throw ParameterError("texture model order must be 0..4");
    json first = kind.is_cnn()
                     ? json{{"type", "conv2d"}, {"out", 10}, {"kh", 2}, {"kw", 2}, {"tag", "block1_conv"}}
                     : json{{"type", "hoconv"}, {"out", 2},  {"order", kind.order},
                            {"kh", 2},          {"kw", 2},   {"tag", "block1_conv"}};
    json layers = json::array({
        first,
        {{"type", "batchnorm2d"}},
        {{"type", "activation"}, {"kind", std::string(first_activation)}},
        {{"type", "maxpool2d"}, {"k", 2}, {"stride", 1}, {"pad_end", 1}, {"tag", "block1"}},
        {{"type", "conv2d"}, {"out", 2}, {"kh", 8}, {"kw", 2}},
        {{"type", "batchnorm2d"}},
        {{"type", "activation"}, {"kind", "relu"}},
        {{"type", "maxpool2d"}, {"k", 8}, {"stride", 8}, {"tag", "block2"}},
        {{"type", "flatten"}},
        {{"type", "linear"}, {"out", 10}, {"tag", "logits"}},
    });
    return {{"input", {1, height, width}}, {"layers", layers}};
}

Model build_texture_model(TextureModelKind kind, std::uint64_t seed, std::string_view first_activation, int height,
                          int width) {
    Model m = Model::from_description(texture_model_description(kind, first_activation, height, width));
    Rng rng(seed);
    m.init(rng);
    return m;
}

Model build_texture_cnn(std::uint64_t seed) { return build_texture_model({0}, seed); }

Model build_texture_hocnn(int max_order, std::uint64_t seed) {
    if (max_order < 1 || max_order > 4) throw ParameterError("hocnn order must be 1..4");
    return build_texture_model({max_order}, seed);
}

}  // namespace hoconv::network

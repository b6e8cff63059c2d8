#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hoconv/network/model.hpp"

namespace hoconv::network {

/// Texture-benchmark model family. `order` 0 selects the baseline CNN
/// (10 linear 2x2 kernels); 1..4 select a 2-kernel HoConv first layer.
struct TextureModelKind {
    int order = 0;

    static TextureModelKind parse(std::string_view name);  // "cnn", "hocnn1".."hocnn4"
    std::string name() const;
    bool is_cnn() const noexcept { return order == 0; }
};

/// Architecture of the texture models (1x32x32 input):
///
///   block1: Conv(10, 2x2) | HoConv(2, 2x2, orders 1..P)
///           -> BatchNorm -> activation -> MaxPool(k=2, stride=1, pad_end=1)
///   block2: Conv(2, 8x2) -> BatchNorm -> ReLU -> MaxPool(k=8, stride=8)
///   head:   Flatten -> Linear(10)
///
/// Valid 2x2 convolution maps 32x32 to 31x31; the stride-1 pool padded by one
/// trailing row/column keeps 31x31, so block1 carries 10*31*31 = 9610 (CNN)
/// or 2*31*31 = 1922 (HoCNN) activations. Block2 gives 24x30, pooled to 3x3.
/// Tags: "block1_conv" (pre-BN first layer), "block1", "block2", "logits".
nlohmann::json texture_model_description(TextureModelKind kind, std::string_view first_activation = "relu",
                                         int height = 32, int width = 32);

Model build_texture_model(TextureModelKind kind, std::uint64_t seed, std::string_view first_activation = "relu",
                          int height = 32, int width = 32);

Model build_texture_cnn(std::uint64_t seed);
Model build_texture_hocnn(int max_order, std::uint64_t seed);

/// Number of leading layers forming block1 (conv, BN, activation, pool).
constexpr std::size_t kBlock1Layers = 4;

}  // namespace hoconv::network

#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoconv/core/rng.hpp"
#include "hoconv/network/layers.hpp"

namespace hoconv::network {

/// Ordered layer stack over a fixed CHW input shape. Layers may carry a tag
/// ("block1", "logits", ...) so analyses can read intermediate activations.
class Model {
public:
    Model() = default;
    explicit Model(Shape input_chw) : input_chw_(std::move(input_chw)) {}

    /// Appends a layer; its input shape must chain from the previous output.
    void add(Layer layer, std::string tag = {});

    const Shape& input_shape() const noexcept { return input_chw_; }
    std::size_t size() const noexcept { return layers_.size(); }
    Layer& layer(std::size_t i) { return layers_.at(i); }
    const Layer& layer(std::size_t i) const { return layers_.at(i); }
    const std::string& tag(std::size_t i) const { return tags_.at(i); }
    std::vector<std::string> tags() const;
    /// Output shape after layer i for a batch of one.
    Shape shape_after(std::size_t i) const;
    Shape output_shape() const;

    void set_mode(Mode mode) noexcept { mode_ = mode; }
    Mode mode() const noexcept { return mode_; }
    void reseed_dropout(std::uint64_t seed) { dropout_rng_ = Rng(seed); }

    /// Initializes every parametrized layer from `rng` in declaration order.
    void init(Rng& rng);

    Tensor forward(const Tensor& x);
    /// Runs the first `count` layers only.
    Tensor forward_prefix(const Tensor& x, std::size_t count);
    /// Full forward pass that also returns the outputs of the requested tagged
    /// layers; throws ParameterError for an unknown tag.
    std::map<std::string, Tensor> forward_collect(const Tensor& x, const std::vector<std::string>& tags);
    Tensor backward(const Tensor& grad_out);

    /// All named arrays (parameters and running statistics) in declaration order.
    std::vector<StateRef> state();
    std::vector<StateRef> parameters();
    void zero_grad();

    /// Learnable scalars; BatchNorm affine terms optional.
    std::size_t parameter_count(bool include_batchnorm = true);

    /// Architecture as JSON ({"input": [C,H,W], "layers": [...]}); weights excluded.
    nlohmann::json describe() const;
    /// Builds an uninitialized model from describe()-style JSON. Input
    /// channels of each layer are inferred from the running shape.
    static Model from_description(const nlohmann::json& desc);

private:
    Shape input_chw_;
    std::vector<Layer> layers_;
    std::vector<std::string> tags_;
    std::vector<Shape> shapes_;  // output shape after each layer, batch 1
    Mode mode_ = Mode::eval;
    Rng dropout_rng_{0};
};

struct LossResult {
    double loss = 0.0;
    Tensor grad;  // d(mean loss)/d(logits)
};

/// Mean softmax cross-entropy over the batch.
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

}  // namespace hoconv::network

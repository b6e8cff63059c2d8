#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hoconv/core/rng.hpp"
#include "hoconv/core/tensor.hpp"
#include "hoconv/volterra/ho_layer.hpp"

namespace hoconv::network {

enum class Mode { train, eval };

/// A named array owned by a layer. Trainable entries carry a gradient buffer
/// of the same length; running statistics do not.
struct StateRef {
    std::string name;
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;

    bool trainable() const noexcept { return grad != nullptr; }
};

struct ForwardContext {
    Mode mode = Mode::eval;
    Rng* rng = nullptr;  // dropout masks
};

struct Conv2d {
    int in_ch = 1, out_ch = 1, kh = 1, kw = 1, stride = 1, padding = 0;
    bool has_bias = true;
    std::vector<double> weight;  // [out][in][kh][kw]
    std::vector<double> bias;
    std::vector<double> grad_weight, grad_bias;
    Tensor cache;

    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int kh, int kw, int stride = 1, int padding = 0, bool bias = true);
    void init(Rng& rng);
    Shape output_shape(const Shape& in) const;
    Tensor forward(const Tensor& x, const ForwardContext& ctx);
    Tensor backward(const Tensor& grad);
    void collect(std::vector<StateRef>& out, const std::string& prefix);
};

/// Network-facing wrapper around the Volterra layer with gradient buffers.
struct HoConv {
    volterra::HoConvLayer layer;
    std::vector<std::vector<double>> grad_weights;  // [channel * max_order + order - 1]
    std::vector<double> grad_bias;
    Tensor cache;

    HoConv() = default;
    HoConv(int in_ch, int out_ch, int max_order, int kh, int kw, int stride = 1, int padding = 0);
    void init(Rng& rng);
    Shape output_shape(const Shape& in) const { return layer.output_shape(in); }
    Tensor forward(const Tensor& x, const ForwardContext& ctx);
    Tensor backward(const Tensor& grad);
    void collect(std::vector<StateRef>& out, const std::string& prefix);
};

struct BatchNorm2d {
    int channels = 1;
    double eps = 1e-5;
    double momentum = 0.1;
    std::vector<double> gamma, beta, running_mean, running_var;
    std::vector<double> grad_gamma, grad_beta;
    // cache
    Tensor x_hat;
    std::vector<double> inv_std;
    Mode cached_mode = Mode::eval;

    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.1);
    void init(Rng&) {}
    Shape output_shape(const Shape& in) const { return in; }
    Tensor forward(const Tensor& x, const ForwardContext& ctx);
    Tensor backward(const Tensor& grad);
    void collect(std::vector<StateRef>& out, const std::string& prefix);
};

enum class ActKind { relu, leaky_relu, gelu, sigmoid, mish };

std::string_view act_name(ActKind kind);
ActKind act_from_name(std::string_view name);

struct Activation {
    ActKind kind = ActKind::relu;
    double negative_slope = 0.01;
    Tensor cache;

    Activation() = default;
    explicit Activation(ActKind k) : kind(k) {}
    void init(Rng&) {}
    Shape output_shape(const Shape& in) const { return in; }
    Tensor forward(const Tensor& x, const ForwardContext& ctx);
    Tensor backward(const Tensor& grad);
    void collect(std::vector<StateRef>&, const std::string&) {}
};

/// Max pooling with independent leading/trailing padding (padded cells never win).
struct MaxPool2d {
    int k = 2, stride = 2, pad_begin = 0, pad_end = 0;
    std::vector<std::size_t> argmax;
    Shape in_shape;

    MaxPool2d() = default;
    MaxPool2d(int k, int stride, int pad_begin = 0, int pad_end = 0);
    void init(Rng&) {}
    Shape output_shape(const Shape& in) const;
    Tensor forward(const Tensor& x, const ForwardContext& ctx);
    Tensor backward(const Tensor& grad);
    void collect(std::vector<StateRef>&, const std::string&) {}
};

struct Flatten {
    Shape in_shape;
    void init(Rng&) {}
    Shape output_shape(const Shape& in) const;
    Tensor forward(const Tensor& x, const ForwardContext& ctx);
    Tensor backward(const Tensor& grad);
    void collect(std::vector<StateRef>&, const std::string&) {}
};

struct Linear {
    int in = 1, out = 1;
    bool has_bias = true;
    std::vector<double> weight;  // [out][in]
    std::vector<double> bias;
    std::vector<double> grad_weight, grad_bias;
    Tensor cache;

    Linear() = default;
    Linear(int in, int out, bool bias = true);
    void init(Rng& rng);
    Shape output_shape(const Shape& in) const;
    Tensor forward(const Tensor& x, const ForwardContext& ctx);
    Tensor backward(const Tensor& grad);
    void collect(std::vector<StateRef>& out, const std::string& prefix);
};

struct Dropout {
    double p = 0.0;
    std::vector<double> mask;

    Dropout() = default;
    explicit Dropout(double p);
    void init(Rng&) {}
    Shape output_shape(const Shape& in) const { return in; }
    Tensor forward(const Tensor& x, const ForwardContext& ctx);
    Tensor backward(const Tensor& grad);
    void collect(std::vector<StateRef>&, const std::string&) {}
};

using Layer = std::variant<Conv2d, HoConv, BatchNorm2d, Activation, MaxPool2d, Flatten, Linear, Dropout>;

std::string_view layer_type(const Layer& layer);

Tensor layer_forward(Layer& layer, const Tensor& x, const ForwardContext& ctx);
/// Requires a preceding forward on the same layer; throws otherwise.
Tensor layer_backward(Layer& layer, const Tensor& grad);

double apply_activation(ActKind kind, double x, double slope = 0.01);
double activation_derivative(ActKind kind, double x, double slope = 0.01);

}  // namespace hoconv::network

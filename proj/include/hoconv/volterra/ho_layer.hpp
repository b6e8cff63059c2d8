#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hoconv/core/rng.hpp"
#include "hoconv/core/tensor.hpp"
#include "hoconv/volterra/monomials.hpp"

namespace hoconv::volterra {

/// Order-p kernel over a flattened kh x kw x c_in patch, stored as one weight
/// per symmetric monomial (enumerate_monomials order). Each stored weight
/// multiplies its monomial exactly once.
struct HoKernel {
    int order = 1;
    int kh = 1;
    int kw = 1;
    int c_in = 1;
    std::vector<double> weights;
    double scale = 1.0;

    int support() const noexcept { return kh * kw * c_in; }

    /// Zero kernel with the canonical length and scale for its order.
    static HoKernel zeros(int order, int kh, int kw, int c_in);
};

/// 1 for p == 1, 1/sqrt(C(n+p-1, p)) otherwise.
double order_scale(int n, int p);

/// Sum over monomials of w[m] * prod(x[m]); no scale applied.
double evaluate_symmetric(const HoKernel& kernel, const double* x);

/// Dense n^p tensor T with T[i1..ip] = w[sorted(i)] / multiplicity, the
/// full-tensor form of a symmetric kernel. Row-major over (i1, ..., ip).
/// Throws ParameterError when n^p exceeds 10^6.
std::vector<double> expand_to_full_tensor(const HoKernel& kernel);

/// Sum over all n^p index tuples of T[i] * x[i1] * ... * x[ip].
double contract_full_tensor(const std::vector<double>& full, int n, int p, const double* x);

struct LayerGeometry {
    int c_in = 1;
    int kh = 1;
    int kw = 1;
    int stride = 1;
    int padding = 0;
};

/// Truncated Volterra convolution: per output channel, orders 1..max_order
/// plus a bias. Output at each window is
///     b + sum_p s_p * sum_m w_p[m] * prod_{i in m} x_i.
class HoConvLayer {
public:
    HoConvLayer() = default;
    HoConvLayer(int out_channels, int max_order, LayerGeometry geometry);

    int out_channels() const noexcept { return out_channels_; }
    int max_order() const noexcept { return max_order_; }
    const LayerGeometry& geometry() const noexcept { return geom_; }
    int support() const noexcept { return geom_.c_in * geom_.kh * geom_.kw; }
    const MonomialTable& table() const noexcept { return *table_; }

    /// kernel(c, p) for p in 1..max_order.
    HoKernel& kernel(int channel, int order);
    const HoKernel& kernel(int channel, int order) const;
    std::vector<double>& bias() noexcept { return bias_; }
    const std::vector<double>& bias() const noexcept { return bias_; }

    /// Uniform(-1/sqrt(n), 1/sqrt(n)) for every weight of every order and the bias.
    void init_uniform(Rng& rng);

    Shape output_shape(const Shape& input_nchw) const;

private:
    int out_channels_ = 0;
    int max_order_ = 0;
    LayerGeometry geom_;
    std::vector<HoKernel> kernels_;  // [channel * max_order + (order - 1)]
    std::vector<double> bias_;
    std::shared_ptr<const MonomialTable> table_;
};

Tensor hoconv_forward(const Tensor& input, const HoConvLayer& layer);

/// Only the scaled order-p term, no bias; used for per-order representations.
Tensor hoconv_order_component(const Tensor& input, const HoConvLayer& layer, int order);

struct HoConvGrads {
    std::vector<std::vector<double>> weights;  // [channel * max_order + (order - 1)], summed over batch
    std::vector<double> bias;
    Tensor input;
};

HoConvGrads hoconv_backward(const Tensor& input, const HoConvLayer& layer, const Tensor& grad_out);

struct ParamCount {
    std::vector<std::uint64_t> per_order;  // index p - 1
    std::uint64_t bias = 0;
    std::uint64_t total = 0;
};

ParamCount param_count(const HoConvLayer& layer);

/// Analytic FLOPs of one layer application.
///
/// Per output position each order p needs:
///   - weight terms: one multiply-accumulate (2 FLOPs) per unique weight per
///     output channel;
///   - monomial products: for p >= 2, one multiply per degree-p monomial
///     (prefix reuse in lexicographic order). Products depend only on the
///     window, so they are computed once and shared by all output channels.
struct OrderFlops {
    int order = 1;
    std::uint64_t weight_flops = 0;
    std::uint64_t product_flops = 0;
    std::uint64_t total = 0;
    double ratio_to_order1 = 1.0;
};

struct FlopReport {
    std::size_t out_h = 0;
    std::size_t out_w = 0;
    std::vector<OrderFlops> orders;
    std::uint64_t bias_flops = 0;
    std::uint64_t total = 0;
};

FlopReport flop_count(const HoConvLayer& layer, const Shape& input_chw);

}  // namespace hoconv::volterra

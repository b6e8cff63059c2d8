#include "hoconv/network/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hoconv/core/errors.hpp"

namespace hoconv::network {

namespace {

void require_cache(bool present, std::string_view layer) {
    if (!present) throw std::logic_error(std::string(layer) + " backward called without a cached forward pass");
}

void require_rank4(const Tensor& x, std::string_view layer) {
    if (x.rank() != 4) throw ShapeError(std::string(layer) + " expects NCHW input, got " + shape_str(x.shape()));
}

double uniform_bound(int fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_ch_, int out_ch_, int kh_, int kw_, int stride_, int padding_, bool bias_)
    : in_ch(in_ch_), out_ch(out_ch_), kh(kh_), kw(kw_), stride(stride_), padding(padding_), has_bias(bias_) {
    if (in_ch < 1 || out_ch < 1 || kh < 1 || kw < 1 || stride < 1 || padding < 0) {
        throw ParameterError("conv2d: invalid geometry");
    }
    const auto nw = static_cast<std::size_t>(out_ch * in_ch * kh * kw);
    weight.assign(nw, 0.0);
    grad_weight.assign(nw, 0.0);
    bias.assign(has_bias ? static_cast<std::size_t>(out_ch) : 0, 0.0);
    grad_bias.assign(bias.size(), 0.0);
}

void Conv2d::init(Rng& rng) {
    const double b = uniform_bound(in_ch * kh * kw);
    for (double& w : weight) w = rng.uniform(-b, b);
    for (double& v : bias) v = rng.uniform(-b, b);
}

Shape Conv2d::output_shape(const Shape& in) const {
    if (in.size() != 4 || in[1] != static_cast<std::size_t>(in_ch)) {
        throw ShapeError("conv2d: expected NCHW input with " + std::to_string(in_ch) + " channels, got " +
                         shape_str(in));
    }
    const auto ph = in[2] + 2 * static_cast<std::size_t>(padding);
    const auto pw = in[3] + 2 * static_cast<std::size_t>(padding);
    if (ph < static_cast<std::size_t>(kh) || pw < static_cast<std::size_t>(kw)) {
        throw ShapeError("conv2d: input " + shape_str(in) + " smaller than kernel");
    }
    const auto s = static_cast<std::size_t>(stride);
    return {in[0], static_cast<std::size_t>(out_ch), (ph - kh) / s + 1, (pw - kw) / s + 1};
}

namespace {

/// Output columns [lo, hi) whose input column ox*stride - padding + d lies inside [0, w).
std::pair<std::size_t, std::size_t> valid_range(std::size_t out, std::size_t w, int stride, int padding, int d) {
    const long off = d - padding;
    long lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
    long hi = (static_cast<long>(w) - 1 - off) / stride + 1;
    if (static_cast<long>(w) - 1 - off < 0) hi = 0;
    hi = std::min(hi, static_cast<long>(out));
    lo = std::min(lo, hi);
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

Tensor Conv2d::forward(const Tensor& x, const ForwardContext&) {
    const Shape os = output_shape(x.shape());
    cache = x;
    const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), oh = os[2], ow = os[3];
    const auto ci = static_cast<std::size_t>(in_ch), co = static_cast<std::size_t>(out_ch);
    const auto s = static_cast<std::size_t>(stride);
    Tensor out(os);
    const double* xd = x.data().data();
    double* od = out.data().data();
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t o = 0; o < co; ++o) {
            double* plane = od + (b * co + o) * oh * ow;
            if (has_bias) std::fill(plane, plane + oh * ow, bias[o]);
            for (std::size_t ch = 0; ch < ci; ++ch) {
                const double* in = xd + (b * ci + ch) * h * w;
                for (int dy = 0; dy < kh; ++dy) {
                    const auto [y0, y1] = valid_range(oh, h, stride, padding, dy);
                    for (int dx = 0; dx < kw; ++dx) {
                        const double wv = weight[((o * ci + ch) * static_cast<std::size_t>(kh) + static_cast<std::size_t>(dy)) *
                                                     static_cast<std::size_t>(kw) + static_cast<std::size_t>(dx)];
                        const auto [x0, x1] = valid_range(ow, w, stride, padding, dx);
                        for (std::size_t oy = y0; oy < y1; ++oy) {
                            const double* row = in + (oy * s + static_cast<std::size_t>(dy) - static_cast<std::size_t>(padding)) * w;
                            double* orow = plane + oy * ow;
                            const long shift = dx - padding;
                            if (s == 1) {
                                for (std::size_t ox = x0; ox < x1; ++ox) orow[ox] += wv * row[static_cast<long>(ox) + shift];
                            } else {
                                for (std::size_t ox = x0; ox < x1; ++ox) orow[ox] += wv * row[static_cast<long>(ox * s) + shift];
                            }
                        }
                    }
                }
            }
        }
    return out;
}

Tensor Conv2d::backward(const Tensor& grad) {
    require_cache(!cache.empty(), "conv2d");
    const Shape os = output_shape(cache.shape());
    if (grad.shape() != os) throw ShapeError("conv2d backward: gradient shape mismatch");
    const Tensor& x = cache;
    const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), oh = os[2], ow = os[3];
    const auto ci = static_cast<std::size_t>(in_ch), co = static_cast<std::size_t>(out_ch);
    const auto s = static_cast<std::size_t>(stride);
    Tensor gx(x.shape());
    const double* xd = x.data().data();
    const double* gd = grad.data().data();
    double* gxd = gx.data().data();
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t o = 0; o < co; ++o) {
            const double* gplane = gd + (b * co + o) * oh * ow;
            if (has_bias) {
                double acc = 0.0;
                for (std::size_t i = 0; i < oh * ow; ++i) acc += gplane[i];
                grad_bias[o] += acc;
            }
            for (std::size_t ch = 0; ch < ci; ++ch) {
                const double* in = xd + (b * ci + ch) * h * w;
                double* gin = gxd + (b * ci + ch) * h * w;
                for (int dy = 0; dy < kh; ++dy) {
                    const auto [y0, y1] = valid_range(oh, h, stride, padding, dy);
                    for (int dx = 0; dx < kw; ++dx) {
                        const std::size_t wi = ((o * ci + ch) * static_cast<std::size_t>(kh) + static_cast<std::size_t>(dy)) *
                                                   static_cast<std::size_t>(kw) + static_cast<std::size_t>(dx);
                        const double wv = weight[wi];
                        const auto [x0, x1] = valid_range(ow, w, stride, padding, dx);
                        const long shift = dx - padding;
                        double acc = 0.0;
                        for (std::size_t oy = y0; oy < y1; ++oy) {
                            const std::size_t base = (oy * s + static_cast<std::size_t>(dy) - static_cast<std::size_t>(padding)) * w;
                            const double* __restrict row = in + base;
                            double* __restrict grow = gin + base;
                            const double* __restrict g = gplane + oy * ow;
                            if (s == 1) {
                                for (std::size_t ox = x0; ox < x1; ++ox) acc += g[ox] * row[static_cast<long>(ox) + shift];
                                for (std::size_t ox = x0; ox < x1; ++ox) grow[static_cast<long>(ox) + shift] += wv * g[ox];
                            } else {
                                for (std::size_t ox = x0; ox < x1; ++ox) {
                                    const long xi = static_cast<long>(ox * s) + shift;
                                    acc += g[ox] * row[xi];
                                    grow[xi] += wv * g[ox];
                                }
                            }
                        }
                        grad_weight[wi] += acc;
                    }
                }
            }
        }
    return gx;
}

void Conv2d::collect(std::vector<StateRef>& out, const std::string& prefix) {
    out.push_back({prefix + "weight", &weight, &grad_weight});
    if (has_bias) out.push_back({prefix + "bias", &bias, &grad_bias});
}

// ---------------------------------------------------------------------------
// HoConv

HoConv::HoConv(int in_ch, int out_ch, int max_order, int kh, int kw, int stride, int padding)
    : layer(out_ch, max_order, volterra::LayerGeometry{in_ch, kh, kw, stride, padding}) {
    for (int c = 0; c < out_ch; ++c)
        for (int p = 1; p <= max_order; ++p) grad_weights.emplace_back(layer.kernel(c, p).weights.size(), 0.0);
    grad_bias.assign(static_cast<std::size_t>(out_ch), 0.0);
}

void HoConv::init(Rng& rng) { layer.init_uniform(rng); }

Tensor HoConv::forward(const Tensor& x, const ForwardContext&) {
    cache = x;
    return volterra::hoconv_forward(x, layer);
}

Tensor HoConv::backward(const Tensor& grad) {
    require_cache(!cache.empty(), "hoconv");
    auto g = volterra::hoconv_backward(cache, layer, grad);
    for (std::size_t i = 0; i < grad_weights.size(); ++i)
        for (std::size_t m = 0; m < grad_weights[i].size(); ++m) grad_weights[i][m] += g.weights[i][m];
    for (std::size_t c = 0; c < grad_bias.size(); ++c) grad_bias[c] += g.bias[c];
    return std::move(g.input);
}

void HoConv::collect(std::vector<StateRef>& out, const std::string& prefix) {
    for (int c = 0; c < layer.out_channels(); ++c)
        for (int p = 1; p <= layer.max_order(); ++p) {
            const auto i = static_cast<std::size_t>(c * layer.max_order() + p - 1);
            out.push_back({prefix + "w" + std::to_string(p) + ".c" + std::to_string(c),
                           &layer.kernel(c, p).weights, &grad_weights[i]});
        }
    out.push_back({prefix + "bias", &layer.bias(), &grad_bias});
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels_, double eps_, double momentum_)
    : channels(channels_), eps(eps_), momentum(momentum_) {
    if (channels < 1) throw ParameterError("batchnorm: channels must be positive");
    const auto c = static_cast<std::size_t>(channels);
    gamma.assign(c, 1.0);
    beta.assign(c, 0.0);
    running_mean.assign(c, 0.0);
    running_var.assign(c, 1.0);
    grad_gamma.assign(c, 0.0);
    grad_beta.assign(c, 0.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, const ForwardContext& ctx) {
    require_rank4(x, "batchnorm");
    if (x.dim(1) != static_cast<std::size_t>(channels)) throw ShapeError("batchnorm: channel mismatch");
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    const double count = static_cast<double>(n * hw);
    Tensor out(x.shape());
    x_hat = Tensor(x.shape());
    inv_std.assign(c, 0.0);
    cached_mode = ctx.mode;
    for (std::size_t ch = 0; ch < c; ++ch) {
        double mean, var;
        if (ctx.mode == Mode::train) {
            double s = 0.0;
            for (std::size_t b = 0; b < n; ++b) {
                const double* p = x.data().data() + (b * c + ch) * hw;
                for (std::size_t i = 0; i < hw; ++i) s += p[i];
            }
            mean = s / count;
            double ss = 0.0;
            for (std::size_t b = 0; b < n; ++b) {
                const double* p = x.data().data() + (b * c + ch) * hw;
                for (std::size_t i = 0; i < hw; ++i) ss += (p[i] - mean) * (p[i] - mean);
            }
            var = ss / count;
            const double unbiased = count > 1.0 ? ss / (count - 1.0) : var;
            running_mean[ch] = (1.0 - momentum) * running_mean[ch] + momentum * mean;
            running_var[ch] = (1.0 - momentum) * running_var[ch] + momentum * unbiased;
        } else {
            mean = running_mean[ch];
            var = running_var[ch];
        }
        const double is = 1.0 / std::sqrt(var + eps);
        inv_std[ch] = is;
        for (std::size_t b = 0; b < n; ++b) {
            const std::size_t base = (b * c + ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
                const double xh = (x[base + i] - mean) * is;
                x_hat[base + i] = xh;
                out[base + i] = gamma[ch] * xh + beta[ch];
            }
        }
    }
    return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad) {
    require_cache(!x_hat.empty(), "batchnorm");
    if (grad.shape() != x_hat.shape()) throw ShapeError("batchnorm backward: gradient shape mismatch");
    const std::size_t n = grad.dim(0), c = grad.dim(1), hw = grad.dim(2) * grad.dim(3);
    const double count = static_cast<double>(n * hw);
    Tensor gx(grad.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sg = 0.0, sgx = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
            const std::size_t base = (b * c + ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
                sg += grad[base + i];
                sgx += grad[base + i] * x_hat[base + i];
            }
        }
        grad_gamma[ch] += sgx;
        grad_beta[ch] += sg;
        const double k = gamma[ch] * inv_std[ch];
        for (std::size_t b = 0; b < n; ++b) {
            const std::size_t base = (b * c + ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
                if (cached_mode == Mode::train) {
                    gx[base + i] = k * (grad[base + i] - sg / count - x_hat[base + i] * sgx / count);
                } else {
                    gx[base + i] = k * grad[base + i];
                }
            }
        }
    }
    return gx;
}

void BatchNorm2d::collect(std::vector<StateRef>& out, const std::string& prefix) {
    out.push_back({prefix + "gamma", &gamma, &grad_gamma});
    out.push_back({prefix + "beta", &beta, &grad_beta});
    out.push_back({prefix + "running_mean", &running_mean, nullptr});
    out.push_back({prefix + "running_var", &running_var, nullptr});
}

// ---------------------------------------------------------------------------
// Activations

std::string_view act_name(ActKind kind) {
    switch (kind) {
        case ActKind::relu: return "relu";
        case ActKind::leaky_relu: return "leaky_relu";
        case ActKind::gelu: return "gelu";
        case ActKind::sigmoid: return "sigmoid";
        case ActKind::mish: return "mish";
    }
    return "relu";
}

ActKind act_from_name(std::string_view name) {
    for (ActKind k : {ActKind::relu, ActKind::leaky_relu, ActKind::gelu, ActKind::sigmoid, ActKind::mish}) {
        if (act_name(k) == name) return k;
    }
    throw ParameterError("unknown activation '" + std::string(name) + "'");
}

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double apply_activation(ActKind kind, double x, double slope) {
    switch (kind) {
        case ActKind::relu: return x > 0.0 ? x : 0.0;
        case ActKind::leaky_relu: return x > 0.0 ? x : slope * x;
        case ActKind::gelu: return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
        case ActKind::sigmoid: return logistic(x);
        case ActKind::mish: return x * std::tanh(softplus(x));
    }
    return x;
}

double activation_derivative(ActKind kind, double x, double slope) {
    switch (kind) {
        case ActKind::relu: return x > 0.0 ? 1.0 : 0.0;
        case ActKind::leaky_relu: return x > 0.0 ? 1.0 : slope;
        case ActKind::gelu: {
            const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
            const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
            return cdf + x * pdf;
        }
        case ActKind::sigmoid: {
            const double s = logistic(x);
            return s * (1.0 - s);
        }
        case ActKind::mish: {
            const double t = std::tanh(softplus(x));
            return t + x * (1.0 - t * t) * logistic(x);
        }
    }
    return 1.0;
}

Tensor Activation::forward(const Tensor& x, const ForwardContext&) {
    cache = x;
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = apply_activation(kind, x[i], negative_slope);
    return out;
}

Tensor Activation::backward(const Tensor& grad) {
    require_cache(!cache.empty(), "activation");
    if (grad.shape() != cache.shape()) throw ShapeError("activation backward: gradient shape mismatch");
    Tensor gx(grad.shape());
    for (std::size_t i = 0; i < grad.size(); ++i)
        gx[i] = grad[i] * activation_derivative(kind, cache[i], negative_slope);
    return gx;
}

// ---------------------------------------------------------------------------
// MaxPool2d

MaxPool2d::MaxPool2d(int k_, int stride_, int pad_begin_, int pad_end_)
    : k(k_), stride(stride_), pad_begin(pad_begin_), pad_end(pad_end_) {
    if (k < 1 || stride < 1 || pad_begin < 0 || pad_end < 0 || pad_begin >= k || pad_end >= k) {
        throw ParameterError("maxpool: invalid geometry");
    }
}

Shape MaxPool2d::output_shape(const Shape& in) const {
    if (in.size() != 4) throw ShapeError("maxpool expects NCHW");
    const auto ph = in[2] + static_cast<std::size_t>(pad_begin + pad_end);
    const auto pw = in[3] + static_cast<std::size_t>(pad_begin + pad_end);
    if (ph < static_cast<std::size_t>(k) || pw < static_cast<std::size_t>(k)) {
        throw ShapeError("maxpool: input " + shape_str(in) + " smaller than window");
    }
    const auto s = static_cast<std::size_t>(stride);
    return {in[0], in[1], (ph - k) / s + 1, (pw - k) / s + 1};
}

Tensor MaxPool2d::forward(const Tensor& x, const ForwardContext&) {
    const Shape os = output_shape(x.shape());
    in_shape = x.shape();
    const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3), oh = os[2], ow = os[3];
    Tensor out(os);
    argmax.assign(out.size(), 0);
    const double* xd = x.data().data();
    double* od = out.data().data();
    for (std::size_t pl = 0; pl < planes; ++pl) {
        const double* plane = xd + pl * h * w;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            const long y0 = std::max(0L, static_cast<long>(oy) * stride - pad_begin);
            const long y1 = std::min(static_cast<long>(h), static_cast<long>(oy) * stride - pad_begin + k);
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const long x0 = std::max(0L, static_cast<long>(ox) * stride - pad_begin);
                const long x1 = std::min(static_cast<long>(w), static_cast<long>(ox) * stride - pad_begin + k);
                std::size_t best_i = static_cast<std::size_t>(y0) * w + static_cast<std::size_t>(x0);
                double best = plane[best_i];
                for (long y = y0; y < y1; ++y) {
                    const double* row = plane + static_cast<std::size_t>(y) * w;
                    for (long xx = x0; xx < x1; ++xx) {
                        if (row[xx] > best) {
                            best = row[xx];
                            best_i = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(xx);
                        }
                    }
                }
                const std::size_t o = (pl * oh + oy) * ow + ox;
                od[o] = best;
                argmax[o] = pl * h * w + best_i;
            }
        }
    }
    return out;
}

Tensor MaxPool2d::backward(const Tensor& grad) {
    require_cache(!in_shape.empty(), "maxpool");
    if (grad.size() != argmax.size()) throw ShapeError("maxpool backward: gradient shape mismatch");
    Tensor gx(in_shape);
    for (std::size_t o = 0; o < grad.size(); ++o) gx[argmax[o]] += grad[o];
    return gx;
}

// ---------------------------------------------------------------------------
// Flatten / Linear / Dropout

Shape Flatten::output_shape(const Shape& in) const {
    std::size_t rest = 1;
    for (std::size_t i = 1; i < in.size(); ++i) rest *= in[i];
    return {in.at(0), rest};
}

Tensor Flatten::forward(const Tensor& x, const ForwardContext&) {
    in_shape = x.shape();
    return x.reshape(output_shape(x.shape()));
}

Tensor Flatten::backward(const Tensor& grad) {
    require_cache(!in_shape.empty(), "flatten");
    return grad.reshape(in_shape);
}

Linear::Linear(int in_, int out_, bool bias_) : in(in_), out(out_), has_bias(bias_) {
    if (in < 1 || out < 1) throw ParameterError("linear: sizes must be positive");
    weight.assign(static_cast<std::size_t>(in * out), 0.0);
    grad_weight.assign(weight.size(), 0.0);
    bias.assign(has_bias ? static_cast<std::size_t>(out) : 0, 0.0);
    grad_bias.assign(bias.size(), 0.0);
}

void Linear::init(Rng& rng) {
    const double b = uniform_bound(in);
    for (double& w : weight) w = rng.uniform(-b, b);
    for (double& v : bias) v = rng.uniform(-b, b);
}

Shape Linear::output_shape(const Shape& s) const {
    if (s.size() != 2 || s[1] != static_cast<std::size_t>(in)) {
        throw ShapeError("linear: expected (N, " + std::to_string(in) + "), got " + shape_str(s));
    }
    return {s[0], static_cast<std::size_t>(out)};
}

Tensor Linear::forward(const Tensor& x, const ForwardContext&) {
    const Shape os = output_shape(x.shape());
    cache = x;
    const std::size_t n = x.dim(0), ni = static_cast<std::size_t>(in), no = static_cast<std::size_t>(out);
    Tensor y(os);
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t o = 0; o < no; ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < ni; ++i) acc += weight[o * ni + i] * x[b * ni + i];
            y[b * no + o] = acc + (has_bias ? bias[o] : 0.0);
        }
    return y;
}

Tensor Linear::backward(const Tensor& grad) {
    require_cache(!cache.empty(), "linear");
    const std::size_t n = cache.dim(0), ni = static_cast<std::size_t>(in), no = static_cast<std::size_t>(out);
    if (grad.shape() != Shape{n, no}) throw ShapeError("linear backward: gradient shape mismatch");
    Tensor gx(cache.shape());
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t o = 0; o < no; ++o) {
            const double g = grad[b * no + o];
            if (has_bias) grad_bias[o] += g;
            for (std::size_t i = 0; i < ni; ++i) {
                grad_weight[o * ni + i] += g * cache[b * ni + i];
                gx[b * ni + i] += g * weight[o * ni + i];
            }
        }
    return gx;
}

void Linear::collect(std::vector<StateRef>& o, const std::string& prefix) {
    o.push_back({prefix + "weight", &weight, &grad_weight});
    if (has_bias) o.push_back({prefix + "bias", &bias, &grad_bias});
}

Dropout::Dropout(double p_) : p(p_) {
    if (!(p >= 0.0 && p < 1.0)) throw ParameterError("dropout probability must lie in [0, 1)");
}

Tensor Dropout::forward(const Tensor& x, const ForwardContext& ctx) {
    if (ctx.mode == Mode::eval || p == 0.0) {
        mask.assign(x.size(), 1.0);
        return x;
    }
    if (!ctx.rng) throw std::logic_error("dropout in train mode needs an rng");
    mask.resize(x.size());
    const double keep = 1.0 - p;
    Tensor y = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask[i] = ctx.rng->bernoulli(keep) ? 1.0 / keep : 0.0;
        y[i] *= mask[i];
    }
    return y;
}

Tensor Dropout::backward(const Tensor& grad) {
    require_cache(mask.size() == grad.size(), "dropout");
    Tensor gx = grad;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= mask[i];
    return gx;
}

// ---------------------------------------------------------------------------

std::string_view layer_type(const Layer& layer) {
    static constexpr std::string_view names[] = {"conv2d",    "hoconv",  "batchnorm2d", "activation",
                                                 "maxpool2d", "flatten", "linear",      "dropout"};
    return names[layer.index()];
}

Tensor layer_forward(Layer& layer, const Tensor& x, const ForwardContext& ctx) {
    return std::visit([&](auto& l) { return l.forward(x, ctx); }, layer);
}

Tensor layer_backward(Layer& layer, const Tensor& grad) {
    return std::visit([&](auto& l) { return l.backward(grad); }, layer);
}

}  // namespace hoconv::network

#include "hoconv/volterra/ho_layer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hoconv/core/errors.hpp"

namespace hoconv::volterra {

namespace {

struct Dims {
    std::size_t n, c, h, w, oh, ow;
};

Dims check_input(const Tensor& input, const HoConvLayer& layer) {
    const auto& g = layer.geometry();
    if (input.rank() != 4) throw ShapeError("hoconv expects NCHW input, got " + shape_str(input.shape()));
    if (input.dim(1) != static_cast<std::size_t>(g.c_in)) {
        throw ShapeError("hoconv: input has " + std::to_string(input.dim(1)) + " channels, layer expects " +
                         std::to_string(g.c_in));
    }
    const auto h = input.dim(2), w = input.dim(3);
    const auto ph = h + 2 * static_cast<std::size_t>(g.padding);
    const auto pw = w + 2 * static_cast<std::size_t>(g.padding);
    if (ph < static_cast<std::size_t>(g.kh) || pw < static_cast<std::size_t>(g.kw)) {
        throw ShapeError("hoconv: input " + shape_str(input.shape()) + " smaller than kernel");
    }
    const auto s = static_cast<std::size_t>(g.stride);
    return {input.dim(0), input.dim(1), h, w, (ph - g.kh) / s + 1, (pw - g.kw) / s + 1};
}

// Flattened window, channel-major then row-major; zero outside the image.
void gather(const Tensor& input, const LayerGeometry& g, const Dims& d, std::size_t b, std::size_t oy,
            std::size_t ox, double* x) {
    std::size_t k = 0;
    const auto base_y = static_cast<long>(oy * g.stride) - g.padding;
    const auto base_x = static_cast<long>(ox * g.stride) - g.padding;
    for (std::size_t ch = 0; ch < d.c; ++ch) {
        const double* plane = input.data().data() + (b * d.c + ch) * d.h * d.w;
        for (int dy = 0; dy < g.kh; ++dy) {
            const long y = base_y + dy;
            for (int dx = 0; dx < g.kw; ++dx) {
                const long xx = base_x + dx;
                const bool inside = y >= 0 && xx >= 0 && y < static_cast<long>(d.h) && xx < static_cast<long>(d.w);
                x[k++] = inside ? plane[static_cast<std::size_t>(y) * d.w + static_cast<std::size_t>(xx)] : 0.0;
            }
        }
    }
}

void scatter_add(Tensor& grad_input, const LayerGeometry& g, const Dims& d, std::size_t b, std::size_t oy,
                 std::size_t ox, const double* gx) {
    std::size_t k = 0;
    const auto base_y = static_cast<long>(oy * g.stride) - g.padding;
    const auto base_x = static_cast<long>(ox * g.stride) - g.padding;
    for (std::size_t ch = 0; ch < d.c; ++ch) {
        double* plane = &grad_input[(b * d.c + ch) * d.h * d.w];
        for (int dy = 0; dy < g.kh; ++dy) {
            const long y = base_y + dy;
            for (int dx = 0; dx < g.kw; ++dx, ++k) {
                const long xx = base_x + dx;
                if (y >= 0 && xx >= 0 && y < static_cast<long>(d.h) && xx < static_cast<long>(d.w)) {
                    plane[static_cast<std::size_t>(y) * d.w + static_cast<std::size_t>(xx)] += gx[k];
                }
            }
        }
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

HoKernel HoKernel::zeros(int order, int kh, int kw, int c_in) {
    HoKernel k;
    k.order = order;
    k.kh = kh;
    k.kw = kw;
    k.c_in = c_in;
    const int n = k.support();
    k.weights.assign(static_cast<std::size_t>(unique_count(n, order)), 0.0);
    k.scale = order_scale(n, order);
    return k;
}

double order_scale(int n, int p) {
    if (p == 1) return 1.0;
    return 1.0 / std::sqrt(static_cast<double>(unique_count(n, p)));
}

double evaluate_symmetric(const HoKernel& kernel, const double* x) {
    const auto monomials = enumerate_monomials(kernel.support(), kernel.order);
    double s = 0.0;
    for (std::size_t m = 0; m < monomials.size(); ++m) {
        double prod = 1.0;
        for (auto i : monomials[m].indices) prod *= x[i];
        s += kernel.weights[m] * prod;
    }
    return s;
}

std::vector<double> expand_to_full_tensor(const HoKernel& kernel) {
    const int n = kernel.support();
    const int p = kernel.order;
    double size = std::pow(static_cast<double>(n), p);
    if (size > 1e6) {
        throw ParameterError("full tensor of " + std::to_string(n) + "^" + std::to_string(p) +
                             " entries exceeds the 10^6 limit");
    }
    const auto total = static_cast<std::size_t>(size);
    const auto monomials = enumerate_monomials(n, p);

    // Map a sorted tuple to its lexicographic rank via a dense lookup on the
    // tuple's base-n code.
    std::vector<std::uint32_t> rank_of(total, 0);
    for (std::size_t m = 0; m < monomials.size(); ++m) {
        std::size_t code = 0;
        for (auto i : monomials[m].indices) code = code * static_cast<std::size_t>(n) + i;
        rank_of[code] = static_cast<std::uint32_t>(m);
    }

    std::vector<double> full(total);
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(p));
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = p - 1; a >= 0; --a) {
            idx[static_cast<std::size_t>(a)] = static_cast<std::uint32_t>(rem % static_cast<std::size_t>(n));
            rem /= static_cast<std::size_t>(n);
        }
        auto sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        std::size_t code = 0;
        for (auto i : sorted) code = code * static_cast<std::size_t>(n) + i;
        const auto m = rank_of[code];
        full[flat] = kernel.weights[m] / static_cast<double>(monomials[m].multiplicity);
    }
    return full;
}

double contract_full_tensor(const std::vector<double>& full, int n, int p, const double* x) {
    double s = 0.0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
    for (std::size_t flat = 0; flat < full.size(); ++flat) {
        double prod = full[flat];
        for (auto i : idx) prod *= x[i];
        s += prod;
        for (int a = p - 1; a >= 0; --a) {
            auto& v = idx[static_cast<std::size_t>(a)];
            if (++v < static_cast<std::size_t>(n)) break;
            v = 0;
        }
    }
    return s;
}

HoConvLayer::HoConvLayer(int out_channels, int max_order, LayerGeometry geometry)
    : out_channels_(out_channels), max_order_(max_order), geom_(geometry) {
    if (out_channels < 1) throw ParameterError("hoconv: out_channels must be positive");
    if (max_order < 1 || max_order > 4) throw ParameterError("hoconv: max order must be in 1..4");
    if (geom_.c_in < 1 || geom_.kh < 1 || geom_.kw < 1 || geom_.stride < 1 || geom_.padding < 0) {
        throw ParameterError("hoconv: invalid kernel geometry");
    }
    table_ = std::make_shared<const MonomialTable>(MonomialTable::build(support(), max_order));
    kernels_.reserve(static_cast<std::size_t>(out_channels * max_order));
    for (int c = 0; c < out_channels; ++c)
        for (int p = 1; p <= max_order; ++p)
            kernels_.push_back(HoKernel::zeros(p, geom_.kh, geom_.kw, geom_.c_in));
    bias_.assign(static_cast<std::size_t>(out_channels), 0.0);
}

HoKernel& HoConvLayer::kernel(int channel, int order) {
    return kernels_.at(static_cast<std::size_t>(channel * max_order_ + order - 1));
}

const HoKernel& HoConvLayer::kernel(int channel, int order) const {
    return kernels_.at(static_cast<std::size_t>(channel * max_order_ + order - 1));
}

void HoConvLayer::init_uniform(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(support()));
    for (auto& k : kernels_)
        for (double& w : k.weights) w = rng.uniform(-bound, bound);
    for (double& b : bias_) b = rng.uniform(-bound, bound);
}

Shape HoConvLayer::output_shape(const Shape& in) const {
    if (in.size() != 4) throw ShapeError("hoconv expects NCHW shape");
    const auto s = static_cast<std::size_t>(geom_.stride);
    const auto ph = in[2] + 2 * static_cast<std::size_t>(geom_.padding);
    const auto pw = in[3] + 2 * static_cast<std::size_t>(geom_.padding);
    if (ph < static_cast<std::size_t>(geom_.kh) || pw < static_cast<std::size_t>(geom_.kw)) {
        throw ShapeError("hoconv: input smaller than kernel");
    }
    return {in[0], static_cast<std::size_t>(out_channels_), (ph - geom_.kh) / s + 1, (pw - geom_.kw) / s + 1};
}

Tensor hoconv_forward(const Tensor& input, const HoConvLayer& layer) {
    const Dims d = check_input(input, layer);
    const auto& table = layer.table();
    const auto co = static_cast<std::size_t>(layer.out_channels());
    Tensor out({d.n, co, d.oh, d.ow});
    std::vector<double> x(static_cast<std::size_t>(layer.support()));
    std::vector<double> prod(table.total);
    for (std::size_t b = 0; b < d.n; ++b) {
        for (std::size_t oy = 0; oy < d.oh; ++oy) {
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
                gather(input, layer.geometry(), d, b, oy, ox, x.data());
                table.evaluate(x.data(), prod.data());
                for (std::size_t c = 0; c < co; ++c) {
                    double acc = 0.0;
                    for (int p = 1; p <= layer.max_order(); ++p) {
                        const auto& k = layer.kernel(static_cast<int>(c), p);
                        acc += k.scale * dot(k.weights.data(), prod.data() + table.offset[static_cast<std::size_t>(p)],
                                             k.weights.size());
                    }
                    out[((b * co + c) * d.oh + oy) * d.ow + ox] = acc + layer.bias()[c];
                }
            }
        }
    }
    return out;
}

Tensor hoconv_order_component(const Tensor& input, const HoConvLayer& layer, int order) {
    if (order < 1 || order > layer.max_order()) throw ParameterError("hoconv: order outside layer range");
    const Dims d = check_input(input, layer);
    const auto& table = layer.table();
    const auto co = static_cast<std::size_t>(layer.out_channels());
    Tensor out({d.n, co, d.oh, d.ow});
    std::vector<double> x(static_cast<std::size_t>(layer.support()));
    std::vector<double> prod(table.total);
    for (std::size_t b = 0; b < d.n; ++b)
        for (std::size_t oy = 0; oy < d.oh; ++oy)
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
                gather(input, layer.geometry(), d, b, oy, ox, x.data());
                table.evaluate(x.data(), prod.data());
                for (std::size_t c = 0; c < co; ++c) {
                    const auto& k = layer.kernel(static_cast<int>(c), order);
                    out[((b * co + c) * d.oh + oy) * d.ow + ox] =
                        k.scale * dot(k.weights.data(), prod.data() + table.offset[static_cast<std::size_t>(order)],
                                      k.weights.size());
                }
            }
    return out;
}

HoConvGrads hoconv_backward(const Tensor& input, const HoConvLayer& layer, const Tensor& grad_out) {
    const Dims d = check_input(input, layer);
    const auto co = static_cast<std::size_t>(layer.out_channels());
    if (grad_out.shape() != Shape{d.n, co, d.oh, d.ow}) {
        throw ShapeError("hoconv backward: grad_out shape " + shape_str(grad_out.shape()) +
                         " does not match forward output");
    }
    const auto& table = layer.table();
    const int P = layer.max_order();
    const auto n = static_cast<std::size_t>(layer.support());

    HoConvGrads grads;
    grads.weights.resize(co * static_cast<std::size_t>(P));
    for (std::size_t c = 0; c < co; ++c)
        for (int p = 1; p <= P; ++p)
            grads.weights[c * static_cast<std::size_t>(P) + static_cast<std::size_t>(p - 1)].assign(
                layer.kernel(static_cast<int>(c), p).weights.size(), 0.0);
    grads.bias.assign(co, 0.0);
    grads.input = Tensor(input.shape());

    std::vector<double> x(n), gx(n);
    std::vector<double> prod(table.total), gprod(table.total);
    for (std::size_t b = 0; b < d.n; ++b) {
        for (std::size_t oy = 0; oy < d.oh; ++oy) {
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
                gather(input, layer.geometry(), d, b, oy, ox, x.data());
                table.evaluate(x.data(), prod.data());
                std::fill(gprod.begin(), gprod.end(), 0.0);
                for (std::size_t c = 0; c < co; ++c) {
                    const double g = grad_out[((b * co + c) * d.oh + oy) * d.ow + ox];
                    if (g == 0.0) continue;
                    grads.bias[c] += g;
                    for (int p = 1; p <= P; ++p) {
                        const auto& k = layer.kernel(static_cast<int>(c), p);
                        const double gs = g * k.scale;
                        const auto off = table.offset[static_cast<std::size_t>(p)];
                        auto& gw = grads.weights[c * static_cast<std::size_t>(P) + static_cast<std::size_t>(p - 1)];
                        for (std::size_t m = 0; m < gw.size(); ++m) {
                            gw[m] += gs * prod[off + m];
                            gprod[off + m] += gs * k.weights[m];
                        }
                    }
                }
                // Reverse through the prefix chain: prod_p[m] = prod_{p-1}[prefix] * x[last].
                std::fill(gx.begin(), gx.end(), 0.0);
                for (int p = P; p >= 2; --p) {
                    const auto up = static_cast<std::size_t>(p);
                    const auto off = table.offset[up];
                    const auto prev_off = table.offset[up - 1];
                    const auto& pre = table.prefix[up];
                    const auto& lst = table.last[up];
                    for (std::size_t m = 0; m < lst.size(); ++m) {
                        const double gm = gprod[off + m];
                        if (gm == 0.0) continue;
                        gprod[prev_off + pre[m]] += gm * x[lst[m]];
                        gx[lst[m]] += gm * prod[prev_off + pre[m]];
                    }
                }
                for (std::size_t i = 0; i < n; ++i) gx[i] += gprod[table.offset[1] + i];
                scatter_add(grads.input, layer.geometry(), d, b, oy, ox, gx.data());
            }
        }
    }
    return grads;
}

ParamCount param_count(const HoConvLayer& layer) {
    ParamCount pc;
    const auto co = static_cast<std::uint64_t>(layer.out_channels());
    for (int p = 1; p <= layer.max_order(); ++p) {
        pc.per_order.push_back(co * unique_count(layer.support(), p));
        pc.total += pc.per_order.back();
    }
    pc.bias = co;
    pc.total += pc.bias;
    return pc;
}

FlopReport flop_count(const HoConvLayer& layer, const Shape& input_chw) {
    if (input_chw.size() != 3) throw ShapeError("flop_count expects a CHW input shape");
    const Shape out = layer.output_shape({1, input_chw[0], input_chw[1], input_chw[2]});
    FlopReport r;
    r.out_h = out[2];
    r.out_w = out[3];
    const std::uint64_t positions = out[2] * out[3];
    const auto co = static_cast<std::uint64_t>(layer.out_channels());
    for (int p = 1; p <= layer.max_order(); ++p) {
        OrderFlops f;
        f.order = p;
        const std::uint64_t u = unique_count(layer.support(), p);
        f.weight_flops = 2 * u * co * positions;
        f.product_flops = p >= 2 ? u * positions : 0;
        f.total = f.weight_flops + f.product_flops;
        r.orders.push_back(f);
        r.total += f.total;
    }
    for (auto& f : r.orders) {
        f.ratio_to_order1 = static_cast<double>(f.total) / static_cast<double>(r.orders.front().total);
    }
    r.bias_flops = co * positions;
    r.total += r.bias_flops;
    return r;
}

}  // namespace hoconv::volterra

#include "hoconv/network/model.hpp"

#include <algorithm>
#include <cmath>

#include "hoconv/core/errors.hpp"

namespace hoconv::network {

using nlohmann::json;

void Model::add(Layer layer, std::string tag) {
    if (input_chw_.size() != 3) throw ShapeError("model input shape must be CHW");
    Shape in = shapes_.empty() ? Shape{1, input_chw_[0], input_chw_[1], input_chw_[2]} : shapes_.back();
    Shape out = std::visit([&](auto& l) { return l.output_shape(in); }, layer);
    if (!tag.empty() && std::find(tags_.begin(), tags_.end(), tag) != tags_.end()) {
        throw ParameterError("duplicate layer tag '" + tag + "'");
    }
    layers_.push_back(std::move(layer));
    tags_.push_back(std::move(tag));
    shapes_.push_back(std::move(out));
}

std::vector<std::string> Model::tags() const {
    std::vector<std::string> out;
    for (const auto& t : tags_)
        if (!t.empty()) out.push_back(t);
    return out;
}

Shape Model::shape_after(std::size_t i) const { return shapes_.at(i); }

Shape Model::output_shape() const {
    if (shapes_.empty()) return {1, input_chw_[0], input_chw_[1], input_chw_[2]};
    return shapes_.back();
}

void Model::init(Rng& rng) {
    for (auto& l : layers_) std::visit([&](auto& layer) { layer.init(rng); }, l);
}

Tensor Model::forward(const Tensor& x) { return forward_prefix(x, layers_.size()); }

Tensor Model::forward_prefix(const Tensor& x, std::size_t count) {
    ForwardContext ctx{mode_, &dropout_rng_};
    Tensor h = x;
    for (std::size_t i = 0; i < count && i < layers_.size(); ++i) h = layer_forward(layers_[i], h, ctx);
    return h;
}

std::map<std::string, Tensor> Model::forward_collect(const Tensor& x, const std::vector<std::string>& wanted) {
    for (const auto& t : wanted) {
        if (t.empty() || std::find(tags_.begin(), tags_.end(), t) == tags_.end()) {
            throw ParameterError("model has no layer tagged '" + t + "'");
        }
    }
    ForwardContext ctx{mode_, &dropout_rng_};
    std::map<std::string, Tensor> out;
    Tensor h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = layer_forward(layers_[i], h, ctx);
        if (!tags_[i].empty() && std::find(wanted.begin(), wanted.end(), tags_[i]) != wanted.end()) {
            out[tags_[i]] = h;
        }
    }
    return out;
}

Tensor Model::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layer_backward(layers_[i], g);
    return g;
}

std::vector<StateRef> Model::state() {
    std::vector<StateRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string prefix = std::to_string(i) + "." + std::string(layer_type(layers_[i])) + ".";
        std::visit([&](auto& l) { l.collect(out, prefix); }, layers_[i]);
    }
    return out;
}

std::vector<StateRef> Model::parameters() {
    auto all = state();
    std::erase_if(all, [](const StateRef& s) { return !s.trainable(); });
    return all;
}

void Model::zero_grad() {
    for (auto& p : parameters()) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

std::size_t Model::parameter_count(bool include_batchnorm) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (!include_batchnorm && std::holds_alternative<BatchNorm2d>(layers_[i])) continue;
        std::vector<StateRef> refs;
        std::visit([&](auto& l) { l.collect(refs, ""); }, layers_[i]);
        for (const auto& r : refs)
            if (r.trainable()) n += r.value->size();
    }
    return n;
}

json Model::describe() const {
    json layers = json::array();
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        json j;
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, Conv2d>) {
                    j = {{"type", "conv2d"}, {"out", l.out_ch},      {"kh", l.kh},
                         {"kw", l.kw},       {"stride", l.stride},   {"padding", l.padding},
                         {"bias", l.has_bias}};
                } else if constexpr (std::is_same_v<T, HoConv>) {
                    const auto& g = l.layer.geometry();
                    j = {{"type", "hoconv"}, {"out", l.layer.out_channels()}, {"order", l.layer.max_order()},
                         {"kh", g.kh},       {"kw", g.kw},                     {"stride", g.stride},
                         {"padding", g.padding}};
                } else if constexpr (std::is_same_v<T, BatchNorm2d>) {
                    j = {{"type", "batchnorm2d"}, {"eps", l.eps}, {"momentum", l.momentum}};
                } else if constexpr (std::is_same_v<T, Activation>) {
                    j = {{"type", "activation"}, {"kind", std::string(act_name(l.kind))}};
                } else if constexpr (std::is_same_v<T, MaxPool2d>) {
                    j = {{"type", "maxpool2d"},
                         {"k", l.k},
                         {"stride", l.stride},
                         {"pad_begin", l.pad_begin},
                         {"pad_end", l.pad_end}};
                } else if constexpr (std::is_same_v<T, Flatten>) {
                    j = {{"type", "flatten"}};
                } else if constexpr (std::is_same_v<T, Linear>) {
                    j = {{"type", "linear"}, {"out", l.out}, {"bias", l.has_bias}};
                } else if constexpr (std::is_same_v<T, Dropout>) {
                    j = {{"type", "dropout"}, {"p", l.p}};
                }
            },
            layers_[i]);
        if (!tags_[i].empty()) j["tag"] = tags_[i];
        layers.push_back(std::move(j));
    }
    return {{"input", input_chw_}, {"layers", layers}};
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = it.key() == "type" || it.key() == "tag";
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ParameterError("unknown key '" + it.key() + "' in layer description");
    }
}

}  // namespace

Model Model::from_description(const json& desc) {
    try {
        const auto input = desc.at("input").get<std::vector<std::size_t>>();
        Model model(Shape(input.begin(), input.end()));
        for (const auto& j : desc.at("layers")) {
            const auto type = j.at("type").get<std::string>();
            const auto tag = get_or<std::string>(j, "tag", "");
            const Shape in = model.output_shape();
            const int channels = in.size() == 4 ? static_cast<int>(in[1]) : 0;
            if (type == "conv2d") {
                check_keys(j, {"out", "kh", "kw", "stride", "padding", "bias"});
                model.add(Conv2d(channels, j.at("out").get<int>(), j.at("kh").get<int>(), j.at("kw").get<int>(),
                                 get_or(j, "stride", 1), get_or(j, "padding", 0), get_or(j, "bias", true)),
                          tag);
            } else if (type == "hoconv") {
                check_keys(j, {"out", "order", "kh", "kw", "stride", "padding"});
                model.add(HoConv(channels, j.at("out").get<int>(), j.at("order").get<int>(), j.at("kh").get<int>(),
                                 j.at("kw").get<int>(), get_or(j, "stride", 1), get_or(j, "padding", 0)),
                          tag);
            } else if (type == "batchnorm2d") {
                check_keys(j, {"eps", "momentum"});
                model.add(BatchNorm2d(channels, get_or(j, "eps", 1e-5), get_or(j, "momentum", 0.1)), tag);
            } else if (type == "activation") {
                check_keys(j, {"kind"});
                model.add(Activation(act_from_name(get_or<std::string>(j, "kind", "relu"))), tag);
            } else if (type == "maxpool2d") {
                check_keys(j, {"k", "stride", "pad_begin", "pad_end"});
                const int k = j.at("k").get<int>();
                model.add(MaxPool2d(k, get_or(j, "stride", k), get_or(j, "pad_begin", 0), get_or(j, "pad_end", 0)),
                          tag);
            } else if (type == "flatten") {
                check_keys(j, {});
                model.add(Flatten{}, tag);
            } else if (type == "linear") {
                check_keys(j, {"out", "bias"});
                if (in.size() != 2) throw ShapeError("linear layer must follow a flatten");
                model.add(Linear(static_cast<int>(in[1]), j.at("out").get<int>(), get_or(j, "bias", true)), tag);
            } else if (type == "dropout") {
                check_keys(j, {"p"});
                model.add(Dropout(j.at("p").get<double>()), tag);
            } else {
                throw ParameterError("unknown layer type '" + type + "'");
            }
        }
        return model;
    } catch (const json::exception& e) {
        throw ParameterError(std::string("malformed model description: ") + e.what());
    }
}

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
        throw ShapeError("cross-entropy: logits " + shape_str(logits.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
    }
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    LossResult r;
    r.grad = Tensor(logits.shape());
    double total = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
        const double* z = logits.data().data() + b * k;
        const auto y = static_cast<std::size_t>(labels[b]);
        if (labels[b] < 0 || y >= k) throw ParameterError("cross-entropy: label out of range");
        const double mx = *std::max_element(z, z + k);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += std::exp(z[j] - mx);
        const double log_sum = std::log(sum) + mx;
        total += log_sum - z[y];
        for (std::size_t j = 0; j < k; ++j) {
            const double p = std::exp(z[j] - log_sum);
            r.grad[b * k + j] = (p - (j == y ? 1.0 : 0.0)) / static_cast<double>(n);
        }
    }
    r.loss = total / static_cast<double>(n);
    return r;
}

}  // namespace hoconv::network

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "hoconv/core/errors.hpp"
#include "hoconv/core/rng.hpp"
#include "hoconv/volterra/ho_layer.hpp"
#include "hoconv/volterra/monomials.hpp"

using namespace hoconv;
using namespace hoconv::volterra;

namespace {

// Brute force: all n^p tuples, keyed by their sorted form.
std::map<std::vector<std::uint32_t>, std::uint64_t> sorted_tuple_counts(int n, int p) {
    std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
    std::vector<std::uint32_t> t(static_cast<std::size_t>(p), 0);
    for (;;) {
        auto s = t;
        std::sort(s.begin(), s.end());
        ++counts[s];
        int k = p - 1;
        while (k >= 0 && ++t[static_cast<std::size_t>(k)] == static_cast<std::uint32_t>(n)) {
            t[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return counts;
}

void randomize(HoConvLayer& layer, Rng& rng) {
    for (int c = 0; c < layer.out_channels(); ++c)
        for (int p = 1; p <= layer.max_order(); ++p)
            for (auto& w : layer.kernel(c, p).weights) w = rng.uniform(-1, 1);
    for (auto& b : layer.bias()) b = rng.uniform(-1, 1);
}

Tensor random_tensor(Shape s, Rng& rng, double lo = -1, double hi = 1) {
    Tensor t(std::move(s));
    for (auto& v : t.vec()) v = rng.uniform(lo, hi);
    return t;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_CASE("enumerate_monomials: unique counts for a 3x3 patch") {
    CHECK(enumerate_monomials(9, 2).size() == 45);
    CHECK(enumerate_monomials(9, 3).size() == 165);
}

TEST_CASE("enumerate_monomials: n=2, p=2 by hand") {
    const auto m = enumerate_monomials(2, 2);
    REQUIRE(m.size() == 3);
    CHECK(m[0] == MonomialIndex{{0, 0}, 1});
    CHECK(m[1] == MonomialIndex{{0, 1}, 2});
    CHECK(m[2] == MonomialIndex{{1, 1}, 1});
}

TEST_CASE("enumerate_monomials: counts, order and multiplicities match brute force") {
    for (int n = 1; n <= 12; ++n) {
        for (int p = 1; p <= 4; ++p) {
            const auto m = enumerate_monomials(n, p);
            REQUIRE(m.size() == binomial(static_cast<std::uint64_t>(n + p - 1), static_cast<std::uint64_t>(p)));
            CHECK(std::is_sorted(m.begin(), m.end(),
                                 [](const MonomialIndex& a, const MonomialIndex& b) { return a.indices < b.indices; }));
            if (n <= 6) {
                const auto counts = sorted_tuple_counts(n, p);
                REQUIRE(counts.size() == m.size());
                for (const auto& mi : m) {
                    CHECK(std::is_sorted(mi.indices.begin(), mi.indices.end()));
                    CHECK(counts.at(mi.indices) == mi.multiplicity);
                }
            }
        }
    }
}

TEST_CASE("enumerate_monomials: argument checks") {
    CHECK_THROWS_AS(enumerate_monomials(0, 2), ParameterError);
    CHECK_THROWS_AS(enumerate_monomials(3, 0), ParameterError);
    CHECK_THROWS_AS(enumerate_monomials(3, 9), ParameterError);
}

TEST_CASE("unique and cumulative counts") {
    CHECK(cumulative_count(9, 3) == 220);
    CHECK(cumulative_count(9, 3) == 1 + 9 + 45 + 165);
    CHECK(unique_count(4, 4) == 35);
    CHECK(unique_count(4, 4) == sorted_tuple_counts(4, 4).size());
    for (int n = 1; n < 20; ++n) CHECK(unique_count(n, 1) == static_cast<std::uint64_t>(n));
    CHECK_THROWS_AS(binomial(200, 100), ArithmeticError);
}

TEST_CASE("monomial table products match direct products") {
    Rng rng(4);
    const int n = 5, P = 4;
    const auto table = MonomialTable::build(n, P);
    std::vector<double> x(n), prod(table.total);
    for (auto& v : x) v = rng.uniform(-2, 2);
    table.evaluate(x.data(), prod.data());
    for (int p = 1; p <= P; ++p) {
        const auto mons = enumerate_monomials(n, p);
        for (std::size_t m = 0; m < mons.size(); ++m) {
            double direct = 1;
            for (auto i : mons[m].indices) direct *= x[i];
            CHECK(std::abs(prod[table.offset[static_cast<std::size_t>(p)] + m] - direct) < 1e-12);
        }
    }
}

TEST_CASE("kernel scale per order") {
    CHECK(order_scale(9, 1) == 1.0);
    CHECK(order_scale(9, 2) == doctest::Approx(1 / std::sqrt(45.0)).epsilon(1e-15));
    const auto k = HoKernel::zeros(3, 2, 2, 1);
    CHECK(k.weights.size() == 20);
    CHECK(k.scale == doctest::Approx(1 / std::sqrt(20.0)));
}

TEST_CASE("forward: delta filter copies the top-left pixel") {
    HoConvLayer layer(1, 1, {1, 2, 2, 1, 0});
    layer.kernel(0, 1).weights = {1, 0, 0, 0};
    Tensor x(Shape{1, 1, 3, 3});
    for (std::size_t i = 0; i < 9; ++i) x[i] = static_cast<double>(i + 1);
    const Tensor y = hoconv_forward(x, layer);
    CHECK(y.shape() == Shape{1, 1, 2, 2});
    CHECK(y[0] == 1);
    CHECK(y[1] == 2);
    CHECK(y[2] == 4);
    CHECK(y[3] == 5);
}

TEST_CASE("forward: second-order sum over a two-pixel window") {
    HoConvLayer layer(1, 2, {1, 1, 2, 1, 0});
    layer.kernel(0, 2).weights = {1, 1, 1};
    Tensor x(Shape{1, 1, 1, 2}, std::vector<double>{1, 2});
    const Tensor y = hoconv_forward(x, layer);
    CHECK(y[0] == doctest::Approx(7 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(y[0] == doctest::Approx(4.0415).epsilon(1e-4));
}

TEST_CASE("forward equals the full-tensor oracle on random 3x3 patches") {
    Rng rng(17);
    HoConvLayer layer(2, 4, {1, 3, 3, 1, 0});
    randomize(layer, rng);
    const Tensor x = random_tensor({2, 1, 5, 5}, rng);
    const Tensor y = hoconv_forward(x, layer);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t oy = 0; oy < 3; ++oy)
                for (std::size_t ox = 0; ox < 3; ++ox) {
                    std::vector<double> patch;
                    for (std::size_t dy = 0; dy < 3; ++dy)
                        for (std::size_t dx = 0; dx < 3; ++dx) patch.push_back(x.at(b, 0, oy + dy, ox + dx));
                    double expect = layer.bias()[c];
                    for (int p = 1; p <= 4; ++p) {
                        const auto& k = layer.kernel(static_cast<int>(c), p);
                        expect += k.scale * contract_full_tensor(expand_to_full_tensor(k), 9, p, patch.data());
                    }
                    CHECK(std::abs(y.at(b, c, oy, ox) - expect) < 1e-10);
                }
}

TEST_CASE("full tensor expansion") {
    HoKernel k = HoKernel::zeros(2, 1, 2, 1);
    k.weights = {1, 1, 1};
    CHECK(expand_to_full_tensor(k) == std::vector<double>{1, 0.5, 0.5, 1});
    HoKernel k1 = HoKernel::zeros(1, 2, 2, 1);
    k1.weights = {1, 2, 3, 4};
    CHECK(expand_to_full_tensor(k1) == k1.weights);
    CHECK_THROWS_AS(expand_to_full_tensor(HoKernel::zeros(4, 4, 4, 2)), ParameterError);
}

TEST_CASE("symmetric evaluation equals dense contraction for orders 2-4") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 2 + trial % 3;
        const int n = 1 + static_cast<int>(rng.below(16));
        HoKernel k = HoKernel::zeros(p, 1, n, 1);
        for (auto& w : k.weights) w = rng.uniform(-1, 1);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (auto& v : x) v = rng.uniform(-1, 1);
        const double sym = evaluate_symmetric(k, x.data());
        const double dense = contract_full_tensor(expand_to_full_tensor(k), n, p, x.data());
        CHECK(std::abs(sym - dense) < 1e-10);
    }
}

TEST_CASE("evaluation is independent of the multiplication order inside monomials") {
    Rng rng(29);
    for (int p = 2; p <= 4; ++p) {
        HoKernel k = HoKernel::zeros(p, 3, 3, 1);
        for (auto& w : k.weights) w = rng.uniform(-1, 1);
        std::vector<double> x(9);
        for (auto& v : x) v = rng.uniform(-1, 1);
        const auto mons = enumerate_monomials(9, p);
        double reversed = 0;
        for (std::size_t i = 0; i < mons.size(); ++i) {
            double prod = 1;
            for (auto it = mons[i].indices.rbegin(); it != mons[i].indices.rend(); ++it) prod *= x[*it];
            reversed += k.weights[i] * prod;
        }
        CHECK(std::abs(evaluate_symmetric(k, x.data()) - reversed) < 1e-12);
    }
}

TEST_CASE("backward: hand-differentiated second-order example") {
    HoConvLayer layer(1, 2, {1, 1, 2, 1, 0});
    layer.kernel(0, 2).weights = {1, 1, 1};
    const Tensor x(Shape{1, 1, 1, 2}, std::vector<double>{1, 2});
    const Tensor g(Shape{1, 1, 1, 1}, std::vector<double>{1});
    const auto grads = hoconv_backward(x, layer, g);
    const double s = layer.kernel(0, 2).scale;
    CHECK(grads.input[0] / s == doctest::Approx(4.0));
    CHECK(grads.input[1] / s == doctest::Approx(5.0));
    // d y / d w_2[m] = s * prod(x[m]) = s * (1, 2, 4)
    CHECK(grads.weights[1][0] == doctest::Approx(s * 1));
    CHECK(grads.weights[1][1] == doctest::Approx(s * 2));
    CHECK(grads.weights[1][2] == doctest::Approx(s * 4));
    CHECK(grads.bias[0] == 1.0);
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(31);
    HoConvLayer layer(2, 3, {2, 2, 2, 1, 0});
    randomize(layer, rng);
    const Tensor x = random_tensor({2, 2, 4, 3}, rng);
    const Tensor gout = random_tensor(layer.output_shape(x.shape()), rng);
    const auto grads = hoconv_backward(x, layer, gout);
    auto loss = [&](const HoConvLayer& l, const Tensor& in) {
        const Tensor y = hoconv_forward(in, l);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * gout[i];
        return s;
    };
    const double h = 1e-5;
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Tensor xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        worst = std::max(worst, rel_err((loss(layer, xp) - loss(layer, xm)) / (2 * h), grads.input[i]));
    }
    for (int c = 0; c < 2; ++c)
        for (int p = 1; p <= 3; ++p) {
            auto& w = layer.kernel(c, p).weights;
            for (std::size_t i = 0; i < w.size(); i += 3) {
                const double keep = w[i];
                w[i] = keep + h;
                const double up = loss(layer, x);
                w[i] = keep - h;
                const double dn = loss(layer, x);
                w[i] = keep;
                worst = std::max(worst, rel_err((up - dn) / (2 * h), grads.weights[static_cast<std::size_t>(c * 3 + p - 1)][i]));
            }
        }
    CHECK(worst <= 1e-6);
}

TEST_CASE("zero higher-order weights reproduce the order-1 output exactly") {
    Rng rng(37);
    HoConvLayer full(3, 4, {1, 2, 2, 1, 0});
    HoConvLayer linear(3, 1, {1, 2, 2, 1, 0});
    randomize(full, rng);
    for (int c = 0; c < 3; ++c) {
        for (int p = 2; p <= 4; ++p) std::fill(full.kernel(c, p).weights.begin(), full.kernel(c, p).weights.end(), 0.0);
        linear.kernel(c, 1).weights = full.kernel(c, 1).weights;
    }
    linear.bias() = full.bias();
    const Tensor x = random_tensor({2, 1, 6, 6}, rng);
    CHECK(hoconv_forward(x, full) == hoconv_forward(x, linear));
}

TEST_CASE("order components sum to the forward output minus bias") {
    Rng rng(41);
    HoConvLayer layer(2, 3, {1, 2, 2, 1, 0});
    randomize(layer, rng);
    const Tensor x = random_tensor({1, 1, 5, 5}, rng);
    const Tensor y = hoconv_forward(x, layer);
    Tensor sum(y.shape());
    for (int p = 1; p <= 3; ++p) sum = add(sum, hoconv_order_component(x, layer, p));
    for (std::size_t i = 0; i < y.size(); ++i) {
        const std::size_t c = (i / 16) % 2;
        CHECK(std::abs(sum[i] + layer.bias()[c] - y[i]) < 1e-12);
    }
}

TEST_CASE("shape errors") {
    HoConvLayer layer(1, 2, {2, 2, 2, 1, 0});
    CHECK_THROWS_AS(hoconv_forward(Tensor(Shape{1, 1, 4, 4}), layer), ShapeError);
    CHECK_THROWS_AS(hoconv_forward(Tensor(Shape{1, 2, 1, 4}), layer), ShapeError);
    const Tensor x(Shape{1, 2, 3, 3});
    CHECK_THROWS_AS(hoconv_backward(x, layer, Tensor(Shape{1, 1, 3, 3})), ShapeError);
    CHECK_THROWS_AS(HoConvLayer(1, 5, {1, 2, 2, 1, 0}), ParameterError);
}

TEST_CASE("parameter counts") {
    const auto a = param_count(HoConvLayer(2, 2, {1, 2, 2, 1, 0}));
    CHECK(a.per_order == std::vector<std::uint64_t>{8, 20});
    CHECK(a.bias == 2);
    CHECK(a.total == 30);
    const auto b = param_count(HoConvLayer(1, 3, {1, 3, 3, 1, 0}));
    CHECK(b.total == 220);
    CHECK(b.total == cumulative_count(9, 3));
    const auto c = param_count(HoConvLayer(10, 1, {1, 2, 2, 1, 0}));
    CHECK(c.total == 10 * 4 + 10);
    const auto d = HoConvLayer(1, 4, {1, 2, 2, 1, 0});
    CHECK(d.kernel(0, 4).weights.size() == 35);
}

TEST_CASE("FLOP ratios for a 3x3 single-channel layer") {
    const HoConvLayer layer(64, 4, {1, 3, 3, 1, 0});
    const auto f = flop_count(layer, {1, 32, 32});
    CHECK(f.out_h == 30);
    CHECK(f.orders[0].ratio_to_order1 == 1.0);
    CHECK(std::abs(f.orders[1].ratio_to_order1 / 5.04 - 1) < 0.10);
    CHECK(std::abs(f.orders[2].ratio_to_order1 / 18.62 - 1) < 0.10);
    // Independent count: 2 FLOPs per unique weight per channel, one multiply per product.
    const double pos = 30.0 * 30.0;
    const double o1 = 2 * 9 * 64 * pos;
    CHECK(static_cast<double>(f.orders[1].total) == 2 * 45 * 64 * pos + 45 * pos);
    CHECK(f.orders[1].ratio_to_order1 == doctest::Approx((2 * 45 * 64 * pos + 45 * pos) / o1));
}

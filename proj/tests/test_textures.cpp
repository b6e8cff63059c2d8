#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>

#include "hoconv/core/errors.hpp"
#include "hoconv/textures/gliders.hpp"

using namespace hoconv;
using namespace hoconv::textures;

namespace {

double stat(const BinaryImage& img, GliderClass g) { return glider_parity_statistic(img, glider(g).offsets); }

BinaryImage checkerboard(int h, int w) {
    BinaryImage img{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h * w))};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.pixels[static_cast<std::size_t>(y * w + x)] = (x + y) % 2;
    return img;
}

}  // namespace

TEST_CASE("ten classes with offsets inside a 2x2 tile") {
    CHECK(all_classes().size() == 10);
    int sizes[5] = {};
    for (auto c : all_classes()) {
        const auto& g = glider(c);
        ++sizes[g.offsets.size()];
        CHECK(g.target == 1);
        for (const auto& o : g.offsets) CHECK((o.dy >= 0 && o.dy <= 1 && o.dx >= 0 && o.dx <= 1));
        CHECK(class_from_name(class_name(c)) == c);
    }
    CHECK(sizes[1] == 1);
    CHECK(sizes[2] == 4);
    CHECK(sizes[3] == 4);
    CHECK(sizes[4] == 1);
    CHECK_THROWS_AS(class_from_name("delta"), ParameterError);
    CHECK_THROWS_AS(class_from_index(10), ParameterError);
}

TEST_CASE("parity statistic on reference images") {
    BinaryImage white{8, 8, std::vector<std::uint8_t>(64, 1)};
    for (auto c : all_classes()) CHECK(stat(white, c) == 1.0);
    CHECK(stat(checkerboard(8, 8), GliderClass::beta_h) == -1.0);
    CHECK(stat(checkerboard(8, 8), GliderClass::beta_diag_back) == 1.0);
    Rng rng(1);
    BinaryImage noise{64, 64, std::vector<std::uint8_t>(64 * 64)};
    for (auto& p : noise.pixels) p = rng.bernoulli(0.5);
    for (auto c : all_classes()) CHECK(std::abs(stat(noise, c)) < 0.05);
    BinaryImage tiny{1, 1, {1}};
    CHECK_THROWS_AS(stat(tiny, GliderClass::alpha), ShapeError);
}

TEST_CASE("gamma at full level is all white") {
    Rng rng(2);
    const auto img = generate_texture(GliderClass::gamma, 16, 16, 1.0, rng);
    for (auto p : img.pixels) CHECK(p == 1);
}

TEST_CASE("beta_h at full level gives constant rows") {
    Rng rng(3);
    const auto img = generate_texture(GliderClass::beta_h, 32, 32, 1.0, rng);
    int white_rows = 0;
    for (int y = 0; y < 32; ++y) {
        for (int x = 1; x < 32; ++x) CHECK(img.at(y, x) == img.at(y, x - 1));
        white_rows += img.at(y, 0);
    }
    CHECK(white_rows > 0);
    CHECK(white_rows < 32);
}

TEST_CASE("alpha at full level on 32x32") {
    Rng rng(4);
    const auto img = generate_texture(GliderClass::alpha, 32, 32, 1.0, rng);
    CHECK(stat(img, GliderClass::alpha) == 1.0);
    // every 2x2 parity is even, so each row equals the first row or its complement
    for (int y = 1; y < 32; ++y) {
        const bool flip = img.at(y, 0) != img.at(0, 0);
        for (int x = 0; x < 32; ++x) CHECK((img.at(y, x) != img.at(0, x)) == flip);
    }
}

TEST_CASE("alpha two-point statistics average to zero across seeds") {
    const GliderClass pairs[] = {GliderClass::beta_h, GliderClass::beta_v, GliderClass::beta_diag_back,
                                 GliderClass::beta_diag_fwd};
    for (auto c : pairs) {
        double sum = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            Rng rng(derive_seed(30, {s}));
            sum += stat(generate_texture(GliderClass::alpha, 32, 32, 1.0, rng), c);
        }
        CHECK(std::abs(sum / 100) < 0.1);
    }
}

TEST_CASE("own statistic is exact at full level") {
    for (auto c : all_classes()) {
        Rng rng(derive_seed(10, {static_cast<std::uint64_t>(c)}));
        const auto img = generate_texture(c, 64, 64, 1.0, rng);
        CHECK(stat(img, c) == 1.0);
        for (auto p : img.pixels) CHECK(p <= 1);
    }
}

TEST_CASE("row and column pair constraints force the four-point parity") {
    for (auto c : {GliderClass::beta_h, GliderClass::beta_v}) {
        Rng rng(derive_seed(11, {static_cast<std::uint64_t>(c)}));
        CHECK(stat(generate_texture(c, 64, 64, 1.0, rng), GliderClass::alpha) == 1.0);
    }
}

TEST_CASE("unconstrained cross statistics average to zero at full level") {
    for (auto c : all_classes()) {
        if (c == GliderClass::gamma) continue;
        std::array<double, kNumClasses> sum{};
        constexpr int n = 60;
        for (int s = 0; s < n; ++s) {
            Rng rng(derive_seed(12, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(s)}));
            const auto img = generate_texture(c, 64, 64, 1.0, rng);
            for (auto o : all_classes()) sum[static_cast<std::size_t>(o)] += stat(img, o);
        }
        for (auto o : all_classes()) {
            if (o == c) continue;
            const bool forced = o == GliderClass::alpha && (c == GliderClass::beta_h || c == GliderClass::beta_v);
            if (forced) continue;
            CHECK_MESSAGE(std::abs(sum[static_cast<std::size_t>(o)] / n) < 0.05, class_name(c) << " vs " << class_name(o));
        }
    }
}

TEST_CASE("level zero gives chance statistics") {
    for (auto c : all_classes()) {
        Rng rng(derive_seed(20, {static_cast<std::uint64_t>(c)}));
        const auto img = generate_texture(c, 64, 64, 0.0, rng);
        for (auto other : all_classes()) CHECK(std::abs(stat(img, other)) <= 0.05);
    }
}

TEST_CASE("intermediate level sets the expected own statistic") {
    // (1+level)/2 agreement per tile means an expected statistic of `level`.
    Rng rng(5);
    double sum = 0;
    for (int i = 0; i < 10; ++i) sum += stat(generate_texture(GliderClass::theta_tr, 64, 64, 0.5, rng), GliderClass::theta_tr);
    CHECK(std::abs(sum / 10 - 0.5) < 0.05);
}

TEST_CASE("generator argument checks") {
    Rng rng(1);
    CHECK_THROWS_AS(generate_texture(GliderClass::alpha, 3, 8, 1.0, rng), ParameterError);
    CHECK_THROWS_AS(generate_texture(GliderClass::alpha, 8, 8, 1.5, rng), ParameterError);
    CHECK_THROWS_AS(generate_texture(GliderClass::alpha, 8, 8, -0.1, rng), ParameterError);
}

TEST_CASE("dataset: default sizes, balance and determinism") {
    const auto a = generate_dataset({}, 32, 32, 1.0, 99);
    CHECK(a[0].size() + a[1].size() + a[2].size() == 5000);
    std::array<long, 10> total{};
    for (const auto& ds : a)
        for (std::size_t c = 0; c < 10; ++c) total[c] += ds.class_counts()[c];
    for (long t : total) CHECK(t == 500);
    for (long n : a[0].class_counts()) CHECK(n == 200);
    for (long n : a[1].class_counts()) CHECK(n == 100);
    const auto b = generate_split(Split::val, 1000, 32, 32, 1.0, 99);
    CHECK(b.pixels == a[1].pixels);
    CHECK(b.labels == a[1].labels);
    CHECK(a[0].pixels != a[2].pixels);
    CHECK_THROWS_AS(generate_split(Split::train, 15, 32, 32, 1.0, 1), ParameterError);
}

TEST_CASE("dataset image i of class c uses its own substream") {
    const auto ds = generate_split(Split::test, 30, 16, 16, 1.0, 5);
    Rng rng(derive_seed(5, {2, 7, 1}));
    const auto img = generate_texture(GliderClass::theta_tr, 16, 16, 1.0, rng);
    CHECK(ds.labels[17] == 7);
    CHECK(ds.image(17).pixels == img.pixels);
    const auto set = ds.to_labeled();
    CHECK(set.images.shape() == Shape{30, 1, 16, 16});
    CHECK(set.labels[17] == 7);
}

TEST_CASE("HOTX round trip and validation") {
    const auto ds = generate_split(Split::train, 20, 8, 12, 0.7, 3);
    const Bytes bytes = encode_hotx(ds);
    CHECK(bytes.size() == 4 + 1 + 4 + 2 + 2 + 1 + 20 + 20 * 8 * 12);
    CHECK(bytes[4] == 1);
    const auto back = decode_hotx(bytes);
    CHECK(back.height == 8);
    CHECK(back.width == 12);
    CHECK(back.labels == ds.labels);
    CHECK(back.pixels == ds.pixels);
    CHECK(encode_hotx(back) == bytes);

    Bytes bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_hotx(bad), FormatError);
    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(decode_hotx(bad), FormatError);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(decode_hotx(bad), FormatError);

    const auto path = std::filesystem::temp_directory_path() / "hoconv_textures_test" / "d.hotx";
    write_hotx(path, ds);
    CHECK(read_hotx(path).pixels == ds.pixels);
    std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("HOTX property: random datasets round trip bit-exactly") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        TextureDataset ds;
        ds.height = 4 + static_cast<int>(rng.below(20));
        ds.width = 4 + static_cast<int>(rng.below(20));
        const std::size_t n = rng.below(12);
        for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<std::uint8_t>(rng.below(10)));
        for (std::size_t i = 0; i < n * static_cast<std::size_t>(ds.height * ds.width); ++i)
            ds.pixels.push_back(static_cast<std::uint8_t>(rng.below(2)));
        const auto back = decode_hotx(encode_hotx(ds));
        CHECK(back.labels == ds.labels);
        CHECK(back.pixels == ds.pixels);
    }
}

TEST_CASE("mix_perturbation") {
    const Tensor img(Shape{1, 1, 2}, std::vector<double>{0.5, 0.2});
    const Tensor tex(Shape{1, 1, 2}, std::vector<double>{1.0, 0.0});
    CHECK(mix_perturbation(img, tex, 0.0) == img);
    CHECK(mix_perturbation(img, tex, 1.0) == tex);
    CHECK(mix_perturbation(img, tex, 0.12)[0] == doctest::Approx(0.56).epsilon(1e-15));
    CHECK_THROWS_AS(mix_perturbation(img, tex, 1.2), ParameterError);
    CHECK_THROWS_AS(mix_perturbation(img, Tensor(Shape{3}), 0.5), ShapeError);
}

TEST_CASE("mix_perturbation broadcasts a single-channel texture and is affine in I") {
    Rng rng(9);
    Tensor img(Shape{3, 4, 5});
    for (auto& v : img.vec()) v = rng.uniform();
    Tensor tex(Shape{4, 5});
    for (auto& v : tex.vec()) v = static_cast<double>(rng.below(2));
    const Tensor m = mix_perturbation(img, tex, 0.3);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 20; ++i) CHECK(m[c * 20 + i] == doctest::Approx(0.7 * img[c * 20 + i] + 0.3 * tex[i]));
    for (int t = 0; t < 50; ++t) {
        const double i1 = rng.uniform(0, 0.5), i2 = rng.uniform(0, 0.5);
        const Tensor lhs = add(mix_perturbation(img, tex, i1), mix_perturbation(img, tex, i2));
        const Tensor rhs = add(mix_perturbation(img, tex, i1 + i2), mix_perturbation(img, tex, 0.0));
        CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
    }
}

TEST_CASE("composite texture covers all ten classes") {
    const auto img = composite_texture(32, 32, 1.0, 7);
    CHECK(img.height == 32);
    CHECK(img.width == 32);
    // region of beta_h (row 0, column region 1) has constant rows
    for (int y = 0; y < 16; ++y)
        for (int x = 6; x < 11; ++x) CHECK(img.at(y, x) == img.at(y, x + 1));
    // gamma region is white at full level
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 6; ++x) CHECK(img.at(y, x) == 1);
    CHECK(composite_texture(32, 32, 1.0, 7).pixels == img.pixels);
}

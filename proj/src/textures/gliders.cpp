#include "hoconv/textures/gliders.hpp"

#include <algorithm>
#include <string>

#include "hoconv/core/errors.hpp"

namespace hoconv::textures {

namespace {

const std::array<Glider, kNumClasses>& glider_table() {
    static const std::array<Glider, kNumClasses> table = {{
        {GliderClass::gamma, "gamma", {{0, 0}}, +1},
        {GliderClass::beta_h, "beta_h", {{0, 0}, {0, 1}}, +1},
        {GliderClass::beta_v, "beta_v", {{0, 0}, {1, 0}}, +1},
        {GliderClass::beta_diag_back, "beta_diag_back", {{0, 0}, {1, 1}}, +1},
        {GliderClass::beta_diag_fwd, "beta_diag_fwd", {{0, 1}, {1, 0}}, +1},
        {GliderClass::theta_bl, "theta_bl", {{0, 0}, {1, 0}, {1, 1}}, +1},
        {GliderClass::theta_tl, "theta_tl", {{0, 0}, {0, 1}, {1, 0}}, +1},
        {GliderClass::theta_tr, "theta_tr", {{0, 0}, {0, 1}, {1, 1}}, +1},
        {GliderClass::theta_br, "theta_br", {{0, 1}, {1, 0}, {1, 1}}, +1},
        {GliderClass::alpha, "alpha", {{0, 0}, {0, 1}, {1, 0}, {1, 1}}, +1},
    }};
    return table;
}

inline int sigma(std::uint8_t px) { return px ? 1 : -1; }

void check_level(double level) {
    if (!(level >= 0.0 && level <= 1.0)) throw ParameterError("texture level must lie in [0, 1]");
}

constexpr std::uint8_t kHotxVersion = 1;

}  // namespace

const std::array<GliderClass, kNumClasses>& all_classes() {
    static const std::array<GliderClass, kNumClasses> classes = [] {
        std::array<GliderClass, kNumClasses> a{};
        for (int i = 0; i < kNumClasses; ++i) a[static_cast<std::size_t>(i)] = static_cast<GliderClass>(i);
        return a;
    }();
    return classes;
}

const Glider& glider(GliderClass cls) {
    const auto i = static_cast<std::size_t>(cls);
    if (i >= kNumClasses) throw ParameterError("unknown glider class " + std::to_string(i));
    return glider_table()[i];
}

std::string_view class_name(GliderClass cls) { return glider(cls).name; }

GliderClass class_from_name(std::string_view name) {
    for (const auto& g : glider_table())
        if (g.name == name) return g.cls;
    throw ParameterError("unknown glider class '" + std::string(name) + "'");
}

GliderClass class_from_index(int index) {
    if (index < 0 || index >= kNumClasses) throw ParameterError("class index out of range: " + std::to_string(index));
    return static_cast<GliderClass>(index);
}

Tensor BinaryImage::to_tensor() const {
    Tensor t({static_cast<std::size_t>(height), static_cast<std::size_t>(width)});
    for (std::size_t i = 0; i < pixels.size(); ++i) t[i] = pixels[i];
    return t;
}

BinaryImage generate_texture(GliderClass cls, int height, int width, double level, Rng& rng) {
    if (height < 4 || width < 4) throw ParameterError("texture size must be at least 4x4");
    check_level(level);
    const Glider& g = glider(cls);
    BinaryImage img{height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height * width), 0)};

    if (cls == GliderClass::gamma) {
        const double p_white = (1.0 + level) / 2.0;
        for (auto& px : img.pixels) px = rng.bernoulli(p_white) ? 1 : 0;
        return img;
    }

    const double p_flip = (1.0 - level) / 2.0;
    const Offset solved = g.offsets.back();  // raster-last offset of the tile
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int oy = y - solved.dy;
            const int ox = x - solved.dx;
            bool reachable = oy >= 0;
            for (const auto& o : g.offsets) {
                const int xx = ox + o.dx;
                reachable = reachable && xx >= 0 && xx < width;
            }
            std::uint8_t px;
            if (!reachable) {
                px = rng.bernoulli(0.5) ? 1 : 0;
            } else {
                int prod = g.target;
                for (std::size_t k = 0; k + 1 < g.offsets.size(); ++k) {
                    prod *= sigma(img.at(oy + g.offsets[k].dy, ox + g.offsets[k].dx));
                }
                if (p_flip > 0.0 && rng.bernoulli(p_flip)) prod = -prod;
                px = prod > 0 ? 1 : 0;
            }
            img.pixels[static_cast<std::size_t>(y * width + x)] = px;
        }
    }
    return img;
}

double glider_parity_statistic(const BinaryImage& image, std::span<const Offset> offsets) {
    if (offsets.empty()) throw ParameterError("glider has no offsets");
    int span_y = 0, span_x = 0;
    for (const auto& o : offsets) {
        span_y = std::max(span_y, o.dy);
        span_x = std::max(span_x, o.dx);
    }
    const int ny = image.height - span_y, nx = image.width - span_x;
    if (ny < 1 || nx < 1) throw ShapeError("image smaller than glider tile");
    long sum = 0;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            int prod = 1;
            for (const auto& o : offsets) prod *= sigma(image.at(y + o.dy, x + o.dx));
            sum += prod;
        }
    return static_cast<double>(sum) / static_cast<double>(static_cast<long>(ny) * nx);
}

std::string_view split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

BinaryImage TextureDataset::image(std::size_t i) const {
    const auto n = static_cast<std::size_t>(height * width);
    BinaryImage img{height, width, {}};
    img.pixels.assign(pixels.begin() + static_cast<std::ptrdiff_t>(i * n),
                      pixels.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    return img;
}

LabeledSet TextureDataset::to_labeled() const {
    LabeledSet s;
    s.images = Tensor({size(), 1, static_cast<std::size_t>(height), static_cast<std::size_t>(width)});
    for (std::size_t i = 0; i < pixels.size(); ++i) s.images[i] = pixels[i];
    s.labels.assign(labels.begin(), labels.end());
    return s;
}

std::array<long, kNumClasses> TextureDataset::class_counts() const {
    std::array<long, kNumClasses> counts{};
    for (auto l : labels) ++counts.at(l);
    return counts;
}

TextureDataset generate_split(Split split, int count, int height, int width, double level, std::uint64_t base_seed) {
    if (count < 0 || count % kNumClasses != 0) {
        throw ParameterError("split size must be a non-negative multiple of 10, got " + std::to_string(count));
    }
    check_level(level);
    TextureDataset ds;
    ds.split = split;
    ds.height = height;
    ds.width = width;
    const int per_class = count / kNumClasses;
    ds.labels.reserve(static_cast<std::size_t>(count));
    ds.pixels.reserve(static_cast<std::size_t>(count * height * width));
    for (int i = 0; i < per_class; ++i) {
        for (int c = 0; c < kNumClasses; ++c) {
            Rng rng(derive_seed(base_seed, {static_cast<std::uint64_t>(split), static_cast<std::uint64_t>(c),
                                            static_cast<std::uint64_t>(i)}));
            const auto img = generate_texture(class_from_index(c), height, width, level, rng);
            ds.labels.push_back(static_cast<std::uint8_t>(c));
            ds.pixels.insert(ds.pixels.end(), img.pixels.begin(), img.pixels.end());
        }
    }
    return ds;
}

std::array<TextureDataset, 3> generate_dataset(DatasetSizes sizes, int height, int width, double level,
                                               std::uint64_t base_seed) {
    return {generate_split(Split::train, sizes.train, height, width, level, base_seed),
            generate_split(Split::val, sizes.val, height, width, level, base_seed),
            generate_split(Split::test, sizes.test, height, width, level, base_seed)};
}

BinaryImage composite_texture(int height, int width, double level, std::uint64_t seed) {
    if (height < 8 || width < 20) throw ParameterError("composite texture needs at least 8x20 pixels");
    BinaryImage out{height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height * width), 0)};
    constexpr int rows = 2, cols = 5;
    for (int c = 0; c < kNumClasses; ++c) {
        Rng rng(derive_seed(seed, {0xC0u, static_cast<std::uint64_t>(c)}));
        const auto tex = generate_texture(class_from_index(c), height, width, level, rng);
        const int r = c / cols, k = c % cols;
        const int y0 = r * height / rows, y1 = (r + 1) * height / rows;
        const int x0 = k * width / cols, x1 = (k + 1) * width / cols;
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x)
                out.pixels[static_cast<std::size_t>(y * width + x)] = tex.at(y, x);
    }
    return out;
}

Tensor mix_perturbation(const Tensor& image, const Tensor& texture, double intensity) {
    if (!(intensity >= 0.0 && intensity <= 1.0)) throw ParameterError("perturbation intensity must lie in [0, 1]");
    if (image.rank() < 2 || image.rank() > 3) throw ShapeError("mix_perturbation expects HW or CHW image");
    const std::size_t hw = image.dim(image.rank() - 2) * image.dim(image.rank() - 1);
    const bool same = texture.shape() == image.shape();
    const bool plane = texture.size() == hw && texture.dim(texture.rank() - 1) == image.dim(image.rank() - 1);
    if (!same && !plane) {
        throw ShapeError("mix_perturbation: texture " + shape_str(texture.shape()) + " does not match image " +
                         shape_str(image.shape()));
    }
    Tensor out(image.shape());
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double t = same ? texture[i] : texture[i % hw];
        out[i] = (1.0 - intensity) * image[i] + intensity * t;
    }
    return out;
}

Bytes encode_hotx(const TextureDataset& ds) {
    if (ds.pixels.size() != ds.size() * static_cast<std::size_t>(ds.height * ds.width)) {
        throw ShapeError("dataset pixel buffer does not match its dimensions");
    }
    ByteWriter w;
    w.raw("HOTX", 4);
    w.u8(kHotxVersion);
    w.u32(static_cast<std::uint32_t>(ds.size()));
    w.u16(static_cast<std::uint16_t>(ds.height));
    w.u16(static_cast<std::uint16_t>(ds.width));
    w.u8(1);
    w.raw(ds.labels.data(), ds.labels.size());
    w.raw(ds.pixels.data(), ds.pixels.size());
    return w.take();
}

TextureDataset decode_hotx(const Bytes& bytes, Split split) {
    ByteReader r(bytes);
    char magic[4];
    r.raw(magic, 4);
    if (std::string_view(magic, 4) != "HOTX") throw FormatError("not a HOTX file (bad magic)");
    const auto version = r.u8();
    if (version != kHotxVersion) throw FormatError("unsupported HOTX version " + std::to_string(version));
    TextureDataset ds;
    ds.split = split;
    const auto count = r.u32();
    ds.height = r.u16();
    ds.width = r.u16();
    const auto channels = r.u8();
    if (channels != 1) throw FormatError("HOTX: only single-channel images are supported");
    ds.labels.resize(count);
    r.raw(ds.labels.data(), count);
    ds.pixels.resize(static_cast<std::size_t>(count) * static_cast<std::size_t>(ds.height * ds.width));
    r.raw(ds.pixels.data(), ds.pixels.size());
    if (r.remaining() != 0) throw FormatError("HOTX: trailing bytes");
    for (auto l : ds.labels)
        if (l >= kNumClasses) throw FormatError("HOTX: label out of range");
    return ds;
}

void write_hotx(const std::filesystem::path& path, const TextureDataset& ds) { write_file_atomic(path, encode_hotx(ds)); }

TextureDataset read_hotx(const std::filesystem::path& path, Split split) {
    try {
        return decode_hotx(read_file(path), split);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace hoconv::textures

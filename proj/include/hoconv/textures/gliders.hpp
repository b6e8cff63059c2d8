#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hoconv/core/dataset.hpp"
#include "hoconv/core/io.hpp"
#include "hoconv/core/rng.hpp"
#include "hoconv/core/tensor.hpp"

namespace hoconv::textures {

/// The ten multipoint-correlation classes, in label order.
enum class GliderClass : std::uint8_t {
    gamma = 0,       // 1-point
    beta_h,          // horizontal pair  "beta-"
    beta_v,          // vertical pair    "beta|"
    beta_diag_back,  // "beta\"
    beta_diag_fwd,   // "beta/"
    theta_bl,        // L-shapes: bottom-left corner
    theta_tl,        //           top-left
    theta_tr,        //           top-right
    theta_br,        //           bottom-right
    alpha,           // full 2x2 tile
};

inline constexpr int kNumClasses = 10;

struct Offset {
    int dy = 0;
    int dx = 0;
};

/// Pixel offsets of a glider inside its 2x2 tile, in raster order.
struct Glider {
    GliderClass cls;
    std::string_view name;
    std::vector<Offset> offsets;
    int target = +1;  // parity at full strength
};

const std::array<GliderClass, kNumClasses>& all_classes();
const Glider& glider(GliderClass cls);
std::string_view class_name(GliderClass cls);
GliderClass class_from_name(std::string_view name);
GliderClass class_from_index(int index);

/// Binary H x W image, row-major, pixels in {0, 1}.
struct BinaryImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y * width + x)]; }
    Tensor to_tensor() const;  // (H, W) doubles
};

/// Maximum-entropy texture constrained by one glider's parity.
///
/// Pixels map to sigma = 2x - 1. gamma draws iid pixels, white with
/// probability (1 + level) / 2. Every other class seeds the pixels that its
/// recurrence cannot reach (leading rows/columns, and the last column for
/// gliders reaching up-right) with fair coins, then fills in raster order:
/// the pixel at the raster-last glider offset is set so the tile's sigma
/// product equals the target, and flipped with probability (1 - level) / 2.
/// Throws ParameterError for h or w < 4 or level outside [0, 1].
BinaryImage generate_texture(GliderClass cls, int height, int width, double level, Rng& rng);

/// Mean over every tile placement of the product of sigma at the offsets.
/// Throws ShapeError if the image is smaller than the glider's bounding box.
double glider_parity_statistic(const BinaryImage& image, std::span<const Offset> offsets);

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };
std::string_view split_name(Split s);

struct TextureDataset {
    Split split = Split::train;
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> labels;
    std::vector<std::uint8_t> pixels;  // image-major, row-major

    std::size_t size() const noexcept { return labels.size(); }
    BinaryImage image(std::size_t i) const;
    /// NCHW tensor of {0,1} doubles with integer labels.
    LabeledSet to_labeled() const;
    std::array<long, kNumClasses> class_counts() const;
};

struct DatasetSizes {
    int train = 2000;
    int val = 1000;
    int test = 2000;
};

/// Balanced splits; image i of class c in split s uses the RNG substream
/// derive_seed(base_seed, {s, c, i}). Sizes must be multiples of 10.
/// Images are ordered index-major, class-minor (labels cycle 0..9).
std::array<TextureDataset, 3> generate_dataset(DatasetSizes sizes, int height, int width, double level,
                                               std::uint64_t base_seed);

TextureDataset generate_split(Split split, int count, int height, int width, double level, std::uint64_t base_seed);

/// 32x32 (or given size) image tiling all ten classes in a 2 x 5 grid of
/// regions, each cropped from a full-size texture of that class.
BinaryImage composite_texture(int height, int width, double level, std::uint64_t seed);

/// out = (1 - I) * image + I * texture; a single-channel texture broadcasts
/// across the image's channels. image is CHW (or HW), I in [0, 1].
Tensor mix_perturbation(const Tensor& image, const Tensor& texture, double intensity);

// HOTX v1: "HOTX", u8 version=1, u32 count, u16 H, u16 W, u8 channels,
// count label bytes, then one byte per pixel (row-major, image-major).
Bytes encode_hotx(const TextureDataset& ds);
TextureDataset decode_hotx(const Bytes& bytes, Split split = Split::train);
void write_hotx(const std::filesystem::path& path, const TextureDataset& ds);
TextureDataset read_hotx(const std::filesystem::path& path, Split split = Split::train);

}  // namespace hoconv::textures

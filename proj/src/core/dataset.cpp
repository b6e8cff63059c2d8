#include "hoconv/core/dataset.hpp"

#include <algorithm>

#include "hoconv/core/errors.hpp"

namespace hoconv {

Tensor gather_images(const Tensor& images, std::span<const std::size_t> indices) {
    if (images.rank() != 4) throw ShapeError("gather_images expects NCHW, got " + shape_str(images.shape()));
    if (indices.empty()) throw ShapeError("gather_images: empty index list");
    const std::size_t per = images.size() / images.dim(0);
    Tensor out({indices.size(), images.dim(1), images.dim(2), images.dim(3)});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= images.dim(0)) throw ShapeError("gather_images: index out of range");
        std::copy_n(images.data().begin() + static_cast<std::ptrdiff_t>(indices[i] * per), per,
                    out.data().begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return out;
}

}  // namespace hoconv

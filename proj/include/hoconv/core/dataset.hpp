#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hoconv/core/tensor.hpp"

namespace hoconv {

/// Images (NCHW) with integer class labels.
struct LabeledSet {
    Tensor images;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
};

/// Copies the listed samples into a new NCHW batch.
Tensor gather_images(const Tensor& images, std::span<const std::size_t> indices);

}  // namespace hoconv

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "stop/numerics/tensor.h"

namespace stop {

// Images and labels from a pair of IDX files (magic 0x00000803 for the
// unsigned-byte image cube, 0x00000801 for the label vector).
struct IdxImageSet {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count x rows x cols
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  // Raw byte values of image i as a rows x cols tensor.
  Tensor image(std::size_t i) const;
};

// Throws DataError for a missing or empty file, a bad magic number, a
// truncated payload or an image/label count mismatch.
IdxImageSet load_idx(const std::filesystem::path& images,
                     const std::filesystem::path& labels);

void write_idx(const std::filesystem::path& images,
               const std::filesystem::path& labels, const IdxImageSet& set);

}  // namespace stop

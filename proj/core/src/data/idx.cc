#include "stop/data/idx.h"

#include <array>
#include <fstream>
#include <iterator>
#include <string>

#include "stop/error.h"

namespace stop {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!in) throw DataError("cannot read " + path.string());
  if (bytes.empty()) throw DataError(path.string() + ": empty file");
  return bytes;
}

std::uint32_t big_endian(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put_big_endian(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v >> 24),
                                 static_cast<char>(v >> 16),
                                 static_cast<char>(v >> 8),
                                 static_cast<char>(v)};
  out.write(b.data(), 4);
}

void require_header(const std::vector<std::uint8_t>& b, std::size_t bytes,
                    const std::filesystem::path& path) {
  if (b.size() < bytes) {
    throw DataError(path.string() + ": truncated header");
  }
}

}  // namespace

Tensor IdxImageSet::image(std::size_t i) const {
  if (i >= size()) throw DataError("image index out of range");
  Tensor t({rows, cols});
  const std::size_t n = rows * cols;
  for (std::size_t k = 0; k < n; ++k) t[k] = pixels[i * n + k];
  return t;
}

IdxImageSet load_idx(const std::filesystem::path& images,
                     const std::filesystem::path& labels) {
  const std::vector<std::uint8_t> img = read_file(images);
  const std::vector<std::uint8_t> lab = read_file(labels);

  require_header(img, 16, images);
  if (big_endian(img, 0) != kImageMagic) {
    throw DataError(images.string() + ": bad magic, not an IDX image file");
  }
  require_header(lab, 8, labels);
  if (big_endian(lab, 0) != kLabelMagic) {
    throw DataError(labels.string() + ": bad magic, not an IDX label file");
  }

  IdxImageSet set;
  const std::size_t count = big_endian(img, 4);
  set.rows = big_endian(img, 8);
  set.cols = big_endian(img, 12);
  const std::size_t label_count = big_endian(lab, 4);
  if (count != label_count) {
    throw DataError("image count " + std::to_string(count) +
                    " does not match label count " +
                    std::to_string(label_count));
  }
  const std::size_t payload = count * set.rows * set.cols;
  if (img.size() < 16 + payload) {
    throw DataError(images.string() + ": truncated payload, expected " +
                    std::to_string(payload) + " bytes");
  }
  if (lab.size() < 8 + count) {
    throw DataError(labels.string() + ": truncated payload, expected " +
                    std::to_string(count) + " bytes");
  }
  set.pixels.assign(img.begin() + 16, img.begin() + 16 + payload);
  set.labels.assign(lab.begin() + 8, lab.begin() + 8 + count);
  return set;
}

void write_idx(const std::filesystem::path& images,
               const std::filesystem::path& labels, const IdxImageSet& set) {
  if (set.pixels.size() != set.size() * set.rows * set.cols) {
    throw DataError("write_idx: pixel count does not match the header");
  }
  std::ofstream img(images, std::ios::binary | std::ios::trunc);
  std::ofstream lab(labels, std::ios::binary | std::ios::trunc);
  if (!img || !lab) throw DataError("write_idx: cannot open output files");
  put_big_endian(img, kImageMagic);
  put_big_endian(img, static_cast<std::uint32_t>(set.size()));
  put_big_endian(img, static_cast<std::uint32_t>(set.rows));
  put_big_endian(img, static_cast<std::uint32_t>(set.cols));
  img.write(reinterpret_cast<const char*>(set.pixels.data()),
            static_cast<std::streamsize>(set.pixels.size()));
  put_big_endian(lab, kLabelMagic);
  put_big_endian(lab, static_cast<std::uint32_t>(set.size()));
  for (std::size_t label : set.labels) {
    if (label > 255) throw DataError("write_idx: label does not fit a byte");
    lab.put(static_cast<char>(label));
  }
  if (!img || !lab) throw DataError("write_idx: write failed");
}

}  // namespace stop

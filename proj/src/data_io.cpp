#include "glmsnn/data_io.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <string>

#include "glmsnn/error.hpp"
#include "glmsnn/rng.hpp"

namespace glmsnn {
namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw IoError("truncated IDX header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

void DatasetSpec::validate() const {
  if (digit_set.empty()) throw DomainError("digit set is empty");
  std::array<bool, 10> seen{};
  for (int d : digit_set) {
    if (d < 0 || d > 9) throw DomainError("digit out of range: " + std::to_string(d));
    if (seen[static_cast<std::size_t>(d)]) {
      throw DomainError("digit listed twice: " + std::to_string(d));
    }
    seen[static_cast<std::size_t>(d)] = true;
  }
}

std::vector<RawImage> load_idx(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path) {
  std::ifstream images = open_for_read(images_path);
  std::ifstream labels = open_for_read(labels_path);

  const std::uint32_t image_magic = read_be32(images, images_path);
  if (image_magic != kIdxImageMagic) {
    throw FormatError("bad image magic " + std::to_string(image_magic) + " in " +
                      images_path.string());
  }
  const std::uint32_t label_magic = read_be32(labels, labels_path);
  if (label_magic == kIdxImageMagic) {
    throw ConsistencyError("label file " + labels_path.string() +
                           " carries the image magic number");
  }
  if (label_magic != kIdxLabelMagic) {
    throw FormatError("bad label magic " + std::to_string(label_magic) + " in " +
                      labels_path.string());
  }

  const std::uint32_t n_images = read_be32(images, images_path);
  const std::uint32_t rows = read_be32(images, images_path);
  const std::uint32_t cols = read_be32(images, images_path);
  const std::uint32_t n_labels = read_be32(labels, labels_path);
  if (rows != kMnistRows || cols != kMnistCols) {
    throw FormatError("expected 28x28 images, got " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
  if (n_images != n_labels) {
    throw ConsistencyError("image count " + std::to_string(n_images) +
                           " != label count " + std::to_string(n_labels));
  }

  std::vector<std::uint8_t> pixel_block(static_cast<std::size_t>(n_images) * kMnistPixels);
  if (!images.read(reinterpret_cast<char*>(pixel_block.data()),
                   static_cast<std::streamsize>(pixel_block.size()))) {
    throw IoError("truncated image data in " + images_path.string());
  }
  std::vector<std::uint8_t> label_block(n_labels);
  if (!labels.read(reinterpret_cast<char*>(label_block.data()),
                   static_cast<std::streamsize>(label_block.size()))) {
    throw IoError("truncated label data in " + labels_path.string());
  }

  std::vector<RawImage> out(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    const auto first = pixel_block.begin() + static_cast<std::ptrdiff_t>(i * kMnistPixels);
    out[i].pixels.assign(first, first + kMnistPixels);
    if (label_block[i] > 9) {
      throw FormatError("label out of range at record " + std::to_string(i));
    }
    out[i].label = label_block[i];
  }
  return out;
}

void write_idx(const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, std::span<const RawImage> images) {
  std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
  std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
  if (!img || !lab) throw IoError("cannot create IDX output files");
  write_be32(img, kIdxImageMagic);
  write_be32(img, static_cast<std::uint32_t>(images.size()));
  write_be32(img, kMnistRows);
  write_be32(img, kMnistCols);
  write_be32(lab, kIdxLabelMagic);
  write_be32(lab, static_cast<std::uint32_t>(images.size()));
  for (const RawImage& r : images) {
    if (r.pixels.size() != static_cast<std::size_t>(kMnistPixels)) {
      throw ShapeError("IDX writer expects 784 pixels per image");
    }
    img.write(reinterpret_cast<const char*>(r.pixels.data()),
              static_cast<std::streamsize>(r.pixels.size()));
    const char label = static_cast<char>(r.label);
    lab.write(&label, 1);
  }
  if (!img || !lab) throw IoError("write failed");
}

namespace {

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

int class_of(const DatasetSpec& spec, int digit) {
  const auto it = std::find(spec.digit_set.begin(), spec.digit_set.end(), digit);
  return it == spec.digit_set.end() ? -1
                                    : static_cast<int>(it - spec.digit_set.begin());
}

LabeledImage relabel(const RawImage& r, int cls, std::size_t index) {
  return LabeledImage{r.pixels, cls, index};
}

void check_capacity(const std::vector<std::size_t>& taken, std::size_t wanted,
                    const DatasetSpec& spec) {
  for (std::size_t c = 0; c < taken.size(); ++c) {
    if (taken[c] < wanted) {
      throw CapacityError("digit " + std::to_string(spec.digit_set[c]) + " has only " +
                          std::to_string(taken[c]) + " usable records, need " +
                          std::to_string(wanted));
    }
  }
}

}  // namespace

DatasetSplit select_subset(std::span<const RawImage> data, const DatasetSpec& spec,
                           std::uint64_t seed) {
  spec.validate();
  const std::size_t n_classes = spec.digit_set.size();
  std::vector<std::size_t> n_train(n_classes, 0);
  std::vector<std::size_t> n_test(n_classes, 0);
  DatasetSplit split;
  split.train.reserve(spec.per_class_train * n_classes);
  split.test.reserve(spec.per_class_test * n_classes);

  for (std::size_t idx : shuffled_order(data.size(), derive_seed(seed, {0x5e1ec7}))) {
    const int cls = class_of(spec, data[idx].label);
    if (cls < 0) continue;
    const auto c = static_cast<std::size_t>(cls);
    if (n_train[c] < spec.per_class_train) {
      split.train.push_back(relabel(data[idx], cls, idx));
      ++n_train[c];
    } else if (n_test[c] < spec.per_class_test) {
      split.test.push_back(relabel(data[idx], cls, idx));
      ++n_test[c];
    }
  }
  check_capacity(n_train, spec.per_class_train, spec);
  check_capacity(n_test, spec.per_class_test, spec);
  return split;
}

DatasetSplit select_subset(std::span<const RawImage> train_data,
                           std::span<const RawImage> test_data, const DatasetSpec& spec,
                           std::uint64_t seed) {
  DatasetSpec train_only = spec;
  train_only.per_class_test = 0;
  DatasetSpec test_only = spec;
  test_only.per_class_train = spec.per_class_test;
  test_only.per_class_test = 0;
  DatasetSplit split;
  split.train = select_subset(train_data, train_only, seed).train;
  split.test = select_subset(test_data, test_only, derive_seed(seed, {1})).train;
  return split;
}

}  // namespace glmsnn

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace glmsnn {

inline constexpr int kMnistRows = 28;
inline constexpr int kMnistCols = 28;
inline constexpr int kMnistPixels = kMnistRows * kMnistCols;

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

/// One MNIST record as stored on disk: 784 intensities and the digit.
struct RawImage {
  std::vector<std::uint8_t> pixels;
  int label = 0;
};

/// A classification sample after class remapping. `pixels` may have any
/// length so synthetic tasks can use small inputs; `source_index` points back
/// into the loaded list.
struct LabeledImage {
  std::vector<std::uint8_t> pixels;
  int label = 0;
  std::size_t source_index = 0;
};

struct DatasetSpec {
  std::vector<int> digit_set;
  std::size_t per_class_train = 0;
  std::size_t per_class_test = 0;

  /// Throws DomainError on repeated or out-of-range digits or empty digit set.
  void validate() const;
};

struct DatasetSplit {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
};

/// Reads an IDX image/label file pair. Throws FormatError on a bad magic or
/// image geometry, ConsistencyError when the counts disagree (or a label file
/// carries the image magic), IoError on missing or truncated files.
std::vector<RawImage> load_idx(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path);

/// Writes `images` as an IDX pair with 28x28 geometry.
void write_idx(const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path,
               std::span<const RawImage> images);

/// Seeded shuffle of the record order, then per digit the first
/// `per_class_train` occurrences go to train and the next `per_class_test` to
/// test. Labels become positions in `spec.digit_set`. Throws CapacityError if a
/// digit has too few records.
DatasetSplit select_subset(std::span<const RawImage> data, const DatasetSpec& spec,
                           std::uint64_t seed);

/// Same as above but with test records drawn from a separate list (e.g. the
/// official test file). Source indices of test records refer to `test_data`.
DatasetSplit select_subset(std::span<const RawImage> train_data,
                           std::span<const RawImage> test_data,
                           const DatasetSpec& spec, std::uint64_t seed);

}  // namespace glmsnn

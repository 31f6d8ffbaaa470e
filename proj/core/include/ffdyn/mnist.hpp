#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace ffdyn {

inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kImagePixels = kImageSide * kImageSide;
inline constexpr int kNumClasses = 10;

// One 28x28 grayscale image, row-major, values in [0, 1].
struct ImageVector {
    std::array<double, kImagePixels> pixels{};
};

enum class SplitKind { train, test };

struct DatasetSplit {
    std::vector<ImageVector> images;
    std::vector<std::uint8_t> labels;
    SplitKind kind = SplitKind::train;

    std::size_t size() const { return images.size(); }
};

// Parses the big-endian IDX pair (images magic 0x00000803, labels magic
// 0x00000801), checks the 28x28 geometry and that both files agree on the
// sample count, and scales pixel bytes by 1/255. Throws IdxError with a
// distinct kind per failure mode.
DatasetSplit load_idx(const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path,
                      SplitKind kind = SplitKind::train);

// Re-serializes a split to the same IDX layout, byte-identical to what
// load_idx consumed.
void save_idx(const DatasetSplit& split, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

// Loads train and test splits from a directory holding the conventional
// MNIST file names (train-images-idx3-ubyte, train-labels-idx1-ubyte,
// t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte).
struct MnistData {
    DatasetSplit train;
    DatasetSplit test;
};
MnistData load_mnist_dir(const std::filesystem::path& data_dir);

}  // namespace ffdyn

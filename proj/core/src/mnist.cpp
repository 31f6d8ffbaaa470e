#include "ffdyn/mnist.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include "ffdyn/errors.hpp"

namespace ffdyn {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& in, const std::string& path, const char* field) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw IdxError(IdxError::Kind::truncated,
                       path + ": truncated while reading " + field);
    }
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t value) {
    unsigned char bytes[4] = {
        static_cast<unsigned char>(value >> 24),
        static_cast<unsigned char>(value >> 16),
        static_cast<unsigned char>(value >> 8),
        static_cast<unsigned char>(value),
    };
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::ifstream open_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IdxError(IdxError::Kind::io, "cannot open " + path.string());
    }
    return in;
}

}  // namespace

DatasetSplit load_idx(const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path, SplitKind kind) {
    std::ifstream images = open_binary(images_path);
    std::uint32_t magic = read_u32_be(images, images_path.string(), "magic");
    if (magic != kImagesMagic) {
        throw IdxError(IdxError::Kind::bad_magic,
                       images_path.string() + ": bad image magic 0x" +
                           std::to_string(magic) + ", expected 0x00000803");
    }
    std::uint32_t image_count = read_u32_be(images, images_path.string(), "count");
    std::uint32_t rows = read_u32_be(images, images_path.string(), "rows");
    std::uint32_t cols = read_u32_be(images, images_path.string(), "cols");
    if (rows != kImageSide || cols != kImageSide) {
        throw IdxError(IdxError::Kind::bad_magic,
                       images_path.string() + ": unexpected geometry " + std::to_string(rows) +
                           "x" + std::to_string(cols) + ", expected 28x28");
    }

    std::ifstream labels = open_binary(labels_path);
    std::uint32_t label_magic = read_u32_be(labels, labels_path.string(), "magic");
    if (label_magic != kLabelsMagic) {
        throw IdxError(IdxError::Kind::bad_magic,
                       labels_path.string() + ": bad label magic 0x" +
                           std::to_string(label_magic) + ", expected 0x00000801");
    }
    std::uint32_t label_count = read_u32_be(labels, labels_path.string(), "count");
    if (label_count != image_count) {
        throw IdxError(IdxError::Kind::count_mismatch,
                       "count mismatch: " + images_path.string() + " has " +
                           std::to_string(image_count) + " images but " + labels_path.string() +
                           " has " + std::to_string(label_count) + " labels");
    }

    DatasetSplit split;
    split.kind = kind;
    split.images.resize(image_count);
    split.labels.resize(label_count);

    std::vector<unsigned char> pixel_row(kImagePixels);
    for (std::uint32_t i = 0; i < image_count; ++i) {
        if (!images.read(reinterpret_cast<char*>(pixel_row.data()), kImagePixels)) {
            throw IdxError(IdxError::Kind::truncated,
                           images_path.string() + ": truncated at image " + std::to_string(i) +
                               " of " + std::to_string(image_count));
        }
        for (std::size_t p = 0; p < kImagePixels; ++p) {
            split.images[i].pixels[p] = pixel_row[p] / 255.0;
        }
    }
    if (!labels.read(reinterpret_cast<char*>(split.labels.data()), label_count)) {
        throw IdxError(IdxError::Kind::truncated,
                       labels_path.string() + ": truncated, header promised " +
                           std::to_string(label_count) + " labels");
    }
    return split;
}

void save_idx(const DatasetSplit& split, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
    std::ofstream images(images_path, std::ios::binary);
    if (!images) throw IdxError(IdxError::Kind::io, "cannot write " + images_path.string());
    write_u32_be(images, kImagesMagic);
    write_u32_be(images, static_cast<std::uint32_t>(split.images.size()));
    write_u32_be(images, kImageSide);
    write_u32_be(images, kImageSide);
    std::vector<unsigned char> pixel_row(kImagePixels);
    for (const ImageVector& image : split.images) {
        for (std::size_t p = 0; p < kImagePixels; ++p) {
            pixel_row[p] = static_cast<unsigned char>(std::lround(image.pixels[p] * 255.0));
        }
        images.write(reinterpret_cast<const char*>(pixel_row.data()), kImagePixels);
    }

    std::ofstream labels(labels_path, std::ios::binary);
    if (!labels) throw IdxError(IdxError::Kind::io, "cannot write " + labels_path.string());
    write_u32_be(labels, kLabelsMagic);
    write_u32_be(labels, static_cast<std::uint32_t>(split.labels.size()));
    labels.write(reinterpret_cast<const char*>(split.labels.data()),
                 static_cast<std::streamsize>(split.labels.size()));
}

MnistData load_mnist_dir(const std::filesystem::path& data_dir) {
    MnistData data;
    data.train = load_idx(data_dir / "train-images-idx3-ubyte",
                          data_dir / "train-labels-idx1-ubyte", SplitKind::train);
    data.test = load_idx(data_dir / "t10k-images-idx3-ubyte",
                         data_dir / "t10k-labels-idx1-ubyte", SplitKind::test);
    return data;
}

}  // namespace ffdyn

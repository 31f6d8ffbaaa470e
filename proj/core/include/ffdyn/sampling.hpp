#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ffdyn/mnist.hpp"
#include "ffdyn/rng.hpp"

namespace ffdyn {

inline constexpr std::size_t kLabelPixels = 10;
inline constexpr double kLabelValue = 1.0;
inline constexpr double kNeutralValue = 0.1;

enum class Polarity : std::uint8_t { positive, negative };

// One training input: an image with a class label written into its first
// ten pixels, tagged with whether that label is the true one.
struct Sample {
    ImageVector pixels;
    int embedded_label = 0;
    int true_label = 0;
    Polarity polarity = Polarity::positive;
};

// Zeroes pixels[0..10) and writes kLabelValue at pixels[label].
// The rest of the image is untouched.
ImageVector embed_label(ImageVector image, int label);

// Sets pixels[0..10) to the neutral value 0.1 (uniform prior mass 1), so
// downstream inference cannot read the label.
ImageVector embed_neutral(ImageVector image);

Sample make_positive(const ImageVector& image, int true_label);

// Embeds a label drawn uniformly from the nine wrong classes.
Sample make_negative(const ImageVector& image, int true_label, Rng& rng);

// positives[i] and negatives[i] always derive from the same source image.
struct PairedBatch {
    std::vector<Sample> positives;
    std::vector<Sample> negatives;
};

// One epoch's worth of paired batches. The visit order is shuffled and
// every negative label is drawn at construction, so the rng is consumed
// deterministically regardless of how far the stream is iterated. The
// final partial batch is retained.
class BatchStream {
public:
    BatchStream(const DatasetSplit& split, std::size_t batch_size, Rng& rng);

    std::optional<PairedBatch> next();
    std::size_t batch_count() const;
    std::size_t batch_size() const { return batch_size_; }

private:
    const DatasetSplit* split_;
    std::size_t batch_size_;
    std::vector<std::uint32_t> order_;
    std::vector<std::uint8_t> negative_labels_;
    std::size_t cursor_ = 0;
};

inline BatchStream make_batches(const DatasetSplit& split, std::size_t batch_size, Rng& rng) {
    return BatchStream(split, batch_size, rng);
}

}  // namespace ffdyn

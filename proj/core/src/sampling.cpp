#include "ffdyn/sampling.hpp"

#include <string>

#include "ffdyn/errors.hpp"

namespace ffdyn {

namespace {

void check_label(int label) {
    if (label < 0 || label >= static_cast<int>(kNumClasses)) {
        throw InvalidArgument("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(kNumClasses) + ")");
    }
}

// Uniform over the nine classes != true_label.
int wrong_label(int true_label, Rng& rng) {
    auto k = static_cast<int>(rng.below(kNumClasses - 1));
    return k >= true_label ? k + 1 : k;
}

}  // namespace

ImageVector embed_label(ImageVector image, int label) {
    check_label(label);
    for (std::size_t i = 0; i < kLabelPixels; ++i) image.pixels[i] = 0.0;
    image.pixels[static_cast<std::size_t>(label)] = kLabelValue;
    return image;
}

ImageVector embed_neutral(ImageVector image) {
    for (std::size_t i = 0; i < kLabelPixels; ++i) image.pixels[i] = kNeutralValue;
    return image;
}

Sample make_positive(const ImageVector& image, int true_label) {
    check_label(true_label);
    Sample s;
    s.pixels = embed_label(image, true_label);
    s.embedded_label = true_label;
    s.true_label = true_label;
    s.polarity = Polarity::positive;
    return s;
}

Sample make_negative(const ImageVector& image, int true_label, Rng& rng) {
    check_label(true_label);
    int label = wrong_label(true_label, rng);
    Sample s;
    s.pixels = embed_label(image, label);
    s.embedded_label = label;
    s.true_label = true_label;
    s.polarity = Polarity::negative;
    return s;
}

BatchStream::BatchStream(const DatasetSplit& split, std::size_t batch_size, Rng& rng)
    : split_(&split), batch_size_(batch_size) {
    if (split.size() == 0) throw InvalidArgument("cannot batch an empty dataset split");
    if (batch_size == 0) throw InvalidArgument("batch_size must be positive");

    order_.resize(split.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(order_);

    // Draw every negative label up front, in visit order, so rng consumption
    // does not depend on how the stream is iterated.
    negative_labels_.resize(split.size());
    for (std::size_t i = 0; i < order_.size(); ++i) {
        int true_label = split.labels[order_[i]];
        auto k = static_cast<int>(rng.below(kNumClasses - 1));
        negative_labels_[i] = static_cast<std::uint8_t>(k >= true_label ? k + 1 : k);
    }
}

std::size_t BatchStream::batch_count() const {
    return (split_->size() + batch_size_ - 1) / batch_size_;
}

std::optional<PairedBatch> BatchStream::next() {
    if (cursor_ >= order_.size()) return std::nullopt;
    std::size_t end = std::min(cursor_ + batch_size_, order_.size());

    PairedBatch batch;
    batch.positives.reserve(end - cursor_);
    batch.negatives.reserve(end - cursor_);
    for (std::size_t i = cursor_; i < end; ++i) {
        const ImageVector& img = split_->images[order_[i]];
        int true_label = split_->labels[order_[i]];
        batch.positives.push_back(make_positive(img, true_label));

        Sample neg;
        neg.pixels = embed_label(img, negative_labels_[i]);
        neg.embedded_label = negative_labels_[i];
        neg.true_label = true_label;
        neg.polarity = Polarity::negative;
        batch.negatives.push_back(neg);
    }
    cursor_ = end;
    return batch;
}

}  // namespace ffdyn

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ffdyn {

// Deterministic random stream. All distributions are implemented on top
// of the raw mt19937_64 output so sequences are identical across
// standard libraries and platforms (std::normal_distribution and friends
// are implementation-defined and would not be).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Consumes exactly two engine draws
    // per call; no state is cached across calls.
    double normal() { return normal_pair().first; }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Box-Muller pair from two engine draws.
    std::pair<double, double> normal_pair();

    // Uniform integer in [0, bound). Rejection sampling on the raw
    // stream; bound must be nonzero.
    std::uint64_t below(std::uint64_t bound);

    // Fisher-Yates using below(); deterministic for a fixed stream.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Labeled sub-seed derivation: every stream a run needs (weight init,
// shuffling, negative labels, evaluation batches) hangs off the master
// seed under its own label, so adding a stream never perturbs the others.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

}  // namespace ffdyn

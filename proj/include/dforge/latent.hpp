#pragma once

#include "dforge/rng.hpp"

#include <cstddef>
#include <vector>

namespace dforge {

struct LatentShape {
    int frames = 0;
    int channels = 0;
    int height = 0;
    int width = 0;

    bool operator==(const LatentShape&) const = default;

    std::size_t elements_per_frame() const {
        return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
               static_cast<std::size_t>(width);
    }
    std::size_t element_count() const {
        return static_cast<std::size_t>(frames) * elements_per_frame();
    }
};

// 4-axis numeric grid [frames x channels x height x width], frame-major.
struct LatentVideo {
    LatentShape shape;
    std::vector<double> data;

    LatentVideo() = default;
    LatentVideo(const LatentShape& s, double fill = 0.0) : shape(s), data(s.element_count(), fill) {}

    static LatentVideo seeded_normal(const LatentShape& s, CounterRng& rng);

    double& at(int f, int c, int y, int x);
    double at(int f, int c, int y, int x) const;

    // Frame f as a standalone single-frame latent.
    LatentVideo frame(int f) const;

    // Throws ShapeMismatch when data does not match shape or holds
    // non-finite values.
    void validate() const;
};

void require_same_shape(const LatentVideo& a, const LatentVideo& b, const char* what);

} // namespace dforge

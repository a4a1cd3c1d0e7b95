#include "dforge/latent.hpp"

#include "dforge/errors.hpp"

#include <cmath>
#include <string>

namespace dforge {

LatentVideo LatentVideo::seeded_normal(const LatentShape& s, CounterRng& rng) {
    LatentVideo out(s);
    for (double& v : out.data) {
        v = rng.normal();
    }
    return out;
}

double& LatentVideo::at(int f, int c, int y, int x) {
    return data[((static_cast<std::size_t>(f) * shape.channels + c) * shape.height + y) * shape.width + x];
}

double LatentVideo::at(int f, int c, int y, int x) const {
    return data[((static_cast<std::size_t>(f) * shape.channels + c) * shape.height + y) * shape.width + x];
}

LatentVideo LatentVideo::frame(int f) const {
    if (f < 0 || f >= shape.frames) {
        throw ShapeMismatch("frame index out of range: " + std::to_string(f));
    }
    LatentShape s = shape;
    s.frames = 1;
    LatentVideo out(s);
    const std::size_t stride = shape.elements_per_frame();
    std::copy(data.begin() + static_cast<std::ptrdiff_t>(f * stride),
              data.begin() + static_cast<std::ptrdiff_t>((f + 1) * stride), out.data.begin());
    return out;
}

void LatentVideo::validate() const {
    if (shape.frames < 1 || shape.channels < 1 || shape.height < 1 || shape.width < 1) {
        throw ShapeMismatch("latent shape must be positive in every axis");
    }
    if (data.size() != shape.element_count()) {
        throw ShapeMismatch("latent data does not match its shape");
    }
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw ShapeMismatch("latent holds a non-finite value");
        }
    }
}

void require_same_shape(const LatentVideo& a, const LatentVideo& b, const char* what) {
    if (!(a.shape == b.shape)) {
        throw ShapeMismatch(std::string(what) + ": latent shapes differ");
    }
}

} // namespace dforge

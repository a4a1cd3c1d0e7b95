#pragma once

#include <map>
#include <string>
#include <vector>

namespace dforge {

enum class RangePolicy {
    kReject,
    kClamp,
};

// H x W x 3 image, values in [0, 1], row-major with interleaved channels.
struct ImageBuffer {
    std::vector<double> pixels;
    int width = 0;
    int height = 0;

    ImageBuffer() = default;
    ImageBuffer(int height, int width, double fill = 0.0);

    double& at(int y, int x, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + static_cast<std::size_t>(c)];
    }
    double at(int y, int x, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + static_cast<std::size_t>(c)];
    }

    std::size_t element_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    }

    // kReject throws on out-of-range values, kClamp snaps them into [0, 1].
    void enforce_range(RangePolicy policy);
    void validate() const;
};

struct ConfidenceMap {
    std::vector<double> conf;
    int width = 0;
    int height = 0;

    double at(int y, int x) const {
        return conf[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
    }
    void validate() const;
};

struct LossWeights {
    double l1 = 1.0;
    double ssim = 1.0;
    double lpips = 0.0;
    double tv = 1.0;

    // Confidence-weighted objective defaults: 0.8 / 0.2 / 0.3.
    static LossWeights confidence_defaults();
    // Dynamic-scene objective defaults: unit l1/ssim/tv.
    static LossWeights dynamic_defaults();
};

struct LossBreakdown {
    double total = 0.0;
    std::map<std::string, double> per_term; // unweighted term values
};

// Pluggable perceptual term; stands in for a learned metric. Returns a
// scalar given (pred, gt, conf-or-null).
class PerceptualTerm {
public:
    virtual ~PerceptualTerm() = default;
    virtual double evaluate(const ImageBuffer& pred, const ImageBuffer& gt,
                            const ConfidenceMap* conf) const = 0;
};

// Mean over all elements of conf-weighted |pred - gt|; conf broadcasts over
// channels and defaults to 1.
double l1_loss(const ImageBuffer& pred, const ImageBuffer& gt, const ConfidenceMap* conf = nullptr);

// 1 - mean local SSIM with a Gaussian window (c1 = 0.01^2, c2 = 0.03^2 on
// unit range). The map is computed on fully valid window positions; conf
// weights the per-position loss before the mean.
double ssim_loss(const ImageBuffer& pred, const ImageBuffer& gt, int window = 11,
                 double sigma = 1.5, const ConfidenceMap* conf = nullptr);

// Mean of |forward dx| + |forward dy| over all elements.
double tv_loss(const ImageBuffer& img);

// Total variation of the difference image pred - gt; zero when the two
// differ by a constant.
double tv_of_difference(const ImageBuffer& pred, const ImageBuffer& gt);

// conf * (w_l1 L1 + w_ssim L_ssim + w_lpips L_lpips), reported per term.
// The perceptual term is 0 when no provider is given.
LossBreakdown confidence_weighted_loss(const ImageBuffer& pred, const ImageBuffer& gt,
                                       const ConfidenceMap& conf, const LossWeights& weights,
                                       const PerceptualTerm* perceptual = nullptr);

// w_l1 L1 + w_tv TV(pred - gt) + w_ssim L_ssim, no confidence weighting.
LossBreakdown dynamic_scene_loss(const ImageBuffer& pred, const ImageBuffer& gt,
                                 const LossWeights& weights);

} // namespace dforge

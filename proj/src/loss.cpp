#include "dforge/loss.hpp"

#include "dforge/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dforge {

namespace {

void require_same_size(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width != b.width || a.height != b.height) {
        throw ShapeMismatch("image sizes differ");
    }
}

void require_conf_size(const ImageBuffer& img, const ConfidenceMap& conf) {
    if (conf.width != img.width || conf.height != img.height) {
        throw ShapeMismatch("confidence map does not match the images");
    }
}

std::vector<double> gaussian_kernel(int window, double sigma) {
    std::vector<double> kernel(static_cast<std::size_t>(window));
    const double center = (window - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < window; ++i) {
        const double d = i - center;
        kernel[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += kernel[static_cast<std::size_t>(i)];
    }
    for (double& k : kernel) {
        k /= sum;
    }
    return kernel;
}

} // namespace

ImageBuffer::ImageBuffer(int height_, int width_, double fill)
    : pixels(static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_) * 3, fill),
      width(width_), height(height_) {}

void ImageBuffer::enforce_range(RangePolicy policy) {
    for (double& v : pixels) {
        if (!std::isfinite(v)) {
            throw ShapeMismatch("image holds a non-finite value");
        }
        if (v < 0.0 || v > 1.0) {
            if (policy == RangePolicy::kReject) {
                throw ShapeMismatch("pixel value outside [0, 1]");
            }
            v = std::clamp(v, 0.0, 1.0);
        }
    }
}

void ImageBuffer::validate() const {
    if (width <= 0 || height <= 0 || pixels.size() != element_count()) {
        throw ShapeMismatch("image buffer does not match its declared size");
    }
    for (double v : pixels) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ShapeMismatch("image values must be finite and inside [0, 1]");
        }
    }
}

void ConfidenceMap::validate() const {
    if (width <= 0 || height <= 0 ||
        conf.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ShapeMismatch("confidence map does not match its declared size");
    }
    for (double v : conf) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ShapeMismatch("confidence values must be finite and nonnegative");
        }
    }
}

LossWeights LossWeights::confidence_defaults() {
    LossWeights w;
    w.l1 = 0.8;
    w.ssim = 0.2;
    w.lpips = 0.3;
    w.tv = 0.0;
    return w;
}

LossWeights LossWeights::dynamic_defaults() {
    LossWeights w;
    w.l1 = 1.0;
    w.ssim = 1.0;
    w.lpips = 0.0;
    w.tv = 1.0;
    return w;
}

double l1_loss(const ImageBuffer& pred, const ImageBuffer& gt, const ConfidenceMap* conf) {
    require_same_size(pred, gt);
    if (conf) {
        require_conf_size(pred, *conf);
    }

    double sum = 0.0;
    for (int y = 0; y < pred.height; ++y) {
        for (int x = 0; x < pred.width; ++x) {
            const double w = conf ? conf->at(y, x) : 1.0;
            for (int c = 0; c < 3; ++c) {
                sum += w * std::abs(pred.at(y, x, c) - gt.at(y, x, c));
            }
        }
    }
    return sum / static_cast<double>(pred.element_count());
}

double ssim_loss(const ImageBuffer& pred, const ImageBuffer& gt, int window, double sigma,
                 const ConfidenceMap* conf) {
    require_same_size(pred, gt);
    if (conf) {
        require_conf_size(pred, *conf);
    }
    if (window < 1 || pred.width < window || pred.height < window) {
        throw ImageTooSmall("image smaller than the SSIM window");
    }

    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const std::vector<double> kernel = gaussian_kernel(window, sigma);
    const int half = window / 2;
    const int out_h = pred.height - window + 1;
    const int out_w = pred.width - window + 1;

    double loss_sum = 0.0;
    std::size_t count = 0;
    for (int c = 0; c < 3; ++c) {
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                double mu_x = 0.0, mu_y = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
                for (int ky = 0; ky < window; ++ky) {
                    for (int kx = 0; kx < window; ++kx) {
                        const double w =
                            kernel[static_cast<std::size_t>(ky)] * kernel[static_cast<std::size_t>(kx)];
                        const double a = pred.at(oy + ky, ox + kx, c);
                        const double b = gt.at(oy + ky, ox + kx, c);
                        mu_x += w * a;
                        mu_y += w * b;
                        xx += w * a * a;
                        yy += w * b * b;
                        xy += w * a * b;
                    }
                }
                const double var_x = xx - mu_x * mu_x;
                const double var_y = yy - mu_y * mu_y;
                const double cov = xy - mu_x * mu_y;
                const double ssim = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
                                    ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
                const double w = conf ? conf->at(oy + half, ox + half) : 1.0;
                loss_sum += w * (1.0 - ssim);
                ++count;
            }
        }
    }
    return loss_sum / static_cast<double>(count);
}

namespace {

double tv_mean(const std::vector<double>& a, int height, int width) {
    double sum = 0.0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) {
                const std::size_t idx = (static_cast<std::size_t>(y) * width + x) * 3 +
                                        static_cast<std::size_t>(c);
                if (x + 1 < width) {
                    sum += std::abs(a[idx + 3] - a[idx]);
                }
                if (y + 1 < height) {
                    sum += std::abs(a[idx + static_cast<std::size_t>(width) * 3] - a[idx]);
                }
            }
        }
    }
    return sum / (static_cast<double>(height) * width * 3);
}

} // namespace

double tv_loss(const ImageBuffer& img) {
    if (img.width < 2 || img.height < 2) {
        throw ImageTooSmall("total variation needs at least a 2x2 image");
    }
    return tv_mean(img.pixels, img.height, img.width);
}

double tv_of_difference(const ImageBuffer& pred, const ImageBuffer& gt) {
    require_same_size(pred, gt);
    if (pred.width < 2 || pred.height < 2) {
        throw ImageTooSmall("total variation needs at least a 2x2 image");
    }
    std::vector<double> diff(pred.pixels.size());
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = pred.pixels[i] - gt.pixels[i];
    }
    return tv_mean(diff, pred.height, pred.width);
}

LossBreakdown confidence_weighted_loss(const ImageBuffer& pred, const ImageBuffer& gt,
                                       const ConfidenceMap& conf, const LossWeights& weights,
                                       const PerceptualTerm* perceptual) {
    conf.validate();
    LossBreakdown breakdown;
    breakdown.per_term["l1"] = l1_loss(pred, gt, &conf);
    breakdown.per_term["ssim"] = ssim_loss(pred, gt, 11, 1.5, &conf);
    breakdown.per_term["lpips"] = perceptual ? perceptual->evaluate(pred, gt, &conf) : 0.0;
    breakdown.total = weights.l1 * breakdown.per_term["l1"] +
                      weights.ssim * breakdown.per_term["ssim"] +
                      weights.lpips * breakdown.per_term["lpips"];
    return breakdown;
}

LossBreakdown dynamic_scene_loss(const ImageBuffer& pred, const ImageBuffer& gt,
                                 const LossWeights& weights) {
    LossBreakdown breakdown;
    breakdown.per_term["l1"] = l1_loss(pred, gt);
    breakdown.per_term["tv"] = tv_of_difference(pred, gt);
    breakdown.per_term["ssim"] = ssim_loss(pred, gt);
    breakdown.total = weights.l1 * breakdown.per_term["l1"] +
                      weights.tv * breakdown.per_term["tv"] +
                      weights.ssim * breakdown.per_term["ssim"];
    return breakdown;
}

} // namespace dforge

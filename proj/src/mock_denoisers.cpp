#include "dforge/mock_denoisers.hpp"

#include <cmath>

namespace dforge {

LatentVideo TargetOracleDenoiser::predict_noise(const LatentVideo& z_t, int t,
                                                const ConditionPack& cond,
                                                Director director) const {
    (void)cond;
    (void)director;
    require_same_shape(z_t, target_, "oracle denoiser");
    LatentVideo eps = z_t;
    if (t == 0) {
        for (double& v : eps.data) {
            v = 0.0;
        }
        return eps;
    }
    const double a = schedule_.at(t);
    const double signal = std::sqrt(a);
    const double noise = std::sqrt(1.0 - a);
    for (std::size_t i = 0; i < eps.data.size(); ++i) {
        eps.data[i] = (z_t.data[i] - signal * target_.data[i]) / noise;
    }
    return eps;
}

LatentVideo AnalyticGaussianDenoiser::predict_noise(const LatentVideo& z_t, int t,
                                                    const ConditionPack& cond,
                                                    Director director) const {
    (void)cond;
    (void)director;
    LatentVideo eps = z_t;
    const double a = schedule_.at(t);
    const double scale = std::sqrt(1.0 - a) / (a * sigma_ * sigma_ + (1.0 - a));
    const double signal_mu = std::sqrt(a) * mu_;
    for (std::size_t i = 0; i < eps.data.size(); ++i) {
        eps.data[i] = scale * (z_t.data[i] - signal_mu);
    }
    return eps;
}

LatentVideo DirectorSensitiveDenoiser::predict_noise(const LatentVideo& z_t, int t,
                                                     const ConditionPack& cond,
                                                     Director director) const {
    (void)cond;
    double gain = 0.5;
    if (director == Director::kSpatial) {
        gain = 0.3;
    } else if (director == Director::kTemporal) {
        gain = 0.7;
    }
    LatentVideo eps = z_t;
    const double phase = 0.01 * t;
    for (std::size_t i = 0; i < eps.data.size(); ++i) {
        eps.data[i] = gain * std::tanh(z_t.data[i]) + 0.05 * gain * std::sin(phase + 0.1 * i);
    }
    return eps;
}

LatentVideo DirectorAgnosticDenoiser::predict_noise(const LatentVideo& z_t, int t,
                                                    const ConditionPack& cond,
                                                    Director director) const {
    (void)cond;
    (void)director;
    LatentVideo eps = z_t;
    const double phase = 0.01 * t;
    for (std::size_t i = 0; i < eps.data.size(); ++i) {
        eps.data[i] = 0.4 * std::tanh(z_t.data[i]) + 0.02 * std::cos(phase + 0.1 * i);
    }
    return eps;
}

} // namespace dforge

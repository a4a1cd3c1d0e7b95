#pragma once

#include "dforge/sampler.hpp"

namespace dforge {

// Knows the clean latent and returns the exact noise consistent with it:
// eps = (z_t - sqrt(a_t) z0) / sqrt(1 - a_t). Sampling with this denoiser
// inverts q_sample exactly.
class TargetOracleDenoiser : public DenoiserInterface {
public:
    TargetOracleDenoiser(LatentVideo target, NoiseSchedule schedule)
        : target_(std::move(target)), schedule_(std::move(schedule)) {}

    LatentVideo predict_noise(const LatentVideo& z_t, int t, const ConditionPack& cond,
                              Director director) const override;

private:
    LatentVideo target_;
    NoiseSchedule schedule_;
};

// Optimal noise prediction for elementwise Gaussian data z0 ~ N(mu, sigma^2):
//   eps_hat = sqrt(1 - a_t) (z_t - sqrt(a_t) mu) / (a_t sigma^2 + 1 - a_t).
class AnalyticGaussianDenoiser : public DenoiserInterface {
public:
    AnalyticGaussianDenoiser(double mu, double sigma, NoiseSchedule schedule)
        : mu_(mu), sigma_(sigma), schedule_(std::move(schedule)) {}

    LatentVideo predict_noise(const LatentVideo& z_t, int t, const ConditionPack& cond,
                              Director director) const override;

private:
    double mu_;
    double sigma_;
    NoiseSchedule schedule_;
};

// Deterministic pseudo-denoiser whose output depends on the director tag;
// lets tests and the CLI detect whether a schedule actually switched.
class DirectorSensitiveDenoiser : public DenoiserInterface {
public:
    LatentVideo predict_noise(const LatentVideo& z_t, int t, const ConditionPack& cond,
                              Director director) const override;
};

// Ignores everything but the latent; shows director labels are dead
// parameters for a director-agnostic model.
class DirectorAgnosticDenoiser : public DenoiserInterface {
public:
    LatentVideo predict_noise(const LatentVideo& z_t, int t, const ConditionPack& cond,
                              Director director) const override;
};

} // namespace dforge

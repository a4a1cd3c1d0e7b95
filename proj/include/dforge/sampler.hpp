#pragma once

#include "dforge/latent.hpp"
#include "dforge/schedule.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dforge {

// First/last frame latents plus an opaque text token; guidance_scale drives
// the classifier-free combination.
struct ConditionPack {
    std::optional<LatentVideo> first_latent;
    std::optional<LatentVideo> last_latent;
    std::string text_token;
    double guidance_scale = 6.0;

    // Same pack with the conditioning stripped, for the unconditional
    // branch of guidance.
    ConditionPack unconditional() const;
};

// Noise predictor contract. Implementations must be deterministic for fixed
// inputs, return a latent of identical shape and never mutate their inputs.
// The director label is an opaque routing tag.
class DenoiserInterface {
public:
    virtual ~DenoiserInterface() = default;
    virtual LatentVideo predict_noise(const LatentVideo& z_t, int t, const ConditionPack& cond,
                                      Director director) const = 0;
};

struct RefinementConfig {
    int t0 = 0;           // forward timestep of the first refinement round
    int repeats = 1;      // total rounds; rounds after the first re-noise to mid_timestep
    int mid_timestep = 0; // 0 <= mid_timestep <= t0

    void validate(const NoiseSchedule& schedule) const;
};

// Forward diffusion: sqrt(alpha_bar_t) * z0 + sqrt(1 - alpha_bar_t) * eps.
LatentVideo q_sample(const LatentVideo& z0, int t, const LatentVideo& eps,
                     const NoiseSchedule& schedule);

// Deterministic DDIM update from t to t_prev < t:
//   x0_hat = (z_t - sqrt(1 - a_t) eps_hat) / sqrt(a_t)
//   z_prev = sqrt(a_prev) x0_hat + sqrt(1 - a_prev) eps_hat
LatentVideo ddim_step(const LatentVideo& z_t, const LatentVideo& eps_hat, int t, int t_prev,
                      const NoiseSchedule& schedule);

// eps_uncond + scale * (eps_cond - eps_uncond).
LatentVideo cfg_combine(const LatentVideo& eps_uncond, const LatentVideo& eps_cond, double scale);

// DDIM loop with classifier-free guidance. `timesteps` must be strictly
// decreasing and end at 0; the denoiser is queried at timesteps[i] with
// directors.assignments[i] for every transition i -> i+1, so the final
// assignment (paired with the terminal time 0) is never queried.
// Deterministic for fixed inputs.
LatentVideo sample(const DenoiserInterface& denoiser, const NoiseSchedule& schedule,
                   const DirectorSchedule& directors, const ConditionPack& cond,
                   const LatentVideo& init, const std::vector<int>& timesteps);

// Same loop, returning the state at every timestep (front = init, back =
// the final sample). Feeds reference-latent sharing.
std::vector<LatentVideo> sample_trajectory(const DenoiserInterface& denoiser,
                                           const NoiseSchedule& schedule,
                                           const DirectorSchedule& directors,
                                           const ConditionPack& cond, const LatentVideo& init,
                                           const std::vector<int>& timesteps);

// lambda * z_t + (1 - lambda) * z_ref_t, elementwise.
LatentVideo blend_reference(const LatentVideo& z_t, const LatentVideo& z_ref_t, double lambda);

// Shared-initialization sampling under the spatial director: starts from
// ref_latents[0] and, after each of the first blend_window transitions,
// blends the running latent with the reference latent of the reached
// timestep. ref_latents must align with `timesteps` one to one.
LatentVideo sample_with_reference(const DenoiserInterface& denoiser, const NoiseSchedule& schedule,
                                  const ConditionPack& cond,
                                  const std::vector<LatentVideo>& ref_latents, double lambda,
                                  int blend_window, const std::vector<int>& timesteps);

// Re-noise-and-denoise smoothing under the temporal director. Round 0
// noises to config.t0, later rounds to config.mid_timestep; round k draws
// its noise from a counter generator keyed rng_seed + k, so chaining
// single-round calls with successive seeds reproduces a multi-round call.
// t0 = 0 returns the input unchanged.
LatentVideo refine_appearance(const LatentVideo& video_latent, const DenoiserInterface& denoiser,
                              const NoiseSchedule& schedule, const RefinementConfig& config,
                              std::uint64_t rng_seed, const ConditionPack& cond = {});

// Interpolation conditioning layout: z1 at the head of the frame axis, z2
// at the tail, noisy frames between; the mask flags conditioning frames
// (excluded from losses).
struct PackedConditioning {
    LatentVideo assembled;
    std::vector<std::uint8_t> conditioning_mask;
    ConditionPack cond;
};

PackedConditioning pack_interpolation_conditioning(const LatentVideo& z1, const LatentVideo& z2,
                                                   const LatentVideo& z_t);

// Inverse of pack_interpolation_conditioning; bitwise recovery.
void unpack_interpolation_conditioning(const PackedConditioning& packed, LatentVideo& z1,
                                       LatentVideo& z2, LatentVideo& z_t);

// Mean squared error over elements of non-conditioning frames. The
// frame_mask, when given, must have one entry per frame, nonzero =
// conditioning.
double diffusion_mse_loss(const LatentVideo& eps_hat, const LatentVideo& eps,
                          const std::vector<std::uint8_t>* frame_mask = nullptr);

} // namespace dforge

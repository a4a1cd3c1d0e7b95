#include "dforge/sampler.hpp"

#include "dforge/errors.hpp"

#include <cmath>
#include <string>

namespace dforge {

ConditionPack ConditionPack::unconditional() const {
    ConditionPack pack;
    pack.guidance_scale = guidance_scale;
    return pack;
}

void RefinementConfig::validate(const NoiseSchedule& schedule) const {
    if (t0 < 0 || t0 > schedule.T) {
        throw InvalidTimestep("refinement t0 outside the schedule");
    }
    if (mid_timestep < 0 || mid_timestep > t0) {
        throw InvalidTimestep("mid_timestep must lie in [0, t0]");
    }
    if (repeats < 1) {
        throw InvalidRange("refinement needs at least one round");
    }
}

LatentVideo q_sample(const LatentVideo& z0, int t, const LatentVideo& eps,
                     const NoiseSchedule& schedule) {
    require_same_shape(z0, eps, "q_sample");
    const double a = schedule.at(t);
    const double signal = std::sqrt(a);
    const double noise = std::sqrt(1.0 - a);

    LatentVideo out = z0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = signal * z0.data[i] + noise * eps.data[i];
    }
    return out;
}

LatentVideo ddim_step(const LatentVideo& z_t, const LatentVideo& eps_hat, int t, int t_prev,
                      const NoiseSchedule& schedule) {
    require_same_shape(z_t, eps_hat, "ddim_step");
    if (t_prev >= t) {
        throw InvalidTimestep("ddim_step needs t_prev < t");
    }
    const double a_t = schedule.at(t);
    const double a_prev = schedule.at(t_prev);
    const double signal_t = std::sqrt(a_t);
    const double noise_t = std::sqrt(1.0 - a_t);
    const double signal_prev = std::sqrt(a_prev);
    const double noise_prev = std::sqrt(1.0 - a_prev);

    LatentVideo out = z_t;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double x0 = (z_t.data[i] - noise_t * eps_hat.data[i]) / signal_t;
        out.data[i] = signal_prev * x0 + noise_prev * eps_hat.data[i];
    }
    return out;
}

LatentVideo cfg_combine(const LatentVideo& eps_uncond, const LatentVideo& eps_cond, double scale) {
    require_same_shape(eps_uncond, eps_cond, "cfg_combine");
    // Endpoints are exact, not merely within rounding.
    if (scale == 1.0) {
        return eps_cond;
    }
    if (scale == 0.0) {
        return eps_uncond;
    }
    LatentVideo out = eps_uncond;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = eps_uncond.data[i] + scale * (eps_cond.data[i] - eps_uncond.data[i]);
    }
    return out;
}

namespace {

void check_timesteps(const std::vector<int>& timesteps, const NoiseSchedule& schedule) {
    if (timesteps.size() < 2) {
        throw InvalidTimestep("need at least two timesteps (start and terminal 0)");
    }
    if (timesteps.back() != 0) {
        throw InvalidTimestep("timesteps must end at 0");
    }
    for (std::size_t i = 0; i < timesteps.size(); ++i) {
        if (timesteps[i] < 0 || timesteps[i] > schedule.T) {
            throw InvalidTimestep("timestep outside schedule range");
        }
        if (i > 0 && timesteps[i] >= timesteps[i - 1]) {
            throw InvalidTimestep("timesteps must be strictly decreasing");
        }
    }
}

LatentVideo guided_prediction(const DenoiserInterface& denoiser, const LatentVideo& z, int t,
                              const ConditionPack& cond, Director director) {
    const LatentVideo eps_cond = denoiser.predict_noise(z, t, cond, director);
    require_same_shape(z, eps_cond, "denoiser output");
    const LatentVideo eps_uncond = denoiser.predict_noise(z, t, cond.unconditional(), director);
    require_same_shape(z, eps_uncond, "denoiser output");
    return cfg_combine(eps_uncond, eps_cond, cond.guidance_scale);
}

} // namespace

std::vector<LatentVideo> sample_trajectory(const DenoiserInterface& denoiser,
                                           const NoiseSchedule& schedule,
                                           const DirectorSchedule& directors,
                                           const ConditionPack& cond, const LatentVideo& init,
                                           const std::vector<int>& timesteps) {
    init.validate();
    schedule.validate();
    check_timesteps(timesteps, schedule);
    if (directors.assignments.size() != timesteps.size()) {
        throw LengthMismatch("director schedule must match the timestep grid");
    }

    std::vector<LatentVideo> states;
    states.reserve(timesteps.size());
    states.push_back(init);
    for (std::size_t i = 0; i + 1 < timesteps.size(); ++i) {
        const LatentVideo eps_hat = guided_prediction(denoiser, states.back(), timesteps[i], cond,
                                                      directors.assignments[i]);
        states.push_back(ddim_step(states.back(), eps_hat, timesteps[i], timesteps[i + 1], schedule));
    }
    return states;
}

LatentVideo sample(const DenoiserInterface& denoiser, const NoiseSchedule& schedule,
                   const DirectorSchedule& directors, const ConditionPack& cond,
                   const LatentVideo& init, const std::vector<int>& timesteps) {
    return sample_trajectory(denoiser, schedule, directors, cond, init, timesteps).back();
}

LatentVideo blend_reference(const LatentVideo& z_t, const LatentVideo& z_ref_t, double lambda) {
    require_same_shape(z_t, z_ref_t, "blend_reference");
    if (lambda < 0.0 || lambda > 1.0) {
        throw InvalidRange("blend lambda must lie in [0, 1]");
    }
    LatentVideo out = z_t;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = lambda * z_t.data[i] + (1.0 - lambda) * z_ref_t.data[i];
    }
    return out;
}

LatentVideo sample_with_reference(const DenoiserInterface& denoiser, const NoiseSchedule& schedule,
                                  const ConditionPack& cond,
                                  const std::vector<LatentVideo>& ref_latents, double lambda,
                                  int blend_window, const std::vector<int>& timesteps) {
    schedule.validate();
    check_timesteps(timesteps, schedule);
    if (ref_latents.size() != timesteps.size()) {
        throw LengthMismatch("need one reference latent per timestep");
    }
    if (blend_window < 0 || static_cast<std::size_t>(blend_window) > timesteps.size()) {
        throw LengthMismatch("blend window exceeds the timestep grid");
    }

    LatentVideo z = ref_latents.front();
    for (std::size_t i = 0; i + 1 < timesteps.size(); ++i) {
        const LatentVideo eps_hat =
            guided_prediction(denoiser, z, timesteps[i], cond, Director::kSpatial);
        z = ddim_step(z, eps_hat, timesteps[i], timesteps[i + 1], schedule);
        if (i < static_cast<std::size_t>(blend_window)) {
            z = blend_reference(z, ref_latents[i + 1], lambda);
        }
    }
    return z;
}

LatentVideo refine_appearance(const LatentVideo& video_latent, const DenoiserInterface& denoiser,
                              const NoiseSchedule& schedule, const RefinementConfig& config,
                              std::uint64_t rng_seed, const ConditionPack& cond) {
    video_latent.validate();
    schedule.validate();
    config.validate(schedule);

    LatentVideo z = video_latent;
    for (int round = 0; round < config.repeats; ++round) {
        const int t_start = round == 0 ? config.t0 : config.mid_timestep;
        if (t_start == 0) {
            continue;
        }
        CounterRng rng(rng_seed + static_cast<std::uint64_t>(round));
        const LatentVideo eps = LatentVideo::seeded_normal(z.shape, rng);
        LatentVideo noisy = q_sample(z, t_start, eps, schedule);

        std::vector<int> ladder(static_cast<std::size_t>(t_start) + 1);
        for (int t = t_start; t >= 0; --t) {
            ladder[static_cast<std::size_t>(t_start - t)] = t;
        }
        const DirectorSchedule directors = switch_once_schedule(t_start + 1, 0); // all temporal
        z = sample(denoiser, schedule, directors, cond, noisy, ladder);
    }
    return z;
}

PackedConditioning pack_interpolation_conditioning(const LatentVideo& z1, const LatentVideo& z2,
                                                   const LatentVideo& z_t) {
    z1.validate();
    z2.validate();
    z_t.validate();
    if (z1.shape.frames != 1 || z2.shape.frames != 1) {
        throw ShapeMismatch("conditioning latents must be single-frame");
    }
    LatentShape slice = z_t.shape;
    slice.frames = 1;
    if (!(z1.shape == slice) || !(z2.shape == slice)) {
        throw ShapeMismatch("conditioning latents do not match the sample frames");
    }

    PackedConditioning packed;
    LatentShape out_shape = z_t.shape;
    out_shape.frames = z_t.shape.frames + 2;
    packed.assembled = LatentVideo(out_shape);

    const std::size_t stride = z_t.shape.elements_per_frame();
    std::copy(z1.data.begin(), z1.data.end(), packed.assembled.data.begin());
    std::copy(z_t.data.begin(), z_t.data.end(),
              packed.assembled.data.begin() + static_cast<std::ptrdiff_t>(stride));
    std::copy(z2.data.begin(), z2.data.end(),
              packed.assembled.data.begin() +
                  static_cast<std::ptrdiff_t>(stride * (1 + static_cast<std::size_t>(z_t.shape.frames))));

    packed.conditioning_mask.assign(static_cast<std::size_t>(out_shape.frames), 0);
    packed.conditioning_mask.front() = 1;
    packed.conditioning_mask.back() = 1;

    packed.cond.first_latent = z1;
    packed.cond.last_latent = z2;
    return packed;
}

void unpack_interpolation_conditioning(const PackedConditioning& packed, LatentVideo& z1,
                                       LatentVideo& z2, LatentVideo& z_t) {
    const LatentShape& shape = packed.assembled.shape;
    if (shape.frames < 3 ||
        packed.conditioning_mask.size() != static_cast<std::size_t>(shape.frames) ||
        packed.conditioning_mask.front() != 1 || packed.conditioning_mask.back() != 1) {
        throw ShapeMismatch("packed layout is not head/tail conditioned");
    }
    z1 = packed.assembled.frame(0);
    z2 = packed.assembled.frame(shape.frames - 1);

    LatentShape mid = shape;
    mid.frames = shape.frames - 2;
    z_t = LatentVideo(mid);
    const std::size_t stride = shape.elements_per_frame();
    std::copy(packed.assembled.data.begin() + static_cast<std::ptrdiff_t>(stride),
              packed.assembled.data.begin() +
                  static_cast<std::ptrdiff_t>(stride * (1 + static_cast<std::size_t>(mid.frames))),
              z_t.data.begin());
}

double diffusion_mse_loss(const LatentVideo& eps_hat, const LatentVideo& eps,
                          const std::vector<std::uint8_t>* frame_mask) {
    require_same_shape(eps_hat, eps, "diffusion_mse_loss");
    if (frame_mask && frame_mask->size() != static_cast<std::size_t>(eps.shape.frames)) {
        throw ShapeMismatch("frame mask must have one entry per frame");
    }

    const std::size_t stride = eps.shape.elements_per_frame();
    double sum = 0.0;
    std::size_t count = 0;
    for (int f = 0; f < eps.shape.frames; ++f) {
        if (frame_mask && (*frame_mask)[static_cast<std::size_t>(f)]) {
            continue;
        }
        const std::size_t base = static_cast<std::size_t>(f) * stride;
        for (std::size_t i = 0; i < stride; ++i) {
            const double d = eps_hat.data[base + i] - eps.data[base + i];
            sum += d * d;
        }
        count += stride;
    }
    if (count == 0) {
        throw InvalidRange("every frame is masked out of the loss");
    }
    return sum / static_cast<double>(count);
}

} // namespace dforge

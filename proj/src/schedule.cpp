#include "dforge/schedule.hpp"

#include "dforge/errors.hpp"

#include <cmath>
#include <string>

namespace dforge {

double NoiseSchedule::at(int t) const {
    if (t < 0 || t > T) {
        throw InvalidTimestep("timestep " + std::to_string(t) + " outside [0, " +
                              std::to_string(T) + "]");
    }
    return alpha_bar[static_cast<std::size_t>(t)];
}

void NoiseSchedule::validate() const {
    if (T < 1 || alpha_bar.size() != static_cast<std::size_t>(T) + 1) {
        throw InvalidRange("schedule table must have T + 1 entries");
    }
    if (alpha_bar[0] != 1.0) {
        throw InvalidRange("alpha_bar[0] must be 1");
    }
    for (int t = 1; t <= T; ++t) {
        if (!(alpha_bar[static_cast<std::size_t>(t)] > 0.0) ||
            !(alpha_bar[static_cast<std::size_t>(t)] < alpha_bar[static_cast<std::size_t>(t) - 1])) {
            throw InvalidRange("alpha_bar must be strictly decreasing and positive");
        }
    }
}

NoiseSchedule make_schedule(int T, double beta_start, double beta_end, Spacing spacing) {
    if (T < 1 || !(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        throw InvalidRange("need 0 < beta_start <= beta_end < 1 and T >= 1");
    }

    NoiseSchedule schedule;
    schedule.T = T;
    schedule.alpha_bar.resize(static_cast<std::size_t>(T) + 1);
    schedule.alpha_bar[0] = 1.0;

    const double sqrt_start = std::sqrt(beta_start);
    const double sqrt_end = std::sqrt(beta_end);
    double product = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double frac = T > 1 ? static_cast<double>(t - 1) / (T - 1) : 0.0;
        double beta;
        if (spacing == Spacing::kLinear) {
            beta = beta_start + (beta_end - beta_start) * frac;
        } else {
            const double s = sqrt_start + (sqrt_end - sqrt_start) * frac;
            beta = s * s;
        }
        product *= 1.0 - beta;
        schedule.alpha_bar[static_cast<std::size_t>(t)] = product;
    }
    schedule.validate();
    return schedule;
}

const char* to_string(Director d) {
    switch (d) {
    case Director::kSpatial: return "S";
    case Director::kTemporal: return "T";
    case Director::kBase: return "BASE";
    }
    return "BASE";
}

DirectorSchedule switch_once_schedule(int n_steps, int switch_step) {
    if (n_steps < 0 || switch_step < 0 || switch_step > n_steps) {
        throw InvalidRange("switch step must lie in [0, n_steps]");
    }
    DirectorSchedule schedule;
    schedule.switch_step = switch_step;
    schedule.assignments.reserve(static_cast<std::size_t>(n_steps));
    for (int i = 0; i < n_steps; ++i) {
        schedule.assignments.push_back(i < switch_step ? Director::kSpatial : Director::kTemporal);
    }
    return schedule;
}

std::vector<int> default_timesteps(int T, int n) {
    if (n < 2 || T < n - 1) {
        throw InvalidRange("need 2 <= n <= T + 1 query times");
    }
    std::vector<int> timesteps(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        timesteps[static_cast<std::size_t>(i)] =
            static_cast<int>(std::lround(static_cast<double>(T) * (n - 1 - i) / (n - 1)));
    }
    for (int i = 1; i < n; ++i) {
        if (timesteps[static_cast<std::size_t>(i)] >= timesteps[static_cast<std::size_t>(i) - 1]) {
            throw InvalidRange("timestep grid is not strictly decreasing");
        }
    }
    return timesteps;
}

} // namespace dforge

#pragma once

#include <string>
#include <vector>

namespace dforge {

// Cumulative-alpha table of a DDPM forward process. alpha_bar[0] = 1 and
// the table is strictly decreasing; alpha_bar[t] is the squared signal
// fraction left after t noising steps.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> alpha_bar; // length T + 1

    double at(int t) const;
    void validate() const;
};

enum class Spacing {
    kLinear,
    kScaledLinear,
};

NoiseSchedule make_schedule(int T, double beta_start, double beta_end, Spacing spacing);

enum class Director {
    kSpatial,
    kTemporal,
    kBase,
};

const char* to_string(Director d);

// Per-step director assignment for an inference run.
struct DirectorSchedule {
    std::vector<Director> assignments;
    int switch_step = 0;
};

// Spatial director for step indices [0, switch_step), temporal for the
// rest. switch_step = 0 is pure temporal, switch_step = n_steps pure
// spatial.
DirectorSchedule switch_once_schedule(int n_steps, int switch_step);

// Evenly spaced integer query times from T down to 0 inclusive, n entries.
std::vector<int> default_timesteps(int T, int n);

} // namespace dforge

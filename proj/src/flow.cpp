#include "dforge/flow.hpp"

#include "dforge/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dforge {

void FlowField::validate() const {
    if (width <= 0 || height <= 0 || u.size() != pixel_count() || v.size() != pixel_count()) {
        throw ShapeMismatch("flow planes do not match the declared size");
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u[i]) || !std::isfinite(v[i])) {
            throw ShapeMismatch("flow values must be finite");
        }
    }
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw EmptySequence("median of an empty sequence");
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        return values[mid];
    }
    return 0.5 * (values[mid - 1] + values[mid]);
}

FlowStats flow_stats(const FlowField& flow, double eps_static, double eps_dyn) {
    flow.validate();
    if (eps_static > eps_dyn) {
        throw InvalidRange("eps_static must not exceed eps_dyn");
    }

    const std::size_t n = flow.pixel_count();
    double mag_sum = 0.0;
    std::size_t n_static = 0;
    std::size_t n_dynamic = 0;
    double dir_x = 0.0;
    double dir_y = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::hypot(static_cast<double>(flow.u[i]), static_cast<double>(flow.v[i]));
        mag_sum += mag;
        if (mag < eps_static) {
            ++n_static;
        }
        if (mag > eps_dyn) {
            ++n_dynamic;
            dir_x += flow.u[i] / mag;
            dir_y += flow.v[i] / mag;
        }
    }

    FlowStats stats;
    stats.mean_magnitude = mag_sum / static_cast<double>(n);
    stats.static_fraction = static_cast<double>(n_static) / static_cast<double>(n);
    stats.dynamic_fraction = static_cast<double>(n_dynamic) / static_cast<double>(n);
    if (n_dynamic > 0) {
        stats.uniformity =
            std::hypot(dir_x, dir_y) / static_cast<double>(n_dynamic);
    }
    return stats;
}

TemporalVerdict is_temporal_variant(const std::vector<FlowStats>& stats_seq,
                                    const TemporalVariantPolicy& policy) {
    if (stats_seq.empty()) {
        throw EmptySequence("temporal-variant check needs at least one frame");
    }

    std::vector<double> statics, dynamics, uniformities;
    statics.reserve(stats_seq.size());
    dynamics.reserve(stats_seq.size());
    uniformities.reserve(stats_seq.size());
    for (const FlowStats& s : stats_seq) {
        statics.push_back(s.static_fraction);
        dynamics.push_back(s.dynamic_fraction);
        uniformities.push_back(s.uniformity);
    }

    TemporalVerdict verdict;
    verdict.median_static = median(std::move(statics));
    verdict.median_dynamic = median(std::move(dynamics));
    verdict.median_uniformity = median(std::move(uniformities));
    verdict.accepted = verdict.median_static >= policy.min_static &&
                       verdict.median_dynamic >= policy.min_dynamic &&
                       verdict.median_uniformity <= policy.max_uniformity;
    verdict.score = verdict.median_dynamic * verdict.median_static;
    return verdict;
}

ReferenceSelection select_reference_frame(const std::vector<MaskFrame>& masks,
                                          const std::vector<FlowField>& flows,
                                          const ReferenceWeights& weights) {
    if (masks.empty() || flows.empty()) {
        throw EmptySequence("reference selection needs at least one frame");
    }
    if (masks.size() != flows.size()) {
        throw LengthMismatch("mask and flow sequences differ in length");
    }

    const std::size_t n = masks.size();
    std::vector<double> areas(n, 0.0);
    std::vector<double> mags(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const MaskFrame& m = masks[i];
        if (m.width != flows[i].width || m.height != flows[i].height) {
            throw ShapeMismatch("mask does not match its companion flow");
        }
        for (std::uint8_t px : m.mask) {
            if (px) {
                areas[i] += 1.0;
            }
        }
        const FlowField& f = flows[i];
        f.validate();
        double sum = 0.0;
        for (std::size_t p = 0; p < f.pixel_count(); ++p) {
            sum += std::hypot(static_cast<double>(f.u[p]), static_cast<double>(f.v[p]));
        }
        mags[i] = sum / static_cast<double>(f.pixel_count());
    }

    const double max_area = *std::max_element(areas.begin(), areas.end());
    const double max_mag = *std::max_element(mags.begin(), mags.end());

    ReferenceSelection selection;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double area_term = max_area > 0.0 ? areas[i] / max_area : 0.0;
        const double mag_term = max_mag > 0.0 ? mags[i] / max_mag : 0.0;
        const double score = weights.w_mask * area_term + weights.w_flow * mag_term;
        if (score > best) {
            best = score;
            selection.index = static_cast<int>(i);
        }
    }
    if (best <= 0.0) {
        selection.index = 0;
        selection.all_zero = true;
    }
    return selection;
}

} // namespace dforge

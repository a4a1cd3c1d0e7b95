#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dforge {

// Dense optical flow for one frame, pixels/frame displacement.
struct FlowField {
    std::vector<float> u;
    std::vector<float> v;
    int width = 0;
    int height = 0;
    int frame_index = 0;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    void validate() const;
};

struct FlowStats {
    double mean_magnitude = 0.0;
    double static_fraction = 0.0;  // |flow| <  eps_static
    double dynamic_fraction = 0.0; // |flow| >  eps_dyn
    // Mean resultant length of the flow directions over dynamic pixels:
    // 1 for globally coherent motion (camera pan), near 0 for scattered
    // object motion. 0 when nothing moves.
    double uniformity = 0.0;
};

struct MaskFrame {
    std::vector<std::uint8_t> mask; // nonzero = dynamic-object pixel
    int width = 0;
    int height = 0;
    int frame_index = 0;
};

struct TemporalVariantPolicy {
    double min_static = 0.6;
    double min_dynamic = 0.02;
    double max_uniformity = 0.8;
};

struct TemporalVerdict {
    bool accepted = false;
    double score = 0.0;
    double median_static = 0.0;
    double median_dynamic = 0.0;
    double median_uniformity = 0.0;
};

struct ReferenceWeights {
    double w_mask = 0.5;
    double w_flow = 0.5;
};

struct ReferenceSelection {
    int index = 0;
    // Set when every frame scored 0; index 0 is returned in that case.
    bool all_zero = false;
};

// Per-pixel magnitudes sqrt(u^2 + v^2); fractions per the FlowStats field
// definitions. Throws ShapeMismatch / InvalidRange.
FlowStats flow_stats(const FlowField& flow, double eps_static, double eps_dyn);

// Accepted iff median static fraction >= min_static, median dynamic
// fraction >= min_dynamic and median uniformity <= max_uniformity; the last
// test rejects global camera motion. Score = median dynamic x median static.
TemporalVerdict is_temporal_variant(const std::vector<FlowStats>& stats_seq,
                                    const TemporalVariantPolicy& policy);

// Argmax over frames of w_mask * (area_i / max area) + w_flow *
// (mean |flow|_i / max mean |flow|); ties go to the lowest index.
ReferenceSelection select_reference_frame(const std::vector<MaskFrame>& masks,
                                          const std::vector<FlowField>& flows,
                                          const ReferenceWeights& weights);

double median(std::vector<double> values);

} // namespace dforge

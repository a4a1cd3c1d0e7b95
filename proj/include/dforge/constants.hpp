#pragma once

namespace dforge {

// Sampler defaults.
inline constexpr int kDefaultTrainTimesteps = 1000;
inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;
inline constexpr int kDefaultInferenceSteps = 50;
inline constexpr int kDefaultSwitchStep = 5;
inline constexpr double kDefaultGuidanceScale = 6.0;

// Reference-latent sharing defaults.
inline constexpr double kDefaultBlendLambda = 0.7;
inline constexpr int kDefaultBlendWindow = 10;

// Video geometry the long-video pipeline targets. Carried as configuration
// only; nothing here renders video.
inline constexpr int kLongVideoFrames = 145;
inline constexpr int kBaseVideoFrames = 49;
inline constexpr int kLongVideoWidth = 480;
inline constexpr int kLongVideoHeight = 320;
inline constexpr int kReconstructionViews = 32;

// Reconstruction loss weights (confidence-weighted objective).
inline constexpr double kConfidenceL1Weight = 0.8;
inline constexpr double kConfidenceSsimWeight = 0.2;
inline constexpr double kConfidenceLpipsWeight = 0.3;
inline constexpr int kSplatOptimizationSteps = 7000;

// Director adapter training metadata (documentation only).
inline constexpr int kDirectorLoraRank = 256;
inline constexpr int kDirectorLoraSteps = 3000;
inline constexpr int kDirectorEarlyStopSteps = 1000;

} // namespace dforge

#pragma once

// Procedural gesture clips standing in for recorded operator footage.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "swarman/emotion.hpp"
#include "swarman/gesture_lstm.hpp"
#include "swarman/pose_model.hpp"

namespace swarman {

inline constexpr double kDefaultNoiseLevel = 0.02;
inline constexpr double kClipFps = 30.0;

/// Operator facing the camera with arms straight out, camera coordinates.
LandmarkFrame t_pose_frame(double t = 0.0);

/// One kSequenceLength-frame clip of `emotion`. noise_level scales every
/// random perturbation (tempo, phase, amplitude, body scale, camera offset and
/// per-coordinate Gaussian noise); at 0 the clip is the bare template.
std::vector<LandmarkFrame> synthesize_clip(Emotion emotion, double noise_level, std::mt19937_64& rng,
                                           double t0 = 0.0);

/// n_per_class labeled sequences per emotion, classes interleaved
/// (happy, sad, angry, confused, neutral, happy, ...). Deterministic per seed.
GestureDataset generate_synthetic_dataset(std::size_t n_per_class, double noise_level, std::uint64_t seed);

/// Back-to-back clips, one per entry of `emotions`, as a landmark stream.
std::vector<LandmarkFrame> synthesize_stream(const std::vector<Emotion>& emotions, double noise_level,
                                             std::uint64_t seed);

}  // namespace swarman

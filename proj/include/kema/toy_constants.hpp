#pragma once

// Fixed parameterization of the toy spirals. The source material only shows
// pictures; these values are ours and versioned with the generator.

#include <numbers>

namespace kema::toy {

inline constexpr int kGeneratorVersion = 1;

inline constexpr int kClasses = 3;
inline constexpr double kNoiseStd = 0.01;

// Arms layout: every class is a full arm over the parameter range
// [0, kArmTurns * 2 pi], arm c rotated by 2 pi c / C.
inline constexpr double kArmStart = 0.0;
inline constexpr double kArmTurns = 0.75;

// Segments layout: one arm starting at kSegmentStart, class c covering the
// c-th consecutive sweep of kSegmentTurns turns.
inline constexpr double kSegmentStart = std::numbers::pi / 2.0;
inline constexpr double kSegmentTurns = 0.5;

// Radius is a * parameter, with a chosen so the outermost point sits at r = 1.

inline constexpr double kScale = 2.0;
inline constexpr double kRotation = std::numbers::pi / 4.0;
// as_line places each point on this ray at its planar radius
inline constexpr double kLineAngle = std::numbers::pi / 4.0;
// third coordinate z = kLiftGain * r^2
inline constexpr double kLiftGain = 1.0;

inline constexpr int kLabeledPerClass = 20;
inline constexpr int kUnlabeled = 1000;
inline constexpr int kTest = 1000;

inline constexpr int kSweepLabeledPerClass = 100;
inline constexpr int kSweepUnlabeledPerClass = 50;

}  // namespace kema::toy

#pragma once

#include <cmath>

#include "refract/levy_model.hpp"

namespace fx {

using namespace refract;

inline JumpSpec exp_jumps(double rate = 1.0, double mean = 1.0) { return {rate, JumpLaw(ExponentialLaw{mean})}; }

/// c0 = 2, unit-rate unit-mean exponential jumps.
inline LevyModel cl1() { return LevyModel::from_bv_drift(2.0, exp_jumps()); }
/// gamma = 1, sigma^2 = 2.
inline LevyModel bm1() { return {1.0, 2.0, JumpSpec::none()}; }
/// Driftless, sigma^2 = 2.
inline LevyModel bm0() { return {0.0, 2.0, JumpSpec::none()}; }
/// c0 = 2, unit jumps of size 1.
inline LevyModel point_mass() { return LevyModel::from_bv_drift(2.0, {1.0, JumpLaw(PointMassLaw{1.0})}); }

inline RefractedModel refracted(const LevyModel& x, double delta, double b = 0.0) { return {x, delta, b}; }

}  // namespace fx

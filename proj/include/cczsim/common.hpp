#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cczsim {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.1415926535897932384626433832795;

// All Hamiltonians are stored in angular frequency units (rad/ns). Public
// interfaces speak GHz (f = omega / 2pi) and ns; this is the single
// conversion point.
inline double ghz_to_angular(double f_ghz) { return kTwoPi * f_ghz; }
inline double angular_to_ghz(double w) { return w / kTwoPi; }

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

// Wrap to [0, 2pi).
inline double wrap_angle_positive(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w;
}

// Smallest |a - b| modulo 2pi.
inline double angle_distance(double a, double b) {
  return std::abs(wrap_angle(a - b));
}

// Continuity unwrap along a sampled axis: each value is shifted by a
// multiple of 2pi to stay within pi of its predecessor.
std::vector<double> unwrap_phases(const std::vector<double>& wrapped);

inline std::string version_string() {
#ifdef CCZSIM_VERSION
  return CCZSIM_VERSION;
#else
  return "dev";
#endif
}

// Error taxonomy; the CLI maps these onto exit codes.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : ValidationError {
  using ValidationError::ValidationError;
};
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TomographyError : CalibrationError {
  using CalibrationError::CalibrationError;
};

using complexd = std::complex<double>;

}  // namespace cczsim

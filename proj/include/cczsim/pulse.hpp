#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cczsim/hamiltonian.hpp"

namespace cczsim {

enum class PulseShape { FlatTopCosine };

// Flat-top frequency-shift pulse with cosine ramps: the target mode moves
// as w -> w + envelope(t) * amplitude, envelope rising 0->1 over `ramp_ns`,
// holding at 1 for `hold_ns`, and falling back symmetrically.
struct PulseSegment {
  std::string target;
  double amplitude_ghz = 0.0;
  double ramp_ns = 0.0;
  double hold_ns = 0.0;
  PulseShape shape = PulseShape::FlatTopCosine;

  double duration_ns() const { return 2.0 * ramp_ns + hold_ns; }
  // Envelope value at time `t` measured from segment start; 0 outside.
  double envelope(double t) const;
};

// Cosine-windowed activation of one coupling channel: scale 0 -> 1 -> 0
// with the same flat-top profile. Used by the full model to emulate
// adiabatic coupler parking around each gate stage.
struct ActivationSegment {
  QubitPair pair = QubitPair::Q1Q2;
  double ramp_ns = 0.0;
  double hold_ns = 0.0;
  double duration_ns() const { return 2.0 * ramp_ns + hold_ns; }
  double envelope(double t) const;
};

struct ScheduledPulse {
  double start_ns = 0.0;
  PulseSegment segment;
};

struct ScheduledActivation {
  double start_ns = 0.0;
  ActivationSegment segment;
};

// Control snapshot consumed by the Hamiltonian assembly.
struct ControlSample {
  FrequencyOffsets offsets_ghz;
  PairScales pair_scales;  // absent pairs default to 1
};

// Time-ordered control program. Frequency segments may overlap on distinct
// targets but never on the same target; activation windows may not overlap
// per pair.
class PulseSchedule {
 public:
  PulseSchedule(std::vector<ScheduledPulse> pulses, double total_ns,
                double dt_ns,
                std::vector<ScheduledActivation> activations = {},
                std::optional<double> idle_pair_scale = std::nullopt);

  // Convenience: a single pulse on one mode, total = segment duration.
  static PulseSchedule single(PulseSegment segment, double dt_ns);

  double total_ns() const { return total_ns_; }
  double dt_ns() const { return dt_ns_; }
  const std::vector<ScheduledPulse>& pulses() const { return pulses_; }
  bool has_activations() const { return !activations_.empty(); }

  ControlSample sample(double t_ns) const;

  // Sorted instants where some envelope starts or stops varying; constant
  // spans between breakpoints are integrated in one exact step.
  std::vector<double> breakpoints() const;
  bool is_constant_between(double t0, double t1) const;

 private:
  std::vector<ScheduledPulse> pulses_;
  std::vector<ScheduledActivation> activations_;
  double total_ns_;
  double dt_ns_;
  // Scale applied to pairs without any activation window. 1 by default
  // (couplings statically on); 0 when activations drive the schedule.
  double idle_pair_scale_ = 1.0;
};

}  // namespace cczsim

#include "cczsim/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cczsim {

namespace {

double flat_top_envelope(double t, double ramp, double hold) {
  const double total = 2.0 * ramp + hold;
  if (t <= 0.0 || t >= total) return 0.0;
  if (t < ramp) return 0.5 * (1.0 - std::cos(kPi * t / ramp));
  if (t <= ramp + hold) return 1.0;
  return 0.5 * (1.0 - std::cos(kPi * (total - t) / ramp));
}

}  // namespace

double PulseSegment::envelope(double t) const {
  if (ramp_ns == 0.0) {
    return (t >= 0.0 && t < duration_ns()) ? 1.0 : 0.0;
  }
  return flat_top_envelope(t, ramp_ns, hold_ns);
}

double ActivationSegment::envelope(double t) const {
  if (ramp_ns == 0.0) {
    return (t >= 0.0 && t < duration_ns()) ? 1.0 : 0.0;
  }
  return flat_top_envelope(t, ramp_ns, hold_ns);
}

PulseSchedule::PulseSchedule(std::vector<ScheduledPulse> pulses, double total_ns,
                             double dt_ns,
                             std::vector<ScheduledActivation> activations,
                             std::optional<double> idle_pair_scale)
    : pulses_(std::move(pulses)),
      activations_(std::move(activations)),
      total_ns_(total_ns),
      dt_ns_(dt_ns) {
  if (total_ns_ < 0.0) throw ValidationError("schedule duration negative");
  if (dt_ns_ <= 0.0) throw ValidationError("sample step must be positive");
  for (const auto& p : pulses_) {
    if (p.segment.ramp_ns < 0.0 || p.segment.hold_ns < 0.0) {
      throw ValidationError("pulse ramp and hold must be non-negative");
    }
  }
  // Same-target overlap is rejected; distinct targets may overlap freely.
  for (size_t i = 0; i < pulses_.size(); ++i) {
    for (size_t j = i + 1; j < pulses_.size(); ++j) {
      if (pulses_[i].segment.target != pulses_[j].segment.target) continue;
      const double a0 = pulses_[i].start_ns;
      const double a1 = a0 + pulses_[i].segment.duration_ns();
      const double b0 = pulses_[j].start_ns;
      const double b1 = b0 + pulses_[j].segment.duration_ns();
      if (a0 < b1 - 1e-12 && b0 < a1 - 1e-12) {
        throw ValidationError("overlapping pulses on mode " +
                              pulses_[i].segment.target);
      }
    }
  }
  for (size_t i = 0; i < activations_.size(); ++i) {
    for (size_t j = i + 1; j < activations_.size(); ++j) {
      if (activations_[i].segment.pair != activations_[j].segment.pair) continue;
      const double a0 = activations_[i].start_ns;
      const double a1 = a0 + activations_[i].segment.duration_ns();
      const double b0 = activations_[j].start_ns;
      const double b1 = b0 + activations_[j].segment.duration_ns();
      if (a0 < b1 - 1e-12 && b0 < a1 - 1e-12) {
        throw ValidationError("overlapping activation windows on a pair");
      }
    }
  }
  idle_pair_scale_ =
      idle_pair_scale.value_or(activations_.empty() ? 1.0 : 0.0);
}

PulseSchedule PulseSchedule::single(PulseSegment segment, double dt_ns) {
  const double total = segment.duration_ns();
  return PulseSchedule({{0.0, std::move(segment)}}, total, dt_ns);
}

ControlSample PulseSchedule::sample(double t_ns) const {
  ControlSample s;
  for (const auto& p : pulses_) {
    const double env = p.segment.envelope(t_ns - p.start_ns);
    if (env != 0.0) {
      s.offsets_ghz[p.segment.target] += env * p.segment.amplitude_ghz;
    }
  }
  s.pair_scales[QubitPair::Q1Q2] = idle_pair_scale_;
  s.pair_scales[QubitPair::Q2Q3] = idle_pair_scale_;
  for (const auto& a : activations_) {
    const double env = a.segment.envelope(t_ns - a.start_ns);
    if (env != 0.0) s.pair_scales[a.segment.pair] = env;
  }
  return s;
}

std::vector<double> PulseSchedule::breakpoints() const {
  std::set<double> pts = {0.0, total_ns_};
  const auto add_window = [&](double start, double ramp, double hold) {
    const double total = 2.0 * ramp + hold;
    pts.insert(start);
    pts.insert(start + ramp);
    pts.insert(start + ramp + hold);
    pts.insert(start + total);
  };
  for (const auto& p : pulses_) {
    add_window(p.start_ns, p.segment.ramp_ns, p.segment.hold_ns);
  }
  for (const auto& a : activations_) {
    add_window(a.start_ns, a.segment.ramp_ns, a.segment.hold_ns);
  }
  std::vector<double> out;
  for (const double t : pts) {
    if (t >= -1e-12 && t <= total_ns_ + 1e-12) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  // collapse numerically coincident points
  std::vector<double> dedup;
  for (const double t : out) {
    if (dedup.empty() || t - dedup.back() > 1e-9) dedup.push_back(t);
  }
  if (!dedup.empty()) dedup.back() = total_ns_;
  return dedup;
}

bool PulseSchedule::is_constant_between(double t0, double t1) const {
  const auto in_ramp = [&](double start, double ramp, double hold) {
    if (ramp == 0.0) return false;
    const double up0 = start, up1 = start + ramp;
    const double dn0 = start + ramp + hold, dn1 = start + 2.0 * ramp + hold;
    const bool hits_up = t0 < up1 - 1e-12 && up0 < t1 - 1e-12;
    const bool hits_dn = t0 < dn1 - 1e-12 && dn0 < t1 - 1e-12;
    return hits_up || hits_dn;
  };
  for (const auto& p : pulses_) {
    if (in_ramp(p.start_ns, p.segment.ramp_ns, p.segment.hold_ns)) return false;
  }
  for (const auto& a : activations_) {
    if (in_ramp(a.start_ns, a.segment.ramp_ns, a.segment.hold_ns)) return false;
  }
  return true;
}

}  // namespace cczsim

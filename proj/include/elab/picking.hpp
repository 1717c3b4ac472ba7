#pragma once

// First-arrival extraction from traction traces.  An onset is the first
// threshold crossing above a per-trace noise floor; the pick subtracts the
// crossing delay the source wavelet itself has at the same relative level.

#include <vector>

#include "elab/inversion.hpp"
#include "elab/wave.hpp"

namespace elab {

struct Arrival {
  int source_id = 0;
  int receiver_id = 0;
  char mode = 'p';
  double t_pick = 0.0;
  double confidence = 0.0;  // 0 means unusable
};

struct PickOptions {
  double rel_threshold = 0.05;   // fraction of the local phase amplitude
  double noise_mult = 5.0;       // floor multiplier on the pre-onset rms
  double min_separation = 0.15;  // drop pairs closer than this along the arc
  double gate_factor = 1.25;     // mode gate scale on the reference pick
  double gate_clear_periods = 2.5;  // packet width the gate must clear
  double window_periods = 1.5;   // local amplitude window after onset
};

// Picks one mode from every source/receiver pair of one dataset.  The mode
// selects the traction component: 'p' reads along the receiver normal, 's'
// along the tangent.  gates, when given, hold per source a vector over
// receivers with the earliest admissible arrival; entries < 0 drop the pair.
std::vector<Arrival> pick_arrivals(const DNDataset& data, char mode,
                                   const std::vector<VecX>* gates = nullptr,
                                   const PickOptions& opts = {});

// Trace-time gate for a shear pick behind the pressure arrival t_p: the
// crossing delay plus whichever clears the pressure packet, proportional
// scale or packet width.  Returns -1 when the gate cannot be placed ahead of
// the earliest shear onset compatible with min_speed_ratio * t_p, so the
// pair is unusable for shear.
double shear_gate(double t_p, double f0, double t0, const PickOptions& opts,
                  double min_speed_ratio = 1.4142135623730951);

// Keeps picks at or above min_confidence as travel-time observations.
std::vector<TravelObservation> picks_to_observations(
    const std::vector<Arrival>& picks, const DNDataset& data,
    double min_confidence = 0.2);

} // namespace elab

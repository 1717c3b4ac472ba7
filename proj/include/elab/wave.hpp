#pragma once

// Time-domain elastic wave solver on a staggered velocity-stress grid with an
// embedded smooth boundary.  Dirichlet displacement data enter through a
// mirrored ghost band outside the domain; the Neumann response is read off
// the stress grid at boundary receivers.  Fourth order in space, leapfrog in
// time.

#include <array>
#include <string>
#include <vector>

#include "elab/domain.hpp"
#include "elab/elasticity.hpp"
#include "elab/errors.hpp"
#include "elab/types.hpp"

namespace elab {

struct WaveSource {
  double param = 0.0;  // boundary parameter of the excitation arc center
  std::string polarization = "normal";  // "normal" | "tangential"
  double amplitude = 1.0;
};

struct SimulationConfig {
  Domain2 domain = Domain2::ball(Vec2::Zero(), 1.0);
  LameField2 material = constant_lame_field(Domain2::ball(Vec2::Zero(), 1.0),
                                            LameTriplet{1.0, 1.0, 1.0});
  int grid_nodes = 400;     // nodes along the longer box edge
  double cfl = 0.4;
  double duration = 3.0;
  double dissipation = 0.02;  // fourth-difference velocity filter (0 disables)
  double f0 = 0.0;          // Ricker center frequency; 0 = pick from the grid
  double source_width_cells = 4.0;  // arc Gaussian width, in cells
  double onset_delay_periods = 2.2; // Ricker delay, in multiples of 1/f0
  int n_receivers = 64;
  int target_samples = 1200;
  double box_margin = 0.1;
  std::vector<WaveSource> sources;
};

// Ricker wavelet with onset delay t0; the datum is amplitude * ricker, the
// velocity condition uses the analytic derivative.
double ricker(double t, double f0, double t0);
double ricker_dt(double t, double f0, double t0);
// First time |ricker| reaches rel * max|ricker|; used to calibrate picks.
double ricker_first_crossing(double f0, double t0, double rel);

struct DNDataset {
  Domain2 domain = Domain2::ball(Vec2::Zero(), 1.0);
  std::vector<WaveSource> sources;
  std::vector<double> receiver_params;
  // Fixed clock: duration/(target_samples-1) spacing, independent of the
  // solver step, so datasets at different resolutions stay comparable.
  std::vector<double> times;
  double f0 = 0.0;
  double t0 = 0.0;
  double grid_h = 0.0;
  // One block per source, 2*n_receivers rows by n_times columns; rows 2r and
  // 2r+1 hold the traction components at receiver r.
  std::vector<MatX> traces;
  // One block per source: step-time rows by 3 columns (t, kinetic, strain).
  std::vector<MatX> energy;

  long n_receivers() const { return static_cast<long>(receiver_params.size()); }
  Eigen::Block<const MatX> traction_rows(int source, int receiver) const {
    return traces[static_cast<size_t>(source)].block(2 * receiver, 0, 2,
                                                     times.size());
  }
};

// Displacement and velocity snapshots at checkpoint times; positions follow
// the staggered layout (ux, vx at (x0+(i+1/2)h, y0+jh); uy, vy at
// (x0+ih, y0+(j+1/2)h)).
struct WaveField {
  double h = 0.0, x0 = 0.0, y0 = 0.0;
  std::vector<double> times;
  std::vector<ArrXX> ux, uy, vx, vy;
};

class WaveWorkspace {
 public:
  explicit WaveWorkspace(const SimulationConfig& cfg);

  // One source from rest; fills a trace block and an energy log as stored in
  // DNDataset.  Throws PhysicsError if the field stops being finite.
  void run_source(const WaveSource& src, MatX& traces, MatX& energy) const;
  // Same run with displacement/velocity snapshots at checkpoint times.
  WaveField snapshots(const WaveSource& src, int checkpoints) const;

  const std::vector<double>& sample_times() const { return times_; }
  const std::vector<double>& receiver_params() const { return rec_params_; }
  double dt() const { return dt_; }
  double h() const { return h_; }
  double f0() const { return f0_; }
  double t0() const { return t0_; }

 private:
  struct Ghost {
    int32_t row = 0, col = 0;      // node in the component array
    double fnx = 0.0, fny = 0.0;   // outward normal at the foot point
    double arc = 0.0;              // boundary parameter of the foot point
    std::array<int32_t, 4> mr{};   // mirror bilinear rows
    std::array<int32_t, 4> mc{};   // mirror bilinear cols
    std::array<double, 4> mw{};
  };
  struct Probe {  // bilinear read on one component grid
    std::array<int32_t, 4> r{};
    std::array<int32_t, 4> c{};
    std::array<double, 4> w{};
  };
  struct Receiver {
    double nx = 0.0, ny = 0.0;     // outward normal
    Probe sxx[2], sxy[2];          // at x - h nu and x - 2 h nu
  };

  void build_masks(const SimulationConfig& cfg);
  void build_ghosts(const SimulationConfig& cfg);
  void build_receivers(const SimulationConfig& cfg);
  void run_core(const WaveSource& src, MatX& traces, MatX& energy,
                WaveField* capture, int checkpoints) const;

  Domain2 domain_;
  int nx_ = 0, ny_ = 0;
  double x0_ = 0.0, y0_ = 0.0, h_ = 0.0, dt_ = 0.0;
  double f0_ = 0.0, t0_ = 0.0, amp_width_ = 0.0;
  int n_total_ = 0;   // solver steps to cover the duration
  int estride_ = 0;   // energy/abort check cadence in steps
  std::vector<double> times_, rec_params_;

  // Update coefficients, zero outside the active sets.
  ArrXX bx_, by_;            // dt / rho at vx, vy nodes (interior only)
  ArrXX lp2m_, lamdt_;       // dt (lam + 2 mu), dt lam at sxx/syy nodes
  ArrXX mudt_;               // dt mu at sxy nodes
  // Energy weights (interior only).
  ArrXX rho_x_, rho_y_, e_a_, e_b_, e_xy_;
  double diss_ = 0.0;
  ArrXX fmask_x_, fmask_y_;  // 1 on interior velocity nodes, 0 elsewhere
  std::vector<Ghost> ghosts_x_, ghosts_y_;
  std::vector<Receiver> receivers_;
};

DNDataset assemble_dn_data(const SimulationConfig& cfg, int threads = 1);

// Full initial-boundary-value solve with field snapshots, for inspection and
// the zero-source/causality properties.  Displacement is accumulated from
// the velocity field.
WaveField solve_ibvp(const SimulationConfig& cfg, const WaveSource& src,
                     int checkpoints = 5);

// Relative Frobenius distance between two datasets of identical layout
// (sources, receivers, sample clock); amplitudes are data, not layout.
double compare_dn(const DNDataset& a, const DNDataset& b);

// Same comparison with a per-source breakdown (per-source denominators).
struct DNComparison {
  double discrepancy = 0.0;
  VecX per_source;
};
DNComparison compare_dn_breakdown(const DNDataset& a, const DNDataset& b);

// Plane-pulse speed fit in free space: a y-invariant pulse propagates along
// x through the same staggered stencils; the fitted speed of the peak between
// two stations is compared with the material's plane-wave speed.
struct PulseFit {
  double fitted = 0.0;
  double reference = 0.0;
  double relative_error() const {
    return std::abs(fitted - reference) / reference;
  }
};
PulseFit free_space_pulse_speed(char mode, const LameTriplet& mat,
                                int nodes = 600);

// Minimal 3D staggered update, exercised on a smoke problem only.
struct Wave3DSmoke {
  bool finite = false;
  double energy_initial = 0.0;
  double energy_final = 0.0;
  double front_radius = 0.0;  // rms radius of |v| at the end
};
Wave3DSmoke wave3d_smoke(int nodes = 32, int steps = 40);

} // namespace elab

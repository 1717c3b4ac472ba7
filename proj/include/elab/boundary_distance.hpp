#pragma once

// Boundary distances d(z, w) = min over inward directions of the in-domain
// g-length of geodesics from z exiting at w.  A direction fan brackets
// branches by the sign of the exit-parameter mismatch; each bracket is
// refined by a guarded secant at full integration resolution.  Tables,
// diameter, and the simplicity verdict build on this.

#include <string>
#include <vector>

#include "elab/geodesic.hpp"

namespace elab {

struct FanOptions {
  int fan = 720;
  double refine_tol = 1e-10;     // on the exit-parameter mismatch
  int max_refine_iter = 48;
  double coarse_step_factor = 5.0;  // fan shots integrate this much coarser
  double inward_margin = 1e-3;   // keep fan directions strictly inward (rad)
};

struct DistanceBranch {
  double alpha = 0.0;       // shooting angle relative to the inward normal
  double length = 0.0;      // tau - delta
  double mismatch = 0.0;    // residual exit-parameter error
  bool converged = false;
};

struct DistanceResult {
  double distance = 0.0;
  bool multiple = false;     // >= 2 branches with distinct lengths
  int trapped_rays = 0;
  std::vector<DistanceBranch> branches;
};

// z and w given by boundary parameters (angle for disks/ellipses).
DistanceResult boundary_distance(const ConformalMetric2& metric, double theta_z,
                                 double theta_w, const FanOptions& opts = {});

struct TravelTimeTable {
  std::vector<double> params;   // boundary parameters of the samples
  MatX d;                       // symmetrized distances
  std::string mode;             // "p", "s", or free-form tag
  double max_asymmetry = 0.0;   // pre-averaging |d_ij - d_ji| max
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> multiple;
  int trapped_rays = 0;
};

TravelTimeTable distance_table(const ConformalMetric2& metric, int m,
                               const std::string& mode_tag = "",
                               const FanOptions& opts = {});

// Largest table entry refined by local coordinate ascent over the two
// boundary parameters.
double metric_diameter(const ConformalMetric2& metric, int m = 32,
                       const FanOptions& opts = {});

struct SimplicityVerdict {
  bool simple = false;
  bool convex_boundary = false;
  double min_sff_eigenvalue = 0.0;
  bool conjugate_free = false;
  bool multiplicity_free = false;
  int geodesics_checked = 0;
  // The verdict is a numerical heuristic (conjugate/multiplicity surrogate
  // for smoothness of the boundary distance function).
  std::string label = "heuristic-numerical";
};

SimplicityVerdict simplicity_check(const ConformalMetric2& metric, int m = 16,
                                   const FanOptions& opts = {});

} // namespace elab

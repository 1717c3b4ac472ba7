#include "elab/boundary_distance.hpp"

#include <algorithm>
#include <cmath>

#include "elab/errors.hpp"
#include "elab/geometry_checks.hpp"

namespace elab {

namespace {

double wrap_pi(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

struct FanShot {
  double alpha = 0.0;
  double exit_param = 0.0;
  double length = 0.0;
  bool valid = false;
  bool trapped = false;
};

struct SourceFrame {
  Vec2 z;
  Vec2 inward;
  Vec2 tangent;

  Vec2 direction(double alpha) const {
    return std::cos(alpha) * inward + std::sin(alpha) * tangent;
  }
};

SourceFrame source_frame(const ConformalMetric2& metric, double theta_z) {
  SourceFrame f;
  f.z = metric.domain.boundary_point(Vec<1>(theta_z));
  Vec2 nu = metric.domain.outward_normal(f.z);
  f.inward = -nu;
  f.tangent = Vec2(-nu[1], nu[0]);
  return f;
}

std::vector<FanShot> shoot_fan(const ConformalMetric2& metric,
                               const SourceFrame& frame,
                               const FanOptions& opts) {
  std::vector<FanShot> shots(opts.fan);
  double coarse = metric.default_step() * opts.coarse_step_factor;
  double lo = -0.5 * M_PI + opts.inward_margin;
  double hi = 0.5 * M_PI - opts.inward_margin;
  for (int k = 0; k < opts.fan; ++k) {
    FanShot& s = shots[k];
    s.alpha = lo + (hi - lo) * k / (opts.fan - 1.0);
    ExitRecord<2> rec =
        trace_exit(metric, frame.z, frame.direction(s.alpha), coarse);
    s.trapped = rec.possibly_trapped;
    if (rec.entered && !rec.possibly_trapped) {
      s.valid = true;
      s.exit_param = metric.domain.boundary_param(rec.exit_point);
      s.length = rec.in_domain_length();
    }
  }
  return shots;
}

struct FullShot {
  double mismatch;
  double length;
};

FullShot evaluate(const ConformalMetric2& metric, const SourceFrame& frame,
                  double alpha, double theta_w) {
  ExitRecord<2> rec = trace_exit(metric, frame.z, frame.direction(alpha));
  if (!rec.entered || rec.possibly_trapped)
    return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  return {wrap_pi(metric.domain.boundary_param(rec.exit_point) - theta_w),
          rec.in_domain_length()};
}

// Guarded secant on the exit-parameter mismatch over a sign-change bracket.
// Falls back to bisection whenever the secant step leaves the bracket.
DistanceBranch refine_branch(const ConformalMetric2& metric,
                             const SourceFrame& frame, double theta_w,
                             double a_lo, double a_hi,
                             const FanOptions& opts) {
  FullShot lo = evaluate(metric, frame, a_lo, theta_w);
  FullShot hi = evaluate(metric, frame, a_hi, theta_w);
  DistanceBranch best;
  if (std::isnan(lo.mismatch) || std::isnan(hi.mismatch) ||
      lo.mismatch * hi.mismatch > 0.0) {
    // Bracket did not survive re-evaluation at full resolution.
    const FullShot& b = std::isnan(lo.mismatch) ? hi : lo;
    if (std::isnan(b.mismatch)) return best;
    best.alpha = std::isnan(lo.mismatch) ? a_hi : a_lo;
    best.length = b.length;
    best.mismatch = b.mismatch;
    best.converged = std::abs(b.mismatch) <= opts.refine_tol;
    return best;
  }
  double a_prev = a_lo, f_prev = lo.mismatch;
  double a_cur = a_hi, f_cur = hi.mismatch;
  double len_cur = hi.length;
  for (int it = 0; it < opts.max_refine_iter; ++it) {
    if (std::abs(f_cur) <= opts.refine_tol) break;
    double a_next = a_cur - f_cur * (a_cur - a_prev) / (f_cur - f_prev);
    if (!(a_next > std::min(a_lo, a_hi) && a_next < std::max(a_lo, a_hi)))
      a_next = 0.5 * (a_lo + a_hi);
    FullShot next = evaluate(metric, frame, a_next, theta_w);
    if (std::isnan(next.mismatch)) break;
    if (next.mismatch * lo.mismatch <= 0.0) {
      a_hi = a_next;
      hi = next;
    } else {
      a_lo = a_next;
      lo = next;
    }
    a_prev = a_cur;
    f_prev = f_cur;
    a_cur = a_next;
    f_cur = next.mismatch;
    len_cur = next.length;
  }
  best.alpha = a_cur;
  best.length = len_cur;
  best.mismatch = f_cur;
  best.converged = std::abs(f_cur) <= 10.0 * opts.refine_tol;
  return best;
}

std::vector<DistanceBranch> branches_for_target(
    const ConformalMetric2& metric, const SourceFrame& frame,
    const std::vector<FanShot>& fan, double theta_w, const FanOptions& opts) {
  std::vector<DistanceBranch> branches;
  for (size_t k = 0; k + 1 < fan.size(); ++k) {
    const FanShot& a = fan[k];
    const FanShot& b = fan[k + 1];
    if (!a.valid || !b.valid) continue;
    double fa = wrap_pi(a.exit_param - theta_w);
    double fb = wrap_pi(b.exit_param - theta_w);
    if (std::abs(fa - fb) > M_PI) continue;  // wrap jump, not a root
    if (fa == 0.0 || fa * fb < 0.0) {
      DistanceBranch br =
          refine_branch(metric, frame, theta_w, a.alpha, b.alpha, opts);
      if (br.converged) branches.push_back(br);
    }
  }
  // Merge refinements that landed on the same geodesic.
  std::sort(branches.begin(), branches.end(),
            [](const DistanceBranch& x, const DistanceBranch& y) {
              return x.alpha < y.alpha;
            });
  std::vector<DistanceBranch> merged;
  for (const DistanceBranch& br : branches) {
    if (!merged.empty() && std::abs(br.alpha - merged.back().alpha) < 1e-5) {
      if (std::abs(br.mismatch) < std::abs(merged.back().mismatch))
        merged.back() = br;
    } else {
      merged.push_back(br);
    }
  }
  return merged;
}

DistanceResult result_from_branches(std::vector<DistanceBranch> branches,
                                    int trapped) {
  DistanceResult res;
  res.trapped_rays = trapped;
  res.branches = std::move(branches);
  if (res.branches.empty())
    throw PhysicsError("no geodesic branch reached the target boundary point");
  res.distance = std::numeric_limits<double>::infinity();
  for (const DistanceBranch& b : res.branches)
    res.distance = std::min(res.distance, b.length);
  for (const DistanceBranch& b : res.branches)
    if (b.length > res.distance + 1e-6 * (1.0 + res.distance))
      res.multiple = true;
  return res;
}

} // namespace

DistanceResult boundary_distance(const ConformalMetric2& metric, double theta_z,
                                 double theta_w, const FanOptions& opts) {
  SourceFrame frame = source_frame(metric, theta_z);
  std::vector<FanShot> fan = shoot_fan(metric, frame, opts);
  int trapped = 0;
  for (const FanShot& s : fan) trapped += s.trapped ? 1 : 0;
  return result_from_branches(
      branches_for_target(metric, frame, fan, theta_w, opts), trapped);
}

TravelTimeTable distance_table(const ConformalMetric2& metric, int m,
                               const std::string& mode_tag,
                               const FanOptions& opts) {
  if (m < 3) throw ConfigError("distance_table needs m >= 3");
  TravelTimeTable table;
  table.mode = mode_tag;
  table.params.resize(m);
  for (int i = 0; i < m; ++i) table.params[i] = 2.0 * M_PI * i / m;
  MatX raw = MatX::Zero(m, m);
  table.multiple.setConstant(m, m, false);
  for (int i = 0; i < m; ++i) {
    SourceFrame frame = source_frame(metric, table.params[i]);
    std::vector<FanShot> fan = shoot_fan(metric, frame, opts);
    for (const FanShot& s : fan) table.trapped_rays += s.trapped ? 1 : 0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      DistanceResult res = result_from_branches(
          branches_for_target(metric, frame, fan, table.params[j], opts), 0);
      raw(i, j) = res.distance;
      table.multiple(i, j) = res.multiple;
    }
  }
  table.max_asymmetry = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  table.d = 0.5 * (raw + raw.transpose());
  table.d.diagonal().setZero();
  return table;
}

double metric_diameter(const ConformalMetric2& metric, int m,
                       const FanOptions& opts) {
  TravelTimeTable table = distance_table(metric, m, "diameter", opts);
  int bi = 0, bj = 0;
  double best = table.d.maxCoeff(&bi, &bj);
  FanOptions local = opts;
  local.fan = std::max(96, opts.fan / 6);
  double ti = table.params[bi], tj = table.params[bj];
  double window = 2.0 * M_PI / m;
  auto eval = [&](double a, double b) {
    return boundary_distance(metric, a, b, local).distance;
  };
  // Two rounds of golden-section ascent in each parameter.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int round = 0; round < 2; ++round) {
    for (int which = 0; which < 2; ++which) {
      double lo = (which == 0 ? ti : tj) - window;
      double hi = (which == 0 ? ti : tj) + window;
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      double f1 = which == 0 ? eval(x1, tj) : eval(ti, x1);
      double f2 = which == 0 ? eval(x2, tj) : eval(ti, x2);
      for (int it = 0; it < 12; ++it) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + gr * (hi - lo);
          f2 = which == 0 ? eval(x2, tj) : eval(ti, x2);
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - gr * (hi - lo);
          f1 = which == 0 ? eval(x1, tj) : eval(ti, x1);
        }
      }
      double xm = 0.5 * (x1 + x2);
      double fm = which == 0 ? eval(xm, tj) : eval(ti, xm);
      if (fm > best) {
        best = fm;
        (which == 0 ? ti : tj) = xm;
      }
    }
    window *= 0.25;
  }
  return best;
}

SimplicityVerdict simplicity_check(const ConformalMetric2& metric, int m,
                                   const FanOptions& opts) {
  SimplicityVerdict v;
  ConvexityVerdict cv = is_strictly_convex_boundary(metric, 8 * m);
  v.convex_boundary = cv.convex;
  v.min_sff_eigenvalue = cv.min_eigenvalue;
  if (!v.convex_boundary) return v;  // fan distances are unreliable here

  v.conjugate_free = true;
  const int fan_dirs = 15;
  for (int i = 0; i < m; ++i) {
    SourceFrame frame = source_frame(metric, 2.0 * M_PI * i / m);
    for (int k = 0; k < fan_dirs; ++k) {
      double alpha = -0.5 * M_PI + 0.05 + (M_PI - 0.1) * k / (fan_dirs - 1.0);
      Vec2 dir = frame.direction(alpha);
      ExitRecord<2> rec = trace_exit(metric, frame.z, dir);
      if (rec.possibly_trapped || !rec.entered) continue;
      ++v.geodesics_checked;
      if (conjugate_point_scan(metric, frame.z, dir, rec.tau)) {
        v.conjugate_free = false;
        break;
      }
    }
    if (!v.conjugate_free) break;
  }

  TravelTimeTable table = distance_table(metric, m, "simplicity", opts);
  v.multiplicity_free = !table.multiple.any() && table.trapped_rays == 0;
  v.simple = v.convex_boundary && v.conjugate_free && v.multiplicity_free;
  return v;
}

} // namespace elab

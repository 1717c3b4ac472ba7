#include "elab/wave.hpp"

#include <cmath>
#include <thread>

namespace elab {

double ricker(double t, double f0, double t0) {
  double a = M_PI * M_PI * f0 * f0;
  double s = t - t0;
  return (1.0 - 2.0 * a * s * s) * std::exp(-a * s * s);
}

double ricker_dt(double t, double f0, double t0) {
  double a = M_PI * M_PI * f0 * f0;
  double s = t - t0;
  return -2.0 * a * s * (3.0 - 2.0 * a * s * s) * std::exp(-a * s * s);
}

double ricker_first_crossing(double f0, double t0, double rel) {
  double step = 1.0 / (f0 * 400.0);
  double t = 0.0;
  while (std::abs(ricker(t, f0, t0)) < rel) {
    t += step;
    if (t > t0) return t0;
  }
  double lo = std::max(0.0, t - step), hi = t;
  for (int k = 0; k < 60; ++k) {
    double mid = 0.5 * (lo + hi);
    (std::abs(ricker(mid, f0, t0)) < rel ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * M_PI); }

struct BilinearSpec {
  double x0, y0, h;
  long rows, cols;
};

// ox, oy are the staggering offsets of the component grid in cells.
template <typename P>
void fill_bilinear(P& p, const Vec2& q, double ox, double oy,
                   const BilinearSpec& g) {
  double fx = (q[0] - g.x0) / g.h - ox;
  double fy = (q[1] - g.y0) / g.h - oy;
  long i0 = std::clamp<long>(static_cast<long>(std::floor(fx)), 0, g.rows - 2);
  long j0 = std::clamp<long>(static_cast<long>(std::floor(fy)), 0, g.cols - 2);
  double tx = fx - i0, ty = fy - j0;
  p.r = {static_cast<int32_t>(i0), static_cast<int32_t>(i0 + 1),
         static_cast<int32_t>(i0), static_cast<int32_t>(i0 + 1)};
  p.c = {static_cast<int32_t>(j0), static_cast<int32_t>(j0),
         static_cast<int32_t>(j0 + 1), static_cast<int32_t>(j0 + 1)};
  p.w = {(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty};
}

struct ProbeLike {
  std::array<int32_t, 4> r{};
  std::array<int32_t, 4> c{};
  std::array<double, 4> w{};
};

double read4(const std::array<int32_t, 4>& r, const std::array<int32_t, 4>& c,
             const std::array<double, 4>& w, const ArrXX& f) {
  return w[0] * f(r[0], c[0]) + w[1] * f(r[1], c[1]) + w[2] * f(r[2], c[2]) +
         w[3] * f(r[3], c[3]);
}

} // namespace

WaveWorkspace::WaveWorkspace(const SimulationConfig& cfg)
    : domain_(cfg.domain) {
  if (cfg.grid_nodes < 40) throw ConfigError("wave grid needs >= 40 nodes");
  if (cfg.cfl <= 0.0 || cfg.cfl > 0.6)
    throw ConfigError("cfl must lie in (0, 0.6]");
  if (cfg.duration <= 0.0) throw ConfigError("duration must be positive");
  if (cfg.dissipation < 0.0 || cfg.dissipation > 0.25)
    throw ConfigError("dissipation must lie in [0, 0.25]");
  diss_ = cfg.dissipation;
  require_admissible(cfg.material);

  // The box margin must hold the 4h ghost band plus stencil clearance.
  double margin = cfg.box_margin;
  Vec2 lo, hi;
  for (int pass = 0; pass < 4; ++pass) {
    domain_.bounding_box(lo, hi, margin);
    h_ = (hi - lo).maxCoeff() / (cfg.grid_nodes - 1);
    if (margin >= 5.5 * h_) break;
    margin = 6.0 * h_;
  }
  if (margin < 5.5 * h_) throw ConfigError("wave grid too coarse for margin");
  x0_ = lo[0];
  y0_ = lo[1];
  nx_ = static_cast<int>(std::llround((hi[0] - lo[0]) / h_)) + 1;
  ny_ = static_cast<int>(std::llround((hi[1] - lo[1]) / h_)) + 1;

  build_masks(cfg);
  build_ghosts(cfg);
  build_receivers(cfg);
}

void WaveWorkspace::build_masks(const SimulationConfig& cfg) {
  LameField2 mat = extend_lame_field(cfg.material, 8.0 * h_);
  auto lam_ev = mat.lambda.evaluator();
  auto mu_ev = mat.mu.evaluator();
  auto rho_ev = mat.rho.evaluator();

  ArrXX lam_s(nx_, ny_), mu_s(nx_, ny_), mu_xy(nx_ - 1, ny_ - 1);
  ArrXX rho_x(nx_ - 1, ny_), rho_y(nx_, ny_ - 1);
  double cp_max = 0.0, cs_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < ny_; ++j) {
      Vec2 x(x0_ + i * h_, y0_ + j * h_);
      double l = lam_ev(x).v, m = mu_ev(x).v, r = rho_ev(x).v;
      lam_s(i, j) = l;
      mu_s(i, j) = m;
      cp_max = std::max(cp_max, std::sqrt((l + 2.0 * m) / r));
      cs_min = std::min(cs_min, std::sqrt(m / r));
    }
  for (int i = 0; i < nx_ - 1; ++i)
    for (int j = 0; j < ny_ - 1; ++j)
      mu_xy(i, j) = mu_ev(Vec2(x0_ + (i + 0.5) * h_, y0_ + (j + 0.5) * h_)).v;
  for (int i = 0; i < nx_ - 1; ++i)
    for (int j = 0; j < ny_; ++j)
      rho_x(i, j) = rho_ev(Vec2(x0_ + (i + 0.5) * h_, y0_ + j * h_)).v;
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < ny_ - 1; ++j)
      rho_y(i, j) = rho_ev(Vec2(x0_ + i * h_, y0_ + (j + 0.5) * h_)).v;

  dt_ = cfg.cfl * h_ / cp_max;
  f0_ = cfg.f0 > 0.0 ? cfg.f0 : cs_min / (20.0 * h_);
  t0_ = cfg.onset_delay_periods / f0_;
  amp_width_ = cfg.source_width_cells * h_;

  n_total_ = static_cast<int>(std::ceil(cfg.duration / dt_));
  int n_samples = std::max(2, cfg.target_samples);
  double dts = cfg.duration / (n_samples - 1);
  times_.resize(n_samples);
  for (int k = 0; k < n_samples; ++k) times_[k] = k * dts;
  estride_ = std::max(1, n_total_ / n_samples);

  bx_ = ArrXX::Zero(nx_ - 1, ny_);
  by_ = ArrXX::Zero(nx_, ny_ - 1);
  rho_x_ = ArrXX::Zero(nx_ - 1, ny_);
  rho_y_ = ArrXX::Zero(nx_, ny_ - 1);
  lp2m_ = ArrXX::Zero(nx_, ny_);
  lamdt_ = ArrXX::Zero(nx_, ny_);
  mudt_ = ArrXX::Zero(nx_ - 1, ny_ - 1);
  e_a_ = ArrXX::Zero(nx_, ny_);
  e_b_ = ArrXX::Zero(nx_, ny_);
  e_xy_ = ArrXX::Zero(nx_ - 1, ny_ - 1);

  for (int i = 0; i < nx_ - 1; ++i)
    for (int j = 0; j < ny_; ++j) {
      Vec2 x(x0_ + (i + 0.5) * h_, y0_ + j * h_);
      if (domain_.signed_distance(x) <= 0.0) {
        bx_(i, j) = dt_ / rho_x(i, j);
        rho_x_(i, j) = rho_x(i, j);
      }
    }
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < ny_ - 1; ++j) {
      Vec2 x(x0_ + i * h_, y0_ + (j + 0.5) * h_);
      if (domain_.signed_distance(x) <= 0.0) {
        by_(i, j) = dt_ / rho_y(i, j);
        rho_y_(i, j) = rho_y(i, j);
      }
    }
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < ny_; ++j) {
      Vec2 x(x0_ + i * h_, y0_ + j * h_);
      double d = domain_.signed_distance(x);
      double l = lam_s(i, j), m = mu_s(i, j);
      if (d <= 2.0 * h_) {
        lp2m_(i, j) = dt_ * (l + 2.0 * m);
        lamdt_(i, j) = dt_ * l;
      }
      if (d <= 0.0) {
        e_a_(i, j) = (l + 2.0 * m) / (4.0 * m * (l + m));
        e_b_(i, j) = l / (2.0 * m * (l + m));
      }
    }
  for (int i = 0; i < nx_ - 1; ++i)
    for (int j = 0; j < ny_ - 1; ++j) {
      Vec2 x(x0_ + (i + 0.5) * h_, y0_ + (j + 0.5) * h_);
      double d = domain_.signed_distance(x);
      if (d <= 2.0 * h_) mudt_(i, j) = dt_ * mu_xy(i, j);
      if (d <= 0.0) e_xy_(i, j) = 1.0 / mu_xy(i, j);
    }
  fmask_x_ = (rho_x_ > 0.0).cast<double>();
  fmask_y_ = (rho_y_ > 0.0).cast<double>();
}

void WaveWorkspace::build_ghosts(const SimulationConfig& cfg) {
  (void)cfg;
  BilinearSpec gx{x0_, y0_, h_, nx_ - 1, ny_};
  BilinearSpec gy{x0_, y0_, h_, nx_, ny_ - 1};
  auto collect = [&](double ox, double oy, const BilinearSpec& spec,
                     std::vector<Ghost>& out, long rows, long cols) {
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j) {
        Vec2 x(x0_ + (i + ox) * h_, y0_ + (j + oy) * h_);
        double d = domain_.signed_distance(x);
        if (d <= 0.0 || d > 4.0 * h_) continue;
        Ghost g;
        g.row = static_cast<int32_t>(i);
        g.col = static_cast<int32_t>(j);
        Vec2 b = domain_.closest_boundary_point(x);
        Vec2 nu = domain_.outward_normal(b);
        g.fnx = nu[0];
        g.fny = nu[1];
        g.arc = domain_.boundary_param(b);
        Vec2 mirror = x - 2.0 * d * nu;
        ProbeLike p;
        fill_bilinear(p, mirror, ox, oy, spec);
        g.mr = p.r;
        g.mc = p.c;
        g.mw = p.w;
        out.push_back(g);
      }
  };
  collect(0.5, 0.0, gx, ghosts_x_, nx_ - 1, ny_);
  collect(0.0, 0.5, gy, ghosts_y_, nx_, ny_ - 1);
}

void WaveWorkspace::build_receivers(const SimulationConfig& cfg) {
  rec_params_.resize(cfg.n_receivers);
  receivers_.resize(cfg.n_receivers);
  BilinearSpec gs{x0_, y0_, h_, nx_, ny_};
  BilinearSpec gxy{x0_, y0_, h_, nx_ - 1, ny_ - 1};
  for (int k = 0; k < cfg.n_receivers; ++k) {
    double th = 2.0 * M_PI * k / cfg.n_receivers;
    rec_params_[k] = th;
    Vec2 xr = domain_.boundary_point(Vec<1>(th));
    Vec2 nu = domain_.outward_normal(xr);
    Receiver& r = receivers_[k];
    r.nx = nu[0];
    r.ny = nu[1];
    for (int q = 0; q < 2; ++q) {
      Vec2 p = xr - (q + 1.0) * h_ * nu;
      ProbeLike ps, pxy;
      fill_bilinear(ps, p, 0.0, 0.0, gs);
      fill_bilinear(pxy, p, 0.5, 0.5, gxy);
      r.sxx[q].r = ps.r;
      r.sxx[q].c = ps.c;
      r.sxx[q].w = ps.w;
      r.sxy[q].r = pxy.r;
      r.sxy[q].c = pxy.c;
      r.sxy[q].w = pxy.w;
    }
  }
}

void WaveWorkspace::run_source(const WaveSource& src, MatX& traces,
                               MatX& energy) const {
  run_core(src, traces, energy, nullptr, 0);
}

WaveField WaveWorkspace::snapshots(const WaveSource& src,
                                   int checkpoints) const {
  WaveField wf;
  MatX traces, energy;
  run_core(src, traces, energy, &wf, std::max(2, checkpoints));
  return wf;
}

void WaveWorkspace::run_core(const WaveSource& src, MatX& traces, MatX& energy,
                             WaveField* capture, int checkpoints) const {
  bool normal_pol;
  if (src.polarization == "normal")
    normal_pol = true;
  else if (src.polarization == "tangential")
    normal_pol = false;
  else
    throw ConfigError("unknown polarization '" + src.polarization + "'");

  Vec2 src_pt = domain_.boundary_point(Vec<1>(src.param));
  bool ball = domain_.is_ball();
  double radius = domain_.semiaxes[0];
  auto arc_dist = [&](double arc, const Vec2& foot_hint) {
    if (ball) return radius * std::abs(wrap_angle(arc - src.param));
    (void)foot_hint;
    return (domain_.boundary_point(Vec<1>(arc)) - src_pt).norm();
  };
  auto amp_for = [&](const Ghost& g, bool x_comp) {
    double dl = arc_dist(g.arc, Vec2::Zero());
    double gau = std::exp(-0.5 * (dl / amp_width_) * (dl / amp_width_));
    double e = x_comp ? (normal_pol ? g.fnx : -g.fny)
                      : (normal_pol ? g.fny : g.fnx);
    return src.amplitude * gau * e;
  };
  std::vector<double> amp_x(ghosts_x_.size()), amp_y(ghosts_y_.size());
  for (size_t k = 0; k < ghosts_x_.size(); ++k)
    amp_x[k] = amp_for(ghosts_x_[k], true);
  for (size_t k = 0; k < ghosts_y_.size(); ++k)
    amp_y[k] = amp_for(ghosts_y_[k], false);

  const long n_samples = static_cast<long>(times_.size());
  const long nrec = static_cast<long>(receivers_.size());
  traces.setZero(2 * nrec, n_samples);
  long erows = n_total_ / estride_ + 1;
  energy.setZero(erows, 3);

  ArrXX vx = ArrXX::Zero(nx_ - 1, ny_), vy = ArrXX::Zero(nx_, ny_ - 1);
  ArrXX sxx = ArrXX::Zero(nx_, ny_), syy = ArrXX::Zero(nx_, ny_);
  ArrXX sxy = ArrXX::Zero(nx_ - 1, ny_ - 1);
  ArrXX tdx(nx_ - 4, ny_ - 4), tdy(nx_ - 4, ny_ - 4);
  ArrXX ux, uy;
  std::vector<int> cp_steps;
  if (capture) {
    ux = ArrXX::Zero(nx_ - 1, ny_);
    uy = ArrXX::Zero(nx_, ny_ - 1);
    capture->h = h_;
    capture->x0 = x0_;
    capture->y0 = y0_;
    for (int k = 0; k < checkpoints; ++k) {
      int step = static_cast<int>(
          std::llround(static_cast<double>(k) * n_total_ / (checkpoints - 1)));
      if (cp_steps.empty() || step > cp_steps.back()) cp_steps.push_back(step);
    }
  }
  std::vector<double> ghost_val(std::max(ghosts_x_.size(), ghosts_y_.size()));
  auto apply_ghosts = [&](double rp) {
    for (size_t k = 0; k < ghosts_x_.size(); ++k) {
      const Ghost& g = ghosts_x_[k];
      vx(g.row, g.col) = amp_x[k] * rp;
    }
    for (size_t k = 0; k < ghosts_y_.size(); ++k) {
      const Ghost& g = ghosts_y_[k];
      vy(g.row, g.col) = amp_y[k] * rp;
    }
    for (size_t k = 0; k < ghosts_x_.size(); ++k) {
      const Ghost& g = ghosts_x_[k];
      ghost_val[k] = 2.0 * amp_x[k] * rp - read4(g.mr, g.mc, g.mw, vx);
    }
    for (size_t k = 0; k < ghosts_x_.size(); ++k)
      vx(ghosts_x_[k].row, ghosts_x_[k].col) = ghost_val[k];
    for (size_t k = 0; k < ghosts_y_.size(); ++k) {
      const Ghost& g = ghosts_y_[k];
      ghost_val[k] = 2.0 * amp_y[k] * rp - read4(g.mr, g.mc, g.mw, vy);
    }
    for (size_t k = 0; k < ghosts_y_.size(); ++k)
      vy(ghosts_y_[k].row, ghosts_y_[k].col) = ghost_val[k];
  };
  ArrXX fx, fy;
  if (diss_ > 0.0) {
    fx.setZero(nx_ - 1, ny_);
    fy.setZero(nx_, ny_ - 1);
  }

  const double C1 = 9.0 / (8.0 * h_), C2 = -1.0 / (24.0 * h_);
  const int rx = nx_ - 3, cxv = ny_ - 4;  // vx update block
  const int ryv = nx_ - 4, cy = ny_ - 3;  // vy update block

  VecX tr_prev = VecX::Zero(2 * nrec), tr_now(2 * nrec);
  auto gather = [&](VecX& out) {
    for (long r = 0; r < nrec; ++r) {
      const Receiver& rc = receivers_[r];
      double t_ext[2][2];
      for (int q = 0; q < 2; ++q) {
        double vxx = read4(rc.sxx[q].r, rc.sxx[q].c, rc.sxx[q].w, sxx);
        double vyy = read4(rc.sxx[q].r, rc.sxx[q].c, rc.sxx[q].w, syy);
        double vxy = read4(rc.sxy[q].r, rc.sxy[q].c, rc.sxy[q].w, sxy);
        t_ext[q][0] = vxx * rc.nx + vxy * rc.ny;
        t_ext[q][1] = vxy * rc.nx + vyy * rc.ny;
      }
      out[2 * r] = 2.0 * t_ext[0][0] - t_ext[1][0];
      out[2 * r + 1] = 2.0 * t_ext[0][1] - t_ext[1][1];
    }
  };

  double t_prev = 0.0;
  long next = 0, erow = 0;
  size_t cp_next = 0;
  ArrXX vx_half, vy_half;  // velocities at n-1/2 on energy-sample steps
  for (int n = 0;; ++n) {
    double t = n * dt_;
    gather(tr_now);
    // Leapfrog conserves the product-form energy: kinetic pairs the
    // velocities at n-1/2 and n+1/2, strain reads the stresses at n.  The
    // row is finished right after the velocity update below.
    bool sample_energy = n % estride_ == 0 && erow < erows;
    if (sample_energy) {
      vx_half = vx;
      vy_half = vy;
    }
    if (capture && cp_next < cp_steps.size() && n == cp_steps[cp_next]) {
      capture->times.push_back(t);
      capture->ux.push_back(ux);
      capture->uy.push_back(uy);
      capture->vx.push_back(vx);
      capture->vy.push_back(vy);
      ++cp_next;
    }
    while (next < n_samples && times_[next] <= t + 1e-9 * dt_) {
      double frac = (n == 0 || times_[next] <= t_prev)
                        ? 1.0
                        : (times_[next] - t_prev) / (t - t_prev);
      traces.col(next) = (1.0 - frac) * tr_prev + frac * tr_now;
      ++next;
    }
    bool done = next == n_samples;
    if (done && !sample_energy) break;
    t_prev = t;
    tr_prev.swap(tr_now);

    // Velocity update.
    vx.block(1, 2, rx, cxv) +=
        bx_.block(1, 2, rx, cxv) *
        (C1 * (sxx.block(2, 2, rx, cxv) - sxx.block(1, 2, rx, cxv)) +
         C2 * (sxx.block(3, 2, rx, cxv) - sxx.block(0, 2, rx, cxv)) +
         C1 * (sxy.block(1, 2, rx, cxv) - sxy.block(1, 1, rx, cxv)) +
         C2 * (sxy.block(1, 3, rx, cxv) - sxy.block(1, 0, rx, cxv)));
    vy.block(2, 1, ryv, cy) +=
        by_.block(2, 1, ryv, cy) *
        (C1 * (sxy.block(2, 1, ryv, cy) - sxy.block(1, 1, ryv, cy)) +
         C2 * (sxy.block(3, 1, ryv, cy) - sxy.block(0, 1, ryv, cy)) +
         C1 * (syy.block(2, 2, ryv, cy) - syy.block(2, 1, ryv, cy)) +
         C2 * (syy.block(2, 3, ryv, cy) - syy.block(2, 0, ryv, cy)));

    // Ghost band: enforce the Dirichlet velocity by mirrored extrapolation.
    double rp = ricker_dt((n + 0.5) * dt_, f0_, t0_);
    apply_ghosts(rp);

    if (diss_ > 0.0) {
      // Fourth-difference filter: strips the grid-scale noise the staircase
      // ghost band sheds, which otherwise pumps energy into the interior.
      // The band is rebuilt afterwards so the boundary data stays exact.
      double w = diss_ / 16.0;
      fx.setZero();
      fx.block(2, 0, nx_ - 5, ny_) =
          vx.block(0, 0, nx_ - 5, ny_) - 4.0 * vx.block(1, 0, nx_ - 5, ny_) +
          6.0 * vx.block(2, 0, nx_ - 5, ny_) -
          4.0 * vx.block(3, 0, nx_ - 5, ny_) + vx.block(4, 0, nx_ - 5, ny_);
      fx.block(0, 2, nx_ - 1, ny_ - 4) +=
          vx.block(0, 0, nx_ - 1, ny_ - 4) -
          4.0 * vx.block(0, 1, nx_ - 1, ny_ - 4) +
          6.0 * vx.block(0, 2, nx_ - 1, ny_ - 4) -
          4.0 * vx.block(0, 3, nx_ - 1, ny_ - 4) +
          vx.block(0, 4, nx_ - 1, ny_ - 4);
      vx -= w * fmask_x_ * fx;
      fy.setZero();
      fy.block(2, 0, nx_ - 4, ny_ - 1) =
          vy.block(0, 0, nx_ - 4, ny_ - 1) -
          4.0 * vy.block(1, 0, nx_ - 4, ny_ - 1) +
          6.0 * vy.block(2, 0, nx_ - 4, ny_ - 1) -
          4.0 * vy.block(3, 0, nx_ - 4, ny_ - 1) +
          vy.block(4, 0, nx_ - 4, ny_ - 1);
      fy.block(0, 2, nx_, ny_ - 5) +=
          vy.block(0, 0, nx_, ny_ - 5) - 4.0 * vy.block(0, 1, nx_, ny_ - 5) +
          6.0 * vy.block(0, 2, nx_, ny_ - 5) -
          4.0 * vy.block(0, 3, nx_, ny_ - 5) + vy.block(0, 4, nx_, ny_ - 5);
      vy -= w * fmask_y_ * fy;
      apply_ghosts(rp);
    }

    if (sample_energy) {
      double kin = 0.5 * h_ * h_ *
                   ((rho_x_ * vx_half * vx).sum() + (rho_y_ * vy_half * vy).sum());
      double strain =
          0.5 * h_ * h_ *
          ((e_a_ * (sxx.square() + syy.square()) - e_b_ * sxx * syy).sum() +
           (e_xy_ * sxy.square()).sum());
      if (!std::isfinite(kin) || !std::isfinite(strain))
        throw PhysicsError("wave field lost finiteness at t=" +
                           std::to_string(t));
      energy(erow, 0) = t;
      energy(erow, 1) = kin;
      energy(erow, 2) = strain;
      ++erow;
    }
    if (done) break;

    // Stress update.
    const int rs = nx_ - 4, cs = ny_ - 4;
    tdx = C1 * (vx.block(2, 2, rs, cs) - vx.block(1, 2, rs, cs)) +
          C2 * (vx.block(3, 2, rs, cs) - vx.block(0, 2, rs, cs));
    tdy = C1 * (vy.block(2, 2, rs, cs) - vy.block(2, 1, rs, cs)) +
          C2 * (vy.block(2, 3, rs, cs) - vy.block(2, 0, rs, cs));
    sxx.block(2, 2, rs, cs) +=
        lp2m_.block(2, 2, rs, cs) * tdx + lamdt_.block(2, 2, rs, cs) * tdy;
    syy.block(2, 2, rs, cs) +=
        lamdt_.block(2, 2, rs, cs) * tdx + lp2m_.block(2, 2, rs, cs) * tdy;
    const int rxy = nx_ - 3, cxy = ny_ - 3;
    sxy.block(1, 1, rxy, cxy) +=
        mudt_.block(1, 1, rxy, cxy) *
        (C1 * (vx.block(1, 2, rxy, cxy) - vx.block(1, 1, rxy, cxy)) +
         C2 * (vx.block(1, 3, rxy, cxy) - vx.block(1, 0, rxy, cxy)) +
         C1 * (vy.block(2, 1, rxy, cxy) - vy.block(1, 1, rxy, cxy)) +
         C2 * (vy.block(3, 1, rxy, cxy) - vy.block(0, 1, rxy, cxy)));

    if (capture) {
      ux += dt_ * vx;
      uy += dt_ * vy;
    }
  }
  energy.conservativeResize(erow, 3);
}

DNDataset assemble_dn_data(const SimulationConfig& cfg, int threads) {
  if (cfg.sources.empty()) throw ConfigError("no sources configured");
  WaveWorkspace ws(cfg);
  DNDataset out;
  out.domain = cfg.domain;
  out.sources = cfg.sources;
  out.receiver_params = ws.receiver_params();
  out.times = ws.sample_times();
  out.f0 = ws.f0();
  out.t0 = ws.t0();
  out.grid_h = ws.h();
  out.traces.resize(cfg.sources.size());
  out.energy.resize(cfg.sources.size());

  int nthreads = std::max(1, std::min<int>(threads, cfg.sources.size()));
  if (nthreads == 1) {
    for (size_t s = 0; s < cfg.sources.size(); ++s)
      ws.run_source(cfg.sources[s], out.traces[s], out.energy[s]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&, w]() {
        for (size_t s = w; s < cfg.sources.size(); s += nthreads)
          ws.run_source(cfg.sources[s], out.traces[s], out.energy[s]);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

double compare_dn(const DNDataset& a, const DNDataset& b) {
  auto mismatch = [](const std::string& what) {
    throw ConfigError("datasets are not comparable: " + what);
  };
  if (a.sources.size() != b.sources.size()) mismatch("source count");
  for (size_t s = 0; s < a.sources.size(); ++s) {
    if (std::abs(a.sources[s].param - b.sources[s].param) > 1e-9)
      mismatch("source position");
    if (a.sources[s].polarization != b.sources[s].polarization)
      mismatch("source polarization");
  }
  if (a.receiver_params.size() != b.receiver_params.size())
    mismatch("receiver count");
  for (size_t r = 0; r < a.receiver_params.size(); ++r)
    if (std::abs(a.receiver_params[r] - b.receiver_params[r]) > 1e-9)
      mismatch("receiver position");
  if (a.times.size() != b.times.size()) mismatch("sample clock");
  for (size_t k = 0; k < a.times.size(); ++k)
    if (std::abs(a.times[k] - b.times[k]) > 1e-9 * (1.0 + a.times[k]))
      mismatch("sample clock");

  double num = 0.0, na = 0.0, nb = 0.0;
  for (size_t s = 0; s < a.traces.size(); ++s) {
    num += (a.traces[s] - b.traces[s]).squaredNorm();
    na += a.traces[s].squaredNorm();
    nb += b.traces[s].squaredNorm();
  }
  double den = std::sqrt(std::max(na, nb));
  if (den == 0.0) return 0.0;
  return std::sqrt(num) / den;
}

DNComparison compare_dn_breakdown(const DNDataset& a, const DNDataset& b) {
  DNComparison out;
  out.discrepancy = compare_dn(a, b);
  out.per_source = VecX::Zero(a.traces.size());
  for (size_t s = 0; s < a.traces.size(); ++s) {
    double den = std::sqrt(
        std::max(a.traces[s].squaredNorm(), b.traces[s].squaredNorm()));
    double num = (a.traces[s] - b.traces[s]).norm();
    out.per_source[s] = den == 0.0 ? 0.0 : num / den;
  }
  return out;
}

PulseFit free_space_pulse_speed(char mode, const LameTriplet& mat, int nodes) {
  if (mode != 'p' && mode != 's') throw ConfigError("mode must be p or s");
  if (!is_admissible<2>(mat)) throw PhysicsError("inadmissible triplet");
  double c = mode == 'p' ? pressure_speed(mat) : shear_speed(mat);
  double modulus = mode == 'p' ? mat.lam + 2.0 * mat.mu : mat.mu;

  const double L = 3.0;
  const double h = L / (nodes - 1);
  const double dt = 0.4 * h / c;
  const double w = 8.0 * h;
  const double xc = 0.6, x1 = 1.4, x2 = 2.2;

  VecX v = VecX::Zero(nodes), s = VecX::Zero(nodes);
  auto g = [&](double x) { return std::exp(-0.5 * (x - xc) * (x - xc) / (w * w)); };
  for (int i = 0; i < nodes; ++i) {
    s[i] = modulus * g(i * h);
    if (i < nodes - 1) v[i] = -c * g((i + 0.5) * h + 0.5 * c * dt);
  }

  long i1 = std::lround(x1 / h - 0.5), i2 = std::lround(x2 / h - 0.5);
  double xs1 = (i1 + 0.5) * h, xs2 = (i2 + 0.5) * h;
  int n_steps = static_cast<int>(std::ceil(((x2 - xc) / c + 10.0 * w / c) / dt));
  std::vector<double> t1s(n_steps), t2s(n_steps);

  const double C1 = 9.0 / (8.0 * h), C2 = -1.0 / (24.0 * h);
  for (int n = 0; n < n_steps; ++n) {
    t1s[n] = v[i1];
    t2s[n] = v[i2];
    for (int i = 1; i <= nodes - 3; ++i)
      v[i] += (dt / mat.rho) *
              (C1 * (s[i + 1] - s[i]) + C2 * (s[i + 2] - s[i - 1]));
    for (int i = 2; i <= nodes - 3; ++i)
      s[i] += dt * modulus *
              (C1 * (v[i] - v[i - 1]) + C2 * (v[i + 1] - v[i - 2]));
  }

  auto peak_time = [&](const std::vector<double>& ts) {
    int m = 0;
    for (int n = 1; n < n_steps; ++n)
      if (std::abs(ts[n]) > std::abs(ts[m])) m = n;
    if (m == 0 || m == n_steps - 1) throw PhysicsError("pulse peak not inside record");
    double ym = ts[m - 1], y0 = ts[m], yp = ts[m + 1];
    double denom = ym - 2.0 * y0 + yp;
    double frac = denom == 0.0 ? 0.0 : 0.5 * (ym - yp) / denom;
    return (m + frac) * dt;
  };

  PulseFit fit;
  fit.reference = c;
  fit.fitted = (xs2 - xs1) / (peak_time(t2s) - peak_time(t1s));
  return fit;
}

WaveField solve_ibvp(const SimulationConfig& cfg, const WaveSource& src,
                     int checkpoints) {
  WaveWorkspace ws(cfg);
  return ws.snapshots(src, checkpoints);
}

} // namespace elab

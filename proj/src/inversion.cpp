#include "elab/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace elab {

namespace {

// Edge set of the masked 4-neighbor graph; the regularizer is
// |D s|^2 = sum_edges ((s_a - s_b)/h)^2.
struct EdgeList {
  std::vector<std::pair<int32_t, int32_t>> edges;
  double inv_h2 = 1.0;
};

EdgeList build_edges(const EikonalGrid& geom) {
  EdgeList el;
  el.inv_h2 = 1.0 / (geom.grid.h * geom.grid.h);
  for (long k = 0; k < geom.count(); ++k) {
    long l = geom.node_of[k];
    long gx = l / geom.ny, gy = l % geom.ny;
    if (gx + 1 < geom.nx) {
      int32_t d = geom.dense(gx + 1, gy);
      if (d >= 0) el.edges.emplace_back(static_cast<int32_t>(k), d);
    }
    if (gy + 1 < geom.ny) {
      int32_t d = geom.dense(gx, gy + 1);
      if (d >= 0) el.edges.emplace_back(static_cast<int32_t>(k), d);
    }
  }
  return el;
}

double reg_value(const EdgeList& el, const VecX& s) {
  double v = 0.0;
  for (const auto& [a, b] : el.edges) {
    double d = s[a] - s[b];
    v += d * d;
  }
  return 0.5 * v * el.inv_h2;
}

void add_reg_gradient(const EdgeList& el, const VecX& s, double alpha,
                      VecX& g) {
  for (const auto& [a, b] : el.edges) {
    double d = alpha * el.inv_h2 * (s[a] - s[b]);
    g[a] += d;
    g[b] -= d;
  }
}

struct ForwardModel {
  const EikonalGrid* geom = nullptr;
  bool with_offset = false;
  std::vector<Vec2> sources;
  std::vector<TimeProbe> probes;
  // Per source: (probe index, observation index).
  std::vector<std::vector<std::pair<int, int>>> reads;
  VecX data;
  std::vector<EikonalField> fields;

  long n_nodes() const { return geom->count(); }
  long n_unknowns() const { return n_nodes() + (with_offset ? 1 : 0); }
  long n_obs() const { return data.size(); }

  void build(const EikonalGrid& g, const std::vector<TravelObservation>& obs,
             bool offset) {
    geom = &g;
    with_offset = offset;
    std::map<double, int> src_of, rec_of;
    for (const auto& o : obs) {
      src_of.emplace(o.src_param, 0);
      rec_of.emplace(o.rec_param, 0);
    }
    sources.clear();
    for (auto& [p, idx] : src_of) {
      idx = static_cast<int>(sources.size());
      sources.push_back(g.domain.boundary_point(Vec<1>(p)));
    }
    probes.clear();
    for (auto& [p, idx] : rec_of) {
      idx = static_cast<int>(probes.size());
      probes.push_back(make_time_probe(g, g.domain.boundary_point(Vec<1>(p))));
    }
    reads.assign(sources.size(), {});
    data.resize(static_cast<long>(obs.size()));
    for (size_t k = 0; k < obs.size(); ++k) {
      reads[src_of[obs[k].src_param]].emplace_back(rec_of[obs[k].rec_param],
                                                   static_cast<int>(k));
      data[static_cast<long>(k)] = obs[k].t;
    }
  }

  void solve(const VecX& s) {
    fields.resize(sources.size());
    for (size_t i = 0; i < sources.size(); ++i)
      fields[i] = eikonal_solve(*geom, s, sources[i]);
  }

  VecX residual(double beta) const {
    VecX r(n_obs());
    for (size_t i = 0; i < sources.size(); ++i)
      for (const auto& [j, p] : reads[i])
        r[p] = probes[j].apply(fields[i].t) + beta - data[p];
    return r;
  }

  // v and out run over the unknown vector (nodes [+ offset tail]).
  VecX apply_J(const VecX& v) const {
    VecX out(n_obs());
    VecX ds = v.head(n_nodes());
    double dbeta = with_offset ? v[n_nodes()] : 0.0;
    VecX dt;
    for (size_t i = 0; i < sources.size(); ++i) {
      fields[i].tangent(ds, dt);
      for (const auto& [j, p] : reads[i])
        out[p] = probes[j].apply(dt) + dbeta;
    }
    return out;
  }

  VecX apply_Jt(const VecX& u) const {
    VecX out = VecX::Zero(n_unknowns());
    VecX tbar(n_nodes()), sbar;
    for (size_t i = 0; i < sources.size(); ++i) {
      tbar.setZero();
      for (const auto& [j, p] : reads[i]) {
        const TimeProbe& pr = probes[j];
        for (int k = 0; k < pr.n; ++k) tbar[pr.nodes[k]] += pr.w[k] * u[p];
      }
      fields[i].adjoint(tbar, sbar);
      out.head(n_nodes()) += sbar;
    }
    if (with_offset) out[n_nodes()] = u.sum();
    return out;
  }
};

struct GnOutcome {
  VecX s;
  double beta = 0.0;
  double misfit = 0.0;  // ||r||_2 at the final iterate
  double initial_misfit = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<InversionLogEntry> log;
};

GnOutcome run_gauss_newton(ForwardModel& model, const EdgeList& edges,
                           const VecX& s_init, double alpha, int max_iters,
                           const InversionOptions& opts) {
  GnOutcome out;
  out.s = s_init;
  double floor = opts.positivity_floor_factor * s_init.minCoeff();
  double lambda = opts.lm_initial;
  const long M = model.n_nodes();
  const long U = model.n_unknowns();

  model.solve(out.s);
  VecX r = model.residual(out.beta);
  out.initial_misfit = r.norm();
  double data_norm = std::max(model.data.norm(), 1e-300);
  int misfit_rises = 0;
  double misfit_streak_start = out.initial_misfit;

  for (int iter = 0; iter < max_iters; ++iter) {
    double objective = 0.5 * r.squaredNorm() + alpha * reg_value(edges, out.s);
    double misfit_before = r.norm();
    out.misfit = misfit_before;
    if (out.misfit / data_norm < opts.rel_residual_stop) {
      out.converged = true;
      break;
    }

    VecX g = model.apply_Jt(r);
    {
      VecX gr = VecX::Zero(M);
      add_reg_gradient(edges, out.s, alpha, gr);
      g.head(M) += gr;
    }

    // One iteration: escalate the damping until some trial improves the
    // damped objective.  If no damping level does, the iterate sits at a
    // local floor of the piecewise-smooth misfit and the run has converged.
    bool advanced = false;
    while (lambda <= 1e14) {
      auto apply_normal = [&](const VecX& v) {
        VecX av = model.apply_Jt(model.apply_J(v));
        VecX rv = VecX::Zero(M);
        add_reg_gradient(edges, v.head(M), alpha, rv);
        av.head(M) += rv;
        av += lambda * v;
        return av;
      };

      // Conjugate gradients on the damped normal equations.
      VecX p = VecX::Zero(U), resid = -g, dir = resid;
      double rho = resid.squaredNorm();
      double rho0 = rho;
      for (int cg = 0; cg < opts.cg_iters && rho > opts.cg_tol * rho0; ++cg) {
        VecX ad = apply_normal(dir);
        double denom = dir.dot(ad);
        if (denom <= 0.0) break;
        double step = rho / denom;
        p += step * dir;
        resid -= step * ad;
        double rho_new = resid.squaredNorm();
        dir = resid + (rho_new / rho) * dir;
        rho = rho_new;
      }

      VecX s_trial = out.s + p.head(M);
      for (long k = 0; k < M; ++k) s_trial[k] = std::max(s_trial[k], floor);
      double beta_trial = out.beta + (model.with_offset ? p[M] : 0.0);

      model.solve(s_trial);
      VecX r_trial = model.residual(beta_trial);
      double obj_trial =
          0.5 * r_trial.squaredNorm() + alpha * reg_value(edges, s_trial);

      InversionLogEntry entry;
      entry.iter = iter;
      entry.lambda_lm = lambda;
      entry.step_norm = p.norm();
      entry.objective = obj_trial;
      entry.misfit = r_trial.norm();
      entry.reg = alpha * reg_value(edges, s_trial);
      entry.accepted = obj_trial < objective;
      out.log.push_back(entry);

      if (entry.accepted) {
        out.s = s_trial;
        out.beta = beta_trial;
        r = r_trial;
        lambda *= 0.3;
        advanced = true;
        break;
      }
      lambda *= 10.0;
      // Put the fields back on the retained iterate before the next solve.
      model.solve(out.s);
      r = model.residual(out.beta);
    }
    if (!advanced) {
      out.converged = true;
      break;
    }
    ++out.iterations;

    // Divergence guard: the data misfit rising across several completed
    // iterations means the regularizer is dragging the fit away from the
    // observations faster than the model can absorb.
    if (r.norm() > misfit_before) {
      if (misfit_rises == 0) misfit_streak_start = misfit_before;
      if (++misfit_rises >= opts.divergence_limit)
        throw DivergenceError(
            "data misfit rose across " +
            std::to_string(opts.divergence_limit) +
            " consecutive iterations (" + std::to_string(misfit_streak_start) +
            " -> " + std::to_string(r.norm()) + "); aborting");
    } else {
      misfit_rises = 0;
    }

    if (out.log.back().step_norm < 1e-12 * (1.0 + out.s.norm())) {
      out.converged = true;
      break;
    }
  }
  out.misfit = r.norm();
  return out;
}

} // namespace

ScalarField2 recovered_speed_field(const InversionResult& r) {
  const EikonalGrid& g = r.geom;
  auto samples = std::make_shared<MatX>(g.nx, g.ny);
  MatX& v = *samples;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> have(g.nx, g.ny);
  have.setConstant(false);
  for (long gx = 0; gx < g.nx; ++gx)
    for (long gy = 0; gy < g.ny; ++gy) {
      int d = g.dense(gx, gy);
      if (d >= 0) {
        v(gx, gy) = 1.0 / r.slowness[d];
        have(gx, gy) = true;
      }
    }
  // Fill the exterior by repeated neighbor averaging until the box is full.
  while (!have.all()) {
    MatX vn = v;
    auto hn = have;
    for (long gx = 0; gx < g.nx; ++gx)
      for (long gy = 0; gy < g.ny; ++gy) {
        if (have(gx, gy)) continue;
        double sum = 0.0;
        int cnt = 0;
        auto take = [&](long ax, long ay) {
          if (ax < 0 || ay < 0 || ax >= g.nx || ay >= g.ny) return;
          if (!have(ax, ay)) return;
          sum += v(ax, ay);
          ++cnt;
        };
        take(gx - 1, gy);
        take(gx + 1, gy);
        take(gx, gy - 1);
        take(gx, gy + 1);
        if (cnt > 0) {
          vn(gx, gy) = sum / cnt;
          hn(gx, gy) = true;
        }
      }
    v.swap(vn);
    have.swap(hn);
  }
  return make_grid_field(samples, g.grid.origin, g.grid.h);
}

double InversionResult::relative_l2_error(const ScalarField2& truth,
                                          double radius_factor) const {
  double num = 0.0, den = 0.0;
  double rmax = radius_factor * geom.domain.semiaxes.minCoeff();
  for (long k = 0; k < geom.count(); ++k) {
    Vec2 x = geom.point(k);
    if ((x - geom.domain.center).norm() > rmax) continue;
    double ct = truth.value(x);
    double cr = 1.0 / slowness[k];
    num += (cr - ct) * (cr - ct);
    den += ct * ct;
  }
  return std::sqrt(num / den);
}

InversionResult invert_conformal(const std::vector<TravelObservation>& obs,
                                 const Domain2& domain,
                                 const ScalarField2& init_speed,
                                 const InversionOptions& opts) {
  if (obs.size() < 6) throw ConfigError("too few travel-time observations");
  InversionResult res;
  res.geom = make_eikonal_grid(domain, opts.grid_nodes);

  ForwardModel model;
  model.build(res.geom, obs, opts.estimate_offset);
  EdgeList edges = build_edges(res.geom);
  VecX s0 = sample_slowness(res.geom, init_speed);

  double alpha = opts.reg_weight;
  if (alpha < 0.0) {
    // Five-point log scan; the discrepancy rule keeps the smallest weight
    // whose misfit stays above the noise estimate.
    model.solve(s0);
    VecX r0 = model.residual(0.0);
    VecX g0 = model.apply_Jt(r0);
    double h2 = res.geom.grid.h * res.geom.grid.h;
    double alpha_top = g0.head(res.geom.count()).cwiseAbs().maxCoeff() * h2 /
                       (8.0 * s0.mean());
    std::vector<std::pair<double, double>> scan;  // (alpha, misfit)
    for (int k = 0; k < 5; ++k) {
      double a = alpha_top * std::pow(10.0, -k);
      try {
        GnOutcome trial =
            run_gauss_newton(model, edges, s0, a, opts.scan_iters, opts);
        scan.emplace_back(a, trial.misfit);
      } catch (const DivergenceError&) {
        // A weight that stalls during the short scan is not a candidate.
      }
    }
    if (scan.empty()) throw DivergenceError("no usable regularization weight");
    alpha = -1.0;
    if (opts.noise_estimate > 0.0) {
      for (const auto& [a, mf] : scan)
        if (mf >= opts.noise_estimate) alpha = a;
    }
    if (alpha < 0.0) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [a, mf] : scan)
        if (mf < best) {
          best = mf;
          alpha = a;
        }
    }
  }

  GnOutcome out =
      run_gauss_newton(model, edges, s0, alpha, opts.max_iters, opts);
  res.slowness = out.s;
  res.offset = out.beta;
  res.reg_weight_used = alpha;
  res.initial_misfit = out.initial_misfit;
  res.final_misfit = out.misfit;
  res.converged = out.converged;
  res.iterations = out.iterations;
  res.log = std::move(out.log);
  return res;
}

InversionResult invert_conformal(const TravelTimeTable& table,
                                 const Domain2& domain,
                                 const ScalarField2& init_speed,
                                 const InversionOptions& opts) {
  const int m = static_cast<int>(table.params.size());
  if (m < 3) throw ConfigError("travel-time table too small");
  std::vector<TravelObservation> obs;
  obs.reserve(static_cast<size_t>(m) * (m - 1));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j)
        obs.push_back({table.params[i], table.params[j], table.d(i, j)});
  return invert_conformal(obs, domain, init_speed, opts);
}

GradientSelfCheck gradient_selfcheck(unsigned seed) {
  GradientSelfCheck out;
  Domain2 dom = Domain2::ball(Vec2::Zero(), 1.0);
  EikonalGrid geom = make_eikonal_grid(dom, 20);

  std::vector<double> src = {0.0, 2.0 * M_PI / 3.0, 4.0 * M_PI / 3.0};
  std::vector<TravelObservation> obs;
  for (double sp : src)
    for (int j = 0; j < 12; ++j) {
      double rp = (2.0 * M_PI * j) / 12.0 + 0.1;
      obs.push_back({sp, rp, 0.0});
    }
  ForwardModel model;
  model.build(geom, obs, false);

  ScalarField2 truth = ScalarField2::constant(1.0) +
                       ScalarField2::bump(0.2, Vec2(0.1, -0.2), 0.6);
  VecX s_true = sample_slowness(geom, truth);
  model.solve(s_true);
  model.data = model.residual(0.0);  // predictions, since data was zero

  // Generic base point: a constant profile sits on grid symmetries where the
  // marcher's stencil choices tie, and the discrete map is only one-sidedly
  // smooth across a tie.
  VecX s0 = sample_slowness(
      geom, ScalarField2::radial_quadratic(1.0 / 1.1, 0.05, Vec2(0.17, 0.31)));
  model.solve(s0);
  VecX r = model.residual(0.0);
  VecX g = model.apply_Jt(r);

  // A zero perturbation must propagate to exactly zero.
  VecX dt;
  model.fields[0].tangent(VecX::Zero(geom.count()), dt);
  out.zero_direction_error = dt.cwiseAbs().maxCoeff();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> pick(0, geom.count() - 1);
  double gmax = g.cwiseAbs().maxCoeff();
  auto objective_at = [&](const VecX& s) {
    model.solve(s);
    return 0.5 * model.residual(0.0).squaredNorm();
  };
  int checked = 0;
  for (int draws = 0; checked < 10 && draws < 400; ++draws) {
    long k = pick(rng);
    if (std::abs(g[k]) < 1e-2 * gmax) continue;
    auto central = [&](double eps) {
      VecX sp = s0, sm = s0;
      sp[k] += eps;
      sm[k] -= eps;
      return (objective_at(sp) - objective_at(sm)) / (2.0 * eps);
    };
    double fd1 = central(1e-6), fd2 = central(3e-6);
    // A jump in the stencil pattern makes the difference quotient blow up as
    // the step shrinks; two steps apart by 3x expose that, the node is not a
    // valid probe of the derivative there.
    if (std::abs(fd1 - fd2) > 1e-3 * std::max(std::abs(fd1), std::abs(fd2)))
      continue;
    out.max_rel_error =
        std::max(out.max_rel_error,
                 std::abs(fd1 - g[k]) / std::max(std::abs(fd1), 1e-12));
    ++checked;
  }

  // Regularizer gradient against symmetric differences of its quadratic form.
  // The form is exactly quadratic, so the symmetric difference is exact at
  // any step; a large step keeps cancellation noise out of the quotient.
  EdgeList edges = build_edges(geom);
  double alpha = 0.37;
  VecX gr = VecX::Zero(geom.count());
  add_reg_gradient(edges, s_true, alpha, gr);
  double grmax = gr.cwiseAbs().maxCoeff();
  for (int k = 0; k < 5;) {
    long node = pick(rng);
    if (std::abs(gr[node]) < 1e-3 * grmax) continue;
    double eps = 0.25;
    VecX sp = s_true, sm = s_true;
    sp[node] += eps;
    sm[node] -= eps;
    double fd = (alpha * reg_value(edges, sp) - alpha * reg_value(edges, sm)) /
                (2.0 * eps);
    out.reg_gradient_error = std::max(
        out.reg_gradient_error,
        std::abs(fd - gr[node]) / std::max(std::abs(fd), std::abs(gr[node])));
    ++k;
  }
  return out;
}

} // namespace elab

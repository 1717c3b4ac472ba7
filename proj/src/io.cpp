#include "elab/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "elab/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "array files are written little-endian");

namespace elab {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

uint64_t fnv1a(const void* data, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = 14695981039346656037ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t fnv1a_file(const std::string& path) {
  std::string bytes = read_text(path);
  return fnv1a(bytes.data(), bytes.size());
}

std::string hex64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw ConfigError("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_json(const std::string& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

ordered_json read_json(const std::string& path) {
  return ordered_json::parse(read_text(path));
}

void write_columns(const std::string& path,
                   const std::vector<std::string>& names, const MatX& cols) {
  std::string out = "#";
  for (const std::string& n : names) out += " " + n;
  out += "\n";
  for (long i = 0; i < cols.rows(); ++i) {
    for (long j = 0; j < cols.cols(); ++j) {
      if (j) out += " ";
      out += format_g17(cols(i, j));
    }
    out += "\n";
  }
  write_text(path, out);
}

void write_table(const std::string& csv_path, const std::string& sidecar_path,
                 const TravelTimeTable& t) {
  long m = static_cast<long>(t.params.size());
  std::string out;
  for (long j = 0; j < m; ++j) {
    if (j) out += ",";
    out += format_g17(t.params[j]);
  }
  out += "\n";
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < m; ++j) {
      if (j) out += ",";
      out += format_g17(t.d(i, j));
    }
    out += "\n";
  }
  write_text(csv_path, out);

  ordered_json side;
  side["mode"] = t.mode;
  side["m"] = m;
  side["max_asymmetry"] = t.max_asymmetry;
  side["trapped_rays"] = t.trapped_rays;
  ordered_json mult = ordered_json::array();
  for (long i = 0; i < t.multiple.rows(); ++i)
    for (long j = 0; j < t.multiple.cols(); ++j)
      if (t.multiple(i, j)) mult.push_back({i, j});
  side["multiple_branch_pairs"] = mult;
  write_json(sidecar_path, side);
}

namespace {

std::vector<double> split_doubles(const std::string& line, char sep) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep))
    if (!cell.empty()) out.push_back(std::stod(cell));
  return out;
}

} // namespace

TravelTimeTable read_table(const std::string& csv_path,
                           const std::string& sidecar_path) {
  std::istringstream f(read_text(csv_path));
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("empty table: " + csv_path);
  TravelTimeTable t;
  t.params = split_doubles(line, ',');
  long m = static_cast<long>(t.params.size());
  t.d.resize(m, m);
  for (long i = 0; i < m; ++i) {
    if (!std::getline(f, line))
      throw ConfigError("truncated table: " + csv_path);
    std::vector<double> row = split_doubles(line, ',');
    if (static_cast<long>(row.size()) != m)
      throw ConfigError("ragged table row in " + csv_path);
    for (long j = 0; j < m; ++j) t.d(i, j) = row[j];
  }
  ordered_json side = read_json(sidecar_path);
  t.mode = side.at("mode").get<std::string>();
  t.max_asymmetry = side.at("max_asymmetry").get<double>();
  t.trapped_rays = side.at("trapped_rays").get<int>();
  t.multiple.setConstant(m, m, false);
  for (const auto& p : side.at("multiple_branch_pairs"))
    t.multiple(p[0].get<long>(), p[1].get<long>()) = true;
  return t;
}

void write_arrivals(const std::string& path, const std::vector<Arrival>& a) {
  std::string out = "source_id,receiver_id,mode,t_pick,confidence\n";
  for (const Arrival& x : a) {
    out += std::to_string(x.source_id) + "," + std::to_string(x.receiver_id) +
           "," + x.mode + "," + format_g17(x.t_pick) + "," +
           format_g17(x.confidence) + "\n";
  }
  write_text(path, out);
}

std::vector<Arrival> read_arrivals(const std::string& path) {
  std::istringstream f(read_text(path));
  std::string line;
  std::getline(f, line);  // header
  std::vector<Arrival> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Arrival a;
    std::getline(ss, cell, ',');
    a.source_id = std::stoi(cell);
    std::getline(ss, cell, ',');
    a.receiver_id = std::stoi(cell);
    std::getline(ss, cell, ',');
    a.mode = cell.at(0);
    std::getline(ss, cell, ',');
    a.t_pick = std::stod(cell);
    std::getline(ss, cell, ',');
    a.confidence = std::stod(cell);
    out.push_back(a);
  }
  return out;
}

void write_dn(const std::string& bin_path, const std::string& manifest_path,
              const DNDataset& d, const std::string& config_hash) {
  long ns = static_cast<long>(d.sources.size());
  long nr = d.n_receivers();
  long nt = static_cast<long>(d.times.size());
  std::vector<double> flat;
  flat.reserve(ns * nr * nt * 2);
  for (long s = 0; s < ns; ++s)
    for (long r = 0; r < nr; ++r)
      for (long k = 0; k < nt; ++k)
        for (int c = 0; c < 2; ++c)
          flat.push_back(d.traces[s](2 * r + c, k));
  std::ofstream f(bin_path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + bin_path);
  f.write(reinterpret_cast<const char*>(flat.data()),
          static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!f) throw ConfigError("write failed: " + bin_path);
  f.close();

  ordered_json m;
  m["shape"] = {ns, nr, nt, 2};
  m["order"] = "source,receiver,time,component";
  m["dtype"] = "float64-le";
  m["config_hash"] = config_hash;
  m["domain"] = {{"center", {d.domain.center[0], d.domain.center[1]}},
                 {"semiaxes", {d.domain.semiaxes[0], d.domain.semiaxes[1]}}};
  m["f0"] = d.f0;
  m["t0"] = d.t0;
  m["grid_h"] = d.grid_h;
  ordered_json srcs = ordered_json::array();
  for (const WaveSource& s : d.sources)
    srcs.push_back({{"param", s.param},
                    {"polarization", s.polarization},
                    {"amplitude", s.amplitude}});
  m["sources"] = srcs;
  m["receiver_params"] = d.receiver_params;
  m["times"] = d.times;
  write_json(manifest_path, m);
}

DNDataset read_dn(const std::string& bin_path,
                  const std::string& manifest_path) {
  ordered_json m = read_json(manifest_path);
  DNDataset d;
  auto c = m.at("domain").at("center");
  auto a = m.at("domain").at("semiaxes");
  d.domain.center = Vec2(c[0].get<double>(), c[1].get<double>());
  d.domain.semiaxes = Vec2(a[0].get<double>(), a[1].get<double>());
  d.f0 = m.at("f0").get<double>();
  d.t0 = m.at("t0").get<double>();
  d.grid_h = m.at("grid_h").get<double>();
  for (const auto& s : m.at("sources")) {
    WaveSource ws;
    ws.param = s.at("param").get<double>();
    ws.polarization = s.at("polarization").get<std::string>();
    ws.amplitude = s.at("amplitude").get<double>();
    d.sources.push_back(ws);
  }
  d.receiver_params = m.at("receiver_params").get<std::vector<double>>();
  d.times = m.at("times").get<std::vector<double>>();

  long ns = m.at("shape")[0].get<long>();
  long nr = m.at("shape")[1].get<long>();
  long nt = m.at("shape")[2].get<long>();
  if (ns != static_cast<long>(d.sources.size()) ||
      nr != static_cast<long>(d.receiver_params.size()) ||
      nt != static_cast<long>(d.times.size()))
    throw ConfigError("manifest shape disagrees with catalogs: " +
                      manifest_path);
  std::string bytes = read_text(bin_path);
  if (bytes.size() != static_cast<size_t>(ns * nr * nt * 2) * sizeof(double))
    throw ConfigError("array file size disagrees with manifest: " + bin_path);
  const double* p = reinterpret_cast<const double*>(bytes.data());
  d.traces.assign(ns, MatX(2 * nr, nt));
  for (long s = 0; s < ns; ++s)
    for (long r = 0; r < nr; ++r)
      for (long k = 0; k < nt; ++k)
        for (int comp = 0; comp < 2; ++comp)
          d.traces[s](2 * r + comp, k) = *p++;
  return d;
}

void write_inversion_log(const std::string& path, const InversionResult& r) {
  std::string out;
  for (const InversionLogEntry& e : r.log) {
    out += "{\"iter\":" + std::to_string(e.iter) +
           ",\"objective\":" + format_g17(e.objective) +
           ",\"misfit\":" + format_g17(e.misfit) +
           ",\"reg\":" + format_g17(e.reg) +
           ",\"lambda_lm\":" + format_g17(e.lambda_lm) +
           ",\"step_norm\":" + format_g17(e.step_norm) +
           ",\"accepted\":" + (e.accepted ? "true" : "false") + "}\n";
  }
  out += std::string("{\"converged\":") + (r.converged ? "true" : "false") +
         ",\"iterations\":" + std::to_string(r.iterations) +
         ",\"reg_weight_used\":" + format_g17(r.reg_weight_used) +
         ",\"initial_misfit\":" + format_g17(r.initial_misfit) +
         ",\"final_misfit\":" + format_g17(r.final_misfit) +
         ",\"offset\":" + format_g17(r.offset) + "}\n";
  write_text(path, out);
}

ordered_json rigidity_report_json(const RigidityReport& rep) {
  ordered_json j;
  j["verdict"] = rep.verdict;
  j["hypotheses_ok"] = rep.hypotheses_ok;
  ordered_json hyps = ordered_json::array();
  for (const HypothesisCheck& c : rep.hypotheses)
    hyps.push_back({{"name", c.name},
                    {"tag", c.tag},
                    {"ok", c.ok},
                    {"metric", c.metric},
                    {"detail", c.detail}});
  j["hypotheses"] = hyps;
  j["time_window"] = rep.time_window;
  j["window_required"] = rep.window_required;
  j["discrepancy"] = rep.discrepancy;
  j["noise_floor"] = rep.noise_floor;
  j["reconstructed"] = rep.reconstructed;
  if (rep.reconstructed || rep.verdict == "indistinguishable") {
    j["picks_p_used"] = rep.picks_p_used;
    j["picks_s_used"] = rep.picks_s_used;
  }
  if (rep.reconstructed) {
    j["cp_rel_l2"] = rep.cp_rel_l2;
    j["cs_rel_l2"] = rep.cs_rel_l2;
    j["recovered"] = {{"lambda", rep.lam_hat},
                      {"mu", rep.mu_hat},
                      {"rho", rep.rho_hat}};
    j["errors"] = {{"lambda", rep.lam_err},
                   {"mu", rep.mu_err},
                   {"rho", rep.rho_err}};
    ordered_json scan = ordered_json::array();
    for (auto [rho, res] : rep.density.scan) scan.push_back({rho, res});
    ordered_json refine = ordered_json::array();
    for (auto [rho, res] : rep.density.refine) refine.push_back({rho, res});
    j["density"] = {{"rho", rep.density.rho},
                    {"residual", rep.density.residual},
                    {"sources_used", rep.density.sources_used},
                    {"scan", scan},
                    {"refine", refine}};
    auto inv = [](const InversionResult& r) {
      return ordered_json{{"converged", r.converged},
                          {"iterations", r.iterations},
                          {"reg_weight_used", r.reg_weight_used},
                          {"initial_misfit", r.initial_misfit},
                          {"final_misfit", r.final_misfit},
                          {"offset", r.offset}};
    };
    j["inversion_p"] = inv(rep.inv_p);
    j["inversion_s"] = inv(rep.inv_s);
  }
  if (!rep.density.note.empty()) j["density_note"] = rep.density.note;
  return j;
}

void manifest_add(RunManifest& m, const std::string& dir,
                  const std::string& relpath) {
  ManifestEntry e;
  e.path = relpath;
  e.checksum = hex64(fnv1a_file(dir + "/" + relpath));
  m.artifacts.push_back(e);
}

void write_manifest(const std::string& path, const RunManifest& m) {
  ordered_json j;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  ordered_json arts = ordered_json::array();
  for (const ManifestEntry& e : m.artifacts)
    arts.push_back({{"path", e.path}, {"checksum", e.checksum}});
  j["artifacts"] = arts;
  ordered_json tim = ordered_json::object();
  for (const auto& [k, v] : m.timings) tim[k] = v;
  j["timings_s"] = tim;
  write_json(path, j);
}

} // namespace elab

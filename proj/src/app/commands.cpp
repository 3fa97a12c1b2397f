// Copyright 2026 The qdisc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qdisc/app/commands.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "qdisc/app/csv.hpp"
#include "qdisc/app/worker_pool.hpp"
#include "qdisc/format.hpp"
#include "qdisc/protocols.hpp"
#include "qdisc/version.hpp"

namespace qdisc::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t point_seed(std::uint64_t seed, double delta_b, double t_final, int control) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ std::bit_cast<std::uint64_t>(delta_b));
  h = splitmix(h ^ std::bit_cast<std::uint64_t>(t_final));
  return splitmix(h ^ static_cast<std::uint64_t>(control));
}

struct Output {
  fs::path dir;
  std::vector<std::string> files;

  fs::path add(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }
};

fs::path output_dir(const ExperimentConfig& cfg, const RunOptions& opt) {
  return opt.out ? *opt.out : cfg.output_dir;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const ExperimentConfig& cfg, const RunOptions& opt, const std::string& command,
                    std::uint64_t seed, Output& out, json jobs, json extra = json::object()) {
  json m;
  m["tool"] = "qdisc";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = cfg.source.string();
  m["config_hash"] = config_hash(cfg.text);
  m["seed"] = seed;
  m["workers"] = opt.workers;
  m["timestamp"] = utc_timestamp();
  m["jobs"] = std::move(jobs);
  for (auto& [k, v] : extra.items()) m[k] = v;
  json files = json::array();
  for (const auto& f : out.files) {
    std::error_code ec;
    const auto size = fs::file_size(out.dir / f, ec);
    files.push_back({{"path", f}, {"bytes", ec ? 0 : size}});
  }
  m["outputs"] = std::move(files);
  fs::create_directories(out.dir);
  std::ofstream o(out.dir / "manifest.json", std::ios::binary | std::ios::trunc);
  o << m.dump(2) << '\n';
  if (!o) throw std::runtime_error("cannot write " + (out.dir / "manifest.json").string());
}

double single(const std::vector<double>& v, const char* what) {
  if (v.size() != 1) {
    throw ConfigError(std::string("this command needs exactly one ") + what + " value, got " +
                      std::to_string(v.size()));
  }
  return v.front();
}

void require_delta_b(const ExperimentConfig& cfg) {
  if (cfg.delta_b.empty()) throw ConfigError(cfg.source.string() + ": problem.delta_B: missing");
}

void write_trajectory(const fs::path& path, const TimeGrid& grid, const Trajectory& a,
                      const Trajectory& b) {
  CsvWriter w({"t", "bloch1_x", "bloch1_y", "bloch1_z", "bloch2_x", "bloch2_y", "bloch2_z", "d_hs",
               "d_tr", "purity1", "purity2"});
  const auto m = measure_pair(a, b);
  for (std::size_t j = 0; j < a.size(); ++j) {
    const BlochVector r1 = a.bloch(j);
    const BlochVector r2 = b.bloch(j);
    w.cell(grid.time(j)).cell(r1.x).cell(r1.y).cell(r1.z).cell(r2.x).cell(r2.y).cell(r2.z);
    w.cell(m[j].d_hs).cell(m[j].d_tr).cell(m[j].purity1).cell(m[j].purity2);
    w.end_row();
  }
  w.save(path);
}

void save_field(const fs::path& path, const ControlField& f, const TimeGrid& grid) {
  std::ostringstream s;
  write_field_csv(s, f, grid);
  fs::create_directories(path.parent_path());
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  o << s.str();
  if (!o) throw std::runtime_error("cannot write " + path.string());
}

ControlField load_field(const fs::path& path, const TimeGrid& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open field file");
  try {
    return read_field_csv(in, grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void say(const RunOptions& opt, const std::string& line) {
  if (opt.info) *opt.info << line << '\n';
}

void note(const RunOptions& opt, const std::string& line) {
  if (opt.log) *opt.log << line << '\n';
}

}  // namespace

DiscriminationProblem make_problem(const ExperimentConfig& cfg, double delta_b, double t_final) {
  DiscriminationProblem p;
  p.field = cfg.field;
  p.delta_b = delta_b;
  p.noise = cfg.noise;
  p.initial = cfg.initial;
  p.grid = cfg.grid_for(t_final, delta_b);
  p.validate();
  return p;
}

ControlSet make_guess_fields(const ExperimentConfig& cfg, const DiscriminationProblem& problem,
                             std::uint64_t seed, std::vector<std::string>* warnings) {
  const TimeGrid& grid = problem.grid;
  ControlSet fields;
  for (int k = 0; k < 3; ++k) {
    GuessField g = make_guess(cfg.guesses[k].resolve(grid.t_final()), grid, problem.field);
    if (warnings) {
      for (auto& w : g.warnings) {
        warnings->push_back(std::string("E_") + control_name(static_cast<Control>(k)) + ": " + w);
      }
    }
    if (cfg.guess_noise > 0.0 && cfg.krotov.optimize_mask[k]) {
      std::mt19937_64 rng(point_seed(seed, problem.delta_b, grid.t_final(), k));
      for (std::size_t j = 0; j < grid.n_steps(); ++j) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        g.field[j] += cfg.guess_noise * (2.0 * u - 1.0);
      }
    }
    fields.fields[k] = std::move(g.field);
  }
  return fields;
}

std::array<ShapeFunction, 3> make_shapes(const ExperimentConfig& cfg, const TimeGrid& grid) {
  const ShapeFunction s = make_shape(grid, cfg.shape_ramp);
  return {s, s, s};
}

SweepRow run_point(const ExperimentConfig& cfg, double delta_b, double t_final, Protocol protocol,
                   std::uint64_t seed) {
  const DiscriminationProblem problem = make_problem(cfg, delta_b, t_final);
  SweepRow row;
  row.delta_b = delta_b;
  row.t_final = t_final;
  row.protocol = protocol;
  ControlSet fields;
  Trajectory a;
  Trajectory b;
  if (protocol == Protocol::Ramsey) {
    fields = ControlSet::zeros(problem.grid.n_steps());
    a = propagate_forward(problem, Hypothesis::Lower, fields);
    b = propagate_forward(problem, Hypothesis::Upper, fields);
  } else {
    const ControlSet guess = make_guess_fields(cfg, problem, seed);
    KrotovState s = optimize(problem, guess, cfg.krotov, make_shapes(cfg, problem.grid));
    row.iterations = static_cast<int>(s.log.size()) - 1;
    row.converged = s.converged;
    fields = std::move(s.fields);
    a = std::move(s.forward[0]);
    b = std::move(s.forward[1]);
  }
  const auto m = measure_pair(a, b);
  row.d_hs = m.back().d_hs;
  row.d_tr = m.back().d_tr;
  row.purity1 = m.back().purity1;
  row.purity2 = m.back().purity2;
  row.m = m_numeric(a, b);
  row.qfi_over_t = qfi_for_fields(problem, fields, cfg.qfi_splitting.value_or(0.0)) / t_final;
  return row;
}

SweepOutcome run_sweep(const ExperimentConfig& cfg, std::size_t workers, std::uint64_t seed) {
  require_delta_b(cfg);
  struct Job {
    double delta_b;
    double t_final;
    Protocol protocol;
  };
  std::vector<Job> jobs;
  for (double db : cfg.delta_b) {
    for (double t : cfg.final_times(db)) {
      for (Protocol p : cfg.protocols) jobs.push_back({db, t, p});
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& x, const Job& y) {
    return std::tie(x.delta_b, x.t_final, x.protocol) < std::tie(y.delta_b, y.t_final, y.protocol);
  });

  std::vector<std::optional<SweepRow>> rows(jobs.size());
  std::vector<JobStatus> status(jobs.size());
  SweepOutcome out;
  out.workers_used = effective_workers(workers, jobs.size());
  run_jobs(jobs.size(), out.workers_used, [&](std::size_t i) {
    const Job& j = jobs[i];
    JobStatus& st = status[i];
    st.delta_b = j.delta_b;
    st.t_final = j.t_final;
    st.protocol = j.protocol;
    try {
      rows[i] = run_point(cfg, j.delta_b, j.t_final, j.protocol, seed);
      st.ok = true;
      if (!rows[i]->converged) st.message = "iteration limit reached";
    } catch (const std::exception& e) {
      st.message = e.what();
    }
  });
  for (auto& r : rows) {
    if (r) out.rows.push_back(*r);
  }
  out.jobs = std::move(status);
  return out;
}

std::vector<MPoint> reduce_m_curve(const std::vector<SweepRow>& rows) {
  std::map<std::pair<double, Protocol>, MPoint> best;
  for (const auto& r : rows) {
    auto [it, inserted] = best.try_emplace({r.delta_b, r.protocol},
                                           MPoint{r.delta_b, r.protocol, r.m, r.t_final});
    if (!inserted && r.m < it->second.m) it->second = MPoint{r.delta_b, r.protocol, r.m, r.t_final};
  }
  std::vector<MPoint> out;
  for (auto& [k, v] : best) out.push_back(v);
  return out;
}

int cmd_propagate(const ExperimentConfig& cfg, const RunOptions& opt) {
  require_delta_b(cfg);
  const double db = single(cfg.delta_b, "delta_B");
  const auto times = cfg.final_times(db);
  const double t = single(times, "final time");
  const DiscriminationProblem problem = make_problem(cfg, db, t);
  const std::size_t n = problem.grid.n_steps();

  ControlSet fields = ControlSet::zeros(n);
  const bool have_files = std::any_of(cfg.field_files.begin(), cfg.field_files.end(),
                                      [](const auto& f) { return f.has_value(); });
  if (have_files) {
    for (int k = 0; k < 3; ++k) {
      if (cfg.field_files[k]) fields.fields[k] = load_field(*cfg.field_files[k], problem.grid);
    }
  } else if (cfg.protocols.size() != 1 || cfg.protocols.front() != Protocol::Ramsey) {
    throw ConfigError(cfg.source.string() +
                      ": propagate needs protocol ramsey or a fields section");
  }

  const Trajectory a = propagate_forward(problem, Hypothesis::Lower, fields);
  const Trajectory b = propagate_forward(problem, Hypothesis::Upper, fields);
  Output out{output_dir(cfg, opt), {}};
  write_trajectory(out.add("trajectory.csv"), problem.grid, a, b);
  const auto m = measure_pair(a, b);
  const double jt = 1.0 - m.back().d_hs;
  say(opt, "J_T " + format_number(jt) + "  D_HS(T) " + format_number(m.back().d_hs) +
               "  max D_HS " +
               format_number(std::max_element(m.begin(), m.end(), [](auto& x, auto& y) {
                               return x.d_hs < y.d_hs;
                             })->d_hs));
  json jobs = json::array({{{"delta_b", db}, {"T", t}, {"status", "ok"}}});
  write_manifest(cfg, opt, "propagate", opt.seed.value_or(cfg.seed), out, std::move(jobs),
                 {{"j_t", jt}});
  return kExitOk;
}

int cmd_optimize(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!cfg.has_krotov) throw ConfigError(cfg.source.string() + ": optimize needs a krotov section");
  require_delta_b(cfg);
  const double db = single(cfg.delta_b, "delta_B");
  const double t = single(cfg.final_times(db), "final time");
  const std::uint64_t seed = opt.seed.value_or(cfg.seed);
  const DiscriminationProblem problem = make_problem(cfg, db, t);
  std::vector<std::string> warnings;
  const ControlSet guess = make_guess_fields(cfg, problem, seed, &warnings);
  for (const auto& w : warnings) note(opt, "warning: " + w);

  Output out{output_dir(cfg, opt), {}};
  CsvWriter conv({"iteration", "j_t", "g", "fluence", "lambda_x", "lambda_y", "lambda_z", "rejected"});
  auto record = [&](const IterationRecord& r) {
    conv.cell(static_cast<long long>(r.iteration)).cell(r.j_t).cell(r.g).cell(r.fluence);
    conv.cell(r.lambda[0]).cell(r.lambda[1]).cell(r.lambda[2]).cell(static_cast<long long>(r.rejected));
    conv.end_row();
    if (opt.verbose) {
      note(opt, "iteration " + std::to_string(r.iteration) + "  J_T " + format_number(r.j_t) +
                    "  g " + format_number(r.g));
    }
  };

  KrotovState s;
  try {
    s = optimize(problem, guess, cfg.krotov, make_shapes(cfg, problem.grid), record);
  } catch (const NumericalError& e) {
    conv.save(out.add("convergence.csv"));
    json jobs = json::array({{{"delta_b", db}, {"T", t}, {"status", "failed"}, {"message", e.what()}}});
    write_manifest(cfg, opt, "optimize", seed, out, std::move(jobs));
    throw;
  }

  conv.save(out.add("convergence.csv"));
  for (Control k : kAllControls) {
    save_field(out.add(std::string("field_") + control_name(k) + ".csv"), s.fields[k], problem.grid);
  }
  CsvWriter fin({"hypothesis", "B", "bloch_x", "bloch_y", "bloch_z", "purity"});
  for (Hypothesis h : kBothHypotheses) {
    const DensityMatrix rho = s.final_state(h);
    const BlochVector r = to_bloch(rho);
    fin.cell(static_cast<long long>(static_cast<int>(h) + 1)).cell(problem.drift_field(h));
    fin.cell(r.x).cell(r.y).cell(r.z).cell(purity(rho)).end_row();
  }
  fin.save(out.add("final_state.csv"));
  write_trajectory(out.add("trajectory.csv"), problem.grid, s.forward[0], s.forward[1]);

  const int iterations = static_cast<int>(s.log.size()) - 1;
  say(opt, "J_T " + format_number(s.j_t()) + " after " + std::to_string(iterations) +
               " iterations (" + s.stop_reason + ")");
  json jobs = json::array({{{"delta_b", db},
                            {"T", t},
                            {"status", s.converged ? "converged" : "not_converged"},
                            {"message", s.stop_reason}}});
  write_manifest(cfg, opt, "optimize", seed, out, std::move(jobs),
                 {{"j_t", s.j_t()}, {"iterations", iterations}, {"warnings", s.warnings}});
  if (!s.converged) note(opt, "optimize: " + s.stop_reason);
  return s.converged ? kExitOk : kExitNumericalFailure;
}

namespace {

CsvWriter fit_writer() {
  return CsvWriter({"noise_kind", "protocol", "gamma_eff", "ratio", "residual", "points"});
}

void fit_rows(CsvWriter& w, const ExperimentConfig& cfg, const std::string& protocol,
              const std::vector<double>& db, const std::vector<double>& m, const RunOptions& opt) {
  MCurve curve;
  curve.delta_b_values = db;
  curve.m_values = m;
  curve.gamma_label = m_curve_rate(cfg.noise.kind, cfg.decay_time);
  const EffectiveTimeFit f = fit_effective_time(curve, cfg.noise.kind);
  w.cell(noise_name(cfg.noise.kind)).cell(protocol).cell(f.gamma_eff).cell(f.ratio);
  w.cell(f.residual).cell(static_cast<long long>(db.size())).end_row();
  say(opt, protocol + ": gamma_eff " + format_number(f.gamma_eff) + "  ratio " +
               format_number(f.ratio) + "  residual " + format_number(f.residual));
}

}  // namespace

int cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
  const std::uint64_t seed = opt.seed.value_or(cfg.seed);
  if (cfg.fit_after_sweep && cfg.noise.kind == NoiseKind::None) {
    throw ConfigError(cfg.source.string() + ": fit.after_sweep needs a noise kind");
  }
  SweepOutcome res = run_sweep(cfg, opt.workers, seed);
  Output out{output_dir(cfg, opt), {}};

  CsvWriter table({"delta_b", "T", "protocol", "d_hs", "d_tr", "purity1", "purity2", "qfi_over_t",
                   "m", "iterations", "converged"});
  for (const auto& r : res.rows) {
    table.cell(r.delta_b).cell(r.t_final).cell(protocol_name(r.protocol)).cell(r.d_hs).cell(r.d_tr);
    table.cell(r.purity1).cell(r.purity2).cell(r.qfi_over_t).cell(r.m);
    table.cell(static_cast<long long>(r.iterations)).cell(static_cast<long long>(r.converged));
    table.end_row();
  }
  table.save(out.add("results.csv"));

  const auto curve = reduce_m_curve(res.rows);
  CsvWriter mc({"delta_b", "protocol", "m", "T", "m_ramsey_analytic"});
  for (const auto& p : curve) {
    mc.cell(p.delta_b).cell(protocol_name(p.protocol)).cell(p.m).cell(p.t_final);
    if (cfg.noise.kind == NoiseKind::None) {
      mc.cell(0.0);
    } else {
      mc.cell(m_analytic(p.delta_b, m_curve_rate(cfg.noise.kind, cfg.decay_time)));
    }
    mc.end_row();
  }
  mc.save(out.add("m_curve.csv"));

  json jobs = json::array();
  bool failed = false;
  for (const auto& j : res.jobs) {
    failed = failed || !j.ok;
    json e{{"delta_b", j.delta_b},
           {"T", j.t_final},
           {"protocol", protocol_name(j.protocol)},
           {"status", j.ok ? "ok" : "failed"}};
    if (!j.message.empty()) e["message"] = j.message;
    jobs.push_back(std::move(e));
    if (!j.ok) {
      note(opt, "job delta_b=" + format_number(j.delta_b) + " T=" + format_number(j.t_final) + " " +
                    protocol_name(j.protocol) + " failed: " + j.message);
    }
  }

  if (cfg.fit_after_sweep) {
    CsvWriter fits = fit_writer();
    for (Protocol p : cfg.protocols) {
      std::vector<double> db;
      std::vector<double> m;
      for (const auto& pt : curve) {
        if (pt.protocol != p) continue;
        db.push_back(pt.delta_b);
        m.push_back(pt.m);
      }
      try {
        fit_rows(fits, cfg, protocol_name(p), db, m, opt);
        jobs.push_back({{"fit", protocol_name(p)}, {"status", "ok"}});
      } catch (const std::exception& e) {
        failed = true;
        jobs.push_back({{"fit", protocol_name(p)}, {"status", "failed"}, {"message", e.what()}});
        note(opt, std::string("fit ") + protocol_name(p) + " failed: " + e.what());
      }
    }
    if (fits.row_count() > 0) fits.save(out.add("fit_summary.csv"));
  }

  say(opt, std::to_string(res.rows.size()) + " of " + std::to_string(res.jobs.size()) +
               " jobs succeeded on " + std::to_string(res.workers_used) + " workers");
  write_manifest(cfg, opt, "sweep", seed, out, std::move(jobs),
                 {{"workers_used", res.workers_used}});
  return failed ? kExitPartialSweep : kExitOk;
}

int cmd_fit(const ExperimentConfig& cfg, const fs::path& table_path, const RunOptions& opt) {
  if (cfg.noise.kind == NoiseKind::None) {
    throw ConfigError(cfg.source.string() + ": fitting needs problem.noise and its decay time");
  }
  CsvTable table;
  std::vector<double> db;
  std::vector<double> m;
  try {
    table = read_csv(table_path);
    db = table.numeric_column("delta_b");
    m = table.numeric_column("m");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  const bool by_protocol =
      std::find(table.header.begin(), table.header.end(), "protocol") != table.header.end();
  const std::size_t pcol = by_protocol ? table.column_index("protocol") : 0;
  for (std::size_t i = 0; i < db.size(); ++i) {
    auto& g = groups[by_protocol ? table.rows[i][pcol] : std::string("all")];
    g.first.push_back(db[i]);
    g.second.push_back(m[i]);
  }
  CsvWriter fits = fit_writer();
  for (const auto& [name, g] : groups) {
    try {
      fit_rows(fits, cfg, name, g.first, g.second, opt);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(table_path.string() + ": " + name + ": " + e.what());
    }
  }
  Output out{output_dir(cfg, opt), {}};
  fits.save(out.add("fit_summary.csv"));
  write_manifest(cfg, opt, "fit", opt.seed.value_or(cfg.seed), out,
                 json::array({{{"table", table_path.string()}, {"status", "ok"}}}));
  return kExitOk;
}

int cmd_qsl(const std::vector<double>& delta_b, const RunOptions& opt) {
  if (delta_b.empty()) throw ConfigError("qsl: no delta_B given");
  for (double db : delta_b) {
    if (!(db > 0.0) || !std::isfinite(db)) throw ConfigError("qsl: delta_B must be positive");
    say(opt, format_number(qsl_time(db)));
  }
  return kExitOk;
}

int run_command(const std::string& name, const std::optional<fs::path>& config,
                const std::optional<fs::path>& table, const std::vector<double>& qsl_delta_b,
                const RunOptions& opt) {
  try {
    if (name == "qsl") {
      if (!qsl_delta_b.empty()) return cmd_qsl(qsl_delta_b, opt);
      if (!config) throw ConfigError("qsl: give --delta-b or --config");
      return cmd_qsl(load_config(*config).delta_b, opt);
    }
    if (!config) throw ConfigError(name + ": --config is required");
    const ExperimentConfig cfg = load_config(*config);
    if (name == "propagate") return cmd_propagate(cfg, opt);
    if (name == "optimize") return cmd_optimize(cfg, opt);
    if (name == "sweep") return cmd_sweep(cfg, opt);
    if (name == "fit") {
      const auto path = table ? table : cfg.fit_table;
      if (!path) throw ConfigError(name + ": give a table argument or fit.table in the config");
      return cmd_fit(cfg, *path, opt);
    }
    throw ConfigError("unknown command '" + name + "'");
  } catch (const ConfigError& e) {
    note(opt, std::string("config error: ") + e.what());
    return kExitConfigError;
  } catch (const NumericalError& e) {
    note(opt, std::string("numerical failure: ") + e.what());
    return kExitNumericalFailure;
  } catch (const std::invalid_argument& e) {
    note(opt, std::string("invalid input: ") + e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    note(opt, std::string("error: ") + e.what());
    return kExitOtherError;
  }
}

}  // namespace qdisc::app

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

#include "qdisc/app/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string_view>

#include "qdisc/protocols.hpp"

namespace qdisc::app {

const char* protocol_name(Protocol p) { return p == Protocol::Ramsey ? "ramsey" : "optimize"; }

GuessSpec GuessConfig::resolve(double t_final) const {
  switch (kind) {
    case Kind::Zero:
      return guess::Zero{};
    case Kind::Constant:
      return guess::Constant{value};
    case Kind::CancelDrift:
      return guess::CancelDrift{};
    case Kind::KickPair: {
      guess::KickPair k = default_kick_pair(t_final);
      k.amplitude = amplitude;
      if (width) k.width = *width;
      if (center1) k.center1 = *center1;
      if (center2) k.center2 = *center2;
      return k;
    }
    case Kind::SplitPeak: {
      guess::SplitPeak s = default_split_peak(t_final);
      s.amplitude = amplitude;
      if (width) s.width = *width;
      if (center1) s.center = *center1;
      return s;
    }
  }
  return guess::Zero{};
}

std::vector<double> ExperimentConfig::final_times(double db) const {
  if (!t_final.empty()) return t_final;
  const TimeFamily f = t_family.value_or(TimeFamily{});
  return final_time_family(db, decay_time, f.count, f.lo, f.hi, f.cap);
}

TimeGrid ExperimentConfig::grid_for(double t, double db) const {
  if (n_steps) return TimeGrid(t, *n_steps);
  return default_grid(t, db, decay_time, policy);
}

namespace {

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& path,
                         const std::string& msg) const {
    std::ostringstream out;
    out << source_;
    if (at.IsDefined() && at.Mark().line >= 0) out << ":" << at.Mark().line + 1;
    out << ": " << path << ": " << msg;
    throw ConfigError(out.str());
  }

  void require_map(const YAML::Node& n, const std::string& path) const {
    if (!n.IsMap()) fail(n, path, "expected a mapping");
  }

  void check_keys(const YAML::Node& n, const std::string& path,
                  std::initializer_list<std::string_view> allowed) const {
    require_map(n, path);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) fail(kv.first, join(path, key), "unknown key");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  double real(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected a number");
    double v = 0.0;
    if (!YAML::convert<double>::decode(n, v) || !std::isfinite(v)) {
      fail(n, path, "expected a finite number, got '" + n.Scalar() + "'");
    }
    return v;
  }

  double positive(const YAML::Node& n, const std::string& path) const {
    const double v = real(n, path);
    if (!(v > 0.0)) fail(n, path, "must be positive");
    return v;
  }

  double non_negative(const YAML::Node& n, const std::string& path) const {
    const double v = real(n, path);
    if (!(v >= 0.0)) fail(n, path, "must be non-negative");
    return v;
  }

  long long integer(const YAML::Node& n, const std::string& path, long long lo) const {
    if (!n.IsScalar()) fail(n, path, "expected an integer");
    long long v = 0;
    if (!YAML::convert<long long>::decode(n, v)) {
      fail(n, path, "expected an integer, got '" + n.Scalar() + "'");
    }
    if (v < lo) fail(n, path, "must be at least " + std::to_string(lo));
    return v;
  }

  bool boolean(const YAML::Node& n, const std::string& path) const {
    bool v = false;
    if (!n.IsScalar() || !YAML::convert<bool>::decode(n, v)) fail(n, path, "expected true or false");
    return v;
  }

  std::string word(const YAML::Node& n, const std::string& path,
                   std::initializer_list<std::string_view> choices) const {
    if (!n.IsScalar()) fail(n, path, "expected a string");
    const std::string v = n.Scalar();
    std::string options;
    for (auto c : choices) {
      if (v == c) return v;
      options += options.empty() ? "" : ", ";
      options += c;
    }
    fail(n, path, "'" + v + "' is not one of " + options);
  }

  std::vector<double> positive_list(const YAML::Node& n, const std::string& path) const {
    std::vector<double> out;
    if (n.IsSequence()) {
      if (n.size() == 0) fail(n, path, "list must not be empty");
      for (std::size_t i = 0; i < n.size(); ++i) {
        out.push_back(positive(n[i], path + "[" + std::to_string(i) + "]"));
      }
    } else {
      out.push_back(positive(n, path));
    }
    return out;
  }

  std::filesystem::path file(const YAML::Node& n, const std::string& path,
                             const std::filesystem::path& base) const {
    if (!n.IsScalar() || n.Scalar().empty()) fail(n, path, "expected a file path");
    std::filesystem::path p(n.Scalar());
    if (p.is_relative()) p = base / p;
    return p;
  }

 private:
  std::string source_;
};

Control control_from_name(const Parser& ps, const YAML::Node& n, const std::string& path) {
  const std::string w = ps.word(n, path, {"x", "y", "z"});
  return w == "x" ? Control::X : w == "y" ? Control::Y : Control::Z;
}

GuessConfig parse_guess(const Parser& ps, const YAML::Node& n, const std::string& path) {
  ps.check_keys(n, path, {"kind", "value", "amplitude", "width", "center1", "center2", "center"});
  if (!n["kind"]) ps.fail(n, path, "missing 'kind'");
  const std::string kind = ps.word(n["kind"], path + ".kind",
                                   {"zero", "constant", "cancel_drift", "kick_pair", "split_peak"});
  GuessConfig g;
  auto reject = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (n[k]) ps.fail(n[k], Parser::join(path, k), "not valid for kind " + kind);
    }
  };
  if (kind == "zero" || kind == "cancel_drift") {
    g.kind = kind == "zero" ? GuessConfig::Kind::Zero : GuessConfig::Kind::CancelDrift;
    reject({"value", "amplitude", "width", "center1", "center2", "center"});
  } else if (kind == "constant") {
    g.kind = GuessConfig::Kind::Constant;
    reject({"amplitude", "width", "center1", "center2", "center"});
    if (!n["value"]) ps.fail(n, path, "constant guess needs 'value'");
    g.value = ps.real(n["value"], path + ".value");
  } else {
    const bool kick = kind == "kick_pair";
    g.kind = kick ? GuessConfig::Kind::KickPair : GuessConfig::Kind::SplitPeak;
    reject({"value"});
    if (kick) {
      reject({"center"});
    } else {
      reject({"center1", "center2"});
    }
    if (n["amplitude"]) g.amplitude = ps.real(n["amplitude"], path + ".amplitude");
    if (n["width"]) g.width = ps.positive(n["width"], path + ".width");
    if (kick) {
      if (n["center1"]) g.center1 = ps.non_negative(n["center1"], path + ".center1");
      if (n["center2"]) g.center2 = ps.non_negative(n["center2"], path + ".center2");
    } else if (n["center"]) {
      g.center1 = ps.non_negative(n["center"], path + ".center");
    }
  }
  return g;
}

void parse_problem(const Parser& ps, const YAML::Node& n, ExperimentConfig& c) {
  const std::string p = "problem";
  ps.check_keys(n, p, {"B", "delta_B", "noise", "T1", "T2", "initial"});
  if (n["B"]) c.field = ps.real(n["B"], "problem.B");
  if (n["delta_B"]) c.delta_b = ps.positive_list(n["delta_B"], "problem.delta_B");
  std::string noise = "none";
  if (n["noise"]) noise = ps.word(n["noise"], "problem.noise", {"none", "relaxation", "dephasing"});
  if (noise == "relaxation") {
    if (n["T2"]) ps.fail(n["T2"], "problem.T2", "relaxation takes T1, not T2");
    if (!n["T1"]) ps.fail(n, p, "relaxation needs T1");
    c.decay_time = ps.positive(n["T1"], "problem.T1");
    c.noise = LindbladSpec::relaxation(c.decay_time);
  } else if (noise == "dephasing") {
    if (n["T1"]) ps.fail(n["T1"], "problem.T1", "dephasing takes T2, not T1");
    if (!n["T2"]) ps.fail(n, p, "dephasing needs T2");
    c.decay_time = ps.positive(n["T2"], "problem.T2");
    c.noise = LindbladSpec::dephasing(c.decay_time);
  } else {
    for (const char* k : {"T1", "T2"}) {
      if (n[k]) ps.fail(n[k], Parser::join(p, k), "no decay time without a noise kind");
    }
  }
  if (const auto init = n["initial"]) {
    if (init.IsMap()) {
      ps.check_keys(init, "problem.initial", {"bloch"});
      const auto b = init["bloch"];
      if (!b || !b.IsSequence() || b.size() != 3) {
        ps.fail(init, "problem.initial.bloch", "expected [x, y, z]");
      }
      BlochVector r{ps.real(b[0], "problem.initial.bloch[0]"),
                    ps.real(b[1], "problem.initial.bloch[1]"),
                    ps.real(b[2], "problem.initial.bloch[2]")};
      if (r.norm() > 1.0 + 1e-12) ps.fail(b, "problem.initial.bloch", "norm exceeds 1");
      c.initial = DensityMatrix::from_bloch(r);
    } else {
      const std::string w =
          ps.word(init, "problem.initial", {"plus", "ground", "excited", "mixed"});
      c.initial = w == "plus"     ? DensityMatrix::plus()
                  : w == "ground" ? DensityMatrix::ground()
                  : w == "excited" ? DensityMatrix::excited()
                                   : DensityMatrix::maximally_mixed();
    }
  }
}

void parse_grid(const Parser& ps, const YAML::Node& n, ExperimentConfig& c) {
  ps.check_keys(n, "grid", {"T", "T_family", "n_steps", "policy"});
  if (n["T"] && n["T_family"]) ps.fail(n["T_family"], "grid.T_family", "give either T or T_family");
  if (n["T"]) c.t_final = ps.positive_list(n["T"], "grid.T");
  if (const auto f = n["T_family"]) {
    ps.check_keys(f, "grid.T_family", {"count", "lo", "hi", "cap"});
    TimeFamily fam;
    if (f["count"]) fam.count = static_cast<std::size_t>(ps.integer(f["count"], "grid.T_family.count", 1));
    if (f["lo"]) fam.lo = ps.positive(f["lo"], "grid.T_family.lo");
    if (f["hi"]) fam.hi = ps.positive(f["hi"], "grid.T_family.hi");
    if (f["cap"]) fam.cap = ps.non_negative(f["cap"], "grid.T_family.cap");
    if (fam.hi < fam.lo) ps.fail(f, "grid.T_family", "hi must not be below lo");
    c.t_family = fam;
  }
  if (n["n_steps"]) c.n_steps = static_cast<std::size_t>(ps.integer(n["n_steps"], "grid.n_steps", 1));
  if (const auto pol = n["policy"]) {
    if (c.n_steps) ps.fail(pol, "grid.policy", "give either n_steps or policy");
    ps.check_keys(pol, "grid.policy", {"points_per_unit_time", "points_per_period", "points_per_decay"});
    if (pol["points_per_unit_time"]) {
      c.policy.points_per_unit_time = ps.positive(pol["points_per_unit_time"], "grid.policy.points_per_unit_time");
    }
    if (pol["points_per_period"]) {
      c.policy.points_per_period = ps.positive(pol["points_per_period"], "grid.policy.points_per_period");
    }
    if (pol["points_per_decay"]) {
      c.policy.points_per_decay = ps.positive(pol["points_per_decay"], "grid.policy.points_per_decay");
    }
  }
}

void parse_krotov(const Parser& ps, const YAML::Node& n, ExperimentConfig& c) {
  const std::string p = "krotov";
  ps.check_keys(n, p, {"lambda", "max_iterations", "tolerance", "optimize", "guess", "shape_ramp",
                       "guess_noise", "monotonicity_slack", "lambda_backoff", "max_backoffs"});
  c.has_krotov = true;
  KrotovConfig& k = c.krotov;
  if (const auto l = n["lambda"]) {
    if (l.IsSequence()) {
      if (l.size() != 3) ps.fail(l, "krotov.lambda", "expected one value or [x, y, z]");
      for (int i = 0; i < 3; ++i) k.lambda[i] = ps.positive(l[i], "krotov.lambda[" + std::to_string(i) + "]");
    } else {
      k.lambda.fill(ps.positive(l, "krotov.lambda"));
    }
  }
  if (n["max_iterations"]) {
    const long long it = ps.integer(n["max_iterations"], "krotov.max_iterations", 1);
    if (it > std::numeric_limits<int>::max()) ps.fail(n["max_iterations"], "krotov.max_iterations", "too large");
    k.max_iterations = static_cast<int>(it);
  }
  if (n["tolerance"]) k.delta_jt_tolerance = ps.positive(n["tolerance"], "krotov.tolerance");
  if (const auto m = n["optimize"]) {
    k.optimize_mask = {false, false, false};
    if (!m.IsSequence()) ps.fail(m, "krotov.optimize", "expected a list of controls, e.g. [y]");
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string path = "krotov.optimize[" + std::to_string(i) + "]";
      const int idx = static_cast<int>(control_from_name(ps, m[i], path));
      if (k.optimize_mask[idx]) ps.fail(m[i], path, "control listed twice");
      k.optimize_mask[idx] = true;
    }
  }
  if (const auto g = n["guess"]) {
    ps.check_keys(g, "krotov.guess", {"x", "y", "z"});
    for (const char* name : {"x", "y", "z"}) {
      if (g[name]) {
        const int idx = name[0] - 'x';
        c.guesses[idx] = parse_guess(ps, g[name], std::string("krotov.guess.") + name);
      }
    }
  }
  if (const auto r = n["shape_ramp"]) {
    c.shape_ramp = ps.non_negative(r, "krotov.shape_ramp");
    if (c.shape_ramp > 0.5) ps.fail(r, "krotov.shape_ramp", "must not exceed 0.5");
  }
  if (n["guess_noise"]) c.guess_noise = ps.non_negative(n["guess_noise"], "krotov.guess_noise");
  if (n["monotonicity_slack"]) {
    k.monotonicity_slack = ps.non_negative(n["monotonicity_slack"], "krotov.monotonicity_slack");
  }
  if (const auto b = n["lambda_backoff"]) {
    k.lambda_backoff = ps.real(b, "krotov.lambda_backoff");
    if (!(k.lambda_backoff > 1.0)) ps.fail(b, "krotov.lambda_backoff", "must exceed 1");
  }
  if (n["max_backoffs"]) {
    k.max_backoffs = static_cast<int>(ps.integer(n["max_backoffs"], "krotov.max_backoffs", 0));
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream out;
    out << source_name << ":" << e.mark.line + 1 << ": syntax error: " << e.msg;
    throw ConfigError(out.str());
  }
  const Parser ps(source_name);
  if (!root.IsMap()) ps.fail(root, "<root>", "config must be a mapping");
  ps.check_keys(root, "", {"problem", "grid", "protocol", "krotov", "fields", "qfi", "fit",
                           "outputs", "seed"});

  ExperimentConfig c;
  c.source = source_name;
  c.text = text;
  const std::filesystem::path base = c.source.has_parent_path() ? c.source.parent_path() : ".";

  if (!root["problem"]) ps.fail(root, "problem", "missing section");
  parse_problem(ps, root["problem"], c);
  if (root["grid"]) parse_grid(ps, root["grid"], c);
  if (const auto pr = root["protocol"]) {
    c.protocols.clear();
    const auto one = [&](const YAML::Node& n, const std::string& path) {
      const Protocol v = ps.word(n, path, {"ramsey", "optimize"}) == "ramsey" ? Protocol::Ramsey
                                                                            : Protocol::Optimize;
      for (Protocol q : c.protocols) {
        if (q == v) ps.fail(n, path, "protocol listed twice");
      }
      c.protocols.push_back(v);
    };
    if (pr.IsSequence()) {
      if (pr.size() == 0) ps.fail(pr, "protocol", "list must not be empty");
      for (std::size_t i = 0; i < pr.size(); ++i) one(pr[i], "protocol[" + std::to_string(i) + "]");
    } else {
      one(pr, "protocol");
    }
  }
  if (root["krotov"]) parse_krotov(ps, root["krotov"], c);
  for (Protocol q : c.protocols) {
    if (q == Protocol::Optimize && !c.has_krotov) {
      ps.fail(root["protocol"], "protocol", "optimize needs a krotov section");
    }
  }
  if (const auto f = root["fields"]) {
    ps.check_keys(f, "fields", {"x", "y", "z"});
    for (const char* name : {"x", "y", "z"}) {
      if (f[name]) c.field_files[name[0] - 'x'] = ps.file(f[name], std::string("fields.") + name, base);
    }
  }
  if (const auto q = root["qfi"]) {
    ps.check_keys(q, "qfi", {"splitting"});
    if (q["splitting"]) c.qfi_splitting = ps.positive(q["splitting"], "qfi.splitting");
  }
  if (const auto f = root["fit"]) {
    ps.check_keys(f, "fit", {"table", "after_sweep"});
    if (f["table"]) c.fit_table = ps.file(f["table"], "fit.table", base);
    if (f["after_sweep"]) c.fit_after_sweep = ps.boolean(f["after_sweep"], "fit.after_sweep");
    if (c.noise.kind == NoiseKind::None) ps.fail(f, "fit", "fitting needs a noise kind");
  }
  if (const auto o = root["outputs"]) {
    ps.check_keys(o, "outputs", {"directory"});
    if (o["directory"]) c.output_dir = ps.file(o["directory"], "outputs.directory", {});
  }
  if (const auto s = root["seed"]) c.seed = static_cast<std::uint64_t>(ps.integer(s, "seed", 0));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace qdisc::app

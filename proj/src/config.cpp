#include "plab/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "plab/errors.hpp"
#include "plab/gdharness.hpp"
#include "plab/perl.hpp"
#include "plab/pwl.hpp"

namespace plab::cli {

bool is_experiment(std::string_view name) {
  return std::find(std::begin(kExperiments), std::end(kExperiments), name) != std::end(kExperiments);
}

nn::TrainConfig TrainOptions::to_train_config() const {
  nn::TrainConfig cfg;
  cfg.learning_rate = learning_rate;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.optimizer = nn::parse_optimizer(optimizer);
  cfg.final_lr_fraction = final_lr_fraction;
  return cfg;
}

namespace {

void check_train(const TrainOptions& t, const char* where) {
  if (!(t.learning_rate > 0.0) || t.batch_size < 1) {
    throw ArgError(std::string(where) + ": learning_rate and batch_size must be > 0");
  }
  if (!(t.final_lr_fraction > 0.0 && t.final_lr_fraction <= 1.0)) {
    throw ArgError(std::string(where) + ": final_lr_fraction must lie in (0, 1]");
  }
  nn::parse_optimizer(t.optimizer);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!is_experiment(experiment)) throw NameError("unknown experiment '" + experiment + "'");
  if (output_dir.empty()) throw ArgError("output_dir must not be empty");

  if (pieces.eps.empty()) throw ArgError("pieces.eps must not be empty");
  for (double e : pieces.eps) {
    if (!(e > 0.0)) throw ArgError("pieces.eps values must be > 0");
  }
  pwl::parse_metric(pieces.metric);
  if (pieces.grid < 8) throw ArgError("pieces.grid must be >= 8");

  gd::parse_stop_criterion(converge.stop_on);
  if (!(converge.tol > 0.0) || converge.max_iters < 1) throw ArgError("converge.tol and max_iters must be > 0");
  if (converge.eta && !(*converge.eta > 0.0)) throw ArgError("converge.eta must be > 0");
  if (converge.grid_count < 1 || !(converge.grid_lo <= converge.grid_hi)) {
    throw ArgError("converge grid needs count >= 1 and lo <= hi");
  }

  if (errors.sizes.empty() || errors.seeds < 1 || errors.n_test < 1) {
    throw ArgError("errors needs sizes, seeds >= 1 and n_test >= 1");
  }
  for (std::size_t n : errors.sizes) {
    if (n < 1) throw ArgError("errors.sizes values must be >= 1");
  }
  for (std::size_t w : errors.hidden) {
    if (w < 1) throw ArgError("errors.hidden widths must be >= 1");
  }
  check_train(errors.train, "errors.train");

  if (!(data.duration > 0.0) || !(data.dt > 0.0)) throw ArgError("data.duration and data.dt must be > 0");
  if (!(data.noise >= 0.0)) throw ArgError("data.noise must be >= 0");
  if (data.window < 1) throw ArgError("data.window must be >= 1");
  traj::SynthConfig synth{data.duration, data.dt, data.leader, data.idm, data.noise, 0};
  synth.validate();
  physics.validate();

  if (sweep.seeds < 1 || sweep.hidden_sizes.empty() || sweep.train_sizes.empty() || sweep.train_size < 1 ||
      sweep.hidden < 1 || sweep.layers < 1 || sweep.val_size < 1 || sweep.test_size < 1 || sweep.curve_epochs < 1) {
    throw ArgError("sweep sizes and counts must be >= 1");
  }
  for (std::size_t h : sweep.hidden_sizes) {
    if (h < 1) throw ArgError("sweep.hidden_sizes values must be >= 1");
  }
  for (std::size_t n : sweep.train_sizes) {
    if (n < 1) throw ArgError("sweep.train_sizes values must be >= 1");
  }
  perl::parse_ci_method(sweep.ci_method);
  if (!(sweep.ci_level > 0.0 && sweep.ci_level < 1.0)) throw ArgError("sweep.ci_level must lie in (0, 1)");
  check_train(sweep.train, "sweep.train");

  if (calibrate.samples < 1) throw ArgError("calibrate.samples must be >= 1");
  calibrate.ranges.validate();
  if (!(calibrate.delta > 0.0)) throw ArgError("calibrate.delta must be > 0");
}

// ------------------------------------------------------------- parsing ----

namespace {

std::size_t line_of(const YAML::Node& node) { return static_cast<std::size_t>(node.Mark().line) + 1; }

template <typename T>
T convert(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigParseError("bad value for '" + path + "'", line_of(node));
  }
}

class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigParseError("'" + (path_.empty() ? std::string("<root>") : path_) + "' must be a mapping",
                             line_of(node_));
    }
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    if (!node_.IsDefined() || node_.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    return node_[key];
  }

  bool has(const std::string& key) const {
    return node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull();
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const YAML::Node n = child(key);
    if (n.IsDefined() && !n.IsNull()) out = convert<T>(n, key_path(key));
  }

  template <typename T>
  void get_list(const std::string& key, std::vector<T>& out) {
    const YAML::Node n = child(key);
    if (!n.IsDefined() || n.IsNull()) return;
    if (!n.IsSequence()) throw ConfigParseError("'" + key_path(key) + "' must be a list", line_of(n));
    std::vector<T> values;
    for (const auto& item : n) values.push_back(convert<T>(item, key_path(key)));
    out = std::move(values);
  }

  void get_optional(const std::string& key, std::optional<double>& out) {
    const YAML::Node n = child(key);
    if (!n.IsDefined() || n.IsNull()) return;
    if (n.IsScalar() && n.Scalar() == "auto") {
      out.reset();
      return;
    }
    out = convert<double>(n, key_path(key));
  }

  Section sub(const std::string& key) { return Section(child(key), key_path(key)); }

  // Raises UnknownKeyError for any key nobody asked for.
  void finish() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) throw UnknownKeyError(key_path(key));
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_train(Section s, TrainOptions& t) {
  s.get("learning_rate", t.learning_rate);
  s.get("epochs", t.epochs);
  s.get("batch_size", t.batch_size);
  s.get("optimizer", t.optimizer);
  s.get("final_lr_fraction", t.final_lr_fraction);
  s.finish();
}

void read_idm(Section s, physics::IDMParams& p) {
  s.get("v0", p.v0);
  s.get("a_max", p.a_max);
  s.get("b", p.b);
  s.get("s0", p.s0);
  s.get("T_headway", p.T_headway);
  s.get("delta", p.delta);
  s.finish();
}

void read_leader(Section s, traj::LeaderProfile& leader) {
  std::string type;
  if (std::holds_alternative<traj::ConstantProfile>(leader)) type = "constant";
  if (std::holds_alternative<traj::SineProfile>(leader)) type = "sine";
  if (std::holds_alternative<traj::RampProfile>(leader)) type = "ramps";
  if (std::holds_alternative<traj::StopAndGoProfile>(leader)) type = "stop_and_go";
  std::string requested = type;
  s.get("type", requested);
  if (requested != type) {
    if (requested == "constant") leader = traj::ConstantProfile{};
    else if (requested == "sine") leader = traj::SineProfile{};
    else if (requested == "ramps") leader = traj::RampProfile{};
    else if (requested == "stop_and_go") leader = traj::StopAndGoProfile{};
    else throw ArgError("unknown leader type '" + requested + "' (constant, sine, ramps, stop_and_go)");
  }
  if (auto* c = std::get_if<traj::ConstantProfile>(&leader)) {
    s.get("v", c->v);
  } else if (auto* w = std::get_if<traj::SineProfile>(&leader)) {
    s.get("mean", w->mean);
    s.get("amplitude", w->amplitude);
    s.get("period", w->period);
  } else if (auto* r = std::get_if<traj::RampProfile>(&leader)) {
    const YAML::Node knots = s.child("knots");
    if (knots.IsDefined() && !knots.IsNull()) {
      if (!knots.IsSequence()) throw ConfigParseError("'data.leader.knots' must be a list", line_of(knots));
      r->knots.clear();
      for (const auto& k : knots) {
        if (!k.IsSequence() || k.size() != 2) {
          throw ConfigParseError("each ramp knot must be [t, v]", line_of(k));
        }
        r->knots.emplace_back(convert<double>(k[0], "data.leader.knots"), convert<double>(k[1], "data.leader.knots"));
      }
    }
  } else if (auto* g = std::get_if<traj::StopAndGoProfile>(&leader)) {
    s.get("v_start", g->v_start);
    s.get("v_lo", g->v_lo);
    s.get("v_hi", g->v_hi);
    s.get("segment_lo", g->segment_lo);
    s.get("segment_hi", g->segment_hi);
    s.get("seed", g->seed);
  }
  s.finish();
}

void read_range(Section& s, const std::string& key, physics::Range& r) {
  const YAML::Node n = s.child(key);
  if (!n.IsDefined() || n.IsNull()) return;
  if (!n.IsSequence() || n.size() != 2) {
    throw ConfigParseError("'" + s.key_path(key) + "' must be [lo, hi]", line_of(n));
  }
  r.lo = convert<double>(n[0], s.key_path(key));
  r.hi = convert<double>(n[1], s.key_path(key));
}

ExperimentConfig from_node(const YAML::Node& root) {
  ExperimentConfig cfg;
  Section top(root, "");
  top.get("experiment", cfg.experiment);
  top.get("seed", cfg.seed);
  top.get("output_dir", cfg.output_dir);
  std::string version;
  top.get("tool_version", version);

  {
    Section s = top.sub("pieces");
    s.get_list("eps", cfg.pieces.eps);
    s.get("metric", cfg.pieces.metric);
    s.get("grid", cfg.pieces.grid);
    s.finish();
  }
  {
    Section s = top.sub("converge");
    s.get("x0", cfg.converge.x0);
    s.get("tol", cfg.converge.tol);
    s.get("max_iters", cfg.converge.max_iters);
    s.get_optional("eta", cfg.converge.eta);
    s.get("stop_on", cfg.converge.stop_on);
    s.get("grid_lo", cfg.converge.grid_lo);
    s.get("grid_hi", cfg.converge.grid_hi);
    s.get("grid_count", cfg.converge.grid_count);
    s.finish();
  }
  {
    Section s = top.sub("errors");
    s.get_list("sizes", cfg.errors.sizes);
    s.get("seeds", cfg.errors.seeds);
    s.get("n_test", cfg.errors.n_test);
    s.get_list("hidden", cfg.errors.hidden);
    s.get("min_steps", cfg.errors.min_steps);
    read_train(s.sub("train"), cfg.errors.train);
    s.finish();
  }
  {
    Section s = top.sub("data");
    s.get_list("csv", cfg.data.csv);
    s.get("duration", cfg.data.duration);
    s.get("dt", cfg.data.dt);
    read_leader(s.sub("leader"), cfg.data.leader);
    read_idm(s.sub("idm"), cfg.data.idm);
    s.get("noise", cfg.data.noise);
    s.get("window", cfg.data.window);
    s.finish();
  }
  read_idm(top.sub("physics"), cfg.physics);
  {
    Section s = top.sub("sweep");
    s.get("seeds", cfg.sweep.seeds);
    s.get_list("hidden_sizes", cfg.sweep.hidden_sizes);
    s.get_list("train_sizes", cfg.sweep.train_sizes);
    s.get("train_size", cfg.sweep.train_size);
    s.get("hidden", cfg.sweep.hidden);
    s.get("layers", cfg.sweep.layers);
    s.get("val_size", cfg.sweep.val_size);
    s.get("test_size", cfg.sweep.test_size);
    s.get("ci_method", cfg.sweep.ci_method);
    s.get("ci_level", cfg.sweep.ci_level);
    s.get("curve_epochs", cfg.sweep.curve_epochs);
    read_train(s.sub("train"), cfg.sweep.train);
    s.finish();
  }
  {
    Section s = top.sub("calibrate");
    s.get("samples", cfg.calibrate.samples);
    s.get("delta", cfg.calibrate.delta);
    Section r = s.sub("ranges");
    read_range(r, "v0", cfg.calibrate.ranges.v0);
    read_range(r, "a_max", cfg.calibrate.ranges.a_max);
    read_range(r, "b", cfg.calibrate.ranges.b);
    read_range(r, "s0", cfg.calibrate.ranges.s0);
    read_range(r, "T_headway", cfg.calibrate.ranges.T_headway);
    r.finish();
    s.finish();
  }
  {
    Section s = top.sub("bounds");
    s.get("calculator", cfg.bounds.calculator);
    s.get("c", cfg.bounds.c);
    s.get("eps", cfg.bounds.eps);
    s.get("delta", cfg.bounds.delta);
    s.get("n", cfg.bounds.n);
    s.get("t", cfg.bounds.t);
    s.get("C", cfg.bounds.C);
    s.get("L", cfg.bounds.L);
    s.get("rad", cfg.bounds.rad);
    s.get("clamp", cfg.bounds.clamp);
    s.finish();
  }
  top.finish();
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigParseError(e.msg, static_cast<std::size_t>(e.mark.line) + 1);
  }
  ExperimentConfig cfg = from_node(root);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// ------------------------------------------------------------- dumping ----

namespace {

std::string num(double x) { return fmt::format("{}", x); }

void emit_list(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << num(x);
  out << YAML::EndSeq;
}

void emit_list(YAML::Emitter& out, const std::vector<std::size_t>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (std::size_t x : v) out << x;
  out << YAML::EndSeq;
}

void emit_train(YAML::Emitter& out, const TrainOptions& t) {
  out << YAML::BeginMap;
  out << YAML::Key << "learning_rate" << YAML::Value << num(t.learning_rate);
  out << YAML::Key << "epochs" << YAML::Value << t.epochs;
  out << YAML::Key << "batch_size" << YAML::Value << t.batch_size;
  out << YAML::Key << "optimizer" << YAML::Value << t.optimizer;
  out << YAML::Key << "final_lr_fraction" << YAML::Value << num(t.final_lr_fraction);
  out << YAML::EndMap;
}

void emit_idm(YAML::Emitter& out, const physics::IDMParams& p) {
  out << YAML::BeginMap;
  out << YAML::Key << "v0" << YAML::Value << num(p.v0);
  out << YAML::Key << "a_max" << YAML::Value << num(p.a_max);
  out << YAML::Key << "b" << YAML::Value << num(p.b);
  out << YAML::Key << "s0" << YAML::Value << num(p.s0);
  out << YAML::Key << "T_headway" << YAML::Value << num(p.T_headway);
  out << YAML::Key << "delta" << YAML::Value << num(p.delta);
  out << YAML::EndMap;
}

void emit_leader(YAML::Emitter& out, const traj::LeaderProfile& leader) {
  out << YAML::BeginMap;
  if (const auto* c = std::get_if<traj::ConstantProfile>(&leader)) {
    out << YAML::Key << "type" << YAML::Value << "constant";
    out << YAML::Key << "v" << YAML::Value << num(c->v);
  } else if (const auto* w = std::get_if<traj::SineProfile>(&leader)) {
    out << YAML::Key << "type" << YAML::Value << "sine";
    out << YAML::Key << "mean" << YAML::Value << num(w->mean);
    out << YAML::Key << "amplitude" << YAML::Value << num(w->amplitude);
    out << YAML::Key << "period" << YAML::Value << num(w->period);
  } else if (const auto* r = std::get_if<traj::RampProfile>(&leader)) {
    out << YAML::Key << "type" << YAML::Value << "ramps";
    out << YAML::Key << "knots" << YAML::Value << YAML::BeginSeq;
    for (const auto& [t, v] : r->knots) out << YAML::Flow << YAML::BeginSeq << num(t) << num(v) << YAML::EndSeq;
    out << YAML::EndSeq;
  } else if (const auto* g = std::get_if<traj::StopAndGoProfile>(&leader)) {
    out << YAML::Key << "type" << YAML::Value << "stop_and_go";
    out << YAML::Key << "v_start" << YAML::Value << num(g->v_start);
    out << YAML::Key << "v_lo" << YAML::Value << num(g->v_lo);
    out << YAML::Key << "v_hi" << YAML::Value << num(g->v_hi);
    out << YAML::Key << "segment_lo" << YAML::Value << num(g->segment_lo);
    out << YAML::Key << "segment_hi" << YAML::Value << num(g->segment_hi);
    out << YAML::Key << "seed" << YAML::Value << g->seed;
  }
  out << YAML::EndMap;
}

void emit_range(YAML::Emitter& out, const char* key, const physics::Range& r) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << num(r.lo) << num(r.hi) << YAML::EndSeq;
}

}  // namespace

std::string dump_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "tool_version" << YAML::Value << std::string(kToolVersion);
  out << YAML::Key << "experiment" << YAML::Value << c.experiment;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;

  out << YAML::Key << "pieces" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eps" << YAML::Value;
  emit_list(out, c.pieces.eps);
  out << YAML::Key << "metric" << YAML::Value << c.pieces.metric;
  out << YAML::Key << "grid" << YAML::Value << c.pieces.grid;
  out << YAML::EndMap;

  out << YAML::Key << "converge" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "x0" << YAML::Value << num(c.converge.x0);
  out << YAML::Key << "tol" << YAML::Value << num(c.converge.tol);
  out << YAML::Key << "max_iters" << YAML::Value << c.converge.max_iters;
  out << YAML::Key << "eta" << YAML::Value << (c.converge.eta ? num(*c.converge.eta) : std::string("auto"));
  out << YAML::Key << "stop_on" << YAML::Value << c.converge.stop_on;
  out << YAML::Key << "grid_lo" << YAML::Value << num(c.converge.grid_lo);
  out << YAML::Key << "grid_hi" << YAML::Value << num(c.converge.grid_hi);
  out << YAML::Key << "grid_count" << YAML::Value << c.converge.grid_count;
  out << YAML::EndMap;

  out << YAML::Key << "errors" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sizes" << YAML::Value;
  emit_list(out, c.errors.sizes);
  out << YAML::Key << "seeds" << YAML::Value << c.errors.seeds;
  out << YAML::Key << "n_test" << YAML::Value << c.errors.n_test;
  out << YAML::Key << "hidden" << YAML::Value;
  emit_list(out, c.errors.hidden);
  out << YAML::Key << "min_steps" << YAML::Value << c.errors.min_steps;
  out << YAML::Key << "train" << YAML::Value;
  emit_train(out, c.errors.train);
  out << YAML::EndMap;

  out << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "csv" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& p : c.data.csv) out << p;
  out << YAML::EndSeq;
  out << YAML::Key << "duration" << YAML::Value << num(c.data.duration);
  out << YAML::Key << "dt" << YAML::Value << num(c.data.dt);
  out << YAML::Key << "leader" << YAML::Value;
  emit_leader(out, c.data.leader);
  out << YAML::Key << "idm" << YAML::Value;
  emit_idm(out, c.data.idm);
  out << YAML::Key << "noise" << YAML::Value << num(c.data.noise);
  out << YAML::Key << "window" << YAML::Value << c.data.window;
  out << YAML::EndMap;

  out << YAML::Key << "physics" << YAML::Value;
  emit_idm(out, c.physics);

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "seeds" << YAML::Value << c.sweep.seeds;
  out << YAML::Key << "hidden_sizes" << YAML::Value;
  emit_list(out, c.sweep.hidden_sizes);
  out << YAML::Key << "train_sizes" << YAML::Value;
  emit_list(out, c.sweep.train_sizes);
  out << YAML::Key << "train_size" << YAML::Value << c.sweep.train_size;
  out << YAML::Key << "hidden" << YAML::Value << c.sweep.hidden;
  out << YAML::Key << "layers" << YAML::Value << c.sweep.layers;
  out << YAML::Key << "val_size" << YAML::Value << c.sweep.val_size;
  out << YAML::Key << "test_size" << YAML::Value << c.sweep.test_size;
  out << YAML::Key << "ci_method" << YAML::Value << c.sweep.ci_method;
  out << YAML::Key << "ci_level" << YAML::Value << num(c.sweep.ci_level);
  out << YAML::Key << "curve_epochs" << YAML::Value << c.sweep.curve_epochs;
  out << YAML::Key << "train" << YAML::Value;
  emit_train(out, c.sweep.train);
  out << YAML::EndMap;

  out << YAML::Key << "calibrate" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "samples" << YAML::Value << c.calibrate.samples;
  out << YAML::Key << "delta" << YAML::Value << num(c.calibrate.delta);
  out << YAML::Key << "ranges" << YAML::Value << YAML::BeginMap;
  emit_range(out, "v0", c.calibrate.ranges.v0);
  emit_range(out, "a_max", c.calibrate.ranges.a_max);
  emit_range(out, "b", c.calibrate.ranges.b);
  emit_range(out, "s0", c.calibrate.ranges.s0);
  emit_range(out, "T_headway", c.calibrate.ranges.T_headway);
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "calculator" << YAML::Value << c.bounds.calculator;
  out << YAML::Key << "c" << YAML::Value << num(c.bounds.c);
  out << YAML::Key << "eps" << YAML::Value << num(c.bounds.eps);
  out << YAML::Key << "delta" << YAML::Value << num(c.bounds.delta);
  out << YAML::Key << "n" << YAML::Value << c.bounds.n;
  out << YAML::Key << "t" << YAML::Value << num(c.bounds.t);
  out << YAML::Key << "C" << YAML::Value << num(c.bounds.C);
  out << YAML::Key << "L" << YAML::Value << num(c.bounds.L);
  out << YAML::Key << "rad" << YAML::Value << num(c.bounds.rad);
  out << YAML::Key << "clamp" << YAML::Value << c.bounds.clamp;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace plab::cli

#include "softloc/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "softloc/error.hpp"
#include "softloc/random.hpp"

namespace softloc {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& what) const {
    std::string where = source_;
    if (!mark.is_null()) {
      where += ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
    }
    throw InvalidConfigError(where + ": " + what);
  }

  void only_keys(const YAML::Node& map, std::initializer_list<const char*> allowed,
                 const std::string& section) const {
    if (!map.IsMap()) fail(map.Mark(), "'" + section + "' must be a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) {
        fail(kv.first.Mark(), "unknown key '" + key + "' in " + section);
      }
    }
  }

  template <typename T>
  void get(const YAML::Node& map, const char* key, T& out) const {
    const YAML::Node v = map[key];
    if (!v) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v.Mark(), std::string("bad value for '") + key + "'");
    }
  }

  void get_count(const YAML::Node& map, const char* key, std::size_t& out) const {
    const YAML::Node v = map[key];
    if (!v) return;
    long long parsed = 0;
    try {
      parsed = v.as<long long>();
    } catch (const YAML::Exception&) {
      fail(v.Mark(), std::string("'") + key + "' must be an integer");
    }
    if (parsed < 0) fail(v.Mark(), std::string("'") + key + "' must be non-negative");
    out = static_cast<std::size_t>(parsed);
  }

  /// Runs a validation callback, reattributing failures to `mark`.
  template <typename F>
  void check(const YAML::Mark& mark, F&& f) const {
    try {
      f();
    } catch (const InvalidConfigError& e) {
      fail(mark, e.what());
    } catch (const ValidationError& e) {
      fail(mark, e.what());
    }
  }

 private:
  std::string source_;
};

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

YAML::Mark mark_of(const YAML::Node& root, const char* section) {
  const YAML::Node n = root[section];
  return n ? n.Mark() : root.Mark();
}

}  // namespace

void ExperimentConfig::validate() const {
  RoomGrid probe{room_sides.lo, room_sides.lo, rows, cols};
  probe.validate();
  if (!(room_sides.lo > 0.0) || !(room_sides.hi >= room_sides.lo)) {
    throw InvalidConfigError("room side range must satisfy 0 < min_side <= max_side");
  }
  if (train_rooms == 0 || test_rooms == 0) throw InvalidConfigError("need at least one train and one test room");
  sim.validate_for(rows * cols);
  if (train_scenes == 0 || valid_scenes == 0 || test_scenes == 0) {
    throw InvalidConfigError("every split needs at least one scene");
  }
  train.validate();
  if (ub_samples == 0) throw InvalidConfigError("evaluation.ub_samples must be >= 1");
}

std::uint64_t ExperimentConfig::sub_seed(std::string_view tag) const { return derive_seed(seed, tag); }

TrainConfig ExperimentConfig::training() const {
  TrainConfig t = train;
  t.seed = sub_seed("train");
  return t;
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    rd.fail(e.mark, e.msg);
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  rd.only_keys(root,
               {"version", "seed", "output_dir", "grid", "rooms", "simulator", "splits", "training",
                "evaluation"},
               "config");

  int version = kConfigVersion;
  rd.get(root, "version", version);
  if (version != kConfigVersion) {
    rd.fail(root["version"].Mark(), "unsupported config version " + std::to_string(version));
  }
  rd.get(root, "seed", cfg.seed);
  rd.get(root, "output_dir", cfg.output_dir);

  if (const auto g = root["grid"]) {
    rd.only_keys(g, {"rows", "cols"}, "grid");
    rd.get_count(g, "rows", cfg.rows);
    rd.get_count(g, "cols", cfg.cols);
  }
  rd.check(mark_of(root, "grid"), [&] { RoomGrid{1.0, 1.0, cfg.rows, cfg.cols}.validate(); });

  if (const auto r = root["rooms"]) {
    rd.only_keys(r, {"min_side", "max_side", "train_rooms", "test_rooms"}, "rooms");
    rd.get(r, "min_side", cfg.room_sides.lo);
    rd.get(r, "max_side", cfg.room_sides.hi);
    rd.get_count(r, "train_rooms", cfg.train_rooms);
    rd.get_count(r, "test_rooms", cfg.test_rooms);
  }
  rd.check(mark_of(root, "rooms"), [&] {
    if (!(cfg.room_sides.lo > 0.0) || !(cfg.room_sides.hi >= cfg.room_sides.lo)) {
      throw InvalidConfigError("room side range must satisfy 0 < min_side <= max_side");
    }
    if (cfg.train_rooms == 0 || cfg.test_rooms == 0) {
      throw InvalidConfigError("need at least one train and one test room");
    }
  });

  if (const auto s = root["simulator"]) {
    rd.only_keys(s, {"node_count", "feature_dim", "noise_std", "reverb_blur", "speed_of_sound"},
                 "simulator");
    rd.get_count(s, "node_count", cfg.sim.node_count);
    rd.get_count(s, "feature_dim", cfg.sim.feature_dim);
    rd.get(s, "noise_std", cfg.sim.noise_std);
    rd.get(s, "reverb_blur", cfg.sim.reverb_blur);
    rd.get(s, "speed_of_sound", cfg.sim.speed_of_sound);
  }
  rd.check(mark_of(root, "simulator"), [&] { cfg.sim.validate_for(cfg.rows * cfg.cols); });

  if (const auto s = root["splits"]) {
    rd.only_keys(s, {"train", "valid", "test"}, "splits");
    rd.get_count(s, "train", cfg.train_scenes);
    rd.get_count(s, "valid", cfg.valid_scenes);
    rd.get_count(s, "test", cfg.test_scenes);
  }
  rd.check(mark_of(root, "splits"), [&] {
    if (cfg.train_scenes == 0) throw InvalidConfigError("splits.train must be >= 1");
  });

  if (const auto t = root["training"]) {
    rd.only_keys(t,
                 {"strategy", "alpha_s", "alpha_d", "epsilon_init", "epochs", "batch_size", "hidden",
                  "learning_rate", "beta1", "beta2", "adam_epsilon"},
                 "training");
    if (const auto s = t["strategy"]) {
      std::string name;
      rd.get(t, "strategy", name);
      rd.check(s.Mark(), [&] { cfg.train.strategy = parse_strategy(name); });
    }
    rd.get(t, "alpha_s", cfg.train.alpha_s);
    rd.get(t, "alpha_d", cfg.train.alpha_d);
    rd.get(t, "epsilon_init", cfg.train.epsilon_init);
    rd.get_count(t, "epochs", cfg.train.epochs);
    rd.get_count(t, "batch_size", cfg.train.batch_size);
    rd.get_count(t, "hidden", cfg.train.hidden);
    rd.get(t, "learning_rate", cfg.train.adam.learning_rate);
    rd.get(t, "beta1", cfg.train.adam.beta1);
    rd.get(t, "beta2", cfg.train.adam.beta2);
    rd.get(t, "adam_epsilon", cfg.train.adam.epsilon);
  }
  rd.check(mark_of(root, "training"), [&] { cfg.train.validate(); });

  if (const auto e = root["evaluation"]) {
    rd.only_keys(e, {"ub_samples"}, "evaluation");
    rd.get_count(e, "ub_samples", cfg.ub_samples);
  }
  rd.check(mark_of(root, "evaluation"), [&] {
    if (cfg.ub_samples == 0) throw InvalidConfigError("ub_samples must be >= 1");
  });
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << kConfigVersion;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output_dir" << YAML::Value << YAML::DoubleQuoted << c.output_dir;

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rows" << YAML::Value << c.rows;
  out << YAML::Key << "cols" << YAML::Value << c.cols;
  out << YAML::EndMap;

  out << YAML::Key << "rooms" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "min_side" << YAML::Value << num(c.room_sides.lo);
  out << YAML::Key << "max_side" << YAML::Value << num(c.room_sides.hi);
  out << YAML::Key << "train_rooms" << YAML::Value << c.train_rooms;
  out << YAML::Key << "test_rooms" << YAML::Value << c.test_rooms;
  out << YAML::EndMap;

  out << YAML::Key << "simulator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "node_count" << YAML::Value << c.sim.node_count;
  out << YAML::Key << "feature_dim" << YAML::Value << c.sim.feature_dim;
  out << YAML::Key << "noise_std" << YAML::Value << num(c.sim.noise_std);
  out << YAML::Key << "reverb_blur" << YAML::Value << num(c.sim.reverb_blur);
  out << YAML::Key << "speed_of_sound" << YAML::Value << num(c.sim.speed_of_sound);
  out << YAML::EndMap;

  out << YAML::Key << "splits" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "train" << YAML::Value << c.train_scenes;
  out << YAML::Key << "valid" << YAML::Value << c.valid_scenes;
  out << YAML::Key << "test" << YAML::Value << c.test_scenes;
  out << YAML::EndMap;

  out << YAML::Key << "training" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "strategy" << YAML::Value << std::string(to_string(c.train.strategy));
  out << YAML::Key << "alpha_s" << YAML::Value << num(c.train.alpha_s);
  out << YAML::Key << "alpha_d" << YAML::Value << num(c.train.alpha_d);
  out << YAML::Key << "epsilon_init" << YAML::Value << num(c.train.epsilon_init);
  out << YAML::Key << "epochs" << YAML::Value << c.train.epochs;
  out << YAML::Key << "batch_size" << YAML::Value << c.train.batch_size;
  out << YAML::Key << "hidden" << YAML::Value << c.train.hidden;
  out << YAML::Key << "learning_rate" << YAML::Value << num(c.train.adam.learning_rate);
  out << YAML::Key << "beta1" << YAML::Value << num(c.train.adam.beta1);
  out << YAML::Key << "beta2" << YAML::Value << num(c.train.adam.beta2);
  out << YAML::Key << "adam_epsilon" << YAML::Value << num(c.train.adam.epsilon);
  out << YAML::EndMap;

  out << YAML::Key << "evaluation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ub_samples" << YAML::Value << c.ub_samples;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  ExperimentConfig keyed = cfg;
  keyed.output_dir.clear();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_config(keyed))));
  return buf;
}

}  // namespace softloc

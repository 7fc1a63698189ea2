#include "softloc/evaluation.hpp"

#include <cstdio>
#include <map>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "softloc/codebook.hpp"
#include "softloc/error.hpp"
#include "softloc/random.hpp"

namespace softloc {

namespace {

void check_lengths(std::size_t predictions, std::size_t scenes) {
  if (predictions != scenes) {
    throw ShapeMismatchError(std::to_string(predictions) + " predictions for " +
                             std::to_string(scenes) + " scenes");
  }
  if (scenes == 0) throw EmptyInputError("metrics need at least one scene");
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::uint64_t ub_seed_for_room(std::uint32_t room_id) {
  return derive_seed(derive_seed(0x75622d6d6165ULL, "ub-mae"), room_id);
}

AreaIndex predict(const ClassifierParams& params, const Scene& scene) {
  return argmax_class(forward(params, encode_model_input(scene)).probs);
}

std::vector<AreaIndex> predict_all(const ClassifierParams& params, const Dataset& data) {
  std::vector<AreaIndex> out;
  out.reserve(data.scenes.size());
  ForwardTrace trace;
  for (const auto& scene : data.scenes) {
    forward(params, encode_model_input(scene), trace);
    out.push_back(argmax_class(trace.probs));
  }
  return out;
}

double mae(std::span<const AreaIndex> predictions, std::span<const Scene> scenes) {
  check_lengths(predictions.size(), scenes.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    sum += distance(scenes[i].source_point, area_center(scenes[i].grid, predictions[i]));
  }
  return sum / static_cast<double>(scenes.size());
}

double acc(std::span<const AreaIndex> predictions, std::span<const Scene> scenes) {
  check_lengths(predictions.size(), scenes.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (predictions[i] == scenes[i].source_area) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scenes.size());
}

EvalReport evaluate_predictions(std::span<const AreaIndex> predictions, const Dataset& test,
                                std::string strategy, std::size_t ub_samples) {
  check_lengths(predictions.size(), test.scenes.size());
  EvalReport report;
  report.strategy = std::move(strategy);

  std::map<std::uint32_t, std::vector<std::size_t>> by_room;
  for (std::size_t i = 0; i < test.scenes.size(); ++i) by_room[test.scenes[i].room_id].push_back(i);

  double ub_weighted = 0.0;
  for (const auto& [room, indices] : by_room) {
    std::vector<AreaIndex> preds;
    std::vector<Scene> scenes;
    preds.reserve(indices.size());
    scenes.reserve(indices.size());
    for (auto i : indices) {
      preds.push_back(predictions[i]);
      scenes.push_back(test.scenes[i]);
    }
    RoomMetrics m;
    m.room_id = room;
    m.count = indices.size();
    m.mae = mae(preds, scenes);
    m.acc = acc(preds, scenes);
    m.ub_mae = quantization_upper_bound(test.grids.at(room), ub_samples, ub_seed_for_room(room));
    m.learning_error = learning_error(m.mae, m.ub_mae);
    ub_weighted += m.ub_mae * static_cast<double>(m.count);
    report.rooms.push_back(m);
  }

  RoomMetrics& agg = report.aggregate;
  agg.count = test.scenes.size();
  agg.mae = mae(predictions, test.scenes);
  agg.acc = acc(predictions, test.scenes);
  agg.ub_mae = ub_weighted / static_cast<double>(agg.count);
  agg.learning_error = learning_error(agg.mae, agg.ub_mae);
  return report;
}

EvalReport evaluate(const ClassifierParams& params, const Dataset& test, std::string strategy,
                    std::size_t ub_samples) {
  if (params.shape().classes != test.area_count() ||
      params.shape().feature_dim != test.feature_dim) {
    throw ShapeMismatchError("model expects n = " + std::to_string(params.shape().classes) +
                             ", feature_dim = " + std::to_string(params.shape().feature_dim) +
                             "; dataset has n = " + std::to_string(test.area_count()) +
                             ", feature_dim = " + std::to_string(test.feature_dim));
  }
  return evaluate_predictions(predict_all(params, test), test, std::move(strategy), ub_samples);
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  out << "strategy\troom\tscenes\tmae_m\tacc_pct\tub_mae_m\tlearning_error_m\n";
  auto row = [&](const std::string& room, const RoomMetrics& m) {
    out << report.strategy << '\t' << room << '\t' << m.count << '\t' << fmt("%.4f", m.mae) << '\t'
        << fmt("%.1f", 100.0 * m.acc) << '\t' << fmt("%.4f", m.ub_mae) << '\t'
        << fmt("%.4f", m.learning_error) << '\n';
  };
  for (const auto& m : report.rooms) row("room" + std::to_string(m.room_id + 1), m);
  row("average", report.aggregate);
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  auto to_json = [](const RoomMetrics& m) {
    return nlohmann::ordered_json{{"scenes", m.count},   {"mae", m.mae},
                                  {"acc", m.acc},        {"ub_mae", m.ub_mae},
                                  {"learning_error", m.learning_error}};
  };
  nlohmann::ordered_json j;
  j["strategy"] = report.strategy;
  auto rooms = nlohmann::ordered_json::array();
  for (const auto& m : report.rooms) {
    auto r = to_json(m);
    r["room"] = m.room_id + 1;
    rooms.push_back(std::move(r));
  }
  j["rooms"] = std::move(rooms);
  j["average"] = to_json(report.aggregate);
  out << j.dump(2) << '\n';
}

}  // namespace softloc

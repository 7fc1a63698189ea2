#include "softloc/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "softloc/error.hpp"
#include "softloc/random.hpp"

namespace softloc {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

nlohmann::ordered_json metrics_json(const RoomMetrics& m) {
  return {{"scenes", m.count}, {"mae", m.mae},       {"acc", m.acc},
          {"ub_mae", m.ub_mae}, {"learning_error", m.learning_error}};
}

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["strategy"] = r.strategy;
  auto rooms = nlohmann::ordered_json::array();
  for (const auto& m : r.rooms) {
    auto room = metrics_json(m);
    room["room"] = m.room_id + 1;
    rooms.push_back(std::move(room));
  }
  j["rooms"] = std::move(rooms);
  j["average"] = metrics_json(r.aggregate);
  return j;
}

const StrategyResult* find(const CompareResult& result, Strategy s) {
  for (const auto& r : result.strategies) {
    if (r.strategy == s) return &r;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(SweepParam p) {
  return p == SweepParam::kAlphaS ? "alpha_s" : "alpha_d";
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "alpha_s") return SweepParam::kAlphaS;
  if (name == "alpha_d") return SweepParam::kAlphaD;
  throw ValidationError("sweep parameter must be alpha_s or alpha_d, got '" + std::string(name) + "'");
}

std::vector<SweepRow> sweep(SweepParam param, std::span<const double> values,
                            const TrainConfig& base, const Splits& data,
                            std::size_t ub_samples) {
  if (values.empty()) throw EmptyInputError("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (double v : values) {
    TrainConfig cfg = base;
    (param == SweepParam::kAlphaS ? cfg.alpha_s : cfg.alpha_d) = v;
    cfg.validate();
    const TrainState state = fit(cfg, data.train, data.valid);
    rows.push_back({v, evaluate(state.params, data.test, std::string(to_string(cfg.strategy)),
                                ub_samples)});
  }
  return rows;
}

void write_sweep_table(std::ostream& out, SweepParam param, std::span<const SweepRow> rows) {
  out << to_string(param) << "\tmae_m\tacc_pct\tlearning_error_m\n";
  for (const auto& r : rows) {
    out << fmt("%g", r.value) << '\t' << fmt("%.4f", r.report.aggregate.mae) << '\t'
        << fmt("%.1f", 100.0 * r.report.aggregate.acc) << '\t'
        << fmt("%.4f", r.report.aggregate.learning_error) << '\n';
  }
}

void write_sweep_json(std::ostream& out, SweepParam param, std::span<const SweepRow> rows) {
  nlohmann::ordered_json j;
  j["param"] = to_string(param);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    auto entry = report_json(r.report);
    entry["value"] = r.value;
    arr.push_back(std::move(entry));
  }
  j["rows"] = std::move(arr);
  out << j.dump(2) << '\n';
}

EvalReport median_report(std::span<const EvalReport> runs, std::string strategy) {
  if (runs.empty()) throw EmptyInputError("median_report needs at least one run");
  EvalReport out;
  out.strategy = std::move(strategy);
  auto combine = [&](auto pick) {
    RoomMetrics m = pick(runs.front());
    std::vector<double> maes, accs;
    for (const auto& r : runs) {
      maes.push_back(pick(r).mae);
      accs.push_back(pick(r).acc);
    }
    m.mae = median(maes);
    m.acc = median(accs);
    m.learning_error = learning_error(m.mae, m.ub_mae);
    return m;
  };
  for (std::size_t i = 0; i < runs.front().rooms.size(); ++i) {
    out.rooms.push_back(combine([i](const EvalReport& r) { return r.rooms.at(i); }));
  }
  out.aggregate = combine([](const EvalReport& r) { return r.aggregate; });
  return out;
}

CompareResult compare(const TrainConfig& base, const Splits& data, std::size_t seeds,
                      std::span<const Strategy> strategies, std::size_t ub_samples) {
  if (seeds == 0) throw ValidationError("compare needs seeds >= 1");
  CompareResult result;
  for (Strategy s : strategies) {
    StrategyResult sr{s, {}, {}};
    for (std::size_t run = 0; run < seeds; ++run) {
      TrainConfig cfg = base;
      cfg.strategy = s;
      cfg.seed = run == 0 ? base.seed : derive_seed(base.seed, run);
      const TrainState state = fit(cfg, data.train, data.valid);
      sr.runs.push_back(evaluate(state.params, data.test, std::string(to_string(s)), ub_samples));
    }
    sr.median = median_report(sr.runs, std::string(to_string(s)));
    result.strategies.push_back(std::move(sr));
  }
  return result;
}

void write_compare_table(std::ostream& out, const CompareResult& result) {
  if (result.strategies.empty()) return;
  out << "method";
  for (const auto& m : result.strategies.front().median.rooms) {
    out << "\troom" << m.room_id + 1 << "_mae\troom" << m.room_id + 1 << "_acc";
  }
  out << "\taverage_mae\taverage_acc\n";
  for (const auto& sr : result.strategies) {
    out << to_string(sr.strategy);
    for (const auto& m : sr.median.rooms) {
      out << '\t' << fmt("%.4f", m.mae) << '\t' << fmt("%.1f", 100.0 * m.acc);
    }
    out << '\t' << fmt("%.4f", sr.median.aggregate.mae) << '\t'
        << fmt("%.1f", 100.0 * sr.median.aggregate.acc) << '\n';
  }
}

void write_learning_error_table(std::ostream& out, const CompareResult& result) {
  const StrategyResult* base = find(result, Strategy::kOneHot);
  const StrategyResult* best = find(result, Strategy::kDslcSslcConst);
  out << "room\tub_mae\tone_hot\tdslc_sslc_const\trelative_reduction_pct\n";
  if (!base || !best) return;
  auto row = [&](const std::string& name, const RoomMetrics& a, const RoomMetrics& b) {
    const double reduction =
        a.learning_error != 0.0 ? 100.0 * (a.learning_error - b.learning_error) / a.learning_error : 0.0;
    out << name << '\t' << fmt("%.4f", a.ub_mae) << '\t' << fmt("%.4f", a.learning_error) << '\t'
        << fmt("%.4f", b.learning_error) << '\t' << fmt("%.2f", reduction) << '\n';
  };
  for (std::size_t i = 0; i < base->median.rooms.size(); ++i) {
    row("room" + std::to_string(base->median.rooms[i].room_id + 1), base->median.rooms[i],
        best->median.rooms.at(i));
  }
  row("average", base->median.aggregate, best->median.aggregate);
}

void write_compare_json(std::ostream& out, const CompareResult& result) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& sr : result.strategies) {
    nlohmann::ordered_json entry;
    entry["strategy"] = to_string(sr.strategy);
    entry["median"] = report_json(sr.median);
    auto runs = nlohmann::ordered_json::array();
    for (const auto& r : sr.runs) runs.push_back(report_json(r));
    entry["runs"] = std::move(runs);
    arr.push_back(std::move(entry));
  }
  j["strategies"] = std::move(arr);
  out << j.dump(2) << '\n';
}

}  // namespace softloc

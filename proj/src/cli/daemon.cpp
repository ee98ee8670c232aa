#include "dmpc/cli/daemon.hpp"

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>

#include "dmpc/cli/format.hpp"
#include "dmpc/mpc.hpp"
#include "json.hpp"

namespace dmpc::cli {

namespace {

struct Record {
  Millis t;
  std::string worker;
  double dl = 0.0;
  double temp = 0.0;
  double illum = 0.0;
};

std::optional<double> finite_number(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) return std::nullopt;
  const double v = it->get<double>();
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<Record> parse_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto t = j.find("t");
  const auto worker = j.find("worker");
  if (t == j.end() || !t->is_string() || worker == j.end()) return std::nullopt;
  Record r;
  const auto when = parse_iso8601(t->get<std::string>());
  if (!when) return std::nullopt;
  r.t = *when;
  if (worker->is_string()) {
    r.worker = worker->get<std::string>();
  } else if (worker->is_number_integer()) {
    r.worker = worker->dump();
  } else {
    return std::nullopt;
  }
  const auto dl = finite_number(j, "dl");
  const auto temp = finite_number(j, "temp_c");
  const auto illum = finite_number(j, "illum_lx");
  if (!dl || !temp || !illum || *dl < kDlMin || *dl > kDlMax) return std::nullopt;
  r.dl = *dl;
  r.temp = *temp;
  r.illum = *illum;
  return r;
}

}  // namespace

DaemonStats run_daemon(const ModelSet& models, const MpcConfig& cfg, const DeParams& de,
                       std::istream& in, std::ostream& out) {
  Controller controller(models, cfg, de);
  StepAggregator aggregator(cfg.num_workers);
  std::unordered_map<std::string, std::size_t> worker_index;
  const auto tau = std::chrono::milliseconds(std::llround(cfg.step_hours * 3.6e6));
  std::optional<Millis> origin;
  std::int64_t window = 0;
  DaemonStats stats;

  auto emit = [&](std::int64_t w) {
    const ControllerOutput res = controller.step(w);
    const nlohmann::json record = {
        {"t", format_iso8601(*origin + tau * (w + 1))},
        {"temp_set_c", res.setpoints.temp},
        {"illum_set_lx", res.setpoints.illum},
        {"feasible", res.feasible},
        {"status", res.status == ControllerStatus::Ok ? "ok" : "stale"}};
    out << record.dump() << '\n';
    ++stats.emitted;
  };
  auto close_window = [&] {
    const bool complete = aggregator.complete();
    StepMeasurement m = aggregator.finish(window);
    if (complete) controller.observe(std::move(m));
    emit(window);
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto rec = parse_record(line);
    if (!rec || (origin && rec->t < *origin)) {
      ++stats.malformed;
      continue;
    }
    if (!origin) origin = rec->t;
    const std::int64_t w = (rec->t - *origin) / tau;
    if (w < window) {
      ++stats.malformed;
      continue;
    }
    auto it = worker_index.find(rec->worker);
    if (it == worker_index.end()) {
      if (worker_index.size() >= cfg.num_workers) {
        ++stats.malformed;
        continue;
      }
      it = worker_index.emplace(rec->worker, worker_index.size()).first;
    }
    if (w > window) {
      close_window();
      for (++window; window < w; ++window) emit(window);
    }
    aggregator.add(it->second, rec->dl, rec->temp, rec->illum);
    ++stats.records;
  }
  if (origin) close_window();
  out.flush();
  return stats;
}

}  // namespace dmpc::cli

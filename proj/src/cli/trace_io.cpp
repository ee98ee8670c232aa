#include "dmpc/cli/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace dmpc::cli {

namespace {

constexpr std::string_view kTraceMagic = "# dmpc-trace 1";

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << origin << ':' << line << ": " << what;
  throw Error(ErrorCode::Schema, msg.str());
}

std::string header_row(std::size_t workers) {
  std::string h = "step,temp_set_c,illum_set_lx,temp_c,illum_lx,penalty,feasible,status,occupied";
  for (std::size_t i = 0; i < workers; ++i) h += ",dl_" + std::to_string(i);
  for (std::size_t i = 0; i < workers; ++i) h += ",effort_" + std::to_string(i);
  return h;
}

double real_cell(std::string_view cell, std::string_view origin, std::size_t line,
                 std::string_view column) {
  const auto v = parse_double(cell);
  if (!v) {
    fail(origin, line,
         std::string(column) + ": expected a number, got '" + std::string(cell) + "'");
  }
  return *v;
}

bool flag_cell(std::string_view cell, std::string_view origin, std::size_t line,
               std::string_view column) {
  if (cell == "1") return true;
  if (cell == "0") return false;
  fail(origin, line, std::string(column) + ": expected 0 or 1, got '" + std::string(cell) + "'");
}

}  // namespace

void write_trace(std::ostream& out, const SimTrace& trace) {
  out << kTraceMagic << '\n'
      << "# mode=" << to_string(trace.mode) << '\n'
      << "# seed=" << trace.seed << '\n'
      << "# workers=" << trace.workers << '\n'
      << "# temp_comfort=" << fmt17(trace.comfort.temp_comfort) << '\n'
      << "# illum_comfort=" << fmt17(trace.comfort.illum_comfort) << '\n'
      << "# p_temp=" << fmt17(trace.comfort.p_temp) << '\n'
      << "# p_illum=" << fmt17(trace.comfort.p_illum) << '\n'
      << "# penalty_cap=" << fmt17(trace.comfort.penalty_cap) << '\n'
      << header_row(trace.workers) << '\n';
  for (const auto& s : trace.steps) {
    out << s.step << ',' << fmt6(s.temp_set) << ',' << fmt6(s.illum_set) << ',' << fmt6(s.temp)
        << ',' << fmt6(s.illum) << ',' << fmt6(s.penalty) << ',' << (s.feasible ? 1 : 0) << ','
        << (s.stale ? "stale" : "ok") << ',' << (s.occupied ? 1 : 0);
    for (double d : s.dl) out << ',' << fmt6(d);
    for (double e : s.effort) out << ',' << fmt6(e);
    out << '\n';
  }
}

SimTrace read_trace(std::istream& in, std::string_view origin) {
  SimTrace trace;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != kTraceMagic) {
    fail(origin, 1, "not a trace file (missing '" + std::string(kTraceMagic) + "')");
  }
  ++line_no;

  std::map<std::string, std::string> meta;
  while (in.peek() == '#' && std::getline(in, line)) {
    ++line_no;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "malformed metadata line");
    meta[std::string(trim(std::string_view(line).substr(1, eq - 1)))] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) fail(origin, line_no, std::string("missing metadata '") + key + "'");
    return it->second;
  };
  auto need_real = [&](const char* key) {
    return real_cell(need(key), origin, line_no, key);
  };

  const auto mode = parse_control_mode(need("mode"));
  if (!mode) fail(origin, line_no, "unknown mode '" + need("mode") + "'");
  trace.mode = *mode;
  const auto seed = parse_uint(need("seed"));
  const auto workers = parse_uint(need("workers"));
  if (!seed || !workers) fail(origin, line_no, "seed and workers must be integers");
  trace.seed = *seed;
  trace.workers = static_cast<std::size_t>(*workers);
  trace.comfort.temp_comfort = need_real("temp_comfort");
  trace.comfort.illum_comfort = need_real("illum_comfort");
  trace.comfort.p_temp = need_real("p_temp");
  trace.comfort.p_illum = need_real("p_illum");
  trace.comfort.penalty_cap = need_real("penalty_cap");

  const std::string expected_header = header_row(trace.workers);
  if (!std::getline(in, line) || line != expected_header) {
    fail(origin, line_no + 1, "expected header '" + expected_header + "'");
  }
  ++line_no;
  const auto columns = split(expected_header, ',');

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns.size()) {
      fail(origin, line_no,
           "expected " + std::to_string(columns.size()) + " columns, got " +
               std::to_string(cells.size()));
    }
    TraceStep s;
    const auto step = cells[0];
    const auto [ptr, ec] = std::from_chars(step.data(), step.data() + step.size(), s.step);
    if (ec != std::errc{} || ptr != step.data() + step.size()) {
      fail(origin, line_no, "step: expected an integer, got '" + std::string(step) + "'");
    }
    s.temp_set = real_cell(cells[1], origin, line_no, columns[1]);
    s.illum_set = real_cell(cells[2], origin, line_no, columns[2]);
    s.temp = real_cell(cells[3], origin, line_no, columns[3]);
    s.illum = real_cell(cells[4], origin, line_no, columns[4]);
    s.penalty = real_cell(cells[5], origin, line_no, columns[5]);
    s.feasible = flag_cell(cells[6], origin, line_no, columns[6]);
    if (cells[7] != "ok" && cells[7] != "stale") {
      fail(origin, line_no, "status: expected ok or stale, got '" + std::string(cells[7]) + "'");
    }
    s.stale = cells[7] == "stale";
    s.occupied = flag_cell(cells[8], origin, line_no, columns[8]);
    for (std::size_t i = 0; i < trace.workers; ++i) {
      s.dl.push_back(real_cell(cells[9 + i], origin, line_no, columns[9 + i]));
    }
    for (std::size_t i = 0; i < trace.workers; ++i) {
      const std::size_t col = 9 + trace.workers + i;
      s.effort.push_back(real_cell(cells[col], origin, line_no, columns[col]));
    }
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

void write_metrics(std::ostream& out, const SimTrace& trace, const Metrics& m) {
  out << kMetricsHeader << '\n'
      << to_string(trace.mode) << ',' << trace.seed << ',' << fmt6(m.mean_dl) << ','
      << fmt6(m.comfort_violation_rate) << ',' << fmt6(m.mean_abs_temp_dev) << ','
      << fmt6(m.mean_abs_illum_dev) << ',' << m.setpoint_change_count << '\n';
}

void write_samples(std::ostream& out, const std::vector<InstantSample>& samples,
                   double step_hours, std::size_t substeps, Millis origin) {
  const auto tau_ms = std::llround(step_hours * 3.6e6);
  for (const auto& s : samples) {
    const auto offset = tau_ms * s.step +
                        tau_ms * static_cast<long long>(s.substep) /
                            static_cast<long long>(std::max<std::size_t>(substeps, 1));
    const nlohmann::json record = {{"t", format_iso8601(origin + std::chrono::milliseconds(offset))},
                                   {"worker", "w" + std::to_string(s.worker)},
                                   {"dl", s.dl},
                                   {"temp_c", s.temp},
                                   {"illum_lx", s.illum}};
    out << record.dump() << '\n';
  }
}

Millis default_origin() {
  using namespace std::chrono;
  return time_point_cast<milliseconds>(sys_days{year{2024} / January / 8}) + hours{9};
}

}  // namespace dmpc::cli

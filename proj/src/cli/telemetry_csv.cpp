#include "dmpc/cli/telemetry_csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dmpc/cli/format.hpp"

namespace dmpc::cli {

namespace {

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& what,
                       std::string field = {}) {
  std::ostringstream msg;
  msg << origin << ':' << line << ": " << what;
  throw Error(ErrorCode::Schema, msg.str(), std::move(field));
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Reads the header line; false when the stream is empty.
bool expect_header(std::istream& in, std::string_view header, std::string_view origin) {
  std::string line;
  if (!std::getline(in, line)) return false;
  line = strip_cr(std::move(line));
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (trim(line) != header) fail(origin, 1, "expected header '" + std::string(header) + "'");
  return true;
}

class RowReader {
 public:
  RowReader(std::string_view origin, std::size_t line, std::vector<std::string_view> cells,
            std::string_view header)
      : origin_(origin), line_(line), cells_(std::move(cells)), names_(split(header, ',')) {
    if (cells_.size() != names_.size()) {
      fail(origin_, line_,
           "expected " + std::to_string(names_.size()) + " columns, got " +
               std::to_string(cells_.size()));
    }
  }

  double real(std::size_t col) const {
    const auto v = parse_double(cells_[col]);
    if (!v || !std::isfinite(*v)) bad(col, "a finite number");
    return *v;
  }

  std::int64_t integer(std::size_t col) const {
    std::int64_t v = 0;
    const auto s = trim(cells_[col]);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) bad(col, "an integer");
    return v;
  }

  std::string text(std::size_t col) const {
    const auto s = trim(cells_[col]);
    if (s.empty()) bad(col, "a non-empty identifier");
    return std::string(s);
  }

 private:
  [[noreturn]] void bad(std::size_t col, const char* expected) const {
    fail(origin_, line_,
         std::string(names_[col]) + ": expected " + expected + ", got '" +
             std::string(cells_[col]) + "'",
         std::string(names_[col]));
  }

  std::string_view origin_;
  std::size_t line_;
  std::vector<std::string_view> cells_;
  std::vector<std::string_view> names_;
};

}  // namespace

TelemetryTable read_telemetry(std::istream& in, std::string_view origin) {
  TelemetryTable table;
  if (!expect_header(in, kTelemetryHeader, origin)) return table;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (trim(line).empty()) continue;
    const RowReader row(origin, line_no, split(line, ','), kTelemetryHeader);
    TelemetryRow r;
    r.step_index = row.integer(0);
    r.worker_id = row.text(1);
    r.dl = row.real(2);
    r.effort = row.real(3);
    r.temp = row.real(4);
    r.illum = row.real(5);
    r.temp_set = row.real(6);
    r.illum_set = row.real(7);
    table.rows.push_back(std::move(r));
  }
  try {
    table.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, std::string(origin) + ": " + e.what(), e.field());
  }
  return table;
}

void write_telemetry(std::ostream& out, const TelemetryTable& table) {
  out << kTelemetryHeader << '\n';
  for (const auto& r : table.rows) {
    out << r.step_index << ',' << r.worker_id << ',' << fmt17(r.dl) << ',' << fmt17(r.effort)
        << ',' << fmt17(r.temp) << ',' << fmt17(r.illum) << ',' << fmt17(r.temp_set) << ','
        << fmt17(r.illum_set) << '\n';
  }
}

StateSnapshot read_snapshot(std::istream& in, std::string_view origin) {
  StateSnapshot snap;
  if (!expect_header(in, kSnapshotHeader, origin)) fail(origin, 1, "empty snapshot");
  std::string line;
  std::size_t line_no = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (trim(line).empty()) continue;
    const RowReader row(origin, line_no, split(line, ','), kSnapshotHeader);
    row.text(0);
    const double dl = row.real(1);
    const double dl_prev = row.real(2);
    const double effort = row.real(3);
    const double temp = row.real(4);
    const double illum = row.real(5);
    if (first) {
      snap.temp_current = temp;
      snap.illum_current = illum;
      first = false;
    } else if (temp != snap.temp_current || illum != snap.illum_current) {
      fail(origin, line_no, "temp_c and illum_lx must be the same on every row");
    }
    try {
      snap.workers.push_back(WorkerState::from_history(dl, dl_prev, effort));
    } catch (const Error& e) {
      fail(origin, line_no, e.what(), e.field());
    }
  }
  if (snap.workers.empty()) fail(origin, line_no, "snapshot has no worker rows");
  try {
    snap.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, std::string(origin) + ": " + e.what(), e.field());
  }
  return snap;
}

}  // namespace dmpc::cli

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>
#include <memory>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "reofilm/errors.hpp"
#include "reofilm/records.hpp"
#include "reofilm/scenarios_io.hpp"

namespace reofilm {

Diagnostics compute_diagnostics(const FilmState& state, const Grid& grid, double dt_last) {
  Diagnostics d;
  d.dt_last = dt_last;
  double mass = 0.0;
  double momentum = 0.0;
  for (std::size_t i = 0; i < state.eta.size(); ++i) {
    mass += state.eta[i];
    d.max_eta = std::max(d.max_eta, state.eta[i]);
    if (i < state.vel.size()) {
      momentum += state.eta[i] * state.vel[i];
      d.max_abs_u = std::max(d.max_abs_u, std::abs(state.vel[i]));
    }
  }
  d.mass = mass * grid.dx();
  d.momentum = momentum * grid.dx();
  return d;
}

SimRecord make_record(const FilmState& state, const Grid& grid, double dt_last) {
  return {state.time, state.eta, state.vel, compute_diagnostics(state, grid, dt_last)};
}

std::filesystem::path diagnostics_sidecar_path(const std::filesystem::path& path) {
  auto out = path;
  out.replace_extension();
  out += ".diagnostics.csv";
  return out;
}

namespace {

constexpr const char* kCsvHeader = "time,x,eta,vel";
constexpr const char* kDiagnosticsHeader = "time,mass,momentum,max_eta,max_abs_u,dt_last";

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  return in;
}

nlohmann::json to_json(const SimRecord& r) {
  const auto& d = r.diagnostics;
  return {
      {"time", r.time},
      {"eta", r.eta},
      {"vel", r.vel},
      {"diagnostics",
       {{"mass", d.mass},
        {"momentum", d.momentum},
        {"max_eta", d.max_eta},
        {"max_abs_u", d.max_abs_u},
        {"dt_last", d.dt_last}}},
  };
}

SimRecord from_json(const nlohmann::json& j) {
  SimRecord r;
  r.time = j.at("time").get<double>();
  r.eta = j.at("eta").get<std::vector<double>>();
  r.vel = j.at("vel").get<std::vector<double>>();
  const auto& d = j.at("diagnostics");
  r.diagnostics = {d.at("mass").get<double>(), d.at("momentum").get<double>(),
                   d.at("max_eta").get<double>(), d.at("max_abs_u").get<double>(),
                   d.at("dt_last").get<double>()};
  return r;
}

std::vector<double> parse_csv_row(const std::string& line, std::size_t expected,
                                  const std::filesystem::path& path, std::size_t line_no) {
  std::vector<double> values;
  values.reserve(expected);
  const char* p = line.data();
  const char* end = p + line.size();
  while (p <= end) {
    const char* comma = std::find(p, end, ',');
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(p, comma, v);
    if (ec != std::errc() || ptr != comma) {
      throw IoError(fmt::format("{}:{}: malformed number", path.string(), line_no));
    }
    values.push_back(v);
    p = comma + 1;
  }
  if (values.size() != expected) {
    throw IoError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), line_no,
                              expected, values.size()));
  }
  return values;
}

}  // namespace

struct RecordWriter::Impl {
  OutputFormat format;
  std::vector<double> xs;
  std::filesystem::path path;
  std::ofstream main;
  std::ofstream sidecar;

  void check(std::ofstream& s, const std::filesystem::path& p) {
    if (!s) throw IoError(fmt::format("write to '{}' failed", p.string()));
  }
};

RecordWriter::RecordWriter(const std::filesystem::path& path, const Grid& grid,
                           OutputFormat format)
    : impl_(std::make_unique<Impl>()) {
  impl_->format = format;
  impl_->xs = grid.cell_centers();
  impl_->path = path;
  impl_->main = open_for_write(path);
  if (format == OutputFormat::Csv) {
    impl_->sidecar = open_for_write(diagnostics_sidecar_path(path));
    impl_->main << kCsvHeader << '\n';
    impl_->sidecar << kDiagnosticsHeader << '\n';
  }
}

RecordWriter::~RecordWriter() = default;

void RecordWriter::write(const SimRecord& r) {
  auto& m = impl_->main;
  if (impl_->format == OutputFormat::Ndjson) {
    m << to_json(r).dump() << '\n';
  } else {
    if (r.eta.size() != impl_->xs.size() || r.vel.size() != impl_->xs.size()) {
      throw IoError("record arrays do not match the grid");
    }
    std::string buf;
    for (std::size_t i = 0; i < r.eta.size(); ++i) {
      buf.clear();
      fmt::format_to(std::back_inserter(buf), "{:.17g},{:.17g},{:.17g},{:.17g}\n", r.time,
                     impl_->xs[i], r.eta[i], r.vel[i]);
      m << buf;
    }
    const auto& d = r.diagnostics;
    impl_->sidecar << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.time,
                                  d.mass, d.momentum, d.max_eta, d.max_abs_u, d.dt_last);
    impl_->check(impl_->sidecar, diagnostics_sidecar_path(impl_->path));
  }
  impl_->check(m, impl_->path);
}

void RecordWriter::close() {
  impl_->main.close();
  if (impl_->sidecar.is_open()) impl_->sidecar.close();
}

void write_records(const std::vector<SimRecord>& records, const Grid& grid,
                   const std::filesystem::path& path, OutputFormat format) {
  RecordWriter writer(path, grid, format);
  for (const auto& r : records) writer.write(r);
  writer.close();
}

std::vector<SimRecord> read_records(const std::filesystem::path& path, OutputFormat format) {
  std::vector<SimRecord> records;
  auto in = open_for_read(path);
  std::string line;
  std::size_t line_no = 0;

  if (format == OutputFormat::Ndjson) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        records.push_back(from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw IoError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
      }
    }
    return records;
  }

  if (!std::getline(in, line) || line != kCsvHeader) {
    throw IoError(fmt::format("{}: missing header '{}'", path.string(), kCsvHeader));
  }
  line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto row = parse_csv_row(line, 4, path, line_no);
    if (records.empty() || records.back().time != row[0]) {
      records.push_back({});
      records.back().time = row[0];
    }
    records.back().eta.push_back(row[2]);
    records.back().vel.push_back(row[3]);
  }

  const auto side_path = diagnostics_sidecar_path(path);
  auto side = open_for_read(side_path);
  if (!std::getline(side, line) || line != kDiagnosticsHeader) {
    throw IoError(fmt::format("{}: missing header '{}'", side_path.string(), kDiagnosticsHeader));
  }
  std::size_t index = 0;
  line_no = 1;
  while (std::getline(side, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto row = parse_csv_row(line, 6, side_path, line_no);
    if (index >= records.size() || records[index].time != row[0]) {
      throw IoError(fmt::format("{}:{}: diagnostics do not match the records in '{}'",
                                side_path.string(), line_no, path.string()));
    }
    records[index].diagnostics = {row[1], row[2], row[3], row[4], row[5]};
    ++index;
  }
  if (index != records.size()) {
    throw IoError(fmt::format("{}: {} diagnostics rows for {} records", side_path.string(), index,
                              records.size()));
  }
  return records;
}

}  // namespace reofilm

#include "qobs/sweep.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>

#include "qobs/errors.hpp"

namespace qobs {

namespace {

double to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw InvalidArgument("sweep: bad number '" + std::string(s) + "'");
  return v;
}

ScenarioConfig with_value(ScenarioConfig config, const std::string& name, double v) {
  if (name == "omega") config.omega = v;
  else if (name == "gamma") config.gamma = v;
  else if (name == "gamma-l") config.gamma_l = v;
  else if (name == "gain") config.gain = v;
  else throw InvalidArgument("sweep: unknown parameter '" + name + "'");
  return config;
}

SweepRow evaluate(const ScenarioConfig& base, const std::string& name, double v) {
  const ScenarioConfig config = with_value(base, name, v);
  const Scenario s = build_scenario(config);
  const Trajectory traj = simulate(s, config);
  const AnalysisReport report = analyze(s.model, s.error_selector, &traj);
  SweepRow row;
  row.value = v;
  row.margin = report.margin;
  row.rate = report.decay ? report.decay->rate : std::numeric_limits<double>::quiet_NaN();
  return row;
}

}  // namespace

SweepRange parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) throw InvalidArgument("sweep: expected name=range");
  SweepRange range;
  range.name = std::string(text.substr(0, eq));
  if (range.name == "gamma_l") range.name = "gamma-l";
  with_value(ScenarioConfig{}, range.name, 0.0);
  const std::string_view body = text.substr(eq + 1);
  if (body.empty()) throw InvalidArgument("sweep: empty range");

  if (body.find(':') != std::string_view::npos) {
    const auto c1 = body.find(':');
    const auto c2 = body.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw InvalidArgument("sweep: expected start:stop:count");
    const double start = to_double(body.substr(0, c1));
    const double stop = to_double(body.substr(c1 + 1, c2 - c1 - 1));
    const std::string_view count_text = body.substr(c2 + 1);
    long count = 0;
    const auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc{} || ptr != count_text.data() + count_text.size())
      throw InvalidArgument("sweep: bad count");
    if (count <= 0) throw InvalidArgument("sweep: empty range");
    if (count > 100000) throw InvalidArgument("sweep: too many points");
    for (long i = 0; i < count; ++i)
      range.values.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
  } else {
    std::string_view rest = body;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      range.values.push_back(to_double(rest.substr(0, comma)));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  if (range.values.empty()) throw InvalidArgument("sweep: empty range");
  return range;
}

std::vector<SweepRow> run_sweep_serial(const ScenarioConfig& base, const SweepRange& range) {
  std::vector<SweepRow> rows;
  rows.reserve(range.values.size());
  for (double v : range.values) rows.push_back(evaluate(base, range.name, v));
  return rows;
}

std::vector<SweepRow> run_sweep_parallel(const ScenarioConfig& base, const SweepRange& range) {
  const auto n = static_cast<long>(range.values.size());
  std::vector<SweepRow> rows(range.values.size());
  std::vector<std::exception_ptr> errors(range.values.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      rows[k] = evaluate(base, range.name, range.values[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

void write_sweep_csv(std::ostream& out, const SweepRange& range, const std::vector<SweepRow>& rows) {
  out << range.name << ",rate,margin\n";
  char buf[128];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.value, r.rate, r.margin);
    out << buf;
  }
}

}  // namespace qobs

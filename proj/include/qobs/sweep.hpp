#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qobs/scenario.hpp"

namespace qobs {

/// One swept configuration parameter and its values in output order.
struct SweepRange {
  std::string name;  // omega, gamma, gamma-l or gain
  std::vector<double> values;
};

/// "name=start:stop:count" (inclusive, evenly spaced) or "name=v1,v2,...".
/// Throws InvalidArgument for unknown names or an empty range.
SweepRange parse_sweep(std::string_view text);

struct SweepRow {
  double value = 0.0;
  double rate = 0.0;  // fitted error decay rate; NaN when nothing decays
  double margin = 0.0;
};

/// Reference implementation: one point after another.
std::vector<SweepRow> run_sweep_serial(const ScenarioConfig& base, const SweepRange& range);

/// OpenMP over points. Rows come back in range order and match the serial
/// result bit for bit.
std::vector<SweepRow> run_sweep_parallel(const ScenarioConfig& base, const SweepRange& range);

/// Header "name,rate,margin" then one row per point.
void write_sweep_csv(std::ostream& out, const SweepRange& range, const std::vector<SweepRow>& rows);

}  // namespace qobs

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "difftest/montecarlo.hpp"

namespace difftest {

/// Shortest decimal representation that round-trips to the same double.
std::string format_shortest(double v);

/// CSV with header `model,n,phi,h,power,R,failures,threshold`, one row per
/// (table, h, phi) in table / h-grid / phi order.
void write_power_csv(const std::vector<PowerTable>& tables, std::ostream& os);

/// Inverse of write_power_csv. Rows are grouped back into tables by
/// (model, n) in order of first appearance.
std::vector<PowerTable> read_power_csv(std::istream& is);

/// Aligned text table with three decimals; the most powerful statistic in
/// each h > 0 row is prefixed with `*` (all of them on ties).
std::string render_power_table(const PowerTable& table);

}  // namespace difftest

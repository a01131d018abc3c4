#include "difftest/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "difftest/errors.hpp"

namespace difftest {

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_power_csv(const std::vector<PowerTable>& tables, std::ostream& os) {
  os << "model,n,phi,h,power,R,failures,threshold\n";
  for (const auto& t : tables) {
    for (const auto& row : t.rows) {
      for (std::size_t k = 0; k < t.phis.size(); ++k) {
        os << t.model << ',' << t.n << ',' << t.phis[k].name() << ',' << format_shortest(row.h) << ','
           << format_shortest(row.power[k]) << ',' << t.replications << ',' << row.failures << ','
           << format_shortest(t.thresholds[k]) << '\n';
      }
    }
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("power CSV row " + std::to_string(row) + ": cannot parse number '" + s + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& s, std::size_t row) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("power CSV row " + std::to_string(row) + ": cannot parse integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<PowerTable> read_power_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("power CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "model,n,phi,h,power,R,failures,threshold") {
    throw ConfigError("power CSV header must be `model,n,phi,h,power,R,failures,threshold`");
  }

  std::vector<PowerTable> tables;
  std::size_t row_no = 1;
  while (std::getline(is, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 8) throw ConfigError("power CSV row " + std::to_string(row_no) + ": expected 8 columns");

    const std::string& model = cells[0];
    const std::size_t n = parse_size(cells[1], row_no);
    const PhiFunction phi = PhiFunction::parse(cells[2]);
    const double h = parse_double(cells[3], row_no);
    const double power = parse_double(cells[4], row_no);
    const std::size_t reps = parse_size(cells[5], row_no);
    const std::size_t failures = parse_size(cells[6], row_no);
    const double threshold = parse_double(cells[7], row_no);

    auto table_it =
        std::find_if(tables.begin(), tables.end(), [&](const PowerTable& t) { return t.model == model && t.n == n; });
    if (table_it == tables.end()) {
      PowerTable t;
      t.model = model;
      t.n = n;
      t.replications = reps;
      tables.push_back(std::move(t));
      table_it = std::prev(tables.end());
    }
    PowerTable& t = *table_it;

    auto phi_it = std::find(t.phis.begin(), t.phis.end(), phi);
    std::size_t k = static_cast<std::size_t>(phi_it - t.phis.begin());
    if (phi_it == t.phis.end()) {
      t.phis.push_back(phi);
      t.thresholds.push_back(threshold);
      for (auto& r : t.rows) r.power.push_back(0.0);
    }

    auto row_it = std::find_if(t.rows.begin(), t.rows.end(), [&](const PowerRow& r) { return r.h == h; });
    if (row_it == t.rows.end()) {
      PowerRow r;
      r.h = h;
      r.failures = failures;
      r.effective_reps = reps >= failures ? reps - failures : 0;
      r.power.assign(t.phis.size(), 0.0);
      t.rows.push_back(std::move(r));
      row_it = std::prev(t.rows.end());
    }
    row_it->power[k] = power;
  }
  return tables;
}

std::string render_power_table(const PowerTable& table) {
  std::ostringstream os;
  os << "model=" << table.model << " n=" << table.n << " R=" << table.replications << " seed=" << table.seed
     << " threshold=" << to_string(table.threshold_mode) << '\n';

  std::vector<std::size_t> width;
  for (const auto& phi : table.phis) width.push_back(std::max<std::size_t>(phi.label().size(), 6) + 2);

  char cell[64];
  os << std::string(6, ' ');
  for (std::size_t k = 0; k < table.phis.size(); ++k) {
    const auto label = table.phis[k].label();
    os << std::string(width[k] - label.size(), ' ') << label;
  }
  os << '\n';

  for (const auto& row : table.rows) {
    std::snprintf(cell, sizeof cell, "h=%.2f", row.h);
    os << cell;
    const double best = row.power.empty() ? 0.0 : *std::max_element(row.power.begin(), row.power.end());
    for (std::size_t k = 0; k < row.power.size(); ++k) {
      const bool mark = row.h > 0.0 && row.power[k] == best;
      std::snprintf(cell, sizeof cell, "%s%.3f", mark ? "*" : "", row.power[k]);
      const std::string text(cell);
      os << std::string(width[k] > text.size() ? width[k] - text.size() : 1, ' ') << text;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace difftest

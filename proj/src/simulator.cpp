#include "difftest/simulator.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "difftest/errors.hpp"
#include "difftest/rng.hpp"

namespace difftest {

namespace {

// Advances `x` by `steps` Euler-Maruyama steps of size dt.
class EulerStepper {
 public:
  EulerStepper(const Model& model, const ParamVector& theta, double dt, double blowup_limit)
      : model_(model),
        theta_(theta),
        dt_(dt),
        sqrt_dt_(std::sqrt(dt)),
        limit_(blowup_limit),
        drift_(model.state_dim()),
        diffusion_(model.state_dim() * model.noise_dim()),
        noise_(model.noise_dim()) {}

  void step(std::span<double> x, Rng& rng, std::size_t step_index) {
    const std::size_t d = model_.state_dim();
    const std::size_t m = model_.noise_dim();
    model_.drift(theta_.alpha, x, drift_);
    model_.diffusion(theta_.beta, x, diffusion_);
    for (auto& z : noise_) z = rng.normal();
    const auto floor = model_.state_floor();
    for (std::size_t i = 0; i < d; ++i) {
      double dw = 0.0;
      for (std::size_t k = 0; k < m; ++k) dw += diffusion_[i * m + k] * noise_[k];
      double next = x[i] + drift_[i] * dt_ + sqrt_dt_ * dw;
      if (next < floor[i]) next = floor[i];
      if (!std::isfinite(next) || std::abs(next) > limit_) {
        std::ostringstream os;
        os << "simulation of model '" << model_.name() << "' blew up at internal step " << step_index
           << " (component " << i << " = " << next << ")";
        throw SimulationBlowup(os.str(), step_index);
      }
      x[i] = next;
    }
  }

 private:
  const Model& model_;
  const ParamVector& theta_;
  double dt_;
  double sqrt_dt_;
  double limit_;
  std::vector<double> drift_;
  std::vector<double> diffusion_;
  std::vector<double> noise_;
};

}  // namespace

SamplingScheme SamplingScheme::rapidly_increasing(std::size_t n, std::size_t substeps) {
  if (n == 0) throw ConfigError("sampling scheme needs n >= 1");
  return with_horizon(n, std::cbrt(static_cast<double>(n)), substeps);
}

SamplingScheme SamplingScheme::with_horizon(std::size_t n, double horizon, std::size_t substeps) {
  if (n == 0) throw ConfigError("sampling scheme needs n >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("sampling horizon must be positive");
  if (substeps == 0) throw ConfigError("substeps must be >= 1");
  return {n, horizon / static_cast<double>(n), substeps};
}

Sample simulate(const Model& model, const ParamVector& theta, std::span<const double> x0, const SamplingScheme& scheme,
                std::uint64_t seed, const SimulationOptions& options) {
  model.check_params(theta);
  const std::size_t d = model.state_dim();
  if (x0.size() != d) throw ConfigError("initial state has wrong dimension for model '" + model.name() + "'");
  if (scheme.n == 0 || scheme.substeps == 0 || !(scheme.delta > 0.0)) throw ConfigError("invalid sampling scheme");

  Sample sample;
  sample.dim = d;
  sample.scheme = scheme;
  sample.model_name = model.name();
  sample.seed = seed;
  sample.observations.resize((scheme.n + 1) * d);

  Rng rng(seed);
  EulerStepper stepper(model, theta, scheme.delta / static_cast<double>(scheme.substeps), options.blowup_limit);
  std::vector<double> x(x0.begin(), x0.end());
  std::size_t step_index = 0;
  for (std::size_t b = 0; b < options.burn_in * scheme.substeps; ++b) stepper.step(x, rng, step_index++);

  std::copy(x.begin(), x.end(), sample.observations.begin());
  for (std::size_t i = 1; i <= scheme.n; ++i) {
    for (std::size_t s = 0; s < scheme.substeps; ++s) stepper.step(x, rng, step_index++);
    std::copy(x.begin(), x.end(), sample.observations.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return sample;
}

MomentReport validate_conditional_moments(const Model& model, const ParamVector& theta,
                                          std::span<const double> x_start, const SamplingScheme& scheme,
                                          std::size_t reps, std::uint64_t seed) {
  if (reps < 1000) throw ConfigError("validate_conditional_moments needs at least 1000 replications");
  model.check_params(theta);
  const std::size_t d = model.state_dim();
  if (x_start.size() != d) throw ConfigError("start state has wrong dimension");

  const double delta = scheme.delta;
  const auto b0 = model.drift(theta, x_start);
  Rng rng(seed);
  EulerStepper stepper(model, theta, delta / static_cast<double>(scheme.substeps), 1e8);

  std::vector<CompensatedSum> sum1(d), sum4(d), sum2diag_sq(d);
  std::vector<CompensatedSum> sum2(d * d);
  std::vector<double> x(d), xbar(d);
  for (std::size_t r = 0; r < reps; ++r) {
    std::copy(x_start.begin(), x_start.end(), x.begin());
    for (std::size_t s = 0; s < scheme.substeps; ++s) stepper.step(x, rng, s);
    for (std::size_t k = 0; k < d; ++k) xbar[k] = x[k] - x_start[k] - delta * b0[k];
    for (std::size_t k = 0; k < d; ++k) {
      sum1[k].add(xbar[k]);
      const double sq = xbar[k] * xbar[k];
      sum4[k].add(sq * sq);
      sum2diag_sq[k].add(sq * sq / (delta * delta));
      for (std::size_t j = 0; j < d; ++j) sum2[k * d + j].add(xbar[k] * xbar[j]);
    }
  }

  const double inv = 1.0 / static_cast<double>(reps);
  MomentReport rep;
  rep.delta = delta;
  rep.reps = reps;
  rep.sigma = sigma_ops(model, theta.beta, x_start).sigma_mat;
  rep.mean.resize(d);
  rep.fourth.resize(d);
  rep.fourth_over_delta_sq.resize(d);
  rep.second_over_delta_se.resize(d);
  rep.second = Matrix(d, d);
  rep.second_over_delta = Matrix(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    rep.mean[k] = sum1[k].value() * inv;
    rep.fourth[k] = sum4[k].value() * inv;
    rep.fourth_over_delta_sq[k] = rep.fourth[k] / (delta * delta);
    rep.mean_ratio = std::max(rep.mean_ratio, std::abs(rep.mean[k]) / (delta * delta));
    for (std::size_t j = 0; j < d; ++j) {
      rep.second(k, j) = sum2[k * d + j].value() * inv;
      rep.second_over_delta(k, j) = rep.second(k, j) / delta;
      rep.second_ratio =
          std::max(rep.second_ratio, std::abs(rep.second(k, j) - delta * rep.sigma(k, j)) / (delta * delta));
    }
    const double m2 = rep.second_over_delta(k, k);
    const double var = sum2diag_sq[k].value() * inv - m2 * m2;
    rep.second_over_delta_se[k] = std::sqrt(std::max(var, 0.0) * inv);
  }
  return rep;
}

void write_sample_csv(const Sample& sample, std::ostream& os) {
  os << 't';
  for (std::size_t k = 0; k < sample.dim; ++k) os << ",x" << (k + 1);
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    os << sample.time(i);
    for (double v : sample.state(i)) os << ',' << v;
    os << '\n';
  }
  os.precision(old_precision);
}

Sample read_sample_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("sample CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") throw ConfigError("sample CSV header must be `t,x1,...,xd`");
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "x" + std::to_string(k)) throw ConfigError("sample CSV header must be `t,x1,...,xd`");
  }

  Sample sample;
  sample.dim = header.size() - 1;
  std::vector<double> times;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("sample CSV row " + std::to_string(row) + ": cannot parse '" + cell + "'");
      }
      if (!std::isfinite(v)) throw ConfigError("sample CSV row " + std::to_string(row) + ": non-finite value");
      if (col == 0) {
        times.push_back(v);
      } else {
        sample.observations.push_back(v);
      }
      ++col;
    }
    if (col != header.size()) {
      throw ConfigError("sample CSV row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                        " columns");
    }
  }
  if (times.size() < 2) throw ConfigError("sample CSV needs at least two observations");
  const std::size_t n = times.size() - 1;
  const double horizon = times.back() - times.front();
  if (!(horizon > 0.0)) throw ConfigError("sample CSV times must be increasing");
  sample.scheme = SamplingScheme{n, horizon / static_cast<double>(n), 1};
  return sample;
}

}  // namespace difftest

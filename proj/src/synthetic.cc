#include "tkgmlp/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "tkgmlp/activations.h"
#include "tkgmlp/error.h"
#include "tkgmlp/random.h"

namespace tkgmlp {
namespace {

constexpr std::uint64_t kColumnStream = 0xC0;
constexpr std::uint64_t kLabelStream = 0x1AB;
constexpr std::uint64_t kModelStream = 0x30D;

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kGaussian: return "gaussian";
    case Family::kExponential: return "exponential";
    case Family::kBeta: return "beta";
    case Family::kZip: return "zip";
  }
  return "unknown";
}

Family parse_family(std::string_view s) {
  for (Family f : {Family::kGaussian, Family::kExponential, Family::kBeta, Family::kZip}) {
    if (family_name(f) == s) return f;
  }
  throw ConfigError(fmt::format("unknown distribution family '{}'", s));
}

double apply_transform(Transform t, double z) {
  switch (t) {
    case Transform::kTanh: return std::tanh(z);
    case Transform::kSquare: {
      const double h = std::tanh(z);
      return h * h;
    }
    case Transform::kSoftStep: return sigmoid(4.0 * (z - 0.5));
  }
  return 0.0;
}

}  // namespace

SyntheticColumnSpec SyntheticColumnSpec::gaussian(double mu, double sigma) {
  return {Family::kGaussian, mu, sigma};
}
SyntheticColumnSpec SyntheticColumnSpec::exponential(double beta) {
  return {Family::kExponential, beta, 0.0};
}
SyntheticColumnSpec SyntheticColumnSpec::beta(double alpha, double beta) {
  return {Family::kBeta, alpha, beta};
}
SyntheticColumnSpec SyntheticColumnSpec::zip(double pi, double lambda) {
  return {Family::kZip, pi, lambda};
}

void SyntheticColumnSpec::validate() const {
  switch (family) {
    case Family::kGaussian:
      if (!(p2 > 0.0)) throw ConfigError("gaussian: sigma must be > 0");
      break;
    case Family::kExponential:
      if (!(p1 > 0.0)) throw ConfigError("exponential: beta must be > 0");
      break;
    case Family::kBeta:
      if (!(p1 > 0.0 && p2 > 0.0)) throw ConfigError("beta: alpha and beta must be > 0");
      break;
    case Family::kZip:
      if (!(p1 >= 0.0 && p1 <= 1.0)) throw ConfigError("zip: pi must lie in [0, 1]");
      if (!(p2 > 0.0)) throw ConfigError("zip: lambda must be > 0");
      break;
  }
}

double SyntheticColumnSpec::mean() const {
  switch (family) {
    case Family::kGaussian: return p1;
    case Family::kExponential: return p1;
    case Family::kBeta: return p1 / (p1 + p2);
    case Family::kZip: return (1.0 - p1) * p2;
  }
  return 0.0;
}

double SyntheticColumnSpec::stddev() const {
  switch (family) {
    case Family::kGaussian: return p2;
    case Family::kExponential: return p1;
    case Family::kBeta: {
      const double s = p1 + p2;
      return std::sqrt(p1 * p2 / (s * s * (s + 1.0)));
    }
    case Family::kZip: return std::sqrt((1.0 - p1) * p2 * (1.0 + p1 * p2));
  }
  return 1.0;
}

std::string SyntheticColumnSpec::name() const {
  return std::string(family_name(family));
}

std::vector<double> sample_column(const SyntheticColumnSpec& spec, std::size_t n,
                                  std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<double> out(n);
  switch (spec.family) {
    case Family::kGaussian: {
      std::normal_distribution<double> d(spec.p1, spec.p2);
      for (double& v : out) v = d(rng);
      break;
    }
    case Family::kExponential: {
      std::exponential_distribution<double> d(1.0 / spec.p1);
      for (double& v : out) v = d(rng);
      break;
    }
    case Family::kBeta: {
      std::gamma_distribution<double> ga(spec.p1, 1.0);
      std::gamma_distribution<double> gb(spec.p2, 1.0);
      for (double& v : out) {
        const double x = ga(rng);
        const double y = gb(rng);
        v = x / (x + y);
      }
      break;
    }
    case Family::kZip: {
      std::poisson_distribution<long> pois(spec.p2);
      for (double& v : out) {
        const bool excess_zero = uniform01(rng) < spec.p1;
        const long k = pois(rng);
        v = excess_zero ? 0.0 : static_cast<double>(k);
      }
      break;
    }
  }
  return out;
}

double SyntheticLabelModel::logit(std::span<const double> row,
                                  const std::vector<SyntheticColumnSpec>& columns) const {
  double z = intercept;
  for (const LabelTerm& t : terms) {
    const SyntheticColumnSpec& c = columns[t.column];
    z += t.weight * apply_transform(t.transform, (row[t.column] - c.mean()) / c.stddev());
  }
  return z;
}

SyntheticTaskSpec SyntheticTaskSpec::desk_tiny(std::uint64_t seed) {
  SyntheticTaskSpec s;
  for (int i = 0; i < 8; ++i) s.columns.push_back(SyntheticColumnSpec::gaussian(0.0, 1.0));
  for (int i = 0; i < 8; ++i) s.columns.push_back(SyntheticColumnSpec::exponential(1.0));
  for (int i = 0; i < 8; ++i) s.columns.push_back(SyntheticColumnSpec::beta(0.5, 0.5));
  for (int i = 0; i < 8; ++i) s.columns.push_back(SyntheticColumnSpec::zip(0.3, 50.0));
  s.prevalence = 0.0047;
  s.active_columns = 8;
  s.seed = seed;
  return s;
}

SyntheticTaskSpec SyntheticTaskSpec::zip_heavy(std::uint64_t seed) {
  SyntheticTaskSpec s;
  for (int i = 0; i < 12; ++i) {
    s.columns.push_back(SyntheticColumnSpec::zip(0.2 + 0.05 * i, 50.0));
  }
  for (int i = 0; i < 4; ++i) s.columns.push_back(SyntheticColumnSpec::gaussian(0.0, 1.0));
  s.prevalence = 0.05;
  s.active_columns = 8;
  s.seed = seed;
  return s;
}

void SyntheticTaskSpec::validate() const {
  if (columns.empty()) throw ConfigError("synthetic task needs at least one column");
  for (const auto& c : columns) c.validate();
  if (!(prevalence > 0.0 && prevalence <= 0.5)) {
    throw ConfigError(fmt::format("prevalence {} outside (0, 0.5]", prevalence));
  }
  if (active_columns < 1 || active_columns > columns.size()) {
    throw ConfigError("active_columns must lie in [1, number of columns]");
  }
  if (!(weight_scale > 0.0)) throw ConfigError("weight_scale must be > 0");
}

nlohmann::json SyntheticTaskSpec::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns) {
    cols.push_back({{"family", std::string(family_name(c.family))}, {"params", {c.p1, c.p2}}});
  }
  return {{"columns", cols},
          {"prevalence", prevalence},
          {"active_columns", active_columns},
          {"weight_scale", weight_scale},
          {"seed", seed}};
}

SyntheticTaskSpec SyntheticTaskSpec::from_json(const nlohmann::json& j) {
  SyntheticTaskSpec s;
  try {
    for (const auto& c : j.at("columns")) {
      SyntheticColumnSpec col;
      col.family = parse_family(c.at("family").get<std::string>());
      col.p1 = c.at("params").at(0).get<double>();
      col.p2 = c.at("params").size() > 1 ? c.at("params").at(1).get<double>() : 0.0;
      s.columns.push_back(col);
    }
    s.prevalence = j.at("prevalence").get<double>();
    s.active_columns = j.at("active_columns").get<std::size_t>();
    s.weight_scale = j.at("weight_scale").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("synthetic spec: {}", e.what()));
  }
  s.validate();
  return s;
}

SyntheticData synth_generate(const SyntheticTaskSpec& spec, std::size_t n_rows) {
  spec.validate();
  if (n_rows == 0) throw ConfigError("synth_generate: n_rows must be > 0");
  const std::size_t d = spec.columns.size();

  SyntheticData out;
  Dataset& ds = out.dataset;
  ds.features = Matrix(n_rows, d);
  for (std::size_t c = 0; c < d; ++c) {
    const auto col =
        sample_column(spec.columns[c], n_rows, derive_seed(derive_seed(spec.seed, kColumnStream), c));
    for (std::size_t r = 0; r < n_rows; ++r) ds.features(r, c) = col[r];
    ds.feature_names.push_back(fmt::format("{}_{}", spec.columns[c].name(), c));
  }
  ds.time.resize(n_rows);
  std::iota(ds.time.begin(), ds.time.end(), 0.0);

  // Label model: a random subset of columns, each with a transform and a
  // signed weight of magnitude in [0.5, 1) * 2 * weight_scale.
  Rng model_rng(derive_seed(spec.seed, kModelStream));
  std::vector<std::size_t> cols(d);
  std::iota(cols.begin(), cols.end(), 0);
  for (std::size_t i = 0; i + 1 < d; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform01(model_rng) * static_cast<double>(d - i));
    std::swap(cols[i], cols[std::min(j, d - 1)]);
  }
  SyntheticLabelModel& lm = out.label_model;
  for (std::size_t k = 0; k < spec.active_columns; ++k) {
    LabelTerm t;
    t.column = cols[k];
    t.transform = static_cast<Transform>(k % 3);
    const double magnitude = spec.weight_scale * (1.0 + uniform01(model_rng));
    t.weight = uniform01(model_rng) < 0.5 ? -magnitude : magnitude;
    lm.terms.push_back(t);
  }

  std::vector<double> base(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) base[r] = lm.logit(ds.features.row(r), spec.columns);

  const auto mean_prob = [&](double b) {
    double s = 0.0;
    for (double z : base) s += sigmoid(z + b);
    return s / static_cast<double>(n_rows);
  };
  double lo = -40.0;
  double hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_prob(mid) < spec.prevalence ? lo : hi) = mid;
  }
  lm.intercept = 0.5 * (lo + hi);

  Rng label_rng(derive_seed(spec.seed, kLabelStream));
  out.oracle_probs.resize(n_rows);
  ds.labels.resize(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    out.oracle_probs[r] = sigmoid(base[r] + lm.intercept);
    ds.labels[r] = uniform01(label_rng) < out.oracle_probs[r] ? 1.0 : 0.0;
  }
  return out;
}

MetricReport bayes_metrics(std::span<const double> oracle_probs,
                           std::span<const double> labels) {
  return evaluate_scores(oracle_probs, labels);
}

}  // namespace tkgmlp

#include "tkgmlp/encoders.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {

std::size_t BinSpec::bin_of(double x) const {
  const auto it = std::lower_bound(boundaries.begin(), boundaries.end(), x);
  const auto j = static_cast<std::size_t>(it - boundaries.begin());
  if (j == 0) return 0;
  return std::min(j - 1, n_bins() - 1);
}

BinSpec fit_bins(std::span<const double> train_values, std::size_t n_bins) {
  if (n_bins < 1) throw ValidationError("fit_bins: n_bins must be >= 1");
  std::vector<double> v(train_values.begin(), train_values.end());
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError("fit_bins: non-finite value");
  }
  std::sort(v.begin(), v.end());
  if (v.empty() || v.front() == v.back()) {
    throw DegenerateError("fit_bins: feature has fewer than two distinct values");
  }
  const double last = static_cast<double>(v.size() - 1);
  BinSpec spec;
  spec.boundaries.push_back(v.front());
  for (std::size_t k = 1; k < n_bins; ++k) {
    const double pos = last * static_cast<double>(k) / static_cast<double>(n_bins);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    double q = v[lo];
    if (frac > 0.0 && lo + 1 < v.size()) q = v[lo] + frac * (v[lo + 1] - v[lo]);
    q = std::min(q, v.back());
    if (q > spec.boundaries.back()) spec.boundaries.push_back(q);
  }
  if (v.back() > spec.boundaries.back()) {
    spec.boundaries.push_back(v.back());
  } else {
    spec.boundaries.back() = v.back();
  }
  return spec;
}

double qle_encode(double x, const BinSpec& spec) {
  const auto& b = spec.boundaries;
  if (x <= b.front()) return 0.0;
  if (x >= b.back()) return 1.0;
  const std::size_t i = spec.bin_of(x);
  const double frac = (x - b[i]) / (b[i + 1] - b[i]);
  return (static_cast<double>(i) + frac) / static_cast<double>(spec.n_bins());
}

void ple_encode_into(double x, const BinSpec& spec, std::span<double> out) {
  const auto& b = spec.boundaries;
  if (out.size() != spec.n_bins()) throw ShapeError("ple_encode: output length");
  for (std::size_t i = 0; i < spec.n_bins(); ++i) {
    if (x < b[i]) {
      out[i] = 0.0;
    } else if (x >= b[i + 1]) {
      out[i] = 1.0;
    } else {
      out[i] = (x - b[i]) / (b[i + 1] - b[i]);
    }
  }
}

std::vector<double> ple_encode(double x, const BinSpec& spec) {
  std::vector<double> out(spec.n_bins());
  ple_encode_into(x, spec, out);
  return out;
}

double quantile_encode(double x, const BinSpec& spec) {
  return static_cast<double>(spec.bin_of(x)) / static_cast<double>(spec.n_bins());
}

std::vector<double> clr_encode(std::span<const double> row) {
  if (row.empty()) throw ShapeError("clr_encode: empty row");
  std::vector<double> logs(row.size());
  double mean_log = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!(row[j] > 0.0) || !std::isfinite(row[j])) {
      throw DomainError(fmt::format("clr_encode: component {} = {} is not positive", j,
                                    row[j]));
    }
    logs[j] = std::log(row[j]);
    mean_log += logs[j];
  }
  mean_log /= static_cast<double>(row.size());
  for (double& l : logs) l -= mean_log;
  return logs;
}

StandardizeStats fit_standardize(std::span<const double> values) {
  StandardizeStats s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

double standardize(double x, const StandardizeStats& s) {
  if (!(s.stddev > 0.0)) return 0.0;
  return (x - s.mean) / s.stddev;
}

std::vector<double> one_hot(std::string_view value,
                            const std::vector<std::string>& categories) {
  std::vector<double> out(categories.size() + 1, 0.0);
  const auto it = std::lower_bound(categories.begin(), categories.end(), value);
  if (it != categories.end() && *it == value) {
    out[static_cast<std::size_t>(it - categories.begin())] = 1.0;
  } else {
    out.back() = 1.0;
  }
  return out;
}

std::string_view encoder_kind_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kQle: return "qle";
    case EncoderKind::kPle: return "ple";
    case EncoderKind::kQuantile: return "quantile";
    case EncoderKind::kClr: return "clr";
    case EncoderKind::kStandardize: return "standardize";
  }
  return "unknown";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  for (EncoderKind k : {EncoderKind::kQle, EncoderKind::kPle, EncoderKind::kQuantile,
                        EncoderKind::kClr, EncoderKind::kStandardize}) {
    if (encoder_kind_name(k) == name) return k;
  }
  throw ConfigError(fmt::format(
      "unknown encoder '{}' (expected qle|ple|quantile|clr|standardize)", name));
}

namespace {

bool is_binning(EncoderKind k) {
  return k == EncoderKind::kQle || k == EncoderKind::kPle || k == EncoderKind::kQuantile;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

EncoderSpec EncoderSpec::fit(const Dataset& train, EncoderKind kind,
                             std::size_t n_bins) {
  if (n_bins < 1) throw ConfigError("encoder n_bins must be >= 1");
  EncoderSpec spec;
  spec.kind_ = kind;
  spec.n_bins_ = n_bins;
  spec.feature_names_ = train.feature_names;
  spec.categorical_names_ = train.categorical_names;
  const std::size_t d = train.features.cols();
  spec.numeric_.resize(d);
  std::vector<double> values;
  for (std::size_t c = 0; c < d; ++c) {
    values.clear();
    for (std::size_t r = 0; r < train.rows(); ++r) {
      if (!train.is_missing(r, c)) values.push_back(train.features(r, c));
    }
    FeatureStats& fs = spec.numeric_[c];
    fs.median = median_of(values);
    if (values.empty()) {
      fs.degenerate = true;
      continue;
    }
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    fs.min = *mn;
    fs.max = *mx;
    fs.degenerate = fs.min == fs.max;
    fs.clr_shift = fs.min <= 0.0 ? 1.0 - fs.min : 0.0;
    const StandardizeStats st = fit_standardize(values);
    fs.mean = st.mean;
    fs.stddev = st.stddev;
    if (is_binning(kind) && !fs.degenerate) fs.bins = fit_bins(values, n_bins);
  }
  spec.categories_.resize(train.categorical.size());
  for (std::size_t j = 0; j < train.categorical.size(); ++j) {
    const std::set<std::string> seen(train.categorical[j].begin(),
                                     train.categorical[j].end());
    spec.categories_[j].assign(seen.begin(), seen.end());
  }
  return spec;
}

std::size_t EncoderSpec::output_dim() const { return output_names().size(); }

std::vector<std::string> EncoderSpec::output_names() const {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < numeric_.size(); ++c) {
    const FeatureStats& fs = numeric_[c];
    const std::string& base = feature_names_[c];
    switch (kind_) {
      case EncoderKind::kQle:
      case EncoderKind::kQuantile:
        if (!fs.degenerate) names.push_back(base);
        break;
      case EncoderKind::kPle:
        if (!fs.degenerate) {
          for (std::size_t i = 0; i < fs.bins.n_bins(); ++i) {
            names.push_back(fmt::format("{}_ple{}", base, i));
          }
        }
        break;
      case EncoderKind::kClr:
      case EncoderKind::kStandardize:
        names.push_back(base);
        break;
    }
  }
  for (std::size_t j = 0; j < categories_.size(); ++j) {
    for (const auto& cat : categories_[j]) {
      names.push_back(fmt::format("{}={}", categorical_names_[j], cat));
    }
    names.push_back(fmt::format("{}=<unknown>", categorical_names_[j]));
  }
  return names;
}

Matrix EncoderSpec::transform(const Dataset& ds) const {
  if (ds.features.cols() != numeric_.size()) {
    throw ShapeError(fmt::format("encoder fitted on {} numeric columns, got {}",
                                 numeric_.size(), ds.features.cols()));
  }
  if (ds.categorical.size() != categories_.size()) {
    throw ShapeError("encoder: categorical column count mismatch");
  }
  const std::size_t out_dim = output_dim();
  Matrix out(ds.rows(), out_dim);
  std::vector<double> clr_row(numeric_.size());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    auto dst = out.row(r);
    std::size_t k = 0;
    for (std::size_t c = 0; c < numeric_.size(); ++c) {
      const FeatureStats& fs = numeric_[c];
      const double x = ds.is_missing(r, c) ? fs.median : ds.features(r, c);
      switch (kind_) {
        case EncoderKind::kQle:
          if (!fs.degenerate) dst[k++] = qle_encode(x, fs.bins);
          break;
        case EncoderKind::kQuantile:
          if (!fs.degenerate) dst[k++] = quantile_encode(x, fs.bins);
          break;
        case EncoderKind::kPle:
          if (!fs.degenerate) {
            ple_encode_into(x, fs.bins, dst.subspan(k, fs.bins.n_bins()));
            k += fs.bins.n_bins();
          }
          break;
        case EncoderKind::kStandardize:
          dst[k++] = standardize(x, {fs.mean, fs.stddev});
          break;
        case EncoderKind::kClr:
          clr_row[c] = std::clamp(x, fs.min, fs.max) + fs.clr_shift;
          break;
      }
    }
    if (kind_ == EncoderKind::kClr && !numeric_.empty()) {
      const auto v = clr_encode(clr_row);
      std::copy(v.begin(), v.end(), dst.begin() + static_cast<std::ptrdiff_t>(k));
      k += v.size();
    }
    for (std::size_t j = 0; j < categories_.size(); ++j) {
      const auto v = one_hot(ds.categorical[j][r], categories_[j]);
      std::copy(v.begin(), v.end(), dst.begin() + static_cast<std::ptrdiff_t>(k));
      k += v.size();
    }
  }
  return out;
}

nlohmann::json EncoderSpec::to_json() const {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t c = 0; c < numeric_.size(); ++c) {
    const FeatureStats& fs = numeric_[c];
    features.push_back({{"name", feature_names_[c]},
                        {"median", fs.median},
                        {"degenerate", fs.degenerate},
                        {"boundaries", fs.bins.boundaries},
                        {"mean", fs.mean},
                        {"stddev", fs.stddev},
                        {"min", fs.min},
                        {"max", fs.max},
                        {"clr_shift", fs.clr_shift}});
  }
  nlohmann::json cats = nlohmann::json::array();
  for (std::size_t j = 0; j < categories_.size(); ++j) {
    cats.push_back({{"name", categorical_names_[j]}, {"categories", categories_[j]}});
  }
  return {{"kind", std::string(encoder_kind_name(kind_))},
          {"n_bins", n_bins_},
          {"numeric", features},
          {"categorical", cats}};
}

EncoderSpec EncoderSpec::from_json(const nlohmann::json& j) {
  EncoderSpec spec;
  try {
    spec.kind_ = parse_encoder_kind(j.at("kind").get<std::string>());
    spec.n_bins_ = j.at("n_bins").get<std::size_t>();
    for (const auto& f : j.at("numeric")) {
      spec.feature_names_.push_back(f.at("name").get<std::string>());
      FeatureStats fs;
      fs.median = f.at("median").get<double>();
      fs.degenerate = f.at("degenerate").get<bool>();
      fs.bins.boundaries = f.at("boundaries").get<std::vector<double>>();
      fs.mean = f.at("mean").get<double>();
      fs.stddev = f.at("stddev").get<double>();
      fs.min = f.at("min").get<double>();
      fs.max = f.at("max").get<double>();
      fs.clr_shift = f.at("clr_shift").get<double>();
      if (is_binning(spec.kind_) && !fs.degenerate && fs.bins.boundaries.size() < 2) {
        throw IoError("encoder: binned feature without boundaries");
      }
      spec.numeric_.push_back(std::move(fs));
    }
    for (const auto& c : j.at("categorical")) {
      spec.categorical_names_.push_back(c.at("name").get<std::string>());
      spec.categories_.push_back(c.at("categories").get<std::vector<std::string>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(fmt::format("encoder spec: {}", e.what()));
  }
  return spec;
}

}  // namespace tkgmlp

#include "leocell/regress.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "leocell/error.hpp"
#include "leocell/numfmt.hpp"

namespace leocell {

namespace {

constexpr std::size_t kCols = 4;
constexpr std::array<const char*, kCols> kColumnNames = {
    "intercept", "temperature_c", "dod_pct", "cycle"};
constexpr double kRankTolerance = 1e-10;

double norm(const std::vector<double>& v, std::size_t from = 0) {
  // Scaled accumulation keeps huge cycle columns from overflowing squares.
  double scale = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) scale = std::max(scale, std::abs(v[i]));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) {
    const double x = v[i] / scale;
    sum += x * x;
  }
  return scale * std::sqrt(sum);
}

}  // namespace

void LinearModel::validate() const {
  for (double v : {intercept, coeff_t, coeff_dod, coeff_cycle}) {
    if (!std::isfinite(v)) throw ValidationError("linear model coefficients must be finite");
  }
}

LinearModel fit_ols(const CyclingDataset& dataset, Target target) {
  const CyclingDataset data = dataset.with_target(target);
  const std::size_t n = data.size();
  if (n < kCols) {
    throw ValidationError("fit_ols needs at least 4 records with " +
                          std::string(to_string(target)) + " values, got " +
                          std::to_string(n));
  }

  // Column-major design matrix and right-hand side.
  std::array<std::vector<double>, kCols> a;
  for (auto& col : a) col.resize(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = data.records()[i];
    a[0][i] = 1.0;
    a[1][i] = r.temperature_c;
    a[2][i] = r.dod_pct;
    a[3][i] = static_cast<double>(r.cycle);
    y[i] = *r.target(target);
  }
  const std::array<std::vector<double>, kCols> design = a;

  std::array<double, kCols> original_norm{};
  for (std::size_t k = 0; k < kCols; ++k) original_norm[k] = norm(a[k]);

  // Householder QR, applied to y on the fly. R ends up in the upper triangle.
  std::vector<double> v(n);
  for (std::size_t k = 0; k < kCols; ++k) {
    const double alpha_norm = norm(a[k], k);
    if (!(alpha_norm > kRankTolerance * original_norm[k]) || original_norm[k] == 0.0) {
      throw RankDeficientError(
          kColumnNames[k],
          std::string("rank-deficient design: column '") + kColumnNames[k] +
              "' is constant or collinear with earlier columns");
    }
    const double alpha = a[k][k] > 0 ? -alpha_norm : alpha_norm;
    for (std::size_t i = k; i < n; ++i) v[i] = a[k][i];
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];

    auto reflect = [&](std::vector<double>& col) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i] * col[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) col[i] -= f * v[i];
    };
    for (std::size_t j = k; j < kCols; ++j) reflect(a[j]);
    reflect(y);
  }

  // Back substitution R beta = (Q^T y)[0..3].
  std::array<double, kCols> beta{};
  for (std::size_t k = kCols; k-- > 0;) {
    double s = y[k];
    for (std::size_t j = k + 1; j < kCols; ++j) s -= a[j][k] * beta[j];
    beta[k] = s / a[k][k];
  }

  LinearModel model;
  model.intercept = beta[0];
  model.coeff_t = beta[1];
  model.coeff_dod = beta[2];
  model.coeff_cycle = beta[3];
  model.target = target;

  double sse = 0.0, max_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fitted = 0.0;
    for (std::size_t k = 0; k < kCols; ++k) fitted += design[k][i] * beta[k];
    const double res = *data.records()[i].target(target) - fitted;
    sse += res * res;
    max_abs = std::max(max_abs, std::abs(res));
  }
  model.residual_stats = {std::sqrt(sse / static_cast<double>(n)), max_abs, n};
  model.ranges = input_ranges(data);
  model.validate();
  return model;
}

double predict_linear(const LinearModel& m, double t, double dod, double cycle) {
  return m.intercept + m.coeff_t * t + m.coeff_dod * dod + m.coeff_cycle * cycle;
}

LinearModel linear_from_params(const DegradationModelParams& p, Target target) {
  LinearModel m;
  m.target = target;
  if (target == Target::RC) {
    m.intercept = p.rc_intercept;
    m.coeff_t = -p.rc_coeff_t;
    m.coeff_dod = -p.rc_coeff_dod;
    m.coeff_cycle = -p.rc_coeff_cycle;
  } else {
    m.intercept = p.eodv_intercept;
    m.coeff_t = -p.eodv_coeff_t;
    m.coeff_dod = -p.eodv_coeff_dod;
    m.coeff_cycle = -p.eodv_coeff_cycle;
  }
  return m;
}

InputRanges input_ranges(const CyclingDataset& dataset) {
  if (dataset.empty()) throw ValidationError("no records to take ranges from");
  const auto& f = dataset.records().front();
  InputRanges r{{f.temperature_c, f.temperature_c},
                {f.dod_pct, f.dod_pct},
                {static_cast<double>(f.cycle), static_cast<double>(f.cycle)}};
  auto grow = [](Range& range, double x) {
    range.min = std::min(range.min, x);
    range.max = std::max(range.max, x);
  };
  for (const auto& rec : dataset.records()) {
    grow(r.temperature_c, rec.temperature_c);
    grow(r.dod_pct, rec.dod_pct);
    grow(r.cycle, static_cast<double>(rec.cycle));
  }
  return r;
}

std::vector<Effect> effect_ranking(const LinearModel& model,
                                   const InputRanges& ranges) {
  for (const Range* r : {&ranges.temperature_c, &ranges.dod_pct, &ranges.cycle}) {
    if (!(r->max > r->min)) throw ValidationError("effect_ranking: degenerate range");
  }
  std::vector<Effect> effects = {
      {Variable::Temperature, std::abs(model.coeff_t) * ranges.temperature_c.span()},
      {Variable::Dod, std::abs(model.coeff_dod) * ranges.dod_pct.span()},
      {Variable::Cycle, std::abs(model.coeff_cycle) * ranges.cycle.span()},
  };
  std::stable_sort(effects.begin(), effects.end(),
                   [](const Effect& a, const Effect& b) {
                     return a.magnitude > b.magnitude;
                   });
  return effects;
}

namespace {

std::string format_coeff(double magnitude) {
  char buf[64];
  if (magnitude != 0.0 && magnitude < 1e-3) {
    std::snprintf(buf, sizeof buf, "%.4E", magnitude);
  } else {
    std::snprintf(buf, sizeof buf, "%.4f", magnitude);
  }
  return buf;
}

}  // namespace

std::string format_equation(const LinearModel& m) {
  std::string out = std::string(to_string(m.target)) + " = " +
                    (m.intercept < 0 ? "-" : "") + format_coeff(std::abs(m.intercept));
  auto term = [&](double c, const char* name) {
    out += c < 0 ? " - " : " + ";
    out += format_coeff(std::abs(c));
    out += '*';
    out += name;
  };
  term(m.coeff_t, "T");
  term(m.coeff_dod, "DOD");
  term(m.coeff_cycle, "C");
  return out;
}

void linear_to_config(const LinearModel& m, KeyValueFile& kv) {
  kv.set("kind", "linear");
  kv.set("schema_version", "1");
  kv.set("target", std::string(to_string(m.target)));
  kv.set("intercept", format_double(m.intercept));
  kv.set("coeff_t", format_double(m.coeff_t));
  kv.set("coeff_dod", format_double(m.coeff_dod));
  kv.set("coeff_cycle", format_double(m.coeff_cycle));
  kv.set("rmse", format_double(m.residual_stats.rmse));
  kv.set("max_abs_residual", format_double(m.residual_stats.max_abs_residual));
  kv.set("n", std::to_string(m.residual_stats.n));
  if (m.ranges) {
    auto put = [&](const char* name, const Range& r) {
      kv.set(std::string("range.") + name + ".min", format_double(r.min));
      kv.set(std::string("range.") + name + ".max", format_double(r.max));
    };
    put("temperature_c", m.ranges->temperature_c);
    put("dod_pct", m.ranges->dod_pct);
    put("cycle", m.ranges->cycle);
  }
}

LinearModel linear_from_config(const KeyValueFile& kv) {
  if (kv.require("kind") != "linear") {
    throw ValidationError(kv.source() + ": not a linear model file");
  }
  if (kv.require("schema_version") != "1") {
    throw ValidationError(kv.source() + ": unsupported schema_version " +
                          kv.require("schema_version"));
  }
  LinearModel m;
  m.target = parse_target(kv.require("target"));
  m.intercept = parse_double(kv.require("intercept"), "intercept");
  m.coeff_t = parse_double(kv.require("coeff_t"), "coeff_t");
  m.coeff_dod = parse_double(kv.require("coeff_dod"), "coeff_dod");
  m.coeff_cycle = parse_double(kv.require("coeff_cycle"), "coeff_cycle");
  m.residual_stats.rmse = kv.get_double("rmse").value_or(0.0);
  m.residual_stats.max_abs_residual = kv.get_double("max_abs_residual").value_or(0.0);
  m.residual_stats.n = static_cast<std::size_t>(kv.get_int("n").value_or(0));
  if (kv.contains("range.temperature_c.min")) {
    auto get = [&](const char* name) {
      return Range{parse_double(kv.require(std::string("range.") + name + ".min"), name),
                   parse_double(kv.require(std::string("range.") + name + ".max"), name)};
    };
    m.ranges = InputRanges{get("temperature_c"), get("dod_pct"), get("cycle")};
  }
  m.validate();
  return m;
}

}  // namespace leocell

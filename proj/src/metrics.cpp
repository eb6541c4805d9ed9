#include "leocell/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "leocell/error.hpp"
#include "leocell/numfmt.hpp"

namespace leocell {

void PairedSeries::validate() const {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!std::isfinite(pairs[i].first) || !std::isfinite(pairs[i].second)) {
      throw ValidationError("pair " + std::to_string(i) + " has a non-finite value");
    }
  }
}

double aape(const PairedSeries& s) {
  s.validate();
  if (s.pairs.empty()) throw ValidationError("AAPE of an empty series");
  double sum = 0.0;
  for (std::size_t i = 0; i < s.pairs.size(); ++i) {
    const auto [obs, pred] = s.pairs[i];
    if (obs == 0.0) {
      throw ValidationError("AAPE undefined: observed value is 0 at pair " +
                            std::to_string(i));
    }
    sum += std::abs(obs - pred) / std::abs(obs);
  }
  return sum / static_cast<double>(s.pairs.size()) * 100.0;
}

Correlation pearson(const PairedSeries& s) {
  s.validate();
  const std::size_t n = s.pairs.size();
  if (n < 2) throw ValidationError("correlation needs at least 2 pairs");
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : s.pairs) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (auto [x, y] : s.pairs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError(std::string("correlation undefined: ") +
                          (sxx == 0.0 ? "observed" : "predicted") +
                          " series is constant");
  }
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);
  return {r, r * r};
}

double coefficient_of_variation(const PairedSeries& s) {
  s.validate();
  if (s.pairs.empty()) throw ValidationError("CV of an empty series");
  double sse = 0.0, mean_obs = 0.0;
  for (auto [obs, pred] : s.pairs) {
    sse += (pred - obs) * (pred - obs);
    mean_obs += obs;
  }
  const auto n = static_cast<double>(s.pairs.size());
  mean_obs /= n;
  if (mean_obs == 0.0) throw ValidationError("CV undefined: observed mean is 0");
  return std::sqrt(sse / n) / mean_obs;
}

std::string_view to_string(BlandAltmanMode mode) {
  return mode == BlandAltmanMode::Absolute ? "absolute" : "percent";
}

BlandAltmanMode parse_bland_altman_mode(std::string_view text) {
  if (text == "absolute") return BlandAltmanMode::Absolute;
  if (text == "percent") return BlandAltmanMode::PercentOfMean;
  throw ValidationError("unknown Bland-Altman mode '" + std::string(text) +
                        "' (expected absolute or percent)");
}

BlandAltmanStats bland_altman(const PairedSeries& s, BlandAltmanMode mode) {
  s.validate();
  const std::size_t n = s.pairs.size();
  if (n < 2) throw ValidationError("Bland-Altman needs at least 2 pairs");
  BlandAltmanStats st;
  st.mode = mode;
  st.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [obs, pred] = s.pairs[i];
    const double mean = 0.5 * (obs + pred);
    double diff = pred - obs;
    if (mode == BlandAltmanMode::PercentOfMean) {
      if (mean == 0.0) {
        throw ValidationError("percent Bland-Altman undefined: pair " +
                              std::to_string(i) + " has mean 0");
      }
      diff = 100.0 * diff / mean;
    }
    st.points.emplace_back(mean, diff);
  }
  double sum = 0.0;
  for (auto [m, d] : st.points) sum += d;
  st.bias = sum / static_cast<double>(n);
  double ss = 0.0;
  for (auto [m, d] : st.points) ss += (d - st.bias) * (d - st.bias);
  st.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
  st.loa_low = st.bias - kLimitsOfAgreementZ * st.sd_diff;
  st.loa_high = st.bias + kLimitsOfAgreementZ * st.sd_diff;
  auto [lo, hi] = std::minmax_element(
      st.points.begin(), st.points.end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  st.min_diff = lo->second;
  st.max_diff = hi->second;
  return st;
}

namespace {

template <typename T, typename F>
Stat<T> attempt(F&& f) {
  try {
    return {f(), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace

ComparisonReport comparison_report(const PairedSeries& s, BlandAltmanMode mode) {
  ComparisonReport r;
  r.label = s.label;
  r.units = s.units;
  r.n = s.size();
  r.aape_pct = attempt<double>([&] { return aape(s); });
  r.correlation = attempt<Correlation>([&] { return pearson(s); });
  r.cv = attempt<double>([&] { return coefficient_of_variation(s); });
  r.bland_altman = attempt<BlandAltmanStats>([&] { return bland_altman(s, mode); });
  return r;
}

namespace {

template <typename T, typename F>
nlohmann::json stat_json(const Stat<T>& stat, F&& render) {
  if (stat.value) return render(*stat.value);
  return nlohmann::json{{"available", false}, {"reason", stat.reason}};
}

}  // namespace

nlohmann::json to_json(const ComparisonReport& r) {
  using nlohmann::json;
  json j;
  j["label"] = r.label;
  j["units"] = r.units;
  j["n"] = r.n;
  j["difference_convention"] = "predicted - observed";
  j["aape_pct"] = stat_json(r.aape_pct, [](double v) {
    return json{{"available", true}, {"value", v}};
  });
  j["correlation"] = stat_json(r.correlation, [](const Correlation& c) {
    return json{{"available", true}, {"pearson_r", c.r}, {"r_squared", c.r_squared}};
  });
  j["cv"] = stat_json(r.cv, [](double v) {
    return json{{"available", true}, {"value", v}};
  });
  j["bland_altman"] = stat_json(r.bland_altman, [](const BlandAltmanStats& b) {
    return json{{"available", true},
                {"mode", std::string(to_string(b.mode))},
                {"bias", b.bias},
                {"sd_diff", b.sd_diff},
                {"loa_low", b.loa_low},
                {"loa_high", b.loa_high},
                {"min_diff", b.min_diff},
                {"max_diff", b.max_diff},
                {"z", kLimitsOfAgreementZ}};
  });
  return j;
}

OneToOnePlot one_to_one_export(const PairedSeries& s) {
  s.validate();
  OneToOnePlot plot;
  plot.data = s.pairs;
  if (!s.pairs.empty()) {
    double lo = s.pairs.front().first, hi = lo;
    for (auto [obs, pred] : s.pairs) {
      lo = std::min({lo, obs, pred});
      hi = std::max({hi, obs, pred});
    }
    plot.identity = std::make_pair(lo, hi);
  }
  return plot;
}

void write_one_to_one_csv(const OneToOnePlot& plot, std::ostream& out) {
  out << "series,observed,predicted\n";
  for (auto [obs, pred] : plot.data) {
    out << "data," << format_double(obs) << ',' << format_double(pred) << '\n';
  }
  if (plot.identity) {
    const auto [lo, hi] = *plot.identity;
    out << "identity," << format_double(lo) << ',' << format_double(lo) << '\n';
    out << "identity," << format_double(hi) << ',' << format_double(hi) << '\n';
  }
}

void write_bland_altman_csv(const BlandAltmanStats& st, std::ostream& out) {
  out << (st.mode == BlandAltmanMode::Absolute
              ? "mean,difference_predicted_minus_observed\n"
              : "mean,pct_difference_predicted_minus_observed\n");
  for (auto [m, d] : st.points) out << format_double(m) << ',' << format_double(d) << '\n';
}

}  // namespace leocell

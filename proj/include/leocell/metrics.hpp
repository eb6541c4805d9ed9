#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace leocell {

/// Observed/predicted pairs in the same units.
struct PairedSeries {
  std::vector<std::pair<double, double>> pairs;  ///< (observed, predicted)
  std::string label;
  std::string units;

  /// Throws ValidationError on any non-finite value.
  void validate() const;
  std::size_t size() const { return pairs.size(); }
};

/// Average absolute percentage error: mean |obs - pred| / |obs| * 100.
double aape(const PairedSeries& series);

struct Correlation {
  double r = 0.0;
  double r_squared = 0.0;  ///< r * r
};

/// Sample Pearson product-moment correlation (mean-centred two-pass form).
Correlation pearson(const PairedSeries& series);

/// RMSE(pred - obs) / mean(obs).
double coefficient_of_variation(const PairedSeries& series);

enum class BlandAltmanMode { Absolute, PercentOfMean };

std::string_view to_string(BlandAltmanMode mode);
/// "absolute" or "percent".
BlandAltmanMode parse_bland_altman_mode(std::string_view text);

/// Differences are predicted - observed (positive bias = over-prediction).
/// In PercentOfMean mode each difference is 100*(pred - obs)/pair_mean.
struct BlandAltmanStats {
  BlandAltmanMode mode = BlandAltmanMode::Absolute;
  std::vector<std::pair<double, double>> points;  ///< (pair mean, difference)
  double bias = 0.0;
  double sd_diff = 0.0;  ///< sample SD, n - 1
  double loa_low = 0.0;
  double loa_high = 0.0;
  double min_diff = 0.0;
  double max_diff = 0.0;
};

inline constexpr double kLimitsOfAgreementZ = 1.96;

BlandAltmanStats bland_altman(const PairedSeries& series, BlandAltmanMode mode);

/// A statistic that may be unavailable, with the reason when it is.
template <typename T>
struct Stat {
  std::optional<T> value;
  std::string reason;

  bool available() const { return value.has_value(); }
};

struct ComparisonReport {
  std::string label;
  std::string units;
  std::size_t n = 0;
  Stat<double> aape_pct;
  Stat<Correlation> correlation;
  Stat<double> cv;
  Stat<BlandAltmanStats> bland_altman;
};

/// Every statistic computed independently; one failing marks only that field
/// unavailable.
ComparisonReport comparison_report(const PairedSeries& series,
                                   BlandAltmanMode ba_mode);

nlohmann::json to_json(const ComparisonReport& report);

/// Data rows plus the two identity-line endpoints (lo, lo) and (hi, hi) with
/// lo/hi the extremes over both columns.
struct OneToOnePlot {
  std::vector<std::pair<double, double>> data;
  std::optional<std::pair<double, double>> identity;  ///< (lo, hi)
};

OneToOnePlot one_to_one_export(const PairedSeries& series);

/// Header `series,observed,predicted`; rows tagged `data` or `identity`.
void write_one_to_one_csv(const OneToOnePlot& plot, std::ostream& out);
/// Header `mean,difference_predicted_minus_observed` (absolute) or
/// `mean,pct_difference_predicted_minus_observed` (percent of pair mean).
void write_bland_altman_csv(const BlandAltmanStats& stats, std::ostream& out);

}  // namespace leocell

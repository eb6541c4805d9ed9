#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace leocell {

/// Which quantity a model predicts. RC and EODV always get separate models.
enum class Target { RC, EODV };

std::string_view to_string(Target target);
/// Accepts "rc" / "eodv" in any case.
Target parse_target(std::string_view text);

/// Failure thresholds for a cell: capacity below 40 % or EODV below 2.5 V.
inline constexpr double kRcFailurePct = 40.0;
inline constexpr double kEodvFailureV = 2.5;
inline constexpr double kRcMaxPct = 120.0;

/// One (temperature, DOD, cycle) observation.
struct CyclingRecord {
  double temperature_c = 0.0;
  double dod_pct = 0.0;
  std::int64_t cycle = 0;
  std::optional<double> rc_pct;
  std::optional<double> eodv_v;

  std::optional<double> target(Target which) const {
    return which == Target::RC ? rc_pct : eodv_v;
  }

  bool operator==(const CyclingRecord&) const = default;
};

/// Throws ValidationError if a record breaks a field invariant.
void validate(const CyclingRecord& record);

/// A (temperature, DOD) test condition.
struct Setting {
  double temperature_c = 0.0;
  double dod_pct = 0.0;

  auto operator<=>(const Setting&) const = default;
};

/// Ordered, validated collection of records. Records are kept sorted by
/// (temperature, DOD, cycle) and (T, DOD, cycle) keys are unique.
class CyclingDataset {
 public:
  CyclingDataset() = default;
  explicit CyclingDataset(std::vector<CyclingRecord> records,
                          std::string source = {});

  std::span<const CyclingRecord> records() const { return records_; }
  /// Distinct settings in sorted order.
  std::vector<Setting> settings() const;
  const std::string& source() const { return source_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// True when every record carries the target value.
  bool has_target(Target which) const;
  /// Records that carry the target value.
  CyclingDataset with_target(Target which) const;

  bool operator==(const CyclingDataset& other) const {
    return records_ == other.records_;
  }

 private:
  std::vector<CyclingRecord> records_;
  std::string source_;
};

inline constexpr std::string_view kCsvHeader =
    "temperature_c,dod_pct,cycle,rc_pct,eodv_v";

CyclingDataset read_csv(const std::filesystem::path& path);
CyclingDataset parse_csv(std::istream& in, std::string source = {});
void write_csv(const CyclingDataset& dataset, const std::filesystem::path& path);
void write_csv(const CyclingDataset& dataset, std::ostream& out);

/// Partition each (T, DOD) group by the rank of its cycle within the group:
/// ranks 0, 2, 4, ... go to `first`, odd ranks to `second`.
std::pair<CyclingDataset, CyclingDataset> split_even_odd(
    const CyclingDataset& dataset);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

enum class Variable { Temperature, Dod, Cycle, Target };

std::string_view to_string(Variable variable);
/// "temperature_c", "dod_pct", "cycle", "target". Throws ValidationError for
/// anything else.
Variable parse_variable(std::string_view text);

struct Range {
  double min = 0.0;
  double max = 1.0;

  double span() const { return max - min; }
  bool contains(double x) const { return x >= min && x <= max; }
  bool operator==(const Range&) const = default;
};

/// Per-variable min-max affine scaling onto [output_low, output_high].
/// Out-of-range values extrapolate linearly; nothing is clamped.
struct NormalizationSpec {
  Range temperature_c;
  Range dod_pct;
  Range cycle;
  Range target;
  double output_low = 0.1;
  double output_high = 0.9;

  void validate() const;
  const Range& range(Variable variable) const;

  double normalize(Variable variable, double value) const;
  double denormalize(Variable variable, double scaled) const;
  double normalize(std::string_view variable, double value) const {
    return normalize(parse_variable(variable), value);
  }

  /// First input variable (T, DOD, cycle order) whose value falls outside its
  /// fitted range, if any. This is the extrapolation warning channel.
  std::optional<Variable> first_out_of_range(double temperature_c,
                                             double dod_pct,
                                             double cycle) const;

  bool operator==(const NormalizationSpec&) const = default;
};

NormalizationSpec fit_normalization(const CyclingDataset& dataset,
                                    Target target, double output_low = 0.1,
                                    double output_high = 0.9);

}  // namespace leocell

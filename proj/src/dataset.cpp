#include "leocell/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "leocell/error.hpp"
#include "leocell/numfmt.hpp"

namespace leocell {

std::string_view to_string(Target target) {
  return target == Target::RC ? "RC" : "EODV";
}

Target parse_target(std::string_view text) {
  std::string lower(trim(text));
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "rc") return Target::RC;
  if (lower == "eodv") return Target::EODV;
  throw ValidationError("unknown target '" + std::string(text) +
                        "' (expected rc or eodv)");
}

void validate(const CyclingRecord& r) {
  if (!std::isfinite(r.temperature_c) || !std::isfinite(r.dod_pct)) {
    throw ValidationError("temperature and DOD must be finite");
  }
  if (r.cycle < 0) {
    throw ValidationError("cycle must be >= 0, got " + std::to_string(r.cycle));
  }
  if (r.rc_pct && !(*r.rc_pct >= 0.0 && *r.rc_pct <= kRcMaxPct)) {
    throw ValidationError("rc_pct must lie in [0, 120], got " +
                          format_double(*r.rc_pct));
  }
  if (r.eodv_v && !(*r.eodv_v > 0.0 && std::isfinite(*r.eodv_v))) {
    throw ValidationError("eodv_v must be > 0, got " +
                          format_double(*r.eodv_v));
  }
}

namespace {

auto key(const CyclingRecord& r) {
  return std::make_tuple(r.temperature_c, r.dod_pct, r.cycle);
}

std::string describe_key(const CyclingRecord& r) {
  return "(T=" + format_double(r.temperature_c) +
         ", DOD=" + format_double(r.dod_pct) +
         ", cycle=" + std::to_string(r.cycle) + ")";
}

}  // namespace

CyclingDataset::CyclingDataset(std::vector<CyclingRecord> records,
                               std::string source)
    : records_(std::move(records)), source_(std::move(source)) {
  for (const auto& r : records_) validate(r);
  std::stable_sort(records_.begin(), records_.end(),
                   [](const auto& a, const auto& b) { return key(a) < key(b); });
  auto dup = std::adjacent_find(
      records_.begin(), records_.end(),
      [](const auto& a, const auto& b) { return key(a) == key(b); });
  if (dup != records_.end()) {
    throw ValidationError("duplicate record " + describe_key(*dup));
  }
}

std::vector<Setting> CyclingDataset::settings() const {
  std::vector<Setting> out;
  for (const auto& r : records_) {
    Setting s{r.temperature_c, r.dod_pct};
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  return out;
}

bool CyclingDataset::has_target(Target which) const {
  return std::all_of(records_.begin(), records_.end(),
                     [&](const auto& r) { return r.target(which).has_value(); });
}

CyclingDataset CyclingDataset::with_target(Target which) const {
  CyclingDataset out;
  out.source_ = source_;
  std::copy_if(records_.begin(), records_.end(),
               std::back_inserter(out.records_),
               [&](const auto& r) { return r.target(which).has_value(); });
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::optional<double> optional_field(std::string_view field,
                                     std::string_view what) {
  if (trim(field).empty()) return std::nullopt;
  return parse_double(field, what);
}

}  // namespace

CyclingDataset parse_csv(std::istream& in, std::string source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(source + ": missing header line");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (trim(line) != kCsvHeader) {
    throw ValidationError(source + ": line 1: expected header '" +
                          std::string(kCsvHeader) + "'");
  }

  std::vector<CyclingRecord> records;
  std::map<std::tuple<double, double, std::int64_t>, std::size_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = source + ": line " + std::to_string(line_no);
    try {
      auto fields = split_fields(line);
      if (fields.size() != 5) {
        throw ValidationError("expected 5 fields, got " +
                              std::to_string(fields.size()));
      }
      CyclingRecord r;
      r.temperature_c = parse_double(fields[0], "temperature_c");
      r.dod_pct = parse_double(fields[1], "dod_pct");
      r.cycle = parse_int64(fields[2], "cycle");
      r.rc_pct = optional_field(fields[3], "rc_pct");
      r.eodv_v = optional_field(fields[4], "eodv_v");
      validate(r);
      auto [it, inserted] = seen.emplace(key(r), line_no);
      if (!inserted) {
        throw ValidationError("duplicate record " + describe_key(r) +
                              " (first seen on line " +
                              std::to_string(it->second) + ")");
      }
      records.push_back(r);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return CyclingDataset(std::move(records), std::move(source));
}

CyclingDataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

void write_csv(const CyclingDataset& dataset, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : dataset.records()) {
    out << format_double(r.temperature_c) << ',' << format_double(r.dod_pct)
        << ',' << r.cycle << ',';
    if (r.rc_pct) out << format_double(*r.rc_pct);
    out << ',';
    if (r.eodv_v) out << format_double(*r.eodv_v);
    out << '\n';
  }
}

void write_csv(const CyclingDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_csv(dataset, out);
  out.flush();
  if (!out) throw ValidationError("error writing " + path.string());
}

std::pair<CyclingDataset, CyclingDataset> split_even_odd(
    const CyclingDataset& dataset) {
  std::vector<CyclingRecord> even, odd;
  std::size_t rank = 0;
  Setting current{};
  bool first = true;
  // Records are sorted by (T, DOD, cycle), so ranks restart at each setting.
  for (const auto& r : dataset.records()) {
    Setting s{r.temperature_c, r.dod_pct};
    if (first || s != current) {
      rank = 0;
      current = s;
      first = false;
    }
    (rank % 2 == 0 ? even : odd).push_back(r);
    ++rank;
  }
  return {CyclingDataset(std::move(even), dataset.source()),
          CyclingDataset(std::move(odd), dataset.source())};
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

std::string_view to_string(Variable variable) {
  switch (variable) {
    case Variable::Temperature: return "temperature_c";
    case Variable::Dod: return "dod_pct";
    case Variable::Cycle: return "cycle";
    case Variable::Target: return "target";
  }
  return "?";
}

Variable parse_variable(std::string_view text) {
  for (auto v : {Variable::Temperature, Variable::Dod, Variable::Cycle,
                 Variable::Target}) {
    if (text == to_string(v)) return v;
  }
  throw ValidationError("unknown variable '" + std::string(text) + "'");
}

void NormalizationSpec::validate() const {
  for (auto v : {Variable::Temperature, Variable::Dod, Variable::Cycle,
                 Variable::Target}) {
    const Range& r = range(v);
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.max > r.min)) {
      throw ValidationError("degenerate normalization range for " +
                            std::string(to_string(v)) + ": [" +
                            format_double(r.min) + ", " +
                            format_double(r.max) + "]");
    }
  }
  if (!(output_low > 0.0 && output_low < output_high && output_high < 1.0)) {
    throw ValidationError(
        "normalization bounds must satisfy 0 < output_low < output_high < 1");
  }
}

const Range& NormalizationSpec::range(Variable variable) const {
  switch (variable) {
    case Variable::Temperature: return temperature_c;
    case Variable::Dod: return dod_pct;
    case Variable::Cycle: return cycle;
    case Variable::Target: return target;
  }
  throw ValidationError("unknown variable");
}

double NormalizationSpec::normalize(Variable variable, double value) const {
  const Range& r = range(variable);
  return output_low + (value - r.min) / r.span() * (output_high - output_low);
}

double NormalizationSpec::denormalize(Variable variable, double scaled) const {
  const Range& r = range(variable);
  return r.min + (scaled - output_low) / (output_high - output_low) * r.span();
}

std::optional<Variable> NormalizationSpec::first_out_of_range(
    double temperature_c_value, double dod_pct_value,
    double cycle_value) const {
  if (!temperature_c.contains(temperature_c_value)) return Variable::Temperature;
  if (!dod_pct.contains(dod_pct_value)) return Variable::Dod;
  if (!cycle.contains(cycle_value)) return Variable::Cycle;
  return std::nullopt;
}

NormalizationSpec fit_normalization(const CyclingDataset& dataset,
                                    Target target, double output_low,
                                    double output_high) {
  if (dataset.empty()) {
    throw ValidationError("cannot fit normalization on an empty dataset");
  }
  if (!dataset.has_target(target)) {
    throw ValidationError("dataset has records without " +
                          std::string(to_string(target)) + " values");
  }
  auto init = [](double x) { return Range{x, x}; };
  auto grow = [](Range& r, double x) {
    r.min = std::min(r.min, x);
    r.max = std::max(r.max, x);
  };
  const auto& first = dataset.records().front();
  NormalizationSpec spec{init(first.temperature_c), init(first.dod_pct),
                         init(static_cast<double>(first.cycle)),
                         init(*first.target(target)), output_low, output_high};
  for (const auto& r : dataset.records()) {
    grow(spec.temperature_c, r.temperature_c);
    grow(spec.dod_pct, r.dod_pct);
    grow(spec.cycle, static_cast<double>(r.cycle));
    grow(spec.target, *r.target(target));
  }
  spec.validate();
  return spec;
}

}  // namespace leocell

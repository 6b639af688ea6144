#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ssm {

/// One (possibly multivariate) observation with per-coordinate missing flags.
/// Missing coordinates hold NaN in `value`.
struct ObsRecord {
  Eigen::VectorXd value;
  std::vector<std::uint8_t> observed;

  ObsRecord() = default;
  explicit ObsRecord(const Eigen::VectorXd& v);
  ObsRecord(const Eigen::VectorXd& v, std::vector<std::uint8_t> obs_flags);

  int dim() const { return static_cast<int>(value.size()); }
  bool is_observed(int c) const { return observed[c] != 0; }
  bool all_missing() const;
  bool any_missing() const;
};

class TimeSeriesData {
 public:
  TimeSeriesData() = default;
  TimeSeriesData(std::vector<double> times, std::vector<ObsRecord> records,
                 std::map<std::string, std::vector<double>> covariates = {},
                 std::optional<std::vector<int>> quality = std::nullopt);

  int size() const { return static_cast<int>(times_.size()); }
  int obs_dim() const { return records_.empty() ? 0 : records_[0].dim(); }
  const std::vector<double>& times() const { return times_; }
  double time(int t) const { return times_[t]; }
  const ObsRecord& record(int i) const { return records_[i]; }
  const std::vector<ObsRecord>& records() const { return records_; }

  bool has_covariate(const std::string& name) const { return covariates_.count(name) > 0; }
  const std::vector<double>& covariate(const std::string& name) const;  // DataError if absent
  const std::map<std::string, std::vector<double>>& covariates() const { return covariates_; }

  bool has_quality() const { return quality_.has_value(); }
  int quality(int i) const;
  const std::optional<std::vector<int>>& quality_classes() const { return quality_; }

  /// Copy with the observation records in [from, to) only (times preserved).
  TimeSeriesData head(int n) const;
  /// Copy with the records at the given indices turned fully missing.
  TimeSeriesData with_missing(const std::vector<int>& indices) const;

  /// CSV layout: header `time,y1[,y2,...][,quality][,<covariate>...]`; missing
  /// observation cells are empty or NA. Times need not be equally spaced.
  static TimeSeriesData read_csv(const std::string& path);
  void write_csv(const std::string& path) const;

 private:
  std::vector<double> times_;
  std::vector<ObsRecord> records_;
  std::map<std::string, std::vector<double>> covariates_;
  std::optional<std::vector<int>> quality_;
};

}  // namespace ssm

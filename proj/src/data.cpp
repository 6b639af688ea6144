#include "ssm/data.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ssm/errors.hpp"

namespace ssm {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim whitespace
    size_t b = field.find_first_not_of(" \t\r");
    size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_missing_field(const std::string& s) { return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan"; }
}  // namespace

ObsRecord::ObsRecord(const Eigen::VectorXd& v) : value(v), observed(v.size(), 1) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::isnan(v[i])) observed[i] = 0;
  }
}

ObsRecord::ObsRecord(const Eigen::VectorXd& v, std::vector<std::uint8_t> obs_flags)
    : value(v), observed(std::move(obs_flags)) {
  if (static_cast<int>(observed.size()) != v.size()) throw DataError("ObsRecord: flag count mismatch");
  for (int i = 0; i < value.size(); ++i) {
    if (!observed[i]) value[i] = kNaN;
  }
}

bool ObsRecord::all_missing() const {
  for (auto f : observed)
    if (f) return false;
  return true;
}

bool ObsRecord::any_missing() const {
  for (auto f : observed)
    if (!f) return true;
  return false;
}

TimeSeriesData::TimeSeriesData(std::vector<double> times, std::vector<ObsRecord> records,
                               std::map<std::string, std::vector<double>> covariates,
                               std::optional<std::vector<int>> quality)
    : times_(std::move(times)), records_(std::move(records)), covariates_(std::move(covariates)),
      quality_(std::move(quality)) {
  if (times_.empty()) throw DataError("TimeSeriesData: need at least one record (T >= 1)");
  if (times_.size() != records_.size()) throw DataError("TimeSeriesData: times/records size mismatch");
  for (size_t t = 1; t < times_.size(); ++t) {
    if (!(times_[t] > times_[t - 1])) throw DataError("TimeSeriesData: times must be strictly increasing");
  }
  const int d = records_[0].dim();
  for (const auto& r : records_) {
    if (r.dim() != d) throw DataError("TimeSeriesData: observation records must share one dimension");
  }
  for (const auto& [name, v] : covariates_) {
    if (v.size() != times_.size()) throw DataError("covariate '" + name + "' length does not match times");
    for (double x : v) {
      if (!std::isfinite(x)) throw DataError("covariate '" + name + "' contains a missing value; missing covariates are rejected");
    }
  }
  if (quality_ && quality_->size() != times_.size()) throw DataError("quality labels must have one entry per record");
}

const std::vector<double>& TimeSeriesData::covariate(const std::string& name) const {
  auto it = covariates_.find(name);
  if (it == covariates_.end()) throw DataError("covariate '" + name + "' is not present in the data");
  return it->second;
}

int TimeSeriesData::quality(int i) const {
  if (!quality_) throw DataError("data has no quality classes");
  return (*quality_)[i];
}

TimeSeriesData TimeSeriesData::head(int n) const {
  if (n < 1 || n > size()) throw DataError("head: n out of range");
  std::vector<double> t(times_.begin(), times_.begin() + n);
  std::vector<ObsRecord> r(records_.begin(), records_.begin() + n);
  std::map<std::string, std::vector<double>> cov;
  for (const auto& [name, v] : covariates_) cov[name] = std::vector<double>(v.begin(), v.begin() + n);
  std::optional<std::vector<int>> q;
  if (quality_) q = std::vector<int>(quality_->begin(), quality_->begin() + n);
  return TimeSeriesData(std::move(t), std::move(r), std::move(cov), std::move(q));
}

TimeSeriesData TimeSeriesData::with_missing(const std::vector<int>& indices) const {
  TimeSeriesData out = *this;
  for (int i : indices) {
    if (i < 0 || i >= size()) throw DataError("with_missing: index out of range");
    for (int c = 0; c < out.records_[i].dim(); ++c) {
      out.records_[i].observed[c] = 0;
      out.records_[i].value[c] = kNaN;
    }
  }
  return out;
}

TimeSeriesData TimeSeriesData::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file '" + path + "'");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "time") throw DataError("first CSV column must be 'time'");

  std::vector<int> ycols;
  int qcol = -1;
  std::vector<std::pair<int, std::string>> covcols;
  for (size_t c = 1; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h.size() >= 2 && h[0] == 'y' && std::isdigit(static_cast<unsigned char>(h[1]))) {
      ycols.push_back(static_cast<int>(c));
    } else if (h == "quality") {
      qcol = static_cast<int>(c);
    } else {
      covcols.emplace_back(static_cast<int>(c), h);
    }
  }
  if (ycols.empty()) throw DataError("no observation columns (y1, y2, ...) in '" + path + "'");

  std::vector<double> times;
  std::vector<ObsRecord> records;
  std::vector<int> quality;
  std::map<std::string, std::vector<double>> covs;
  for (const auto& [c, name] : covcols) covs[name] = {};

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() < header.size())
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " fields");
    try {
      times.push_back(std::stod(f[0]));
      Eigen::VectorXd y(ycols.size());
      for (size_t k = 0; k < ycols.size(); ++k) y[k] = is_missing_field(f[ycols[k]]) ? kNaN : std::stod(f[ycols[k]]);
      records.emplace_back(y);
      if (qcol >= 0) quality.push_back(is_missing_field(f[qcol]) ? -1 : std::stoi(f[qcol]));
      for (const auto& [c, name] : covcols) {
        if (is_missing_field(f[c])) throw DataError("line " + std::to_string(lineno) + ": missing covariate '" + name + "'");
        covs[name].push_back(std::stod(f[c]));
      }
    } catch (const std::invalid_argument&) {
      throw DataError("line " + std::to_string(lineno) + ": malformed numeric field");
    }
  }
  std::optional<std::vector<int>> q;
  if (qcol >= 0) q = std::move(quality);
  return TimeSeriesData(std::move(times), std::move(records), std::move(covs), std::move(q));
}

void TimeSeriesData::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write data file '" + path + "'");
  out.precision(17);
  out << "time";
  for (int c = 0; c < obs_dim(); ++c) out << ",y" << (c + 1);
  if (quality_) out << ",quality";
  for (const auto& [name, v] : covariates_) out << "," << name;
  out << "\n";
  for (int t = 0; t < size(); ++t) {
    out << times_[t];
    for (int c = 0; c < obs_dim(); ++c) {
      out << ",";
      if (records_[t].is_observed(c)) out << records_[t].value[c];
      else out << "NA";
    }
    if (quality_) out << "," << (*quality_)[t];
    for (const auto& [name, v] : covariates_) out << "," << v[t];
    out << "\n";
  }
}

}  // namespace ssm

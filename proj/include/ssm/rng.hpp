#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace ssm {

// All stochastic code draws from RngStream. Streams are identified by a 64-bit
// key; sub-tasks derive child streams from (key, index) so results do not
// depend on execution order or worker count. Sampling algorithms are
// implemented here rather than taken from <random> so that output is pinned
// by this code, not by the standard library vendor.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key);

  /// Child stream for sub-task `index`; independent of draws made so far.
  RngStream derive(std::uint64_t index) const;
  static RngStream derive_path(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();
  double uniform();                 // U[0,1)
  double normal();                  // N(0,1), Marsaglia polar
  double gamma(double shape);       // Gamma(shape, scale=1), Marsaglia-Tsang
  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }
  double student_t(double df);
  int uniform_int(int n);           // {0, ..., n-1}

 private:
  std::uint64_t key_;
  std::array<std::uint64_t, 4> s_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ssm

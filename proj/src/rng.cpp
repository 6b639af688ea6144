#include "ssm/rng.hpp"

#include <cmath>

#include "ssm/errors.hpp"

namespace ssm {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t key) : key_(key) {
  std::uint64_t x = key;
  for (auto& w : s_) w = splitmix64(x);
}

RngStream RngStream::derive(std::uint64_t index) const {
  std::uint64_t x = key_ ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  std::uint64_t k = splitmix64(x);
  k = splitmix64(x) ^ k;
  return RngStream(k);
}

RngStream RngStream::derive_path(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  RngStream s(master);
  for (auto idx : path) s = s.derive(idx);
  return s;
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma sampler requires shape > 0");
  if (shape < 1.0) {
    // boost: Gamma(a) = Gamma(a+1) * U^{1/a}
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u > 0 ? u : 1e-300, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::student_t(double df) {
  if (!(df > 0.0)) throw DomainError("student_t sampler requires df > 0");
  const double z = normal();
  const double w = chi_squared(df);
  return z / std::sqrt(w / df);
}

int RngStream::uniform_int(int n) {
  if (n <= 0) throw DomainError("uniform_int requires n > 0");
  return static_cast<int>(uniform() * n) % n;
}

}  // namespace ssm

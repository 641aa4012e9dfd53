#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace attnret {

/// mt19937_64 bits with our own uniform and Box-Muller conversions, so the
/// stream is identical across standard library implementations (the
/// std:: distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();                  // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  std::size_t below(std::size_t n);  // [0, n), n > 0
  std::vector<double> unit_vector(std::size_t dim);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace attnret

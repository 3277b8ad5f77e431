#include "enkf/rng.hpp"

namespace enkf {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Purpose purpose,
                          std::uint64_t member, std::uint64_t step) {
  std::uint64_t h = mix64(master + 0x632BE59BD9B4E019ULL);
  h = mix64(h ^ (static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL));
  h = mix64(h ^ (member + 0x8CB92BA72F3D8DD7ULL));
  h = mix64(h ^ (step + 0xA0761D6478BD642FULL));
  return h;
}

Eigen::VectorXd RngStream::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

}  // namespace enkf

#include "rdpg/random.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

std::string_view to_string(Method m) {
  return m == Method::Ase ? "ASE" : "LSE";
}

std::string_view to_string(RhoRegime r) {
  return r == RhoRegime::Dense ? "dense" : "vanishing";
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace rdpg

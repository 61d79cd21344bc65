#include "mhb/random.hpp"

namespace mhb {

namespace {

std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : engine_(seed) {}

RandomStream::RandomStream(std::uint64_t master, std::uint64_t index)
    : engine_(make_engine(master, index)) {}

RandomStream seed_stream(std::uint64_t master, std::uint64_t index) {
  return RandomStream(master, index);
}

std::uint64_t derived_seed(std::uint64_t master, std::uint64_t index) {
  return make_engine(master, index)();
}

}  // namespace mhb

#ifndef POUCHSIM_SEEDS_HPP
#define POUCHSIM_SEEDS_HPP

#include <cstdint>

namespace pouchsim {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the index-th task derived from a master seed. Depends only on the
/// pair, so tasks can be generated in any order or in parallel.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

} // namespace pouchsim

#endif // POUCHSIM_SEEDS_HPP

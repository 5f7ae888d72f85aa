#include "gna/rng.hpp"

namespace gna {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial_index,
                          std::uint64_t purpose)
{
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ trial_index);
    return splitmix64(h ^ (purpose * 0xD1B54A32D192ED03ULL));
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t trial_index, Purpose purpose)
    : engine_(derive_seed(master_seed, trial_index, static_cast<std::uint64_t>(purpose)))
{
}

double RngStream::uniform() { return unit_(engine_); }

double RngStream::standard_normal() { return normal_(engine_); }

}  // namespace gna

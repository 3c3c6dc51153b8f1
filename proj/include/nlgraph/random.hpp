#pragma once

#include <cstdint>
#include <random>

namespace nlgraph
{

/// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
	x += 0x9E3779B97F4A7C15ull;
	x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
	x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
	return x ^ (x >> 31);
}

/// Seed of an independent stream: splitmix64(seed ^ splitmix64(stream)).
/// Every consumer of randomness derives its generator from the run seed this way.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
	return splitmix64(seed ^ splitmix64(stream));
}

/// mt19937_64 with a portable uniform draw (the standard distributions are
/// implementation-defined, which would break byte-identical outputs).
class Rng
{
public:
	explicit Rng(std::uint64_t seed) : gen_(seed) {}
	Rng(std::uint64_t seed, std::uint64_t stream) : gen_(derive_seed(seed, stream)) {}

	/// Uniform on [0, 1) with 53 random bits.
	double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
	double uniform(double a, double b) { return a + (b - a) * uniform(); }
	std::uint64_t next() { return gen_(); }

private:
	std::mt19937_64 gen_;
};

} // namespace nlgraph

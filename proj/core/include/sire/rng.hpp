#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sire {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (char c : text) {
		h ^= static_cast<unsigned char>(c);
		h *= 0x100000001b3ULL;
	}
	return h;
}

/// Seed for stream `index` under `seed`. Streams are order-independent, so trials can run in any order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
	return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
	return Rng(derive_seed(seed, index));
}

} // namespace sire

/*
 * Copyright 2026 The coopra Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COOPRA_RNG_HPP
#define COOPRA_RNG_HPP

#include <cstdint>
#include <random>

namespace coopra {

using rng_type = std::mt19937_64;

// Independent streams derived from one run seed.
enum class stream : std::uint64_t { topology = 1, slots = 2, ga = 3 };

inline std::uint64_t splitmix64(std::uint64_t x)
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

inline rng_type make_rng(std::uint64_t seed, stream s)
{
	return rng_type(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s))));
}

} // namespace coopra

#endif // COOPRA_RNG_HPP

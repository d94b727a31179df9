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

// Test-only reference implementations and fixtures.

#ifndef COOPRA_TESTS_SUPPORT_HPP
#define COOPRA_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <coopra/coopra.hpp>

namespace coopra::test {

// One-slot transition probability written out from the (arrival, departure) pairs.
inline double direct_one_hop(int size, double p, double pd, int K, int q, int q_next)
{
	double total = 0;
	for (int d = 0; d <= 1; ++d)
	{
		double prd = q == 0 ? (d == 0 ? 1.0 : 0.0) : (d == 1 ? pd : 1 - pd);
		for (int a = 0; a <= size; ++a)
		{
			double c = std::tgamma(size + 1.0) / (std::tgamma(a + 1.0) * std::tgamma(size - a + 1.0));
			double pra = c * std::pow(p, a) * std::pow(1 - p, size - a);
			int next = std::min(q - d + a, K);
			if (next == q_next)
			{
				total += prd * pra;
			}
		}
	}
	return total;
}

// Sum over every explicit queue path q_start -> ... -> q_end of the product of one-hop probabilities.
inline double path_sum(int size, double p, double pd, int K, int q_start, int q_end, int hops)
{
	if (hops == 0)
	{
		return q_start == q_end ? 1.0 : 0.0;
	}
	double total = 0;
	for (int mid = 0; mid <= K; ++mid)
	{
		double first = direct_one_hop(size, p, pd, K, q_start, mid);
		if (first != 0)
		{
			total += first * path_sum(size, p, pd, K, mid, q_end, hops - 1);
		}
	}
	return total;
}

// Visits every explicit path of `hops` slots from q0 with its probability and end state.
inline void for_each_path(int size, double p, double pd, int K, int q0, int hops,
						  std::function<void(std::vector<int> const&, double)> const& visit)
{
	std::vector<int> path{q0};
	std::function<void(double)> rec = [&](double prob) {
		if (static_cast<int>(path.size()) == hops + 1)
		{
			visit(path, prob);
			return;
		}
		int q = path.back();
		for (int next = 0; next <= K; ++next)
		{
			double pr = direct_one_hop(size, p, pd, K, q, next);
			if (pr == 0)
			{
				continue;
			}
			path.push_back(next);
			rec(prob * pr);
			path.pop_back();
		}
	};
	rec(1.0);
}

// Small config: short cell, few MTDs, short horizon.
inline system_config small_config(int M, std::uint64_t seed = 1)
{
	system_config cfg;
	cfg.M = M;
	cfg.rng_seed = seed;
	cfg.cell_side = 120;
	cfg.deployment = deployment_mode::uniform;
	cfg.slots = 2000;
	return cfg;
}

// Network with hand-placed MTDs; fading drawn from the config seed.
inline network place(system_config const& cfg, std::vector<point> pts)
{
	auto rng = make_rng(cfg.rng_seed, stream::topology);
	return network(cfg, std::move(pts), rng);
}

inline long bell_number(int n)
{
	std::vector<std::vector<long>> t(static_cast<std::size_t>(n) + 1);
	t[0] = {1};
	for (int i = 1; i <= n; ++i)
	{
		t[static_cast<std::size_t>(i)].push_back(t[static_cast<std::size_t>(i - 1)].back());
		for (int j = 1; j <= i; ++j)
		{
			t[static_cast<std::size_t>(i)].push_back(t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)] +
												  t[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]);
		}
	}
	return t[static_cast<std::size_t>(n)][0];
}

// Brute-force blocking-deviation scan over bitmask subsets, independent of enumerate_moves.
inline int count_blocking_deviations(game_state const& s, valuator const& val)
{
	auto const& cs = s.part.coalitions;
	auto const& net = val.net();
	double const tol = 1e-9;
	auto value_in = [&](std::vector<mtd_id> const& g, mtd_id m) {
		if (!net.feasible_group(g))
		{
			return -std::numeric_limits<double>::infinity();
		}
		return val.member_value(g, s.member_queues, m);
	};
	auto blocks = [&](std::vector<mtd_id> const& group, mtd_id actor) {
		if (!net.feasible_group(group))
		{
			return false;
		}
		for (auto m : group)
		{
			std::vector<mtd_id> home;
			for (auto const& c : cs)
			{
				if (c.contains(m))
				{
					home = c.members;
				}
			}
			double before = value_in(home, m);
			double after = val.member_value(group, s.member_queues, m);
			if (m == actor ? !(after > before + tol) : after < before - tol)
			{
				return false;
			}
		}
		return true;
	};
	int count = 0;
	for (std::size_t i = 0; i < cs.size(); ++i)
	{
		auto const& S = cs[i].members;
		std::size_t const n = S.size();
		for (std::size_t a = 0; a < n; ++a)
		{
			for (unsigned mask = 1; mask + 1 < (1u << n); ++mask)
			{
				if (!(mask & (1u << a)))
				{
					continue;
				}
				std::vector<mtd_id> g;
				for (std::size_t b = 0; b < n; ++b)
				{
					if (mask & (1u << b))
					{
						g.push_back(S[b]);
					}
				}
				count += blocks(g, S[a]);
			}
			for (std::size_t j = 0; j < cs.size(); ++j)
			{
				if (j == i)
				{
					continue;
				}
				std::vector<mtd_id> u = S;
				u.insert(u.end(), cs[j].members.begin(), cs[j].members.end());
				std::sort(u.begin(), u.end());
				count += blocks(u, S[a]);
			}
		}
	}
	return count;
}

} // namespace coopra::test

#endif // COOPRA_TESTS_SUPPORT_HPP

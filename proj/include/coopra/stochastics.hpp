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

#ifndef COOPRA_STOCHASTICS_HPP
#define COOPRA_STOCHASTICS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace coopra {

/// Binomial(n, p) probability of k successes; zero outside [0, n].
inline double binomial_pmf(int n, int k, double p)
{
	if (k < 0 || k > n)
	{
		return 0;
	}
	if (p <= 0)
	{
		return k == 0 ? 1 : 0;
	}
	if (p >= 1)
	{
		return k == n ? 1 : 0;
	}
	if (n <= 60)
	{
		double c = 1;
		for (int i = 1; i <= k; ++i)
		{
			c = c * (n - k + i) / i;
		}
		return c * std::pow(p, k) * std::pow(1 - p, n - k);
	}
	double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
	return std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
}

/**
 * Closed-form per-slot success probability of one MTD contending alone:
 * p(1-p)^(M-1) + sum_{j=2..M} (1/mu)(1-1/mu)^(j-1) P_M(j), with P_M the
 * Binomial(M, p) pmf. Evaluated exactly as stated.
 */
inline double noncoop_success_prob(int M, double p, int mu)
{
	if (M < 1 || mu < 1)
	{
		throw std::invalid_argument("noncoop_success_prob: M and mu must be positive");
	}
	double const q = 1.0 - 1.0 / mu;
	double ps = p * std::pow(1 - p, M - 1);
	for (int j = 2; j <= M; ++j)
	{
		ps += (1.0 / mu) * std::pow(q, j - 1) * binomial_pmf(M, j, p);
	}
	return ps;
}

/// Number of requests arriving at a coalition of `size` members in one slot.
inline std::vector<double> coalition_arrival_pmf(int size, double p)
{
	if (size < 1)
	{
		throw std::invalid_argument("coalition_arrival_pmf: size must be positive");
	}
	std::vector<double> pmf(static_cast<std::size_t>(size) + 1);
	for (int n = 0; n <= size; ++n)
	{
		pmf[static_cast<std::size_t>(n)] = binomial_pmf(size, n, p);
	}
	return pmf;
}

/// Head success probability against the other num_heads - 1 heads.
inline double exact_departure_prob(int num_heads, int mu)
{
	if (num_heads < 1 || mu < 1)
	{
		throw std::invalid_argument("exact_departure_prob: num_heads and mu must be positive");
	}
	return (1.0 / mu) * std::pow(1.0 - 1.0 / mu, num_heads - 1);
}

/// Head success probability assuming all M - size outsiders contend.
inline double worstcase_departure_prob(int M, int size, int mu)
{
	if (size < 1 || size > M || mu < 1)
	{
		throw std::invalid_argument("worstcase_departure_prob: need 1 <= size <= M");
	}
	return (1.0 / mu) * std::pow(1.0 - 1.0 / mu, M - size);
}

/**
 * One-slot queue-change law of a coalition queue.
 *
 * Arrivals a ~ Binomial(size, p) and a departure d ~ Bernoulli(Pd) are
 * independent; an empty queue cannot depart. From length q the queue moves
 * to q - d + a, and mass that would exceed the capacity is folded into the
 * full state. Jumps are indexed j = -1 .. size.
 */
class transition_kernel
{
public:
	transition_kernel(int size, double p, double depart_prob, int capacity)
		: size_(size)
		, p_(p)
		, depart_(depart_prob)
		, capacity_(capacity)
		, jumps_(static_cast<std::size_t>(capacity + 1) * width(), 0.0)
		, drops_(static_cast<std::size_t>(capacity + 1), 0.0)
	{
		if (size < 1 || capacity < 1 || p < 0 || p > 1 || depart_prob < 0 || depart_prob > 1)
		{
			throw std::invalid_argument("transition_kernel: bad parameters");
		}
		auto arrivals = coalition_arrival_pmf(size, p);
		for (int q = 0; q <= capacity; ++q)
		{
			double pd = q > 0 ? depart_prob : 0.0;
			for (int d = 0; d <= 1; ++d)
			{
				double prd = d == 1 ? pd : 1.0 - pd;
				for (int a = 0; a <= size; ++a)
				{
					double pr = prd * arrivals[static_cast<std::size_t>(a)];
					int raw = q - d + a;
					int next = std::min(raw, capacity);
					at(q, next - q) += pr;
					drops_[static_cast<std::size_t>(q)] += pr * (raw - next);
				}
			}
		}
	}

	int coalition_size() const { return size_; }
	double p() const { return p_; }
	double depart_prob() const { return depart_; }
	int capacity() const { return capacity_; }
	int min_jump() const { return -1; }
	int max_jump() const { return size_; }

	/// Probability of moving from q to q + j in one slot.
	double one_hop(int q, int j) const
	{
		if (q < 0 || q > capacity_ || j < -1 || j > size_)
		{
			return 0;
		}
		return jumps_[static_cast<std::size_t>(q) * width() + static_cast<std::size_t>(j + 1)];
	}

	/// Probability of moving from q to q_next in one slot.
	double transition(int q, int q_next) const { return one_hop(q, q_next - q); }

	/// Expected requests lost to the capacity bound in one slot from q.
	double expected_drops(int q) const { return drops_[static_cast<std::size_t>(q)]; }

	/// Distribution after one more slot.
	std::vector<double> step(std::vector<double> const& dist) const
	{
		std::vector<double> next(dist.size(), 0.0);
		for (int q = 0; q <= capacity_; ++q)
		{
			double mass = dist[static_cast<std::size_t>(q)];
			if (mass == 0)
			{
				continue;
			}
			for (int j = -1; j <= size_; ++j)
			{
				int to = q + j;
				if (to < 0 || to > capacity_)
				{
					continue;
				}
				next[static_cast<std::size_t>(to)] += mass * one_hop(q, j);
			}
		}
		return next;
	}

private:
	std::size_t width() const { return static_cast<std::size_t>(size_) + 2; }

	double& at(int q, int j)
	{
		return jumps_[static_cast<std::size_t>(q) * width() + static_cast<std::size_t>(j + 1)];
	}

	int size_;
	double p_;
	double depart_;
	int capacity_;
	std::vector<double> jumps_;
	std::vector<double> drops_;
};

inline transition_kernel build_kernel(int size, double p, double depart_prob, int capacity)
{
	return transition_kernel(size, p, depart_prob, capacity);
}

/// Point mass at q over states 0..capacity.
inline std::vector<double> point_mass(int q, int capacity)
{
	std::vector<double> d(static_cast<std::size_t>(capacity) + 1, 0.0);
	d[static_cast<std::size_t>(std::clamp(q, 0, capacity))] = 1.0;
	return d;
}

/**
 * Probability that the queue goes from q_start to q_end in exactly `hops`
 * slots: the sum over all hop sequences of the product of one-hop
 * probabilities, accumulated by iterating the kernel.
 */
inline double multi_hop_prob(transition_kernel const& kernel, int q_start, int q_end, int hops)
{
	if (hops < 1)
	{
		throw std::invalid_argument("multi_hop_prob: hops must be positive");
	}
	int const K = kernel.capacity();
	if (q_start < 0 || q_start > K || q_end < 0 || q_end > K)
	{
		throw std::invalid_argument("multi_hop_prob: queue length out of range");
	}
	auto dist = point_mass(q_start, K);
	for (int n = 0; n < hops; ++n)
	{
		dist = kernel.step(dist);
	}
	return dist[static_cast<std::size_t>(q_end)];
}

/// Effective horizon: the smallest n >= 1 with delta^n < eps.
inline int horizon_slots(double delta, double eps)
{
	if (!(eps > 0) || delta < 0 || delta >= 1)
	{
		throw std::invalid_argument("horizon_slots: need 0 <= delta < 1 and eps > 0");
	}
	int n = 1;
	double power = delta;
	while (!(power < eps))
	{
		power *= delta;
		++n;
	}
	return n;
}

} // namespace coopra

#endif // COOPRA_STOCHASTICS_HPP

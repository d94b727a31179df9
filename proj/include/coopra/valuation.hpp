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

#ifndef COOPRA_VALUATION_HPP
#define COOPRA_VALUATION_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <coopra/channel.hpp>
#include <coopra/config.hpp>
#include <coopra/model.hpp>
#include <coopra/stochastics.hpp>

namespace coopra {

struct weights
{
	double alpha = 0;
	double beta = 0;
	double gamma = 0;
};

inline weights weights_of(system_config const& cfg, mtd_id m)
{
	return {cfg.alpha_of(m), cfg.beta_of(m), cfg.gamma_of(m)};
}

/**
 * Energy terms of one coalition, already in value units.
 *
 * `lr_expected` is the head's expected per-request RA energy under the
 * worst-case departure probability; `member_sr` holds each member's cost to
 * forward one request to the head (zero for the head itself) and `sr` their
 * mean, which the altruistic value charges once per member.
 */
struct energy_context
{
	bool feasible = true;
	double lr_expected = 0;
	double sr = 0;
	std::vector<double> member_sr;
};

inline energy_context make_energy_context(network const& net, system_config const& cfg,
										  std::span<mtd_id const> members, double depart_prob)
{
	energy_context ctx;
	ctx.feasible = net.feasible_group(members);
	mtd_id head = *std::min_element(members.begin(), members.end());
	ctx.lr_expected = cfg.energy_scale * expected_ra_energy(net.lr_energy(head), depart_prob);
	ctx.member_sr.reserve(members.size());
	double sum = 0;
	for (auto m : members)
	{
		double e = m == head ? 0.0 : cfg.energy_scale * net.sr_energy(m, head);
		ctx.member_sr.push_back(e);
		sum += e;
	}
	ctx.sr = sum / static_cast<double>(members.size());
	return ctx;
}

/// -alpha Q - beta (E_LR^H / |S| + E_SR) - gamma |S|, with the global weights.
inline double altruistic_current_value(coalition const& c, int Q, system_config const& cfg,
									   energy_context const& e)
{
	if (!e.feasible)
	{
		throw std::domain_error("coalition infeasible");
	}
	double n = static_cast<double>(c.size());
	return -cfg.alpha * Q - cfg.beta * (e.lr_expected / n + e.sr) - cfg.gamma * n;
}

/// Per member: -alpha_m Q_m - beta_m (w_e E_LR^H + E_SR,m) - gamma_m |S|.
inline std::vector<double> selfish_current_value(coalition const& c, std::span<double const> member_queues,
												 system_config const& cfg, energy_context const& e)
{
	if (member_queues.size() != c.size())
	{
		throw std::invalid_argument("selfish_current_value: one queue per member required");
	}
	if (!e.feasible)
	{
		throw std::domain_error("coalition infeasible");
	}
	double n = static_cast<double>(c.size());
	std::vector<double> v(c.size());
	for (std::size_t i = 0; i < c.size(); ++i)
	{
		auto w = weights_of(cfg, c.members[i]);
		v[i] = -w.alpha * member_queues[i] - w.beta * (c.head_share() * e.lr_expected + e.member_sr[i]) - w.gamma * n;
	}
	return v;
}

/// Payoff split into the current-slot part and the discounted future part, per member.
struct value_breakdown
{
	std::vector<double> deterministic;
	std::vector<double> future;
	std::vector<double> total;
	int horizon = 0;

	double scalar() const { return total.front(); }
};

namespace detail {

// Per-member current value at coalition queue q and member queues x (altruistic ignores x).
inline std::vector<double> member_current_values(coalition const& c, double q, std::span<double const> x,
												 system_config const& cfg, energy_context const& e)
{
	if (!e.feasible)
	{
		throw std::domain_error("coalition infeasible");
	}
	double n = static_cast<double>(c.size());
	std::vector<double> v(c.size());
	for (std::size_t i = 0; i < c.size(); ++i)
	{
		auto w = weights_of(cfg, c.members[i]);
		if (cfg.mode == cooperation_mode::altruistic)
		{
			v[i] = -w.alpha * q - w.beta * (e.lr_expected / n + e.sr) - w.gamma * n;
		}
		else
		{
			v[i] = -w.alpha * x[i] - w.beta * (c.head_share() * e.lr_expected + e.member_sr[i]) - w.gamma * n;
		}
	}
	return v;
}

} // namespace detail

/**
 * Discounted expected future payoff over slots 1..n_delta.
 *
 * Altruistic: sum_n delta^n sum_q Delta^n(Q0 -> q) u_d(S, q), with Delta the
 * n-hop path-sum probability. Selfish: each member's expected queue follows
 * the coalition chain, gaining p times the accepted-arrival fraction and
 * losing w_q times the departure probability per slot.
 */
inline std::vector<double> expected_future_value(coalition const& c, int Q0, std::span<double const> member_q0,
												 system_config const& cfg, transition_kernel const& kernel,
												 energy_context const& e)
{
	int const horizon = horizon_slots(cfg.delta, cfg.horizon_eps);
	int const K = kernel.capacity();
	std::vector<double> future(c.size(), 0.0);
	if (cfg.delta == 0)
	{
		return future;
	}
	auto dist = point_mass(Q0, K);
	std::vector<double> x(member_q0.begin(), member_q0.end());
	if (x.size() != c.size())
	{
		x.assign(c.size(), 0.0);
	}
	double const n = static_cast<double>(c.size());
	double discount = 1;
	for (int step = 1; step <= horizon; ++step)
	{
		discount *= cfg.delta;
		if (cfg.mode == cooperation_mode::selfish)
		{
			double depart = kernel.depart_prob() * (1.0 - dist[0]);
			double drops = 0;
			for (int q = 0; q <= K; ++q)
			{
				drops += dist[static_cast<std::size_t>(q)] * kernel.expected_drops(q);
			}
			double offered = n * kernel.p();
			double accepted = offered > 0 ? (offered - drops) / offered : 0.0;
			for (auto& xi : x)
			{
				xi = std::clamp(xi + kernel.p() * accepted - depart / n, 0.0, static_cast<double>(K));
			}
		}
		dist = kernel.step(dist);
		// u_d is affine in the coalition queue, so sum_q Delta(q) u_d(q) = u_d(E[q]).
		double mean_q = 0;
		for (int q = 0; q <= K; ++q)
		{
			mean_q += q * dist[static_cast<std::size_t>(q)];
		}
		auto expected = detail::member_current_values(c, mean_q, x, cfg, e);
		for (std::size_t i = 0; i < future.size(); ++i)
		{
			future[i] += discount * expected[i];
		}
	}
	return future;
}

inline value_breakdown total_value(coalition const& c, int Q0, std::span<double const> member_q0,
								   system_config const& cfg, transition_kernel const& kernel, energy_context const& e)
{
	std::vector<double> x(member_q0.begin(), member_q0.end());
	if (x.size() != c.size())
	{
		x.assign(c.size(), 0.0);
	}
	value_breakdown v;
	v.horizon = horizon_slots(cfg.delta, cfg.horizon_eps);
	v.deterministic = detail::member_current_values(c, Q0, x, cfg, e);
	v.future = expected_future_value(c, Q0, x, cfg, kernel, e);
	v.total.resize(c.size());
	for (std::size_t i = 0; i < c.size(); ++i)
	{
		v.total[i] = v.deterministic[i] + v.future[i];
	}
	return v;
}

/**
 * Evaluates candidate coalitions against one network and configuration,
 * caching kernels per coalition size and values per (members, queues).
 *
 * Departure probabilities are the worst-case ones, so a coalition's value
 * depends only on its own members and queues.
 */
class valuator
{
public:
	valuator(network const& net, system_config const& cfg)
		: net_(&net)
		, cfg_(cfg)
		, horizon_(horizon_slots(cfg.delta, cfg.horizon_eps))
	{
	}

	system_config const& config() const { return cfg_; }
	network const& net() const { return *net_; }
	int horizon() const { return horizon_; }

	double depart_prob(int size) const { return worstcase_departure_prob(cfg_.M, size, cfg_.mu); }

	transition_kernel const& kernel(int size) const
	{
		auto it = kernels_.find(size);
		if (it == kernels_.end())
		{
			it = kernels_.emplace(size, build_kernel(size, cfg_.p, depart_prob(size), cfg_.K)).first;
		}
		return it->second;
	}

	bool feasible(std::span<mtd_id const> members) const { return net_->feasible_group(members); }

	/// Sorted members; member_queues indexed by MTD id.
	value_breakdown const& value(std::span<mtd_id const> members, std::span<int const> member_queues) const
	{
		std::vector<int> key(members.begin(), members.end());
		int sum = 0;
		for (auto m : members)
		{
			int q = member_queues.empty() ? 0 : member_queues[static_cast<std::size_t>(m)];
			sum += q;
			if (cfg_.mode == cooperation_mode::selfish)
			{
				key.push_back(q);
			}
		}
		int Q0 = std::min(sum, cfg_.K);
		key.push_back(-1 - Q0);
		auto it = cache_.find(key);
		if (it != cache_.end())
		{
			return it->second;
		}
		coalition c = make_coalition({members.begin(), members.end()}, Q0, cfg_.K);
		std::vector<double> x;
		for (auto m : c.members)
		{
			x.push_back(member_queues.empty() ? 0.0 : member_queues[static_cast<std::size_t>(m)]);
		}
		int const size = static_cast<int>(c.size());
		auto e = make_energy_context(*net_, cfg_, c.members, depart_prob(size));
		auto v = total_value(c, Q0, x, cfg_, kernel(size), e);
		++evaluations_;
		return cache_.emplace(std::move(key), std::move(v)).first->second;
	}

	/// Total value of member m inside the given coalition.
	double member_value(std::span<mtd_id const> members, std::span<int const> member_queues, mtd_id m) const
	{
		auto const& v = value(members, member_queues);
		auto pos = std::lower_bound(members.begin(), members.end(), m) - members.begin();
		return v.total[static_cast<std::size_t>(pos)];
	}

	long evaluations() const { return evaluations_; }

private:
	network const* net_;
	system_config cfg_;
	int horizon_;
	mutable std::map<int, transition_kernel> kernels_;
	mutable std::map<std::vector<int>, value_breakdown> cache_;
	mutable long evaluations_ = 0;
};

} // namespace coopra

#endif // COOPRA_VALUATION_HPP

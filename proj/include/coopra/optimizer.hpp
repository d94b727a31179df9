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

#ifndef COOPRA_OPTIMIZER_HPP
#define COOPRA_OPTIMIZER_HPP

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <coopra/channel.hpp>
#include <coopra/config.hpp>
#include <coopra/model.hpp>
#include <coopra/rng.hpp>
#include <coopra/stochastics.hpp>

namespace coopra {

/**
 * MTD-to-coalition assignment, stored as one label per MTD in restricted
 * growth form (first MTD gets 0, each new label is the next unused one).
 */
class assignment
{
public:
	assignment() = default;

	explicit assignment(std::vector<int> labels)
		: labels_(std::move(labels))
	{
		normalize();
	}

	static assignment singletons(int M)
	{
		std::vector<int> l(static_cast<std::size_t>(M));
		for (int m = 0; m < M; ++m)
		{
			l[static_cast<std::size_t>(m)] = m;
		}
		return assignment(std::move(l));
	}

	static assignment from_partition(partition const& p, int M)
	{
		return assignment(coalition_index(p, M));
	}

	/// Rejects matrices whose rows do not hold exactly one 1.
	static assignment from_matrix(std::vector<std::vector<int>> const& k)
	{
		std::vector<int> l;
		for (auto const& row : k)
		{
			int label = -1;
			int ones = 0;
			for (std::size_t n = 0; n < row.size(); ++n)
			{
				if (row[n] != 0 && row[n] != 1)
				{
					throw std::invalid_argument("assignment entries must be binary");
				}
				if (row[n] == 1)
				{
					++ones;
					label = static_cast<int>(n);
				}
			}
			if (ones != 1)
			{
				throw std::invalid_argument("each MTD must be in exactly one coalition");
			}
			l.push_back(label);
		}
		return assignment(std::move(l));
	}

	int mtds() const { return static_cast<int>(labels_.size()); }
	int coalitions() const { return labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end()) + 1; }
	std::vector<int> const& labels() const { return labels_; }

	/// k[m][n] = 1 iff MTD m is in coalition n.
	std::vector<std::vector<int>> matrix() const
	{
		std::vector<std::vector<int>> k(labels_.size(), std::vector<int>(static_cast<std::size_t>(coalitions()), 0));
		for (std::size_t m = 0; m < labels_.size(); ++m)
		{
			k[m][static_cast<std::size_t>(labels_[m])] = 1;
		}
		return k;
	}

	std::vector<std::vector<mtd_id>> groups() const
	{
		std::vector<std::vector<mtd_id>> g(static_cast<std::size_t>(coalitions()));
		for (std::size_t m = 0; m < labels_.size(); ++m)
		{
			g[static_cast<std::size_t>(labels_[m])].push_back(static_cast<mtd_id>(m));
		}
		return g;
	}

	partition to_partition(int capacity) const { return partition_from_groups(groups(), capacity); }

	bool operator==(assignment const&) const = default;

private:
	void normalize()
	{
		std::map<int, int> relabel;
		for (auto& l : labels_)
		{
			auto [it, fresh] = relabel.emplace(l, static_cast<int>(relabel.size()));
			l = it->second;
		}
	}

	std::vector<int> labels_;
};

/// Sum over t = 0..n of delta^t.
inline double discounted_slots(system_config const& cfg)
{
	int n = horizon_slots(cfg.delta, cfg.horizon_eps);
	double sum = 0;
	double w = 1;
	for (int t = 0; t <= n; ++t)
	{
		sum += w;
		w *= cfg.delta;
	}
	return sum;
}

/**
 * Discounted expected queue sum of one coalition over t = 0..n_delta,
 * starting from Q0, with the given per-slot departure probability.
 */
inline double discounted_queue_sum(int size, int Q0, double depart_prob, system_config const& cfg)
{
	auto kernel = build_kernel(size, cfg.p, depart_prob, cfg.K);
	int const n = horizon_slots(cfg.delta, cfg.horizon_eps);
	auto dist = point_mass(Q0, cfg.K);
	double sum = std::min(Q0, cfg.K);
	double w = 1;
	for (int t = 1; t <= n; ++t)
	{
		w *= cfg.delta;
		dist = kernel.step(dist);
		double mean = 0;
		for (int q = 0; q <= cfg.K; ++q)
		{
			mean += q * dist[static_cast<std::size_t>(q)];
		}
		sum += w * mean;
	}
	return sum;
}

/// Per-coalition discounted queue sums keyed by (coalitions, size, Q0), valid for one config.
using objective_cache = std::map<std::tuple<int, int, int>, double>;

/**
 * Centralized objective: sum over MTDs of the discounted expected queue
 * length over the effective horizon. Each coalition's head contends with the
 * other N - 1 heads, so the departure probability is the exact one for N
 * heads. Round-robin service splits a coalition's queue among its members,
 * so the member sum equals the coalition sum.
 */
inline double objective(assignment const& a, system_config const& cfg, std::vector<int> const& member_queues,
	objective_cache& memo)
{
	int const N = a.coalitions();
	double const pd = exact_departure_prob(N, cfg.mu);
	double total = 0;
	for (auto const& g : a.groups())
	{
		int q0 = 0;
		if (!member_queues.empty())
		{
			for (auto m : g)
			{
				q0 += member_queues[static_cast<std::size_t>(m)];
			}
		}
		q0 = std::min(q0, cfg.K);
		auto key = std::tuple{N, static_cast<int>(g.size()), q0};
		auto it = memo.find(key);
		if (it == memo.end())
		{
			it = memo.emplace(key, discounted_queue_sum(std::get<1>(key), q0, pd, cfg)).first;
		}
		total += it->second;
	}
	return total;
}

inline double objective(assignment const& a, system_config const& cfg, std::vector<int> const& member_queues = {})
{
	objective_cache memo;
	return objective(a, cfg, member_queues, memo);
}

/// Discounted per-MTD energy of the all-singleton assignment, maximized over MTDs, doubled.
inline double default_energy_budget(network const& net, system_config const& cfg)
{
	double const pd = exact_departure_prob(net.size(), cfg.mu);
	double worst = 0;
	for (mtd_id m = 0; m < net.size(); ++m)
	{
		worst = std::max(worst, expected_ra_energy(net.lr_energy(m), pd));
	}
	return 2 * worst * discounted_slots(cfg);
}

inline double energy_budget(network const& net, system_config const& cfg)
{
	return cfg.E_max > 0 ? cfg.E_max : default_energy_budget(net, cfg);
}

struct feasibility_report
{
	bool feasible = true;
	int energy_violations = 0;
	std::vector<std::pair<mtd_id, mtd_id>> infeasible_pairs;
	std::vector<std::string> violations;

	int count() const { return energy_violations + static_cast<int>(infeasible_pairs.size()); }
};

/**
 * Discounted energy of each MTD: its share 1/|S| of the head's expected RA
 * energy plus its own cost of forwarding to the head, summed over the horizon.
 */
inline std::vector<double> discounted_energy(assignment const& a, network const& net, system_config const& cfg)
{
	double const pd = exact_departure_prob(a.coalitions(), cfg.mu);
	double const slots = discounted_slots(cfg);
	std::vector<double> e(static_cast<std::size_t>(a.mtds()), 0.0);
	for (auto const& g : a.groups())
	{
		mtd_id head = g.front();
		double lr = expected_ra_energy(net.lr_energy(head), pd);
		for (auto m : g)
		{
			double sr = m == head ? 0.0 : net.sr_energy(m, head);
			e[static_cast<std::size_t>(m)] = slots * (lr / static_cast<double>(g.size()) + sr);
		}
	}
	return e;
}

/// Energy budget per MTD and pairwise short-range rate inside every coalition.
inline feasibility_report feasible(assignment const& a, network const& net, system_config const& cfg,
								   double e_max, bool details = true)
{
	feasibility_report rep;
	if (a.mtds() != net.size())
	{
		throw std::invalid_argument("assignment size does not match network");
	}
	auto energy = discounted_energy(a, net, cfg);
	for (std::size_t m = 0; m < energy.size(); ++m)
	{
		if (energy[m] > e_max)
		{
			++rep.energy_violations;
			if (details)
			{
				rep.violations.push_back("MTD " + std::to_string(m) + " exceeds energy budget");
			}
		}
	}
	for (auto const& g : a.groups())
	{
		for (std::size_t i = 0; i < g.size(); ++i)
		{
			for (std::size_t j = i + 1; j < g.size(); ++j)
			{
				if (!net.feasible(g[i], g[j]))
				{
					rep.infeasible_pairs.emplace_back(g[i], g[j]);
					if (details)
					{
						rep.violations.push_back("MTDs " + std::to_string(g[i]) + " and " + std::to_string(g[j]) +
												 " cannot share a coalition");
					}
				}
			}
		}
	}
	rep.feasible = rep.count() == 0;
	return rep;
}

struct search_result
{
	assignment best;
	double objective = 0;
	bool feasible = false;
	long evaluations = 0;
	int generations = 0;
};

class infeasible_error : public std::runtime_error
{
public:
	infeasible_error(std::string const& what, search_result best_infeasible)
		: std::runtime_error(what)
		, best_(std::move(best_infeasible))
	{
	}

	search_result const& best_infeasible() const { return best_; }

private:
	search_result best_;
};

/// Largest instance exhaustive_search accepts (Bell(10) = 115975 partitions).
inline constexpr int exhaustive_limit = 10;

/// Enumerates every set partition as a restricted growth string; minimizes the objective over feasible ones.
inline search_result exhaustive_search(network const& net, system_config const& cfg)
{
	int const M = net.size();
	if (M > exhaustive_limit)
	{
		throw std::length_error("instance too large");
	}
	double const e_max = energy_budget(net, cfg);
	search_result res;
	res.objective = std::numeric_limits<double>::infinity();
	objective_cache memo;
	std::vector<int> rgs(static_cast<std::size_t>(M), 0);
	std::vector<int> prefix_max(static_cast<std::size_t>(M), 0);
	while (true)
	{
		assignment a(rgs);
		++res.evaluations;
		if (feasible(a, net, cfg, e_max, false).feasible)
		{
			double f = objective(a, cfg, {}, memo);
			if (f < res.objective)
			{
				res.objective = f;
				res.best = a;
				res.feasible = true;
			}
		}
		// Next restricted growth string.
		int i = M - 1;
		while (i > 0 && rgs[static_cast<std::size_t>(i)] > prefix_max[static_cast<std::size_t>(i - 1)])
		{
			--i;
		}
		if (i <= 0)
		{
			break;
		}
		++rgs[static_cast<std::size_t>(i)];
		prefix_max[static_cast<std::size_t>(i)] =
			std::max(prefix_max[static_cast<std::size_t>(i - 1)], rgs[static_cast<std::size_t>(i)]);
		for (int k = i + 1; k < M; ++k)
		{
			rgs[static_cast<std::size_t>(k)] = 0;
			prefix_max[static_cast<std::size_t>(k)] = prefix_max[static_cast<std::size_t>(i)];
		}
	}
	if (!res.feasible)
	{
		throw infeasible_error("no feasible partition", res);
	}
	return res;
}

namespace detail {

struct individual
{
	assignment genes;
	int violations = 0;
	double objective = 0;

	// Feasible beats infeasible; then fewer violations; then lower objective.
	bool better_than(individual const& o) const
	{
		if (violations != o.violations)
		{
			return violations < o.violations;
		}
		return objective < o.objective;
	}
};

// Random feasible-by-construction assignment: MTDs in random order join a random compatible group or open a new one.
inline assignment random_compatible(network const& net, rng_type& rng)
{
	int const M = net.size();
	std::vector<int> order(static_cast<std::size_t>(M));
	for (int m = 0; m < M; ++m)
	{
		order[static_cast<std::size_t>(m)] = m;
	}
	std::shuffle(order.begin(), order.end(), rng);
	std::vector<std::vector<mtd_id>> groups;
	std::vector<int> labels(static_cast<std::size_t>(M), 0);
	for (auto m : order)
	{
		std::vector<int> options;
		for (std::size_t g = 0; g < groups.size(); ++g)
		{
			bool ok = std::all_of(groups[g].begin(), groups[g].end(), [&](mtd_id o) { return net.feasible(m, o); });
			if (ok)
			{
				options.push_back(static_cast<int>(g));
			}
		}
		std::uniform_int_distribution<int> pick(0, static_cast<int>(options.size()));
		int choice = pick(rng);
		if (choice == static_cast<int>(options.size()))
		{
			labels[static_cast<std::size_t>(m)] = static_cast<int>(groups.size());
			groups.push_back({m});
		}
		else
		{
			int g = options[static_cast<std::size_t>(choice)];
			labels[static_cast<std::size_t>(m)] = g;
			groups[static_cast<std::size_t>(g)].push_back(m);
		}
	}
	return assignment(std::move(labels));
}

} // namespace detail

/**
 * Genetic search over assignments.
 *
 * Integer chromosome (one label per MTD, restricted growth normalized),
 * tournament selection, uniform crossover, and a mutation that moves an MTD
 * into a short-range neighbor's coalition or into a new singleton. The two
 * best individuals survive each generation unchanged. The initial population
 * holds the all-singleton assignment and random compatible groupings.
 */
inline search_result ga_search(network const& net, system_config const& cfg, ga_params const& params)
{
	int const M = net.size();
	double const e_max = energy_budget(net, cfg);
	auto rng = make_rng(params.seed ^ splitmix64(cfg.rng_seed), stream::ga);
	search_result res;
	objective_cache memo;

	auto evaluate = [&](assignment a) {
		detail::individual ind{std::move(a), 0, 0};
		ind.violations = feasible(ind.genes, net, cfg, e_max, false).count();
		ind.objective = objective(ind.genes, cfg, {}, memo);
		++res.evaluations;
		return ind;
	};

	std::vector<std::vector<mtd_id>> neighbors(static_cast<std::size_t>(M));
	for (mtd_id i = 0; i < M; ++i)
	{
		for (mtd_id j = 0; j < M; ++j)
		{
			if (i != j && net.feasible(i, j))
			{
				neighbors[static_cast<std::size_t>(i)].push_back(j);
			}
		}
	}

	std::size_t const pop_size = static_cast<std::size_t>(params.population);
	std::vector<detail::individual> pop;
	pop.push_back(evaluate(assignment::singletons(M)));
	while (pop.size() < pop_size)
	{
		pop.push_back(evaluate(detail::random_compatible(net, rng)));
	}

	auto by_rank = [](detail::individual const& a, detail::individual const& b) { return a.better_than(b); };
	std::uniform_real_distribution<double> unit(0.0, 1.0);
	std::uniform_int_distribution<std::size_t> any(0, pop_size - 1);
	auto tournament = [&]() -> detail::individual const& {
		std::size_t best = any(rng);
		for (int k = 1; k < params.tournament; ++k)
		{
			std::size_t c = any(rng);
			if (pop[c].better_than(pop[best]))
			{
				best = c;
			}
		}
		return pop[best];
	};

	for (int gen = 0; gen < params.generations; ++gen)
	{
		std::stable_sort(pop.begin(), pop.end(), by_rank);
		std::vector<detail::individual> next(pop.begin(), pop.begin() + std::min<std::size_t>(2, pop_size));
		while (next.size() < pop_size)
		{
			auto const& a = tournament();
			auto const& b = tournament();
			std::vector<int> child = a.genes.labels();
			if (unit(rng) < params.crossover)
			{
				auto const& other = b.genes.labels();
				for (std::size_t m = 0; m < child.size(); ++m)
				{
					if (unit(rng) < 0.5)
					{
						child[m] = other[m];
					}
				}
			}
			int fresh = *std::max_element(child.begin(), child.end()) + 1;
			for (std::size_t m = 0; m < child.size(); ++m)
			{
				if (unit(rng) >= params.mutation)
				{
					continue;
				}
				auto const& nb = neighbors[m];
				if (nb.empty() || unit(rng) < 0.25)
				{
					child[m] = fresh++;
				}
				else
				{
					std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
					child[m] = child[static_cast<std::size_t>(nb[pick(rng)])];
				}
			}
			next.push_back(evaluate(assignment(std::move(child))));
		}
		pop = std::move(next);
		res.generations = gen + 1;
	}
	auto best = *std::min_element(pop.begin(), pop.end(), by_rank);
	res.best = best.genes;
	res.objective = best.objective;
	res.feasible = best.violations == 0;
	if (!res.feasible)
	{
		throw infeasible_error("no feasible individual after " + std::to_string(res.generations) + " generations (" +
								   std::to_string(best.violations) + " violations in best)",
							   res);
	}
	return res;
}

inline void write_assignment_csv(std::ostream& os, assignment const& a)
{
	os << "mtd,coalition\n";
	for (std::size_t m = 0; m < a.labels().size(); ++m)
	{
		os << m << ',' << a.labels()[m] << '\n';
	}
}

} // namespace coopra

#endif // COOPRA_OPTIMIZER_HPP

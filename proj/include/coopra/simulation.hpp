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

#ifndef COOPRA_SIMULATION_HPP
#define COOPRA_SIMULATION_HPP

#include <algorithm>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <coopra/channel.hpp>
#include <coopra/config.hpp>
#include <coopra/formation.hpp>
#include <coopra/model.hpp>
#include <coopra/optimizer.hpp>
#include <coopra/rng.hpp>
#include <coopra/valuation.hpp>

namespace coopra {

/// What happened in one RA slot.
struct slot_events
{
	long slot = 0;
	std::vector<char> arrivals;
	std::vector<mtd_id> transmitters;
	/// Preamble (1..mu) of each transmitter, in the same order.
	std::vector<int> preambles;
	std::vector<mtd_id> successes;
	std::vector<mtd_id> collisions;
	/// Member whose request left with each success, in the same order.
	std::vector<mtd_id> served;
	int enqueued = 0;
	int drops = 0;
	double energy = 0;

	void clear(int M)
	{
		arrivals.assign(static_cast<std::size_t>(M), 0);
		transmitters.clear();
		preambles.clear();
		successes.clear();
		collisions.clear();
		served.clear();
		enqueued = 0;
		drops = 0;
		energy = 0;
	}
};

/**
 * Run-local mutable state: the game state plus a round-robin cursor per
 * coalition and the energy each MTD spent in the last slot.
 */
struct sim_state
{
	game_state game;
	std::vector<int> owner;
	std::vector<std::size_t> cursor;
	std::vector<double> slot_energy;
	std::vector<int> preamble_use;
	long slot = 0;

	void reindex()
	{
		owner = coalition_index(game.part, static_cast<int>(game.member_queues.size()));
		cursor.assign(game.part.coalitions.size(), 0);
	}
};

inline sim_state make_sim_state(game_state g)
{
	sim_state s;
	s.game = std::move(g);
	s.slot_energy.assign(s.game.member_queues.size(), 0.0);
	s.reindex();
	return s;
}

/**
 * Advances one slot.
 *
 * Heads whose coalition queue is nonempty at the start of the slot transmit
 * on a uniform preamble and pay one cellular transmission each. A head
 * succeeds iff no other transmitter picked its preamble; a success removes
 * one request from the next nonempty member in round-robin order. Then every
 * MTD generates a request with probability p; it is queued while the
 * coalition holds fewer than K requests and dropped otherwise, and a non-head
 * member pays one short-range forward per queued request.
 */
inline void step(sim_state& s, network const& net, system_config const& cfg, rng_type& rng, slot_events& ev)
{
	int const M = static_cast<int>(s.game.member_queues.size());
	auto& cs = s.game.part.coalitions;
	auto& mq = s.game.member_queues;
	ev.clear(M);
	ev.slot = s.slot;
	std::fill(s.slot_energy.begin(), s.slot_energy.end(), 0.0);
	s.preamble_use.assign(static_cast<std::size_t>(cfg.mu) + 1, 0);

	std::uniform_int_distribution<int> preamble(1, cfg.mu);
	std::vector<std::size_t> sending;
	for (std::size_t i = 0; i < cs.size(); ++i)
	{
		if (cs[i].queue.length > 0)
		{
			int pre = preamble(rng);
			sending.push_back(i);
			ev.transmitters.push_back(cs[i].head);
			ev.preambles.push_back(pre);
			++s.preamble_use[static_cast<std::size_t>(pre)];
			double e = net.lr_energy(cs[i].head);
			s.slot_energy[static_cast<std::size_t>(cs[i].head)] += e;
			ev.energy += e;
		}
	}
	for (std::size_t k = 0; k < sending.size(); ++k)
	{
		auto& c = cs[sending[k]];
		if (s.preamble_use[static_cast<std::size_t>(ev.preambles[k])] != 1)
		{
			ev.collisions.push_back(c.head);
			continue;
		}
		ev.successes.push_back(c.head);
		auto& cur = s.cursor[sending[k]];
		for (std::size_t tries = 0; tries < c.members.size(); ++tries)
		{
			mtd_id m = c.members[cur];
			cur = (cur + 1) % c.members.size();
			if (mq[static_cast<std::size_t>(m)] > 0)
			{
				--mq[static_cast<std::size_t>(m)];
				--c.queue.length;
				ev.served.push_back(m);
				break;
			}
		}
	}

	std::bernoulli_distribution arrive(cfg.p);
	for (mtd_id m = 0; m < M; ++m)
	{
		if (!arrive(rng))
		{
			continue;
		}
		ev.arrivals[static_cast<std::size_t>(m)] = 1;
		auto& c = cs[static_cast<std::size_t>(s.owner[static_cast<std::size_t>(m)])];
		if (c.queue.length >= c.queue.capacity)
		{
			++ev.drops;
			continue;
		}
		++c.queue.length;
		++mq[static_cast<std::size_t>(m)];
		++ev.enqueued;
		if (m != c.head)
		{
			double e = net.sr_energy(m, c.head);
			s.slot_energy[static_cast<std::size_t>(m)] += e;
			ev.energy += e;
		}
	}
	++s.slot;
}

enum class policy_kind { noncooperative, coalition, fixed };

inline std::string to_string(policy_kind k)
{
	switch (k)
	{
	case policy_kind::noncooperative:
		return "noncooperative";
	case policy_kind::coalition:
		return "coalition";
	case policy_kind::fixed:
		return "fixed";
	}
	return "?";
}

struct policy
{
	policy_kind kind = policy_kind::coalition;
	/// Used by policy_kind::fixed.
	assignment groups;

	static policy noncooperative() { return {policy_kind::noncooperative, {}}; }
	static policy coalition() { return {policy_kind::coalition, {}}; }
	static policy fixed(assignment a) { return {policy_kind::fixed, std::move(a)}; }
};

struct run_metrics
{
	double fail_ratio = 0;
	/// Joules per MTD over the run.
	double energy_per_mtd = 0;
	/// Requests per MTD, averaged over slots.
	double mean_queue = 0;
	/// Realized per-MTD per-slot payoff (nonpositive).
	double utility = 0;
	long iterations = 0;
	double moves_per_coalition = 0;
	std::optional<double> price_of_anarchy;
	long drops = 0;
	long arrivals = 0;
	long transmissions = 0;
	long collisions = 0;
	long successes = 0;
	int coalitions = 0;
	double mean_coalition_size = 0;
	int passes = 0;
	long max_merge_attempts = 0;
	long max_split_attempts = 0;
	bool attempts_within_bounds = true;
	long slots = 0;

	bool operator==(run_metrics const&) const = default;
};

inline void to_json(nlohmann::json& j, run_metrics const& r)
{
	j = nlohmann::json{{"fail_ratio", r.fail_ratio},
					   {"energy_per_mtd_J", r.energy_per_mtd},
					   {"mean_queue", r.mean_queue},
					   {"utility", r.utility},
					   {"iterations", r.iterations},
					   {"moves_per_coalition", r.moves_per_coalition},
					   {"drops", r.drops},
					   {"arrivals", r.arrivals},
					   {"transmissions", r.transmissions},
					   {"collisions", r.collisions},
					   {"successes", r.successes},
					   {"coalitions", r.coalitions},
					   {"mean_coalition_size", r.mean_coalition_size},
					   {"passes", r.passes},
					   {"max_merge_attempts", r.max_merge_attempts},
					   {"max_split_attempts", r.max_split_attempts},
					   {"attempts_within_bounds", r.attempts_within_bounds},
					   {"slots", r.slots}};
	j["price_of_anarchy"] = r.price_of_anarchy ? nlohmann::json(*r.price_of_anarchy) : nlohmann::json(nullptr);
}

struct run_result
{
	run_metrics metrics;
	game_state initial;
	game_state final_state;
	std::vector<trace_entry> trace;
	std::vector<pass_stats> passes;
	/// Requests delivered per MTD.
	std::vector<long> delivered;
};

/// Per-slot event log columns.
inline void write_event_header(std::ostream& os)
{
	os << "slot,arrivals,enqueued,drops,transmissions,successes,collisions,queued_total,energy_J\n";
}

inline void write_event_row(std::ostream& os, slot_events const& ev, sim_state const& s)
{
	long arrivals = std::count(ev.arrivals.begin(), ev.arrivals.end(), 1);
	long queued = 0;
	for (auto q : s.game.member_queues)
	{
		queued += q;
	}
	os << ev.slot << ',' << arrivals << ',' << ev.enqueued << ',' << ev.drops << ',' << ev.transmitters.size() << ','
	   << ev.successes.size() << ',' << ev.collisions.size() << ',' << queued << ',' << detail::format_double(ev.energy)
	   << '\n';
}

namespace detail {

inline void record_formation(run_result& r, formation_result const& f, int M)
{
	r.trace.insert(r.trace.end(), f.trace.begin(), f.trace.end());
	for (auto const& p : f.passes)
	{
		r.passes.push_back(p);
		r.metrics.max_merge_attempts = std::max(r.metrics.max_merge_attempts, p.merge_attempts);
		r.metrics.max_split_attempts = std::max(r.metrics.max_split_attempts, p.split_attempts);
		if (p.merge_attempts > static_cast<long>(M) * (M - 1) / 2 || p.split_attempts > p.split_bound)
		{
			r.metrics.attempts_within_bounds = false;
		}
	}
	r.metrics.iterations += f.moves();
	r.metrics.passes += static_cast<int>(f.passes.size());
}

} // namespace detail

/**
 * Runs `slots` slots under the policy.
 *
 * The coalition policy forms coalitions from all singletons at slot 0 and,
 * with a positive reform_period, re-forms from the current state every
 * reform_period slots. Utility charges each MTD -alpha Q - beta E - gamma |S|
 * per slot, with Q the coalition queue (altruistic) or its own queue
 * (selfish) and E its realized energy share in value units.
 */
inline run_result run_scenario(system_config const& cfg, policy const& pol, long slots, network const& net,
							   std::ostream* event_log = nullptr)
{
	if (slots < 1)
	{
		throw std::invalid_argument("slots must be at least 1");
	}
	int const M = net.size();
	if (M != cfg.M)
	{
		throw std::invalid_argument("network size does not match config");
	}
	run_result r;
	r.delivered.assign(static_cast<std::size_t>(M), 0);

	partition start = singleton_partition(M, cfg.K);
	if (pol.kind == policy_kind::fixed)
	{
		if (pol.groups.mtds() != M)
		{
			throw std::invalid_argument("assignment size does not match config");
		}
		start = pol.groups.to_partition(cfg.K);
	}
	std::optional<valuator> val;
	game_state g0 = initial_state(start, M);
	if (pol.kind == policy_kind::coalition)
	{
		val.emplace(net, cfg);
		auto f = run_formation(g0, *val);
		detail::record_formation(r, f, M);
		g0 = f.state;
	}
	r.initial = g0;
	auto s = make_sim_state(std::move(g0));
	auto rng = make_rng(cfg.rng_seed, stream::slots);
	slot_events ev;
	if (event_log)
	{
		write_event_header(*event_log);
	}

	double utility = 0;
	double queue_sum = 0;
	double energy = 0;
	for (long t = 0; t < slots; ++t)
	{
		if (pol.kind == policy_kind::coalition && cfg.reform_period > 0 && t > 0 && t % cfg.reform_period == 0)
		{
			auto f = run_formation(s.game, *val);
			detail::record_formation(r, f, M);
			s.game = f.state;
			s.reindex();
		}
		step(s, net, cfg, rng, ev);
		energy += ev.energy;
		r.metrics.arrivals += std::count(ev.arrivals.begin(), ev.arrivals.end(), 1);
		r.metrics.drops += ev.drops;
		r.metrics.transmissions += static_cast<long>(ev.transmitters.size());
		r.metrics.successes += static_cast<long>(ev.successes.size());
		r.metrics.collisions += static_cast<long>(ev.collisions.size());
		for (auto m : ev.served)
		{
			++r.delivered[static_cast<std::size_t>(m)];
		}
		for (auto const& c : s.game.part.coalitions)
		{
			double n = static_cast<double>(c.size());
			double head_energy = s.slot_energy[static_cast<std::size_t>(c.head)];
			queue_sum += c.queue.length;
			for (auto m : c.members)
			{
				auto w = weights_of(cfg, m);
				double own = m == c.head ? 0.0 : s.slot_energy[static_cast<std::size_t>(m)];
				double q = cfg.mode == cooperation_mode::altruistic ? c.queue.length
																	 : s.game.member_queues[static_cast<std::size_t>(m)];
				utility += -w.alpha * q - w.beta * cfg.energy_scale * (head_energy / n + own) - w.gamma * n;
			}
		}
		if (event_log)
		{
			write_event_row(*event_log, ev, s);
		}
	}

	auto& mt = r.metrics;
	mt.slots = slots;
	mt.fail_ratio = mt.transmissions > 0 ? static_cast<double>(mt.collisions) / mt.transmissions : 0.0;
	mt.energy_per_mtd = energy / M;
	mt.mean_queue = queue_sum / (static_cast<double>(M) * slots);
	mt.utility = utility / (static_cast<double>(M) * slots);
	mt.coalitions = static_cast<int>(s.game.part.coalitions.size());
	mt.mean_coalition_size = static_cast<double>(M) / mt.coalitions;
	mt.moves_per_coalition = static_cast<double>(mt.iterations) / mt.coalitions;
	r.final_state = std::move(s.game);
	return r;
}

inline run_result run_scenario(system_config const& cfg, policy const& pol, std::ostream* event_log = nullptr)
{
	auto net = build_network(cfg);
	return run_scenario(cfg, pol, cfg.slots, net, event_log);
}

/**
 * Efficiency of a distributed outcome against the centralized one. Realized
 * utilities are costs (nonpositive), so the ratio is taken as optimum cost
 * over distributed cost: 1 means the distributed outcome is as good as the
 * optimum, values below 1 mean it is worse.
 */
inline double price_of_anarchy(double distributed_utility, double optimum_utility)
{
	if (!(distributed_utility < 0) || !(optimum_utility < 0))
	{
		throw std::domain_error("price of anarchy needs negative utilities");
	}
	return optimum_utility / distributed_utility;
}

} // namespace coopra

#endif // COOPRA_SIMULATION_HPP

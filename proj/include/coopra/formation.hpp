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

#ifndef COOPRA_FORMATION_HPP
#define COOPRA_FORMATION_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <coopra/model.hpp>
#include <coopra/valuation.hpp>

namespace coopra {

/// Absolute slack used in every value comparison.
inline constexpr double value_tolerance = 1e-9;

enum class move_kind { stay, split, merge };

inline std::string to_string(move_kind k)
{
	switch (k)
	{
	case move_kind::stay: return "stay";
	case move_kind::split: return "split";
	case move_kind::merge: return "merge";
	}
	return "?";
}

/**
 * One-step coalitional move of an MTD.
 *
 * split: the actor leaves with `group` (itself plus some coalition-mates,
 * fewer than the whole coalition). merge: the actor's coalition joins
 * coalition `target`; `group` is the union.
 */
struct move
{
	move_kind kind = move_kind::stay;
	mtd_id actor = 0;
	int target = -1;
	std::vector<mtd_id> group;

	bool operator==(move const&) const = default;
};

/// Number of k-subsets (k < |S|) of a size-n coalition containing a given member.
inline std::uint64_t split_move_count(std::size_t n)
{
	return n <= 1 ? 0 : (std::uint64_t{1} << (n - 1)) - 1;
}

namespace detail {

inline std::vector<std::vector<mtd_id>> split_groups(std::vector<mtd_id> const& members, mtd_id actor)
{
	std::vector<mtd_id> others;
	for (auto m : members)
	{
		if (m != actor)
		{
			others.push_back(m);
		}
	}
	if (others.size() > 24)
	{
		throw std::length_error("coalition too large to enumerate splits");
	}
	std::vector<std::vector<mtd_id>> groups;
	std::uint32_t const full = (std::uint32_t{1} << others.size()) - 1;
	for (std::uint32_t mask = 0; mask < full; ++mask)
	{
		std::vector<mtd_id> g{actor};
		for (std::size_t b = 0; b < others.size(); ++b)
		{
			if (mask & (std::uint32_t{1} << b))
			{
				g.push_back(others[b]);
			}
		}
		std::sort(g.begin(), g.end());
		groups.push_back(std::move(g));
	}
	std::stable_sort(groups.begin(), groups.end(),
					 [](auto const& a, auto const& b) { return a.size() < b.size() || (a.size() == b.size() && a < b); });
	return groups;
}

inline std::vector<mtd_id> set_union(std::vector<mtd_id> const& a, std::vector<mtd_id> const& b)
{
	std::vector<mtd_id> u;
	std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
	return u;
}

inline std::vector<mtd_id> set_minus(std::vector<mtd_id> const& a, std::vector<mtd_id> const& b)
{
	std::vector<mtd_id> d;
	std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d));
	return d;
}

inline int owner(partition const& p, mtd_id m)
{
	for (std::size_t i = 0; i < p.coalitions.size(); ++i)
	{
		if (p.coalitions[i].contains(m))
		{
			return static_cast<int>(i);
		}
	}
	throw std::invalid_argument("MTD " + std::to_string(m) + " not in partition");
}

} // namespace detail

/**
 * All one-step moves of MTD m: stay, every split group containing m, and a
 * merge with every other coalition whose members can all reach each other.
 */
inline std::vector<move> enumerate_moves(game_state const& state, mtd_id m, network const& net)
{
	auto const& p = state.part;
	int const i = detail::owner(p, m);
	auto const& own = p.coalitions[static_cast<std::size_t>(i)];
	std::vector<move> moves{{move_kind::stay, m, i, own.members}};
	for (auto& g : detail::split_groups(own.members, m))
	{
		moves.push_back({move_kind::split, m, i, std::move(g)});
	}
	for (std::size_t j = 0; j < p.coalitions.size(); ++j)
	{
		if (static_cast<int>(j) == i)
		{
			continue;
		}
		auto const& other = p.coalitions[j];
		if (net.feasible_union(own.members, other.members))
		{
			moves.push_back({move_kind::merge, m, static_cast<int>(j), detail::set_union(own.members, other.members)});
		}
	}
	return moves;
}

enum class profitability { none, weak, strict };

/// Members whose consent a move needs: the leaving group of a split, both sides of a merge.
inline std::vector<mtd_id> consenting_members(move const& mv)
{
	return mv.kind == move_kind::stay ? std::vector<mtd_id>{} : mv.group;
}

namespace detail {

inline double current_member_value(valuator const& val, game_state const& state, coalition const& c, mtd_id m)
{
	if (!val.feasible(c.members))
	{
		return -std::numeric_limits<double>::infinity();
	}
	return val.member_value(c.members, state.member_queues, m);
}

} // namespace detail

/**
 * Classifies a move by the values of its consenting members: strict when all
 * gain, weak when none loses. stay is never profitable.
 */
inline profitability is_profitable(game_state const& state, move const& mv, valuator const& val)
{
	if (mv.kind == move_kind::stay)
	{
		return profitability::none;
	}
	auto const& p = state.part;
	bool all_strict = true;
	for (auto m : consenting_members(mv))
	{
		auto const& from = p.coalitions[static_cast<std::size_t>(detail::owner(p, m))];
		double before = detail::current_member_value(val, state, from, m);
		double after = val.member_value(mv.group, state.member_queues, m);
		if (after < before - value_tolerance)
		{
			return profitability::none;
		}
		if (!(after > before + value_tolerance))
		{
			all_strict = false;
		}
	}
	return all_strict ? profitability::strict : profitability::weak;
}

namespace detail {

inline bool blocking(game_state const& state, std::vector<int> const& index, move const& mv, valuator const& val,
					 double* actor_before, double* actor_after)
{
	if (mv.kind == move_kind::stay)
	{
		return false;
	}
	auto const& p = state.part;
	for (auto m : mv.group)
	{
		auto const& from = p.coalitions[static_cast<std::size_t>(index[static_cast<std::size_t>(m)])];
		double before = current_member_value(val, state, from, m);
		double after = val.member_value(mv.group, state.member_queues, m);
		if (m == mv.actor)
		{
			if (actor_before) *actor_before = before;
			if (actor_after) *actor_after = after;
			if (!(after > before + value_tolerance))
			{
				return false;
			}
		}
		else if (after < before - value_tolerance)
		{
			return false;
		}
	}
	return true;
}

} // namespace detail

/// A move blocks the current partition when its actor strictly gains and every other consenting member weakly gains.
inline bool is_blocking(game_state const& state, move const& mv, valuator const& val, double* actor_before = nullptr,
						double* actor_after = nullptr)
{
	auto index = coalition_index(state.part, static_cast<int>(state.member_queues.size()));
	return detail::blocking(state, index, mv, val, actor_before, actor_after);
}

/// Applies a move, keeping coalitions canonical and member queues within capacity.
inline void apply_move(game_state& state, move const& mv)
{
	if (mv.kind == move_kind::stay)
	{
		return;
	}
	auto& cs = state.part.coalitions;
	int const K = cs.front().queue.capacity;
	int const i = detail::owner(state.part, mv.actor);
	if (mv.kind == move_kind::split)
	{
		auto rest = detail::set_minus(cs[static_cast<std::size_t>(i)].members, mv.group);
		cs[static_cast<std::size_t>(i)] = make_coalition(mv.group, 0, K);
		cs.push_back(make_coalition(std::move(rest), 0, K));
	}
	else
	{
		int j = mv.target;
		cs[static_cast<std::size_t>(i)] = make_coalition(mv.group, 0, K);
		cs.erase(cs.begin() + j);
		// Requests beyond the merged capacity are dropped from the longest member queues.
		int sum = 0;
		for (auto m : mv.group)
		{
			sum += state.member_queues[static_cast<std::size_t>(m)];
		}
		while (sum > K)
		{
			auto longest = *std::max_element(mv.group.begin(), mv.group.end(), [&](mtd_id a, mtd_id b) {
				return state.member_queues[static_cast<std::size_t>(a)] < state.member_queues[static_cast<std::size_t>(b)];
			});
			--state.member_queues[static_cast<std::size_t>(longest)];
			--sum;
		}
	}
	canonicalize(state.part);
	sync_queues(state);
}

struct trace_entry
{
	int pass = 0;
	long step = 0;
	mtd_id actor = 0;
	move_kind kind = move_kind::stay;
	std::vector<mtd_id> group;
	double value_before = 0;
	double value_after = 0;
};

/// Work done in one full pass over the MTDs, with the matching worst-case bounds.
struct pass_stats
{
	int pass = 0;
	long merge_attempts = 0;
	long split_attempts = 0;
	long merge_bound = 0;
	long split_bound = 0;
	int moves = 0;
};

struct formation_result
{
	game_state state;
	std::vector<trace_entry> trace;
	std::vector<pass_stats> passes;

	long moves() const { return static_cast<long>(trace.size()); }
};

class convergence_error : public std::runtime_error
{
public:
	convergence_error(std::string const& what, formation_result partial)
		: std::runtime_error(what)
		, partial_(std::move(partial))
	{
	}

	formation_result const& partial() const { return partial_; }

private:
	formation_result partial_;
};

/**
 * Sequential merge-and-split coalition formation.
 *
 * MTDs act in id order. Each takes the move with the highest own value among
 * those that block the current partition; ties go to the smaller resulting
 * coalition, then to the earlier move in enumeration order, and the MTD stays
 * when nothing blocks. The run stops after a full pass with no change.
 * Merge attempts are counted once per unordered coalition pair per pass.
 */
inline formation_result run_formation(game_state initial, valuator const& val)
{
	auto const& cfg = val.config();
	int const M = static_cast<int>(initial.member_queues.size());
	assert_partition(initial.part, M);
	canonicalize(initial.part);
	sync_queues(initial);

	formation_result res;
	res.state = std::move(initial);
	long step = 0;
	for (int pass = 1;; ++pass)
	{
		if (pass > cfg.max_passes)
		{
			throw convergence_error("no convergence after " + std::to_string(cfg.max_passes) + " passes", res);
		}
		pass_stats stats;
		stats.pass = pass;
		stats.merge_bound = static_cast<long>(M) * (M - 1) / 2;
		std::set<std::pair<std::vector<mtd_id>, std::vector<mtd_id>>> merge_pairs;

		for (mtd_id m = 0; m < M; ++m)
		{
			auto& state = res.state;
			auto moves = enumerate_moves(state, m, val.net());
			auto const index = coalition_index(state.part, M);
			auto const& own = state.part.coalitions[static_cast<std::size_t>(detail::owner(state.part, m))];
			stats.split_bound += static_cast<long>(split_move_count(own.size()));

			std::optional<std::size_t> best;
			double best_value = 0;
			double best_before = 0;
			for (std::size_t k = 0; k < moves.size(); ++k)
			{
				auto const& mv = moves[k];
				if (mv.kind == move_kind::stay)
				{
					continue;
				}
				if (mv.kind == move_kind::split)
				{
					++stats.split_attempts;
				}
				else
				{
					auto const& other = state.part.coalitions[static_cast<std::size_t>(mv.target)];
					auto key = std::minmax(own.members, other.members);
					if (merge_pairs.insert({key.first, key.second}).second)
					{
						++stats.merge_attempts;
					}
				}
				double before = 0;
				double after = 0;
				if (!detail::blocking(state, index, mv, val, &before, &after))
				{
					continue;
				}
				bool better = !best || after > best_value + value_tolerance ||
							  (after >= best_value - value_tolerance && mv.group.size() < moves[*best].group.size());
				if (better)
				{
					best = k;
					best_value = after;
					best_before = before;
				}
			}
			if (!best)
			{
				continue;
			}
			auto const& mv = moves[*best];
			res.trace.push_back({pass, ++step, m, mv.kind, mv.group, best_before, best_value});
			apply_move(state, mv);
			assert_partition(state.part, M);
			++stats.moves;
		}
		res.passes.push_back(stats);
		if (stats.moves == 0)
		{
			return res;
		}
	}
}

struct stability_violation
{
	move mv;
	double value_current = 0;
	double value_deviation = 0;
};

struct stability_report
{
	bool stable = true;
	std::vector<stability_violation> violations;
};

/// Lists every blocking split or merge of the given state.
inline stability_report check_stable(game_state const& state, valuator const& val)
{
	stability_report rep;
	int const M = static_cast<int>(state.member_queues.size());
	auto const index = coalition_index(state.part, M);
	for (mtd_id m = 0; m < M; ++m)
	{
		for (auto const& mv : enumerate_moves(state, m, val.net()))
		{
			double before = 0;
			double after = 0;
			if (detail::blocking(state, index, mv, val, &before, &after))
			{
				rep.violations.push_back({mv, before, after});
			}
		}
	}
	rep.stable = rep.violations.empty();
	return rep;
}

/**
 * Checks the farsightedness conditions for one discount factor: for every
 * deviation, the discounted future advantage of staying must cover the
 * current-slot gain of deviating, u_d(D) - u_d(S) <= u_r(S) - u_r(D), for the
 * actor, with the other consenting members' consent as in check_stable.
 */
inline bool farsighted_conditions_hold(game_state const& state, valuator const& val)
{
	auto const& p = state.part;
	int const M = static_cast<int>(state.member_queues.size());
	auto const index = coalition_index(p, M);
	for (mtd_id m = 0; m < M; ++m)
	{
		for (auto const& mv : enumerate_moves(state, m, val.net()))
		{
			if (mv.kind == move_kind::stay)
			{
				continue;
			}
			auto const& from = p.coalitions[static_cast<std::size_t>(index[static_cast<std::size_t>(m)])];
			if (!val.feasible(from.members))
			{
				return false;
			}
			auto const& cur = val.value(from.members, state.member_queues);
			auto const& dev = val.value(mv.group, state.member_queues);
			auto ci = std::lower_bound(from.members.begin(), from.members.end(), m) - from.members.begin();
			auto di = std::lower_bound(mv.group.begin(), mv.group.end(), m) - mv.group.begin();
			double current_gain = dev.deterministic[static_cast<std::size_t>(di)] - cur.deterministic[static_cast<std::size_t>(ci)];
			double future_advantage = cur.future[static_cast<std::size_t>(ci)] - dev.future[static_cast<std::size_t>(di)];
			if (current_gain > future_advantage + value_tolerance && detail::blocking(state, index, mv, val, nullptr, nullptr))
			{
				return false;
			}
		}
	}
	return true;
}

/**
 * Smallest discount factor on the grid at which the given state satisfies
 * every farsightedness condition, or nullopt when none does.
 */
inline std::optional<double> delta_threshold(game_state const& state, network const& net, system_config cfg,
											 std::vector<double> const& grid)
{
	if (grid.empty())
	{
		throw std::invalid_argument("delta_threshold: empty grid");
	}
	if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() <= 0 || grid.back() >= 1)
	{
		throw std::invalid_argument("delta_threshold: grid must be sorted inside (0, 1)");
	}
	for (double d : grid)
	{
		cfg.delta = d;
		valuator val(net, cfg);
		if (farsighted_conditions_hold(state, val))
		{
			return d;
		}
	}
	return std::nullopt;
}

inline void write_trace_csv(std::ostream& os, formation_result const& res)
{
	os << "pass,step,actor,move,group,value_before,value_after\n";
	os.precision(17);
	for (auto const& t : res.trace)
	{
		os << t.pass << ',' << t.step << ',' << t.actor << ',' << to_string(t.kind) << ',';
		for (std::size_t i = 0; i < t.group.size(); ++i)
		{
			os << (i ? " " : "") << t.group[i];
		}
		os << ',' << t.value_before << ',' << t.value_after << '\n';
	}
}

} // namespace coopra

#endif // COOPRA_FORMATION_HPP

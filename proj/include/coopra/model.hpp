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

#ifndef COOPRA_MODEL_HPP
#define COOPRA_MODEL_HPP

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace coopra {

using mtd_id = int;

struct point
{
	double x = 0;
	double y = 0;

	bool operator==(point const&) const = default;
};

/// Bounded request buffer. Lengths are clamped to [0, capacity].
struct queue_state
{
	int length = 0;
	int capacity = 0;

	bool full() const { return length >= capacity; }
	bool empty() const { return length <= 0; }

	/// Enqueues one request; returns false (a drop) when full.
	bool push()
	{
		if (full())
		{
			return false;
		}
		++length;
		return true;
	}

	bool pop()
	{
		if (empty())
		{
			return false;
		}
		--length;
		return true;
	}

	bool operator==(queue_state const&) const = default;
};

struct mtd
{
	mtd_id id = 0;
	point position;
	queue_state queue;
};

/// A group of MTDs sharing one head (the MTH). Members are kept sorted.
struct coalition
{
	std::vector<mtd_id> members;
	mtd_id head = 0;
	queue_state queue;

	std::size_t size() const { return members.size(); }
	/// Round-robin scheduling weight.
	double sched_weight() const { return 1.0 / static_cast<double>(members.size()); }
	/// Share of head duty carried by each member.
	double head_share() const { return 1.0 / static_cast<double>(members.size()); }

	bool contains(mtd_id m) const { return std::binary_search(members.begin(), members.end(), m); }

	bool operator==(coalition const&) const = default;
};

/// Builds a coalition from an arbitrary member list; the head is the lowest id.
inline coalition make_coalition(std::vector<mtd_id> members, int queue_length, int capacity)
{
	if (members.empty())
	{
		throw std::invalid_argument("empty coalition");
	}
	std::sort(members.begin(), members.end());
	coalition c;
	c.head = members.front();
	c.members = std::move(members);
	c.queue = {std::min(queue_length, capacity), capacity};
	return c;
}

struct partition
{
	std::vector<coalition> coalitions;
	long slot = 0;

	bool operator==(partition const&) const = default;
};

/// Sorts coalitions by head so equal partitions compare equal.
inline void canonicalize(partition& p)
{
	std::sort(p.coalitions.begin(), p.coalitions.end(),
			  [](coalition const& a, coalition const& b) { return a.members.front() < b.members.front(); });
}

/// Member lists only, canonical order; handy for comparisons and tests.
inline std::vector<std::vector<mtd_id>> groups_of(partition const& p)
{
	std::vector<std::vector<mtd_id>> g;
	for (auto const& c : p.coalitions)
	{
		g.push_back(c.members);
	}
	std::sort(g.begin(), g.end());
	return g;
}

/// Returns an empty string when p is a disjoint cover of {0..M-1}, else the reason.
inline std::string partition_violation(partition const& p, int M)
{
	std::vector<int> seen(static_cast<std::size_t>(M), 0);
	for (std::size_t i = 0; i < p.coalitions.size(); ++i)
	{
		auto const& c = p.coalitions[i];
		if (c.members.empty())
		{
			return "coalition " + std::to_string(i) + " is empty";
		}
		if (!std::is_sorted(c.members.begin(), c.members.end()))
		{
			return "coalition " + std::to_string(i) + " members unsorted";
		}
		if (!c.contains(c.head))
		{
			return "coalition " + std::to_string(i) + " head not a member";
		}
		for (auto m : c.members)
		{
			if (m < 0 || m >= M)
			{
				return "unknown MTD " + std::to_string(m);
			}
			if (seen[static_cast<std::size_t>(m)]++)
			{
				return "MTD " + std::to_string(m) + " in two coalitions";
			}
		}
	}
	for (int m = 0; m < M; ++m)
	{
		if (!seen[static_cast<std::size_t>(m)])
		{
			return "MTD " + std::to_string(m) + " uncovered";
		}
	}
	return {};
}

inline void assert_partition(partition const& p, int M)
{
	if (auto why = partition_violation(p, M); !why.empty())
	{
		throw std::logic_error("partition invariant violated: " + why);
	}
}

inline partition singleton_partition(int M, int capacity)
{
	partition p;
	for (mtd_id m = 0; m < M; ++m)
	{
		p.coalitions.push_back(make_coalition({m}, 0, capacity));
	}
	return p;
}

inline partition grand_partition(int M, int capacity)
{
	std::vector<mtd_id> all(static_cast<std::size_t>(M));
	std::iota(all.begin(), all.end(), 0);
	partition p;
	p.coalitions.push_back(make_coalition(std::move(all), 0, capacity));
	return p;
}

inline partition partition_from_groups(std::vector<std::vector<mtd_id>> const& groups, int capacity)
{
	partition p;
	for (auto const& g : groups)
	{
		p.coalitions.push_back(make_coalition(g, 0, capacity));
	}
	canonicalize(p);
	return p;
}

/// Index of the coalition holding each MTD.
inline std::vector<int> coalition_index(partition const& p, int M)
{
	std::vector<int> idx(static_cast<std::size_t>(M), -1);
	for (std::size_t i = 0; i < p.coalitions.size(); ++i)
	{
		for (auto m : p.coalitions[i].members)
		{
			idx[static_cast<std::size_t>(m)] = static_cast<int>(i);
		}
	}
	return idx;
}

/**
 * State of the repeated game at one slot: the partition plus queue snapshots.
 *
 * Coalition queues live in each coalition; member queues are kept per MTD and
 * always sum to their coalition's queue.
 */
struct game_state
{
	partition part;
	std::vector<int> member_queues;

	std::vector<queue_state> queues() const
	{
		std::vector<queue_state> q;
		for (auto const& c : part.coalitions)
		{
			q.push_back(c.queue);
		}
		return q;
	}

	bool operator==(game_state const&) const = default;
};

inline game_state initial_state(partition p, int M)
{
	game_state s;
	s.part = std::move(p);
	s.member_queues.assign(static_cast<std::size_t>(M), 0);
	for (auto& c : s.part.coalitions)
	{
		c.queue.length = 0;
	}
	return s;
}

/// Recomputes coalition queue lengths from member queues.
inline void sync_queues(game_state& s)
{
	for (auto& c : s.part.coalitions)
	{
		int sum = 0;
		for (auto m : c.members)
		{
			sum += s.member_queues[static_cast<std::size_t>(m)];
		}
		c.queue.length = std::min(sum, c.queue.capacity);
	}
}

inline std::string state_violation(game_state const& s)
{
	int M = static_cast<int>(s.member_queues.size());
	if (auto why = partition_violation(s.part, M); !why.empty())
	{
		return why;
	}
	for (auto const& c : s.part.coalitions)
	{
		int sum = 0;
		for (auto m : c.members)
		{
			sum += s.member_queues[static_cast<std::size_t>(m)];
		}
		if (sum != c.queue.length)
		{
			return "coalition headed by " + std::to_string(c.head) + " queue mismatch";
		}
		if (c.queue.length < 0 || c.queue.length > c.queue.capacity)
		{
			return "coalition headed by " + std::to_string(c.head) + " queue out of range";
		}
	}
	return {};
}

inline void to_json(nlohmann::json& j, coalition const& c)
{
	j = {{"members", c.members}, {"head", c.head}, {"queue", c.queue.length}, {"capacity", c.queue.capacity}};
}

inline void from_json(nlohmann::json const& j, coalition& c)
{
	c.members = j.at("members").get<std::vector<mtd_id>>();
	c.head = j.at("head").get<mtd_id>();
	c.queue = {j.at("queue").get<int>(), j.at("capacity").get<int>()};
}

inline void to_json(nlohmann::json& j, partition const& p)
{
	j = {{"slot", p.slot}, {"coalitions", p.coalitions}};
}

inline void from_json(nlohmann::json const& j, partition& p)
{
	p.slot = j.at("slot").get<long>();
	p.coalitions = j.at("coalitions").get<std::vector<coalition>>();
}

inline void to_json(nlohmann::json& j, game_state const& s)
{
	j = {{"partition", s.part}, {"member_queues", s.member_queues}};
}

inline void from_json(nlohmann::json const& j, game_state& s)
{
	s.part = j.at("partition").get<partition>();
	s.member_queues = j.at("member_queues").get<std::vector<int>>();
}

} // namespace coopra

#endif // COOPRA_MODEL_HPP

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

#include <gtest/gtest.h>

#include <sstream>

#include <coopra/formation.hpp>

#include "support.hpp"

using namespace coopra;

using test::count_blocking_deviations;

TEST(Formation, SplitMoveCount)
{
	EXPECT_EQ(split_move_count(1), 0u);
	EXPECT_EQ(split_move_count(3), 3u);
	EXPECT_EQ(split_move_count(5), 15u);
}

TEST(Formation, IsolatedSingletonOnlyStays)
{
	system_config cfg;
	cfg.M = 2;
	auto net = test::place(cfg, {{0, 0}, {150, 0}});
	auto s = initial_state(singleton_partition(2, cfg.K), 2);
	auto moves = enumerate_moves(s, 0, net);
	ASSERT_EQ(moves.size(), 1u);
	EXPECT_EQ(moves[0].kind, move_kind::stay);
}

TEST(Formation, ThreeMemberCoalitionMoves)
{
	system_config cfg;
	cfg.M = 5;
	auto net = test::place(cfg, {{0, 0}, {2, 0}, {0, 2}, {2, 2}, {1, 1}});
	auto s = initial_state(partition_from_groups({{0, 1, 2}, {3, 4}}, cfg.K), 5);
	for (mtd_id m : {0, 1, 2})
	{
		auto moves = enumerate_moves(s, m, net);
		auto splits = std::count_if(moves.begin(), moves.end(), [](move const& mv) { return mv.kind == move_kind::split; });
		auto merges = std::count_if(moves.begin(), moves.end(), [](move const& mv) { return mv.kind == move_kind::merge; });
		EXPECT_EQ(splits, 3);
		EXPECT_EQ(merges, 1);
		for (auto const& mv : moves)
		{
			EXPECT_TRUE(std::binary_search(mv.group.begin(), mv.group.end(), m));
			if (mv.kind == move_kind::split)
			{
				EXPECT_LT(mv.group.size(), 3u);
			}
		}
	}
}

TEST(Formation, StayIsNeverProfitable)
{
	system_config cfg;
	cfg.M = 2;
	auto net = test::place(cfg, {{0, 0}, {3, 0}});
	valuator val(net, cfg);
	auto s = initial_state(singleton_partition(2, cfg.K), 2);
	auto moves = enumerate_moves(s, 0, net);
	EXPECT_EQ(is_profitable(s, moves[0], val), profitability::none);
	EXPECT_FALSE(is_blocking(s, moves[0], val));
}

TEST(Formation, CloseSingletonsMergeStrictly)
{
	system_config cfg;
	cfg.M = 2;
	cfg.gamma = 0;
	auto net = test::place(cfg, {{30, 30}, {31, 30}});
	valuator val(net, cfg);
	auto s = initial_state(singleton_partition(2, cfg.K), 2);
	auto moves = enumerate_moves(s, 0, net);
	ASSERT_EQ(moves.back().kind, move_kind::merge);
	EXPECT_EQ(is_profitable(s, moves.back(), val), profitability::strict);
	auto res = run_formation(s, val);
	EXPECT_EQ(res.state.part.coalitions.size(), 1u);
}

TEST(Formation, HugeCostNeverMerges)
{
	system_config cfg = test::small_config(6);
	cfg.gamma = 1e6;
	auto net = build_network(cfg);
	valuator val(net, cfg);
	auto s = initial_state(singleton_partition(6, cfg.K), 6);
	for (mtd_id m = 0; m < 6; ++m)
	{
		for (auto const& mv : enumerate_moves(s, m, net))
		{
			EXPECT_NE(is_profitable(s, mv, val), profitability::strict);
			EXPECT_FALSE(is_blocking(s, mv, val));
		}
	}
	auto res = run_formation(s, val);
	EXPECT_EQ(res.state.part.coalitions.size(), 6u);
	EXPECT_EQ(res.passes.size(), 1u);

	auto grand = initial_state(grand_partition(6, cfg.K), 6);
	auto all_close = test::place(cfg, {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}});
	valuator close_val(all_close, cfg);
	auto rep = check_stable(grand, close_val);
	EXPECT_FALSE(rep.stable);
	for (auto const& v : rep.violations)
	{
		EXPECT_EQ(v.mv.kind, move_kind::split);
	}
}

TEST(Formation, SingleMtd)
{
	system_config cfg;
	cfg.M = 1;
	auto net = test::place(cfg, {{10, 0}});
	valuator val(net, cfg);
	auto res = run_formation(initial_state(singleton_partition(1, cfg.K), 1), val);
	EXPECT_EQ(res.state.part.coalitions.size(), 1u);
	EXPECT_EQ(res.passes.size(), 1u);
	EXPECT_EQ(res.moves(), 0);
}

TEST(Formation, OutOfRangePairStaysApart)
{
	system_config cfg;
	cfg.M = 2;
	auto net = test::place(cfg, {{-100, 0}, {100, 0}});
	valuator val(net, cfg);
	auto res = run_formation(initial_state(singleton_partition(2, cfg.K), 2), val);
	EXPECT_EQ(res.state.part.coalitions.size(), 2u);
}

TEST(Formation, OutputStableAgainstBruteForce)
{
	for (std::uint64_t seed = 1; seed <= 10; ++seed)
	{
		for (auto mode : {cooperation_mode::altruistic, cooperation_mode::selfish})
		{
			auto cfg = test::small_config(6, seed);
			cfg.mode = mode;
			auto net = build_network(cfg);
			valuator val(net, cfg);
			auto res = run_formation(initial_state(singleton_partition(6, cfg.K), 6), val);
			EXPECT_EQ(count_blocking_deviations(res.state, val), 0) << seed;
			EXPECT_TRUE(check_stable(res.state, val).stable);
			EXPECT_EQ(state_violation(res.state), "");
		}
	}
}

TEST(Formation, CheckStableMatchesBruteForce)
{
	auto cfg = test::small_config(7, 4);
	cfg.cell_side = 50;
	auto net = build_network(cfg);
	valuator val(net, cfg);
	std::vector<std::vector<std::vector<mtd_id>>> layouts = {
		{{0, 1, 2}, {3, 4}, {5, 6}}, {{0}, {1, 2, 3, 4}, {5, 6}}, {{0, 1, 2, 3, 4, 5, 6}}};
	for (auto const& groups : layouts)
	{
		auto s = initial_state(partition_from_groups(groups, cfg.K), 7);
		s.member_queues = {1, 0, 2, 0, 0, 3, 0};
		sync_queues(s);
		EXPECT_EQ(static_cast<int>(check_stable(s, val).violations.size()), count_blocking_deviations(s, val));
	}
}

TEST(Formation, DeterministicTrace)
{
	auto cfg = test::small_config(10, 3);
	auto net = build_network(cfg);
	valuator a(net, cfg);
	valuator b(net, cfg);
	auto s = initial_state(singleton_partition(10, cfg.K), 10);
	auto ra = run_formation(s, a);
	auto rb = run_formation(s, b);
	std::ostringstream oa;
	std::ostringstream ob;
	write_trace_csv(oa, ra);
	write_trace_csv(ob, rb);
	EXPECT_EQ(oa.str(), ob.str());
	EXPECT_EQ(ra.state, rb.state);
}

TEST(Formation, MovesImproveActorAndRespectBudgets)
{
	for (std::uint64_t seed = 1; seed <= 5; ++seed)
	{
		auto cfg = test::small_config(12, seed);
		auto net = build_network(cfg);
		valuator val(net, cfg);
		auto res = run_formation(initial_state(singleton_partition(12, cfg.K), 12), val);
		for (auto const& t : res.trace)
		{
			EXPECT_GT(t.value_after, t.value_before);
		}
		for (auto const& p : res.passes)
		{
			EXPECT_LE(p.merge_attempts, 12 * 11 / 2);
			EXPECT_LE(p.split_attempts, p.split_bound);
		}
		EXPECT_EQ(res.passes.back().moves, 0);
	}
}

TEST(Formation, WarmStartFromStableStateIsIdle)
{
	auto cfg = test::small_config(8, 2);
	auto net = build_network(cfg);
	valuator val(net, cfg);
	auto first = run_formation(initial_state(singleton_partition(8, cfg.K), 8), val);
	auto again = run_formation(first.state, val);
	EXPECT_EQ(again.moves(), 0);
	EXPECT_EQ(again.state, first.state);
}

TEST(Formation, PassCapRaisesWithPartialTrace)
{
	system_config cfg;
	cfg.M = 2;
	cfg.gamma = 0;
	cfg.max_passes = 1;
	auto net = test::place(cfg, {{30, 30}, {31, 30}});
	valuator val(net, cfg);
	try
	{
		run_formation(initial_state(singleton_partition(2, cfg.K), 2), val);
		FAIL() << "expected convergence_error";
	}
	catch (convergence_error const& e)
	{
		EXPECT_NE(std::string(e.what()).find("no convergence"), std::string::npos);
		EXPECT_EQ(e.partial().moves(), 1);
	}
}

TEST(Formation, MergeTrimsQueuesToCapacity)
{
	auto s = initial_state(partition_from_groups({{0, 1}, {2}}, 5), 3);
	s.member_queues = {3, 2, 4};
	sync_queues(s);
	move mv{move_kind::merge, 0, 1, {0, 1, 2}};
	apply_move(s, mv);
	EXPECT_EQ(s.part.coalitions.size(), 1u);
	EXPECT_EQ(s.part.coalitions[0].queue.length, 5);
	EXPECT_EQ(state_violation(s), "");
}

TEST(Formation, DeltaThresholdGridChecks)
{
	auto cfg = test::small_config(5, 1);
	auto net = build_network(cfg);
	auto s = initial_state(singleton_partition(5, cfg.K), 5);
	EXPECT_THROW(delta_threshold(s, net, cfg, {}), std::invalid_argument);
	EXPECT_THROW(delta_threshold(s, net, cfg, {0.5, 0.2}), std::invalid_argument);
	auto r = delta_threshold(s, net, cfg, {0.5});
	EXPECT_TRUE(!r || *r == 0.5);
}

TEST(Formation, DeltaThresholdAgreesWithStability)
{
	for (std::uint64_t seed = 1; seed <= 4; ++seed)
	{
		auto cfg = test::small_config(6, seed);
		auto net = build_network(cfg);
		valuator val(net, cfg);
		auto state = run_formation(initial_state(singleton_partition(6, cfg.K), 6), val).state;
		std::vector<double> grid{0.1, 0.3, 0.5, 0.8, 0.9};
		auto r = delta_threshold(state, net, cfg, grid);
		for (double d : grid)
		{
			auto c = cfg;
			c.delta = d;
			valuator v(net, c);
			bool stable = check_stable(state, v).stable;
			if (r && d == *r)
			{
				EXPECT_TRUE(stable);
			}
			if (!r || d < *r)
			{
				EXPECT_FALSE(stable) << d;
			}
		}
		// The partition was formed at delta = 0.8, a grid point, so some grid point qualifies.
		EXPECT_TRUE(r.has_value());
	}
}

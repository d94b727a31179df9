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

#include <numeric>
#include <sstream>

#include <coopra/optimizer.hpp>

#include "support.hpp"

using namespace coopra;

namespace {

// Discounted expected queue of one coalition by explicit path enumeration.
double path_objective(int size, int q0, double pd, system_config const& cfg)
{
	int const n = horizon_slots(cfg.delta, cfg.horizon_eps);
	double total = q0;
	for (int t = 1; t <= n; ++t)
	{
		test::for_each_path(size, cfg.p, pd, cfg.K, q0, t, [&](std::vector<int> const& path, double prob) {
			total += std::pow(cfg.delta, t) * prob * path.back();
		});
	}
	return total;
}

} // namespace

TEST(Optimizer, AssignmentForms)
{
	assignment a({4, 4, 1, 7, 1});
	EXPECT_EQ(a.labels(), (std::vector<int>{0, 0, 1, 2, 1}));
	EXPECT_EQ(a.coalitions(), 3);
	auto k = a.matrix();
	for (auto const& row : k)
	{
		EXPECT_EQ(std::accumulate(row.begin(), row.end(), 0), 1);
	}
	EXPECT_EQ(assignment::from_matrix(k), a);
	EXPECT_THROW(assignment::from_matrix({{1, 1}}), std::invalid_argument);
	EXPECT_THROW(assignment::from_matrix({{0, 0}}), std::invalid_argument);
	EXPECT_THROW(assignment::from_matrix({{2, 0}}), std::invalid_argument);
	auto p = a.to_partition(30);
	EXPECT_EQ(partition_violation(p, 5), "");
	EXPECT_EQ(assignment::from_partition(p, 5), a);
	std::ostringstream os;
	write_assignment_csv(os, a);
	EXPECT_EQ(os.str(), "mtd,coalition\n0,0\n1,0\n2,1\n3,2\n4,1\n");
}

TEST(Optimizer, MyopicObjectiveIsCurrentQueues)
{
	system_config cfg;
	cfg.delta = 0;
	assignment a({0, 0, 1, 2});
	std::vector<int> q{3, 4, 0, 6};
	EXPECT_DOUBLE_EQ(objective(a, cfg, q), 13.0);
}

TEST(Optimizer, SingletonObjectiveIsSumOfIndependentChains)
{
	system_config cfg;
	int const M = 5;
	auto a = assignment::singletons(M);
	std::vector<int> q{0, 1, 2, 0, 5};
	double const pd = exact_departure_prob(M, cfg.mu);
	auto k = build_kernel(1, cfg.p, pd, cfg.K);
	int const n = horizon_slots(cfg.delta, cfg.horizon_eps);
	double expected = 0;
	for (int q0 : q)
	{
		expected += q0;
		for (int t = 1; t <= n; ++t)
		{
			for (int e = 0; e <= cfg.K; ++e)
			{
				expected += std::pow(cfg.delta, t) * e * multi_hop_prob(k, q0, e, t);
			}
		}
	}
	EXPECT_NEAR(objective(a, cfg, q), expected, 1e-9);
}

TEST(Optimizer, ObjectiveMatchesPathEnumeration)
{
	system_config cfg;
	cfg.K = 3;
	cfg.delta = 0.5;
	cfg.horizon_eps = 0.05;
	cfg.p = 0.4;
	cfg.mu = 4;
	assignment a({0, 0, 1});
	std::vector<int> q{1, 0, 2};
	double pd = exact_departure_prob(2, cfg.mu);
	double oracle = path_objective(2, 1, pd, cfg) + path_objective(1, 2, pd, cfg);
	EXPECT_NEAR(objective(a, cfg, q), oracle, 1e-9);
}

TEST(Optimizer, FeasibilityReportsPairs)
{
	system_config cfg;
	cfg.M = 3;
	auto net = test::place(cfg, {{0, 0}, {3, 0}, {150, 0}});
	double generous = 1e9;
	EXPECT_TRUE(feasible(assignment::singletons(3), net, cfg, generous).feasible);
	auto rep = feasible(assignment({0, 0, 0}), net, cfg, generous);
	EXPECT_FALSE(rep.feasible);
	ASSERT_EQ(rep.infeasible_pairs.size(), 2u);
	EXPECT_EQ(rep.infeasible_pairs[0], (std::pair<mtd_id, mtd_id>{0, 2}));
	EXPECT_EQ(rep.infeasible_pairs[1], (std::pair<mtd_id, mtd_id>{1, 2}));
	EXPECT_EQ(rep.violations.size(), 2u);
	EXPECT_THROW(feasible(assignment::singletons(2), net, cfg, generous), std::invalid_argument);
}

// Two discounted slots (t0 and t0 + 1) with delta = 0.1.
TEST(Optimizer, EnergyBudgetBoundary)
{
	system_config cfg;
	cfg.M = 2;
	cfg.delta = 0.1;
	cfg.horizon_eps = 0.5;
	ASSERT_EQ(horizon_slots(cfg.delta, cfg.horizon_eps), 1);
	auto net = test::place(cfg, {{20, 0}, {23, 0}});
	assignment pair({0, 0});
	double pd = (1.0 / cfg.mu);
	double head = 1.1 * (net.lr_energy(0) / pd / 2 + 0.0);
	double member = 1.1 * (net.lr_energy(0) / pd / 2 + net.sr_energy(1, 0));
	double e_max = std::max(head, member);
	EXPECT_NEAR(discounted_slots(cfg), 1.1, 1e-15);
	auto energy = discounted_energy(pair, net, cfg);
	EXPECT_NEAR(energy[0], head, 1e-15 * head);
	EXPECT_NEAR(energy[1], member, 1e-15 * member);
	EXPECT_TRUE(feasible(pair, net, cfg, energy[1]).feasible);
	EXPECT_FALSE(feasible(pair, net, cfg, e_max * (1 - 1e-9)).feasible);
	EXPECT_EQ(feasible(pair, net, cfg, e_max * (1 - 1e-9)).energy_violations, 1);
}

TEST(Optimizer, DefaultBudgetAdmitsSingletons)
{
	auto cfg = test::small_config(8);
	auto net = build_network(cfg);
	EXPECT_EQ(energy_budget(net, cfg), default_energy_budget(net, cfg));
	EXPECT_TRUE(feasible(assignment::singletons(8), net, cfg, energy_budget(net, cfg)).feasible);
	cfg.E_max = 1.5;
	EXPECT_EQ(energy_budget(net, cfg), 1.5);
}

TEST(Optimizer, ExhaustiveVisitsBellManyPartitions)
{
	for (int M = 1; M <= 8; ++M)
	{
		auto cfg = test::small_config(M);
		auto net = build_network(cfg);
		EXPECT_EQ(exhaustive_search(net, cfg).evaluations, test::bell_number(M)) << M;
	}
	EXPECT_EQ(test::bell_number(10), 115975);
}

TEST(Optimizer, ExhaustiveTwoAndThree)
{
	for (int M : {2, 3})
	{
		auto cfg = test::small_config(M, 5);
		cfg.cell_side = 40;
		auto net = build_network(cfg);
		auto e_max = energy_budget(net, cfg);
		auto res = exhaustive_search(net, cfg);
		// Independent scan over hand-listed partitions.
		std::vector<std::vector<int>> all = M == 2 ? std::vector<std::vector<int>>{{0, 0}, {0, 1}}
												   : std::vector<std::vector<int>>{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1}, {0, 1, 2}};
		double best = std::numeric_limits<double>::infinity();
		for (auto const& l : all)
		{
			assignment a(l);
			if (feasible(a, net, cfg, e_max).feasible)
			{
				best = std::min(best, objective(a, cfg));
			}
		}
		EXPECT_DOUBLE_EQ(res.objective, best);
		EXPECT_DOUBLE_EQ(ga_search(net, cfg, cfg.ga).objective, best);
	}
}

TEST(Optimizer, ExhaustiveRefusesLargeInstances)
{
	auto cfg = test::small_config(exhaustive_limit + 1);
	auto net = build_network(cfg);
	try
	{
		exhaustive_search(net, cfg);
		FAIL() << "expected an exception";
	}
	catch (std::length_error const& e)
	{
		EXPECT_EQ(std::string(e.what()), "instance too large");
	}
}

TEST(Optimizer, GaMatchesExhaustiveOnFour)
{
	for (std::uint64_t seed = 1; seed <= 5; ++seed)
	{
		auto cfg = test::small_config(4, seed);
		cfg.cell_side = 60;
		auto net = build_network(cfg);
		EXPECT_DOUBLE_EQ(ga_search(net, cfg, cfg.ga).objective, exhaustive_search(net, cfg).objective) << seed;
	}
}

TEST(Optimizer, GaSingleMtd)
{
	auto cfg = test::small_config(1);
	auto net = build_network(cfg);
	auto res = ga_search(net, cfg, cfg.ga);
	EXPECT_EQ(res.best, assignment::singletons(1));
	EXPECT_TRUE(res.feasible);
}

TEST(Optimizer, GaElitismAndDeterminism)
{
	auto cfg = test::small_config(30, 2);
	auto net = build_network(cfg);
	auto params = cfg.ga;
	params.generations = 20;
	auto shorter = ga_search(net, cfg, params);
	auto same = ga_search(net, cfg, params);
	EXPECT_EQ(shorter.best, same.best);
	EXPECT_EQ(shorter.objective, same.objective);
	params.generations = 40;
	auto longer = ga_search(net, cfg, params);
	EXPECT_LE(longer.objective, shorter.objective);
	EXPECT_EQ(longer.generations, 40);
}

TEST(Optimizer, GaNeverPrefersInfeasible)
{
	auto cfg = test::small_config(12, 3);
	auto net = build_network(cfg);
	auto res = ga_search(net, cfg, cfg.ga);
	EXPECT_TRUE(feasible(res.best, net, cfg, energy_budget(net, cfg)).feasible);
	EXPECT_LE(res.objective, objective(assignment::singletons(12), cfg));
}

TEST(Optimizer, GaReportsInfeasibility)
{
	auto cfg = test::small_config(5, 3);
	cfg.E_max = 1e-12;
	auto net = build_network(cfg);
	auto params = cfg.ga;
	params.generations = 3;
	try
	{
		ga_search(net, cfg, params);
		FAIL() << "expected infeasible_error";
	}
	catch (infeasible_error const& e)
	{
		EXPECT_FALSE(e.best_infeasible().feasible);
		EXPECT_NE(std::string(e.what()).find("violations"), std::string::npos);
	}
	EXPECT_THROW(exhaustive_search(net, cfg), infeasible_error);
}

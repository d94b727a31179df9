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

#ifndef COOPRA_CLI_HPP
#define COOPRA_CLI_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <coopra/channel.hpp>
#include <coopra/config.hpp>
#include <coopra/formation.hpp>
#include <coopra/optimizer.hpp>
#include <coopra/simulation.hpp>

namespace coopra::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;

/// Usage or configuration problem; maps to exit code 2.
class usage_error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

struct run_options
{
	std::string config_path;
	std::vector<std::string> overrides;
	std::string out_dir = ".";
	std::optional<std::uint64_t> seed;
	bool dump_topology = false;
	bool trace = false;
	bool events = false;
};

struct sweep_options
{
	std::string config_path;
	std::vector<std::string> overrides;
	std::string out_dir = ".";
	std::optional<std::uint64_t> seed;
	/// A config key, or several joined by ',' (values then join by ':').
	std::string param;
	std::vector<std::string> values;
	int seeds = 1;
	std::vector<std::string> policies = {"noncooperative", "coalition"};
	int jobs = 1;
};

/// Loads the config, applies overrides and the seed, validates.
inline system_config resolve_config(std::string const& path, std::vector<std::string> const& overrides,
									std::optional<std::uint64_t> seed)
{
	if (path.empty() || !std::filesystem::is_regular_file(path))
	{
		throw usage_error("config not found: " + path);
	}
	try
	{
		auto cfg = load_config(path);
		for (auto const& kv : overrides)
		{
			apply_override(cfg, kv);
		}
		if (seed)
		{
			cfg.rng_seed = *seed;
		}
		require_valid(cfg);
		return cfg;
	}
	catch (std::invalid_argument const& e)
	{
		throw usage_error(e.what());
	}
}

struct policy_outcome
{
	run_result run;
	std::optional<search_result> search;
};

/// Runs one scenario under a named policy; ga and exhaustive run their search first and replay its assignment.
inline policy_outcome run_policy(system_config const& cfg, network const& net, std::string const& name,
								 std::ostream* events = nullptr)
{
	policy_outcome out;
	if (name == "noncooperative")
	{
		out.run = run_scenario(cfg, policy::noncooperative(), cfg.slots, net, events);
	}
	else if (name == "coalition")
	{
		out.run = run_scenario(cfg, policy::coalition(), cfg.slots, net, events);
	}
	else if (name == "ga" || name == "exhaustive")
	{
		out.search = name == "ga" ? ga_search(net, cfg, cfg.ga) : exhaustive_search(net, cfg);
		out.run = run_scenario(cfg, policy::fixed(out.search->best), cfg.slots, net, events);
	}
	else
	{
		throw usage_error("unknown policy: " + name);
	}
	return out;
}

namespace detail {

inline std::ofstream open_output(std::filesystem::path const& p)
{
	std::ofstream os(p, std::ios::binary);
	if (!os)
	{
		throw std::runtime_error("cannot write " + p.string());
	}
	return os;
}

inline std::vector<std::string> split(std::string const& s, char sep)
{
	std::vector<std::string> parts;
	std::string cur;
	std::istringstream in(s);
	while (std::getline(in, cur, sep))
	{
		parts.push_back(std::string(coopra::detail::trim(cur)));
	}
	if (!s.empty() && s.back() == sep)
	{
		parts.emplace_back();
	}
	return parts;
}

} // namespace detail

/**
 * One scenario: writes metrics.json (with the resolved config echoed), plus
 * trace.csv (formation moves), events.csv (per-slot log), topology.csv and
 * assignment.csv when requested or applicable.
 */
inline int cmd_run(run_options const& o, std::ostream& out, std::ostream& err)
{
	system_config cfg;
	try
	{
		cfg = resolve_config(o.config_path, o.overrides, o.seed);
	}
	catch (usage_error const& e)
	{
		err << "error: " << e.what() << '\n';
		return exit_usage;
	}
	try
	{
		std::filesystem::path dir(o.out_dir);
		std::filesystem::create_directories(dir);
		auto net = build_network(cfg);
		if (o.dump_topology)
		{
			auto os = detail::open_output(dir / "topology.csv");
			write_topology_csv(os, net);
		}
		std::optional<std::ofstream> events;
		if (o.events)
		{
			events.emplace(detail::open_output(dir / "events.csv"));
		}
		auto res = run_policy(cfg, net, cfg.policy, events ? &*events : nullptr);
		if (o.trace)
		{
			auto os = detail::open_output(dir / "trace.csv");
			write_trace_csv(os, formation_result{res.run.final_state, res.run.trace, res.run.passes});
		}
		if (res.search)
		{
			auto os = detail::open_output(dir / "assignment.csv");
			write_assignment_csv(os, res.search->best);
		}
		nlohmann::json j;
		j["config"] = cfg;
		j["policy"] = cfg.policy;
		j["metrics"] = res.run.metrics;
		if (res.search)
		{
			j["search"] = {{"objective", res.search->objective}, {"evaluations", res.search->evaluations}};
		}
		auto os = detail::open_output(dir / "metrics.json");
		os << j.dump(2) << '\n';
		out << "fail_ratio " << coopra::detail::format_double(res.run.metrics.fail_ratio) << '\n';
		return exit_ok;
	}
	catch (usage_error const& e)
	{
		err << "error: " << e.what() << '\n';
		return exit_usage;
	}
	catch (std::exception const& e)
	{
		err << "error: " << e.what() << '\n';
		return exit_runtime;
	}
}

/// Long-format sweep.csv header; units in brackets.
inline std::string sweep_header()
{
	return "parameter,value,seed,policy,status,fail_ratio[1],energy_per_mtd[J],mean_queue[requests],"
		   "utility[1],iterations[moves],moves_per_coalition[moves],price_of_anarchy[1],drops[requests],"
		   "transmissions[attempts],collisions[attempts],coalitions[count],mean_coalition_size[MTDs],"
		   "max_merge_attempts[count],max_split_attempts[count]";
}

struct sweep_point
{
	std::size_t value_index = 0;
	std::uint64_t seed = 0;
	std::string policy;
	std::string status = "ok";
	run_metrics metrics;
};

/**
 * Cross product of values x seeds x policies, run with up to `jobs` threads.
 * A composite parameter is written as its keys joined by ':'.
 * Rows come out in a fixed order whatever the thread count, so the same sweep
 * yields the same bytes. The coalition row of each (value, seed) carries the
 * price of anarchy when an exhaustive or ga row exists for it (exhaustive
 * preferred).
 */
inline int cmd_sweep(sweep_options const& o, std::ostream& out, std::ostream& err)
{
	system_config base;
	std::vector<std::string> keys;
	try
	{
		base = resolve_config(o.config_path, o.overrides, o.seed);
		keys = detail::split(o.param, ',');
		if (o.param.empty() || o.values.empty() || o.seeds < 1 || o.policies.empty() || o.jobs < 1)
		{
			throw usage_error("sweep needs --param, --values, --seeds >= 1, --policies and --jobs >= 1");
		}
		for (auto const& p : o.policies)
		{
			if (p != "noncooperative" && p != "coalition" && p != "ga" && p != "exhaustive")
			{
				throw usage_error("unknown policy: " + p);
			}
		}
		for (auto const& v : o.values)
		{
			auto parts = detail::split(v, ':');
			if (parts.size() != keys.size())
			{
				throw usage_error("value '" + v + "' does not match parameter '" + o.param + "'");
			}
			auto cfg = base;
			for (std::size_t k = 0; k < keys.size(); ++k)
			{
				set_config_value(cfg, keys[k], parts[k]);
			}
			require_valid(cfg);
		}
	}
	catch (usage_error const& e)
	{
		err << "error: " << e.what() << '\n';
		return exit_usage;
	}
	catch (std::invalid_argument const& e)
	{
		err << "error: " << e.what() << '\n';
		return exit_usage;
	}

	std::vector<sweep_point> points;
	for (std::size_t v = 0; v < o.values.size(); ++v)
	{
		for (int s = 0; s < o.seeds; ++s)
		{
			for (auto const& p : o.policies)
			{
				points.push_back({v, base.rng_seed + static_cast<std::uint64_t>(s), p, "ok", {}});
			}
		}
	}

	std::atomic<std::size_t> next{0};
	auto worker = [&]() {
		for (std::size_t i = next++; i < points.size(); i = next++)
		{
			auto& pt = points[i];
			try
			{
				auto cfg = base;
				auto parts = detail::split(o.values[pt.value_index], ':');
				for (std::size_t k = 0; k < keys.size(); ++k)
				{
					set_config_value(cfg, keys[k], parts[k]);
				}
				cfg.rng_seed = pt.seed;
				auto net = build_network(cfg);
				pt.metrics = run_policy(cfg, net, pt.policy).run.metrics;
			}
			catch (std::exception const& e)
			{
				std::string msg = e.what();
				std::replace(msg.begin(), msg.end(), ',', ';');
				std::replace(msg.begin(), msg.end(), '\n', ' ');
				pt.status = "error: " + msg;
			}
		}
	};
	int const threads = std::min<int>(o.jobs, static_cast<int>(points.size()));
	std::vector<std::thread> pool;
	for (int t = 1; t < threads; ++t)
	{
		pool.emplace_back(worker);
	}
	worker();
	for (auto& t : pool)
	{
		t.join();
	}

	for (auto& pt : points)
	{
		if (pt.policy != "coalition" || pt.status != "ok")
		{
			continue;
		}
		for (auto const* ref : {"exhaustive", "ga"})
		{
			auto it = std::find_if(points.begin(), points.end(), [&](sweep_point const& q) {
				return q.value_index == pt.value_index && q.seed == pt.seed && q.policy == ref && q.status == "ok";
			});
			if (it == points.end())
			{
				continue;
			}
			try
			{
				pt.metrics.price_of_anarchy = price_of_anarchy(pt.metrics.utility, it->metrics.utility);
			}
			catch (std::domain_error const&)
			{
			}
			break;
		}
	}

	long failed = 0;
	try
	{
		std::filesystem::create_directories(o.out_dir);
		auto os = detail::open_output(std::filesystem::path(o.out_dir) / "sweep.csv");
		os << sweep_header() << '\n';
		using coopra::detail::format_double;
		std::string label = o.param;
		std::replace(label.begin(), label.end(), ',', ':');
		for (auto const& pt : points)
		{
			auto const& m = pt.metrics;
			bool ok = pt.status == "ok";
			failed += ok ? 0 : 1;
			auto num = [&](double v) { return ok ? format_double(v) : std::string(); };
			auto whole = [&](long v) { return ok ? std::to_string(v) : std::string(); };
			os << label << ',' << o.values[pt.value_index] << ',' << pt.seed << ',' << pt.policy << ',' << pt.status
			   << ',' << num(m.fail_ratio) << ',' << num(m.energy_per_mtd) << ',' << num(m.mean_queue) << ','
			   << num(m.utility) << ',' << whole(m.iterations) << ',' << num(m.moves_per_coalition) << ','
			   << (ok && m.price_of_anarchy ? format_double(*m.price_of_anarchy) : std::string()) << ','
			   << whole(m.drops) << ',' << whole(m.transmissions) << ',' << whole(m.collisions) << ','
			   << whole(m.coalitions) << ',' << num(m.mean_coalition_size) << ',' << whole(m.max_merge_attempts)
			   << ',' << whole(m.max_split_attempts) << '\n';
		}
	}
	catch (std::exception const& e)
	{
		err << "error: " << e.what() << '\n';
		return exit_runtime;
	}
	out << points.size() << " points, " << failed << " failed\n";
	if (failed == static_cast<long>(points.size()))
	{
		err << "error: every sweep point failed\n";
		return exit_runtime;
	}
	return exit_ok;
}

} // namespace coopra::cli

#endif // COOPRA_CLI_HPP

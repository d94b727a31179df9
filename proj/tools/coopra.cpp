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

// coopra: run one scenario or sweep a parameter grid.

#include <iostream>

#include <CLI11.hpp>

#include <coopra/cli.hpp>

int main(int argc, char** argv)
{
	using namespace coopra::cli;

	CLI::App app{"Cooperative random access simulator for machine-type devices"};
	app.require_subcommand(1);

	run_options run;
	std::uint64_t run_seed = 0;
	auto* run_cmd = app.add_subcommand("run", "Run one scenario");
	run_cmd->add_option("--config", run.config_path, "Config file (key = value lines)")->required();
	run_cmd->add_option("--set", run.overrides, "Override a config key (key=value), repeatable");
	run_cmd->add_option("--out", run.out_dir, "Output directory");
	auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Override rng_seed");
	run_cmd->add_flag("--dump-topology", run.dump_topology, "Write topology.csv");
	run_cmd->add_flag("--trace", run.trace, "Write the formation trace to trace.csv");
	run_cmd->add_flag("--events", run.events, "Write the per-slot event log to events.csv");

	sweep_options sweep;
	std::uint64_t sweep_seed = 0;
	auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter over values, seeds and policies");
	sweep_cmd->add_option("--config", sweep.config_path, "Config file (key = value lines)")->required();
	sweep_cmd->add_option("--set", sweep.overrides, "Override a config key (key=value), repeatable");
	sweep_cmd->add_option("--out", sweep.out_dir, "Output directory");
	auto* sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "First rng_seed; seeds count up from it");
	sweep_cmd->add_option("--param", sweep.param, "Config key, or keys joined by ',' (e.g. alpha,beta)")->required();
	sweep_cmd->add_option("--values", sweep.values, "Values; composite values join by ':' (e.g. 0.9:0.1)")
		->required();
	sweep_cmd->add_option("--seeds", sweep.seeds, "Seeds per point");
	sweep_cmd->add_option("--policies", sweep.policies, "noncooperative, coalition, ga, exhaustive");
	sweep_cmd->add_option("--jobs", sweep.jobs, "Parallel points");

	try
	{
		app.parse(argc, argv);
	}
	catch (CLI::ParseError const& e)
	{
		int code = app.exit(e);
		return code == 0 ? exit_ok : exit_usage;
	}

	if (*run_cmd)
	{
		if (*run_seed_opt)
		{
			run.seed = run_seed;
		}
		return cmd_run(run, std::cout, std::cerr);
	}
	if (*sweep_seed_opt)
	{
		sweep.seed = sweep_seed;
	}
	return cmd_sweep(sweep, std::cout, std::cerr);
}

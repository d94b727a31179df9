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

#ifndef COOPRA_CONFIG_HPP
#define COOPRA_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace coopra {

enum class cooperation_mode { altruistic, selfish };
enum class deployment_mode { uniform, cluster };

/// Per-MTD preference weights. Unset fields fall back to the global ones.
struct preference_override
{
	std::optional<double> alpha;
	std::optional<double> beta;
	std::optional<double> gamma;

	bool operator==(preference_override const&) const = default;
};

/// Parameters of the genetic-algorithm benchmark.
struct ga_params
{
	int population = 100;
	int generations = 300;
	double crossover = 0.8;
	double mutation = 0.02;
	int tournament = 3;
	std::uint64_t seed = 7;

	bool operator==(ga_params const&) const = default;
};

/**
 * All scalar parameters of the network model, in SI units.
 *
 * Defaults reproduce the single-cell setup: 400 m square, 256 preambles,
 * K = 30, T = 1 ms, 50-bit requests, 25 dBm cellular and 5 dBm short-range
 * power, 15 kHz subcarriers, -170 dBm/Hz noise and path-loss exponent 2.5.
 */
struct system_config
{
	double p = 0.3;
	int mu = 256;
	int K = 30;
	double T = 1e-3;
	double B = 50;
	double delta = 0.8;
	double horizon_eps = 1e-3;
	double alpha = 0.5;
	double beta = 0.5;
	double gamma = 0.2;
	double P_LR = 0.31622776601683794;
	double P_SR = 0.0031622776601683794;
	double B_z = 15e3;
	double N0 = 1e-20;
	/// Path gain at the 1 m reference distance.
	double H0 = 1e-8;
	double nu = 2.5;
	double cell_side = 400;
	int M = 200;
	double cluster_density = 5e-5;
	/// Standard deviation (m) of member positions around a cluster center.
	double cluster_sigma = 20;
	deployment_mode deployment = deployment_mode::cluster;
	cooperation_mode mode = cooperation_mode::altruistic;
	std::uint64_t rng_seed = 1;
	/// Joules to value units (1e3: energies enter values in mJ).
	double energy_scale = 1e3;
	/// Constant worst-case interference power (W) on every link.
	double interference = 0;
	/// Slots between coalition re-formations; 0 forms once at slot 0.
	int reform_period = 0;
	long slots = 100000;
	/// Per-MTD discounted energy budget; 0 selects twice the all-singleton budget.
	double E_max = 0;
	int max_passes = 10000;
	/// noncooperative, coalition, ga or exhaustive.
	std::string policy = "coalition";
	ga_params ga;
	std::map<int, preference_override> overrides;

	double alpha_of(int m) const { return pick(m, &preference_override::alpha, alpha); }
	double beta_of(int m) const { return pick(m, &preference_override::beta, beta); }
	double gamma_of(int m) const { return pick(m, &preference_override::gamma, gamma); }

	bool operator==(system_config const&) const = default;

private:
	double pick(int m, std::optional<double> preference_override::*field, double fallback) const
	{
		auto it = overrides.find(m);
		if (it != overrides.end() && (it->second.*field))
		{
			return *(it->second.*field);
		}
		return fallback;
	}
};

struct config_error
{
	std::string field;
	std::string message;

	bool operator==(config_error const&) const = default;
};

inline std::vector<config_error> validate_config(system_config const& cfg)
{
	std::vector<config_error> errs;
	auto check = [&errs](bool ok, std::string field, std::string message) {
		if (!ok)
		{
			errs.push_back({std::move(field), std::move(message)});
		}
	};
	auto positive = [&check](double v, char const* name) {
		check(std::isfinite(v) && v > 0, name, std::string(name) + " must be positive");
	};

	check(cfg.p >= 0 && cfg.p <= 1, "p", "p out of range");
	check(cfg.delta >= 0 && cfg.delta < 1, "delta", "delta out of range");
	check(cfg.mu >= 1, "mu", "mu must be at least 1");
	check(cfg.K >= 1, "K", "K must be at least 1");
	check(cfg.M >= 1, "M", "M must be at least 1");
	positive(cfg.T, "T");
	positive(cfg.B, "B");
	positive(cfg.P_LR, "P_LR");
	positive(cfg.P_SR, "P_SR");
	positive(cfg.B_z, "B_z");
	positive(cfg.N0, "N0");
	positive(cfg.H0, "H0");
	positive(cfg.nu, "nu");
	positive(cfg.cell_side, "cell_side");
	positive(cfg.horizon_eps, "horizon_eps");
	positive(cfg.energy_scale, "energy_scale");
	check(cfg.cluster_density > 0 || cfg.deployment != deployment_mode::cluster,
		  "cluster_density", "cluster_density must be positive in cluster mode");
	check(cfg.cluster_sigma >= 0, "cluster_sigma", "cluster_sigma must be nonnegative");
	check(cfg.interference >= 0, "interference", "interference must be nonnegative");
	check(cfg.reform_period >= 0, "reform_period", "reform_period must be nonnegative");
	check(cfg.slots >= 1, "slots", "slots must be at least 1");
	check(cfg.E_max >= 0, "E_max", "E_max must be nonnegative");
	check(cfg.max_passes >= 1, "max_passes", "max_passes must be at least 1");
	check(cfg.policy == "noncooperative" || cfg.policy == "coalition" || cfg.policy == "ga" ||
			  cfg.policy == "exhaustive",
		  "policy", "unknown policy");
	check(cfg.ga.population >= 2, "ga.population", "ga.population must be at least 2");
	check(cfg.ga.generations >= 0, "ga.generations", "ga.generations must be nonnegative");
	check(cfg.ga.crossover >= 0 && cfg.ga.crossover <= 1, "ga.crossover", "ga.crossover out of range");
	check(cfg.ga.mutation >= 0 && cfg.ga.mutation <= 1, "ga.mutation", "ga.mutation out of range");
	check(cfg.ga.tournament >= 1, "ga.tournament", "ga.tournament must be at least 1");

	auto weights_ok = [&](double a, double b, double g, std::string const& prefix) {
		check(a >= 0, prefix + "alpha", "alpha must be nonnegative");
		check(b >= 0, prefix + "beta", "beta must be nonnegative");
		check(g >= 0, prefix + "gamma", "gamma must be nonnegative");
		check(a + b > 0, prefix + "alpha", "degenerate objective");
	};
	weights_ok(cfg.alpha, cfg.beta, cfg.gamma, "");
	for (auto const& [m, o] : cfg.overrides)
	{
		std::string prefix = "mtd." + std::to_string(m) + ".";
		check(m >= 0 && m < cfg.M, prefix + "id", "override for unknown MTD");
		weights_ok(cfg.alpha_of(m), cfg.beta_of(m), cfg.gamma_of(m), prefix);
	}
	return errs;
}

/// Throws std::invalid_argument listing every violation.
inline void require_valid(system_config const& cfg)
{
	auto errs = validate_config(cfg);
	if (errs.empty())
	{
		return;
	}
	std::string msg = "invalid config:";
	for (auto const& e : errs)
	{
		msg += " " + e.field + ": " + e.message + ";";
	}
	throw std::invalid_argument(msg);
}

namespace detail {

inline std::string format_double(double v)
{
	char buf[64];
	auto res = std::to_chars(buf, buf + sizeof(buf), v);
	return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s)
{
	auto const ws = " \t\r\n";
	auto b = s.find_first_not_of(ws);
	if (b == std::string_view::npos)
	{
		return {};
	}
	auto e = s.find_last_not_of(ws);
	return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text)
{
	T v{};
	auto res = std::from_chars(text.data(), text.data() + text.size(), v);
	if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
	{
		throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(text) + "'");
	}
	return v;
}

} // namespace detail

inline std::string to_string(cooperation_mode m)
{
	return m == cooperation_mode::altruistic ? "altruistic" : "selfish";
}

inline std::string to_string(deployment_mode d)
{
	return d == deployment_mode::uniform ? "uniform" : "cluster";
}

/// Assigns one key. Throws std::invalid_argument for unknown keys or bad values.
inline void set_config_value(system_config& cfg, std::string_view key, std::string_view value)
{
	using detail::parse_number;
	key = detail::trim(key);
	value = detail::trim(value);

	auto real = [&](double& field) { field = parse_number<double>(key, value); };
	auto integer = [&](int& field) { field = parse_number<int>(key, value); };

	if (key == "p") real(cfg.p);
	else if (key == "mu") integer(cfg.mu);
	else if (key == "K") integer(cfg.K);
	else if (key == "T") real(cfg.T);
	else if (key == "B") real(cfg.B);
	else if (key == "delta") real(cfg.delta);
	else if (key == "horizon_eps") real(cfg.horizon_eps);
	else if (key == "alpha") real(cfg.alpha);
	else if (key == "beta") real(cfg.beta);
	else if (key == "gamma") real(cfg.gamma);
	else if (key == "P_LR") real(cfg.P_LR);
	else if (key == "P_SR") real(cfg.P_SR);
	else if (key == "B_z") real(cfg.B_z);
	else if (key == "N0") real(cfg.N0);
	else if (key == "H0") real(cfg.H0);
	else if (key == "nu") real(cfg.nu);
	else if (key == "cell_side") real(cfg.cell_side);
	else if (key == "M") integer(cfg.M);
	else if (key == "cluster_density") real(cfg.cluster_density);
	else if (key == "cluster_sigma") real(cfg.cluster_sigma);
	else if (key == "energy_scale") real(cfg.energy_scale);
	else if (key == "interference") real(cfg.interference);
	else if (key == "reform_period") integer(cfg.reform_period);
	else if (key == "E_max") real(cfg.E_max);
	else if (key == "max_passes") integer(cfg.max_passes);
	else if (key == "slots") cfg.slots = parse_number<long>(key, value);
	else if (key == "rng_seed") cfg.rng_seed = parse_number<std::uint64_t>(key, value);
	else if (key == "ga.population") integer(cfg.ga.population);
	else if (key == "ga.generations") integer(cfg.ga.generations);
	else if (key == "ga.crossover") real(cfg.ga.crossover);
	else if (key == "ga.mutation") real(cfg.ga.mutation);
	else if (key == "ga.tournament") integer(cfg.ga.tournament);
	else if (key == "ga.seed") cfg.ga.seed = parse_number<std::uint64_t>(key, value);
	else if (key == "policy") cfg.policy = std::string(value);
	else if (key == "mode")
	{
		if (value == "altruistic") cfg.mode = cooperation_mode::altruistic;
		else if (value == "selfish") cfg.mode = cooperation_mode::selfish;
		else throw std::invalid_argument("bad value for mode: '" + std::string(value) + "'");
	}
	else if (key == "deployment")
	{
		if (value == "uniform") cfg.deployment = deployment_mode::uniform;
		else if (value == "cluster") cfg.deployment = deployment_mode::cluster;
		else throw std::invalid_argument("bad value for deployment: '" + std::string(value) + "'");
	}
	else if (key.substr(0, 4) == "mtd.")
	{
		// mtd.<id>.<alpha|beta|gamma>
		auto rest = key.substr(4);
		auto dot = rest.find('.');
		if (dot == std::string_view::npos)
		{
			throw std::invalid_argument("unknown config key: " + std::string(key));
		}
		int id = parse_number<int>(key, rest.substr(0, dot));
		auto field = rest.substr(dot + 1);
		double v = parse_number<double>(key, value);
		auto& o = cfg.overrides[id];
		if (field == "alpha") o.alpha = v;
		else if (field == "beta") o.beta = v;
		else if (field == "gamma") o.gamma = v;
		else throw std::invalid_argument("unknown config key: " + std::string(key));
	}
	else
	{
		throw std::invalid_argument("unknown config key: " + std::string(key));
	}
}

/// Parses a `key = value` text; `#` starts a comment.
inline system_config parse_config(std::string_view text, system_config cfg = {})
{
	std::istringstream in{std::string(text)};
	std::string line;
	int lineno = 0;
	while (std::getline(in, line))
	{
		++lineno;
		std::string_view sv = line;
		if (auto hash = sv.find('#'); hash != std::string_view::npos)
		{
			sv = sv.substr(0, hash);
		}
		sv = detail::trim(sv);
		if (sv.empty())
		{
			continue;
		}
		auto eq = sv.find('=');
		if (eq == std::string_view::npos)
		{
			throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
		}
		set_config_value(cfg, sv.substr(0, eq), sv.substr(eq + 1));
	}
	return cfg;
}

inline system_config load_config(std::string const& path)
{
	std::ifstream in(path);
	if (!in)
	{
		throw std::runtime_error("config not found: " + path);
	}
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_config(ss.str());
}

/// Applies a `key=value` override.
inline void apply_override(system_config& cfg, std::string_view kv)
{
	auto eq = kv.find('=');
	if (eq == std::string_view::npos)
	{
		throw std::invalid_argument("override must be key=value: " + std::string(kv));
	}
	set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
}

/// Flat key/value listing, parseable by parse_config.
inline std::vector<std::pair<std::string, std::string>> config_entries(system_config const& c)
{
	using detail::format_double;
	std::vector<std::pair<std::string, std::string>> kv = {
		{"p", format_double(c.p)},
		{"mu", std::to_string(c.mu)},
		{"K", std::to_string(c.K)},
		{"T", format_double(c.T)},
		{"B", format_double(c.B)},
		{"delta", format_double(c.delta)},
		{"horizon_eps", format_double(c.horizon_eps)},
		{"alpha", format_double(c.alpha)},
		{"beta", format_double(c.beta)},
		{"gamma", format_double(c.gamma)},
		{"P_LR", format_double(c.P_LR)},
		{"P_SR", format_double(c.P_SR)},
		{"B_z", format_double(c.B_z)},
		{"N0", format_double(c.N0)},
		{"H0", format_double(c.H0)},
		{"nu", format_double(c.nu)},
		{"cell_side", format_double(c.cell_side)},
		{"M", std::to_string(c.M)},
		{"cluster_density", format_double(c.cluster_density)},
		{"cluster_sigma", format_double(c.cluster_sigma)},
		{"deployment", to_string(c.deployment)},
		{"mode", to_string(c.mode)},
		{"rng_seed", std::to_string(c.rng_seed)},
		{"energy_scale", format_double(c.energy_scale)},
		{"interference", format_double(c.interference)},
		{"reform_period", std::to_string(c.reform_period)},
		{"slots", std::to_string(c.slots)},
		{"E_max", format_double(c.E_max)},
		{"max_passes", std::to_string(c.max_passes)},
		{"policy", c.policy},
		{"ga.population", std::to_string(c.ga.population)},
		{"ga.generations", std::to_string(c.ga.generations)},
		{"ga.crossover", format_double(c.ga.crossover)},
		{"ga.mutation", format_double(c.ga.mutation)},
		{"ga.tournament", std::to_string(c.ga.tournament)},
		{"ga.seed", std::to_string(c.ga.seed)},
	};
	for (auto const& [m, o] : c.overrides)
	{
		std::string prefix = "mtd." + std::to_string(m) + ".";
		if (o.alpha) kv.emplace_back(prefix + "alpha", format_double(*o.alpha));
		if (o.beta) kv.emplace_back(prefix + "beta", format_double(*o.beta));
		if (o.gamma) kv.emplace_back(prefix + "gamma", format_double(*o.gamma));
	}
	return kv;
}

inline std::string format_config(system_config const& c)
{
	std::string out;
	for (auto const& [k, v] : config_entries(c))
	{
		out += k + " = " + v + "\n";
	}
	return out;
}

inline void to_json(nlohmann::json& j, system_config const& c)
{
	j = nlohmann::json::object();
	for (auto const& [k, v] : config_entries(c))
	{
		j[k] = v;
	}
}

inline void from_json(nlohmann::json const& j, system_config& c)
{
	c = system_config{};
	for (auto const& [k, v] : j.items())
	{
		set_config_value(c, k, v.get<std::string>());
	}
}

} // namespace coopra

#endif // COOPRA_CONFIG_HPP

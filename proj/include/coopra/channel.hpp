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

#ifndef COOPRA_CHANNEL_HPP
#define COOPRA_CHANNEL_HPP

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <coopra/config.hpp>
#include <coopra/model.hpp>
#include <coopra/rng.hpp>

namespace coopra {

/// Quasi-static link gain: H0 * d^-nu * xi, with xi a unit-mean exponential.
struct link_gain
{
	double gain = 0;
	double distance = 0;
	double fading = 1;
};

/// Distances below the 1 m reference are clamped to it.
inline link_gain make_link_gain(double distance, double fading, system_config const& cfg)
{
	double d = std::max(distance, 1.0);
	return {cfg.H0 * std::pow(d, -cfg.nu) * fading, distance, fading};
}

inline double distance(point a, point b)
{
	return std::hypot(a.x - b.x, a.y - b.y);
}

/**
 * Drops M MTDs into the square [-side/2, side/2]^2 (base station at the origin).
 *
 * Cluster mode draws Poisson(density * area) cluster centers (redrawn until at
 * least one exists), Poisson(M / centers) members per cluster, then adds or
 * removes members from uniformly chosen clusters until exactly M remain.
 * Members scatter normally around their center and are redrawn if they fall
 * outside the square. The result is shuffled so ids carry no cluster order.
 */
inline std::vector<point> place_mtds(system_config const& cfg, rng_type& rng, int* centers_drawn = nullptr)
{
	double const half = cfg.cell_side / 2;
	std::uniform_real_distribution<double> coord(-half, half);
	std::vector<point> pts;
	pts.reserve(static_cast<std::size_t>(cfg.M));

	if (cfg.deployment == deployment_mode::uniform)
	{
		for (int m = 0; m < cfg.M; ++m)
		{
			double x = coord(rng);
			double y = coord(rng);
			pts.push_back({x, y});
		}
		return pts;
	}

	double const area = cfg.cell_side * cfg.cell_side;
	std::poisson_distribution<int> n_centers_dist(cfg.cluster_density * area);
	int n_centers = 0;
	while (n_centers < 1)
	{
		n_centers = n_centers_dist(rng);
	}
	if (centers_drawn)
	{
		*centers_drawn = n_centers;
	}
	std::vector<point> centers;
	for (int c = 0; c < n_centers; ++c)
	{
		double x = coord(rng);
		double y = coord(rng);
		centers.push_back({x, y});
	}

	std::poisson_distribution<int> count_dist(static_cast<double>(cfg.M) / n_centers);
	std::vector<int> counts(static_cast<std::size_t>(n_centers));
	int total = 0;
	for (auto& n : counts)
	{
		n = count_dist(rng);
		total += n;
	}
	std::uniform_int_distribution<int> pick(0, n_centers - 1);
	while (total != cfg.M)
	{
		auto& n = counts[static_cast<std::size_t>(pick(rng))];
		if (total < cfg.M)
		{
			++n;
			++total;
		}
		else if (n > 0)
		{
			--n;
			--total;
		}
	}

	std::normal_distribution<double> scatter(0.0, cfg.cluster_sigma);
	for (int c = 0; c < n_centers; ++c)
	{
		for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k)
		{
			point q;
			do
			{
				q = {centers[static_cast<std::size_t>(c)].x + scatter(rng),
					 centers[static_cast<std::size_t>(c)].y + scatter(rng)};
			} while (std::abs(q.x) > half || std::abs(q.y) > half);
			pts.push_back(q);
		}
	}
	std::shuffle(pts.begin(), pts.end(), rng);
	return pts;
}

/// Shannon rate of a subcarrier: B_z log2(1 + P h / (N0 B_z + I)).
inline double cellular_rate(double power, double gain, double interference, system_config const& cfg)
{
	return cfg.B_z * std::log2(1.0 + power * gain / (cfg.N0 * cfg.B_z + interference));
}

/// Same law as cellular_rate, for the MTD-to-head link.
inline double sr_rate(double power, double gain, double interference, system_config const& cfg)
{
	return cellular_rate(power, gain, interference, cfg);
}

/// A request must fit in one RA slot: B / rate <= T.
inline bool link_feasible(double rate, system_config const& cfg)
{
	return rate > 0 && cfg.B / rate <= cfg.T;
}

inline double per_packet_energy(double power, double rate, double bits)
{
	if (!(rate > 0))
	{
		throw std::domain_error("infeasible link");
	}
	return power * bits / rate;
}

/// Mean energy until first success with per-attempt success probability ps.
inline double expected_ra_energy(double energy_per_packet, double ps)
{
	if (!(ps > 0))
	{
		throw std::domain_error("zero success probability");
	}
	return energy_per_packet / ps;
}

/**
 * Static topology of one run: positions, quasi-static gains, rates, per-packet
 * energies and the pairwise short-range feasibility matrix.
 */
class network
{
public:
	network() = default;

	network(system_config const& cfg, std::vector<point> positions, rng_type& rng)
		: M_(static_cast<int>(positions.size()))
		, positions_(std::move(positions))
	{
		auto const n = static_cast<std::size_t>(M_);
		std::exponential_distribution<double> fading(1.0);
		cell_gain_.resize(n);
		cell_rate_.resize(n);
		lr_energy_.resize(n);
		for (std::size_t m = 0; m < n; ++m)
		{
			auto g = make_link_gain(distance(positions_[m], {0, 0}), fading(rng), cfg);
			cell_gain_[m] = g.gain;
			cell_rate_[m] = cellular_rate(cfg.P_LR, g.gain, cfg.interference, cfg);
			lr_energy_[m] = per_packet_energy(cfg.P_LR, cell_rate_[m], cfg.B);
		}
		sr_rate_.assign(n * n, 0.0);
		sr_energy_.assign(n * n, 0.0);
		feasible_.assign(n * n, 1);
		for (std::size_t i = 0; i < n; ++i)
		{
			for (std::size_t j = i + 1; j < n; ++j)
			{
				auto g = make_link_gain(distance(positions_[i], positions_[j]), fading(rng), cfg);
				double r = coopra::sr_rate(cfg.P_SR, g.gain, cfg.interference, cfg);
				double e = per_packet_energy(cfg.P_SR, r, cfg.B);
				char ok = link_feasible(r, cfg) ? 1 : 0;
				for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}})
				{
					sr_rate_[a * n + b] = r;
					sr_energy_[a * n + b] = e;
					feasible_[a * n + b] = ok;
				}
			}
		}
	}

	int size() const { return M_; }
	std::vector<point> const& positions() const { return positions_; }
	double cell_gain(mtd_id m) const { return cell_gain_[idx(m)]; }
	double cell_rate(mtd_id m) const { return cell_rate_[idx(m)]; }
	/// Joules per cellular request transmission.
	double lr_energy(mtd_id m) const { return lr_energy_[idx(m)]; }
	double sr_rate(mtd_id a, mtd_id b) const { return sr_rate_[pair(a, b)]; }
	/// Joules to forward one request from a to b; zero when a == b.
	double sr_energy(mtd_id a, mtd_id b) const { return sr_energy_[pair(a, b)]; }
	bool feasible(mtd_id a, mtd_id b) const { return feasible_[pair(a, b)] != 0; }

	/// True when every pair of members can talk at the required rate.
	bool feasible_group(std::span<mtd_id const> members) const
	{
		for (std::size_t i = 0; i < members.size(); ++i)
		{
			for (std::size_t j = i + 1; j < members.size(); ++j)
			{
				if (!feasible(members[i], members[j]))
				{
					return false;
				}
			}
		}
		return true;
	}

	bool feasible_union(std::span<mtd_id const> a, std::span<mtd_id const> b) const
	{
		for (auto i : a)
		{
			for (auto j : b)
			{
				if (!feasible(i, j))
				{
					return false;
				}
			}
		}
		return true;
	}

private:
	std::size_t idx(mtd_id m) const { return static_cast<std::size_t>(m); }
	std::size_t pair(mtd_id a, mtd_id b) const { return idx(a) * static_cast<std::size_t>(M_) + idx(b); }

	int M_ = 0;
	std::vector<point> positions_;
	std::vector<double> cell_gain_;
	std::vector<double> cell_rate_;
	std::vector<double> lr_energy_;
	std::vector<double> sr_rate_;
	std::vector<double> sr_energy_;
	std::vector<char> feasible_;
};

/// Places MTDs and draws fading from the run seed's topology stream.
inline network build_network(system_config const& cfg)
{
	auto rng = make_rng(cfg.rng_seed, stream::topology);
	auto pts = place_mtds(cfg, rng);
	return network(cfg, std::move(pts), rng);
}

/// One row per MTD; `neighbors` lists the MTDs reachable over a feasible short-range link.
inline void write_topology_csv(std::ostream& os, network const& net)
{
	os << "id,x_m,y_m,cell_gain,cell_rate_bps,E_LR_J,neighbors\n";
	os.precision(17);
	for (mtd_id m = 0; m < net.size(); ++m)
	{
		auto const& q = net.positions()[static_cast<std::size_t>(m)];
		os << m << ',' << q.x << ',' << q.y << ',' << net.cell_gain(m) << ',' << net.cell_rate(m) << ','
		   << net.lr_energy(m) << ',';
		bool first = true;
		for (mtd_id o = 0; o < net.size(); ++o)
		{
			if (o != m && net.feasible(m, o))
			{
				os << (first ? "" : " ") << o;
				first = false;
			}
		}
		os << '\n';
	}
}

} // namespace coopra

#endif // COOPRA_CHANNEL_HPP

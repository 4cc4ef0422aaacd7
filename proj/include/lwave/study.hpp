/*
 *   Copyright 2026 The lwave Authors
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

/**
 * @file
 *
 * Mesh convergence studies: one scenario rerun on several meshes and
 * compared either with the closed-form solution (homogeneous acoustic) or
 * mesh against next-finer mesh.
 *
 * Mesh steps are nudged so that the first receiver's r and the source depth
 * (or, for a surface source, the first receiver's depth) fall on node
 * centres on every mesh; otherwise snapping moves the points by up to h/2
 * and adds a first-order error.
 */

#ifndef LWAVE_STUDY_HPP
#define LWAVE_STUDY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "driver.hpp"
#include "scenario.hpp"

namespace lwave {

struct ConvergenceRow {
	double points_per_wavelength = 0.0;
	double hr = 0.0;
	double hz = 0.0;
	std::string receiver;
	double distance = 0.0;
	double distance_wavelengths = 0.0;
	/// Analytic: misfit to the exact trace. Self-convergence: distance to the next finer mesh.
	std::optional<double> epsilon;
	std::optional<double> order;
};

struct ConvergenceStudy {
	bool analytic = false;
	double wavelength = 0.0;
	std::vector<ConvergenceRow> rows;
	std::vector<RunReport> reports;
};

namespace detail {

/// Step close to `nominal` that puts coordinate x on a node centre.
inline double aligned_step(double x, double nominal) {
	if (!(x > 0.0)) {
		return nominal;
	}
	const double cells = std::max(0.0, std::round(x / nominal - 0.5));
	return x / (cells + 0.5);
}

} // namespace detail

/// Scenario config on a mesh with the given number of points per wavelength.
inline SimulationConfig mesh_config(const Scenario &sc, double points_per_wavelength) {
	if (!(points_per_wavelength > 0.0)) {
		throw ConfigError("mesh resolution must be positive");
	}
	SimulationConfig cfg = sc.config;
	const double nominal = sc.wavelength() / points_per_wavelength;
	const double r_anchor = cfg.receivers.empty() ? 0.0 : cfg.receivers.front().r;
	const double z_anchor =
	    cfg.source.z0 > 0.0 ? cfg.source.z0 : (cfg.receivers.empty() ? 0.0 : cfg.receivers.front().z);
	const double hr = detail::aligned_step(r_anchor, nominal);
	const double hz = detail::aligned_step(z_anchor, nominal);
	cfg.nr = static_cast<std::size_t>(std::ceil(sc.config.l1 / hr + 0.5 - 1e-9));
	cfg.nz = static_cast<std::size_t>(std::ceil(sc.config.l2 / hz + 0.5 - 1e-9));
	cfg.l1 = (static_cast<double>(cfg.nr) - 0.5) * hr;
	cfg.l2 = (static_cast<double>(cfg.nz) - 0.5) * hz;
	cfg.step = 0.0;
	return cfg;
}

/// Relative L2-in-time distance between two traces over all components, relative to `ref`.
inline double trace_distance(const Trace &a, const Trace &ref, double dt) {
	double num = 0.0;
	double den = 0.0;
	for (std::size_t c = 0; c < ref.components.size(); ++c) {
		const auto &x = a.components.at(c);
		const auto &y = ref.components[c];
		const std::size_t last = y.size() - 1;
		for (std::size_t j = 0; j <= last; ++j) {
			const double w = (j == 0 || j == last) ? 0.5 * dt : dt;
			num += w * (x[j] - y[j]) * (x[j] - y[j]);
			den += w * y[j] * y[j];
		}
	}
	if (!(den > 0.0)) {
		throw std::invalid_argument("trace_distance: reference trace has zero energy");
	}
	return std::sqrt(num / den);
}

/**
 * Runs the scenario on each mesh (points per wavelength, coarse to fine).
 * Rows are grouped by mesh, one per receiver.
 */
inline ConvergenceStudy run_convergence(const Scenario &sc, std::vector<double> meshes,
                                        const HarmonicObserver &observer = {}) {
	if (meshes.empty()) {
		throw ConfigError("convergence study needs at least one mesh");
	}
	if (sc.config.receivers.empty()) {
		throw ConfigError("convergence study needs at least one receiver");
	}
	std::sort(meshes.begin(), meshes.end());
	ConvergenceStudy study;
	study.analytic = sc.has_analytic_reference;
	study.wavelength = sc.wavelength();
	std::vector<std::vector<Trace>> traces;
	const double dt = sc.config.output.dt;
	const double r0 = sc.config.source.r0;
	const double z0 = sc.config.source.z0;
	for (double p : meshes) {
		const auto cfg = mesh_config(sc, p);
		auto res = run_simulation(cfg, observer);
		const auto &seis = res.seismograms;
		for (const auto &tr : seis.traces) {
			ConvergenceRow row;
			row.points_per_wavelength = p;
			row.hr = res.report.hr;
			row.hz = res.report.hz;
			row.receiver = tr.receiver.name;
			row.distance = std::hypot(tr.receiver.r - r0, tr.receiver.z - z0);
			row.distance_wavelengths = row.distance / study.wavelength;
			if (study.analytic) {
				std::vector<double> exact(seis.time.size());
				for (std::size_t j = 0; j < exact.size(); ++j) {
					exact[j] = exact_acoustic_solution(tr.r_node, seis.time[j], sc.reference_c, cfg.source.pulse,
					                                   sc.reference_kappa);
				}
				row.epsilon = error_metric(exact, tr.components[0], dt);
			}
			study.rows.push_back(row);
		}
		traces.push_back(seis.traces);
		study.reports.push_back(std::move(res.report));
	}
	const std::size_t nrec = sc.config.receivers.size();
	auto row_at = [&](std::size_t mesh, std::size_t rec) -> ConvergenceRow & { return study.rows[mesh * nrec + rec]; };
	if (!study.analytic) {
		for (std::size_t m = 0; m + 1 < meshes.size(); ++m) {
			for (std::size_t r = 0; r < nrec; ++r) {
				row_at(m, r).epsilon = trace_distance(traces[m][r], traces[m + 1][r], dt);
			}
		}
	}
	for (std::size_t m = 1; m < meshes.size(); ++m) {
		for (std::size_t r = 0; r < nrec; ++r) {
			const auto &prev = row_at(m - 1, r);
			const auto &cur = row_at(m, r);
			if (prev.epsilon && cur.epsilon && *prev.epsilon > 0.0 && *cur.epsilon > 0.0) {
				row_at(m, r).order = std::log(*prev.epsilon / *cur.epsilon) / std::log(meshes[m] / meshes[m - 1]);
			}
		}
	}
	return study;
}

} // namespace lwave

#endif // LWAVE_STUDY_HPP

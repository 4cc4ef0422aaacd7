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
 * Output files: seismogram tables, snapshot rasters and the JSON run report.
 * Floating values are printed in shortest round-trip form.
 */

#ifndef LWAVE_OUTPUT_HPP
#define LWAVE_OUTPUT_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "driver.hpp"
#include "raster.hpp"
#include "study.hpp"

namespace lwave {

class OutputError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string g17(double v) {
	// Shortest representation that reads back to the same double.
	char buf[32];
	const auto res = std::to_chars(buf, buf + sizeof buf, v);
	return std::string(buf, res.ptr);
}

inline std::ofstream open_output(const std::filesystem::path &path) {
	std::ofstream os(path, std::ios::binary);
	if (!os) {
		throw OutputError("cannot write '" + path.string() + "'");
	}
	return os;
}

} // namespace detail

/// Time column followed by one column per receiver component.
inline void write_seismograms(const std::filesystem::path &path, const Seismograms &s) {
	auto os = detail::open_output(path);
	os << "# lwave seismograms\n";
	for (const auto &tr : s.traces) {
		os << "# receiver " << tr.receiver.name << " r=" << detail::g17(tr.receiver.r)
		   << " z=" << detail::g17(tr.receiver.z) << " node_r=" << detail::g17(tr.r_node)
		   << " node_z=" << detail::g17(tr.z_node) << '\n';
	}
	os << "# t";
	for (const auto &tr : s.traces) {
		for (const auto &c : s.component_names) {
			os << ' ' << tr.receiver.name << '.' << c;
		}
	}
	os << '\n';
	for (std::size_t j = 0; j < s.time.size(); ++j) {
		os << detail::g17(s.time[j]);
		for (const auto &tr : s.traces) {
			for (const auto &c : tr.components) {
				os << ' ' << detail::g17(c[j]);
			}
		}
		os << '\n';
	}
	if (!os) {
		throw OutputError("write failed for '" + path.string() + "'");
	}
}

inline void write_snapshot(const std::filesystem::path &path, const Grid2D &grid, const Snapshot &snap) {
	std::vector<const Field2D *> fields;
	for (const auto &f : snap.fields) {
		fields.push_back(&f);
	}
	write_raster_binary(path.string(), snapshot_raster(grid, snap.names, fields));
}

inline nlohmann::ordered_json config_echo_json(const std::vector<std::pair<std::string, std::string>> &echo) {
	nlohmann::ordered_json j = nlohmann::ordered_json::object();
	for (const auto &[k, v] : echo) {
		if (j.contains(k)) {
			if (!j[k].is_array()) {
				j[k] = nlohmann::ordered_json::array({j[k]});
			}
			j[k].push_back(v);
		} else if (k == "receivers.receiver" || k == "medium.layer" || k == "output.snapshot") {
			j[k] = nlohmann::ordered_json::array({v});
		} else {
			j[k] = v;
		}
	}
	return j;
}

inline nlohmann::ordered_json report_json(const RunReport &r) {
	nlohmann::ordered_json j;
	j["physics"] = to_string(r.physics);
	j["grid"] = {{"nr", r.nr}, {"nz", r.nz}, {"hr", r.hr}, {"hz", r.hz}, {"l1", r.grid.l1}, {"l2", r.grid.l2}};
	j["max_velocity"] = r.max_velocity;
	j["preconditioner_builds"] = r.preconditioner_builds;
	long total = 0;
	int most = 0;
	bool monotone = true;
	auto harmonics = nlohmann::ordered_json::array();
	for (const auto &h : r.harmonics) {
		total += h.iterations;
		most = std::max(most, h.iterations);
		monotone = monotone && h.restart_monotone;
		nlohmann::ordered_json e = {
		    {"m", h.m}, {"iterations", h.iterations}, {"residual", h.residual}, {"seconds", h.seconds}};
		if (r.physics == Physics::elastic) {
			e["restart_residuals"] = h.restart_residuals;
		}
		harmonics.push_back(std::move(e));
	}
	j["solver_summary"] = {{"harmonics", r.harmonics.size()},
	                       {"total_iterations", total},
	                       {"max_iterations", most},
	                       {"mean_iterations", r.harmonics.empty() ? 0.0 : double(total) / double(r.harmonics.size())}};
	if (r.physics == Physics::elastic) {
		j["solver_summary"]["restart_residuals_nonincreasing"] = monotone;
	}
	j["timings"] = {{"total_seconds", r.seconds}, {"source_transform_seconds", r.source_seconds}};
	j["warnings"] = r.warnings;
	j["harmonics"] = std::move(harmonics);
	return j;
}

inline void write_json(const std::filesystem::path &path, const nlohmann::ordered_json &j) {
	auto os = detail::open_output(path);
	os << j.dump(2) << '\n';
	if (!os) {
		throw OutputError("write failed for '" + path.string() + "'");
	}
}

/// Tab-separated convergence table.
inline void write_convergence_table(std::ostream &os, const ConvergenceStudy &st) {
	os << "# reference: " << (st.analytic ? "analytic" : "next finer mesh") << "; wavelength "
	   << detail::g17(st.wavelength) << " m\n";
	os << "points_per_wavelength\tstep_wavelengths\treceiver\tdistance_m\tdistance_wavelengths\tepsilon\torder\n";
	for (const auto &row : st.rows) {
		os << detail::g17(row.points_per_wavelength) << '\t' << detail::g17(row.hr / st.wavelength) << '\t'
		   << row.receiver << '\t' << detail::g17(row.distance) << '\t' << detail::g17(row.distance_wavelengths)
		   << '\t' << (row.epsilon ? detail::g17(*row.epsilon) : "") << '\t'
		   << (row.order ? detail::g17(*row.order) : "") << '\n';
	}
}

} // namespace lwave

#endif // LWAVE_OUTPUT_HPP

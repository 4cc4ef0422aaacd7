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
 * Scenario files: `[section]` headers followed by `key = value` lines.
 * Keys marked repeatable may appear several times; every other key at most
 * once. `#` starts a comment. Unknown sections or keys are rejected.
 *
 *   [simulation]  physics = acoustic | elastic, workers
 *   [domain]      l1, l2, and either step or both nr, nz
 *   [medium]      type = homogeneous | layered | raster
 *                 homogeneous: vp, vs (elastic), rho
 *                 layered:     layer = z_top vp vs rho   (repeatable)
 *                 raster:      path, vp_param, vs_param, rho_param
 *   [basis]       alpha, h, n
 *   [source]      kind = monopole | center_of_pressure, r, z, f0, t0, gamma, amplitude
 *   [receivers]   receiver = name r z                    (repeatable)
 *   [output]      t_start, t_end, dt, snapshot = t       (repeatable)
 *   [solver]      tol, max_iters, restart_k, u_block_inverse_r
 *   [convergence] meshes = list of points per wavelength
 */

#ifndef LWAVE_SCENARIO_HPP
#define LWAVE_SCENARIO_HPP

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "driver.hpp"
#include "raster.hpp"

namespace lwave {

/// Invalid or incomplete scenario.
class ConfigError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

struct ScenarioEntry {
	std::string value;
	int line = 0;
};

/// Raw parsed file: section -> key -> values in file order.
struct ScenarioFile {
	std::string path;
	std::map<std::string, std::map<std::string, std::vector<ScenarioEntry>>> sections;
};

namespace detail {

struct KeyRule {
	bool repeatable = false;
};

inline const std::map<std::string, std::map<std::string, KeyRule>> &scenario_schema() {
	static const std::map<std::string, std::map<std::string, KeyRule>> schema = {
	    {"simulation", {{"physics", {}}, {"workers", {}}}},
	    {"domain", {{"l1", {}}, {"l2", {}}, {"step", {}}, {"nr", {}}, {"nz", {}}}},
	    {"medium",
	     {{"type", {}},
	      {"vp", {}},
	      {"vs", {}},
	      {"rho", {}},
	      {"layer", {true}},
	      {"path", {}},
	      {"vp_param", {}},
	      {"vs_param", {}},
	      {"rho_param", {}}}},
	    {"basis", {{"alpha", {}}, {"h", {}}, {"n", {}}}},
	    {"source", {{"kind", {}}, {"r", {}}, {"z", {}}, {"f0", {}}, {"t0", {}}, {"gamma", {}}, {"amplitude", {}}}},
	    {"receivers", {{"receiver", {true}}}},
	    {"output", {{"t_start", {}}, {"t_end", {}}, {"dt", {}}, {"snapshot", {true}}}},
	    {"solver", {{"tol", {}}, {"max_iters", {}}, {"restart_k", {}}, {"u_block_inverse_r", {}}}},
	    {"convergence", {{"meshes", {}}}},
	};
	return schema;
}

inline std::string trim(const std::string &s) {
	const auto b = s.find_first_not_of(" \t\r");
	if (b == std::string::npos) {
		return "";
	}
	const auto e = s.find_last_not_of(" \t\r");
	return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_words(const std::string &s) {
	std::vector<std::string> out;
	std::istringstream is(s);
	std::string w;
	while (is >> w) {
		out.push_back(w);
	}
	return out;
}

} // namespace detail

inline ScenarioFile parse_scenario(std::istream &is, const std::string &path = "<scenario>") {
	ScenarioFile f;
	f.path = path;
	const auto &schema = detail::scenario_schema();
	std::string section;
	std::string raw;
	int line = 0;
	auto fail = [&](const std::string &msg) { throw ConfigError(path + ":" + std::to_string(line) + ": " + msg); };
	while (std::getline(is, raw)) {
		++line;
		const auto hash = raw.find('#');
		const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
		if (text.empty()) {
			continue;
		}
		if (text.front() == '[') {
			if (text.back() != ']') {
				fail("malformed section header '" + text + "'");
			}
			section = detail::trim(text.substr(1, text.size() - 2));
			if (!schema.contains(section)) {
				fail("unknown section [" + section + "]");
			}
			f.sections[section];
			continue;
		}
		const auto eq = text.find('=');
		if (eq == std::string::npos) {
			fail("expected 'key = value', got '" + text + "'");
		}
		if (section.empty()) {
			fail("key outside of any section");
		}
		const std::string key = detail::trim(text.substr(0, eq));
		const std::string value = detail::trim(text.substr(eq + 1));
		const auto &keys = schema.at(section);
		const auto rule = keys.find(key);
		if (rule == keys.end()) {
			fail("unknown key '" + key + "' in [" + section + "]");
		}
		auto &values = f.sections[section][key];
		if (!values.empty() && !rule->second.repeatable) {
			fail("duplicate key '" + key + "' in [" + section + "]");
		}
		if (value.empty()) {
			fail("empty value for '" + key + "'");
		}
		values.push_back({value, line});
	}
	return f;
}

inline ScenarioFile read_scenario_file(const std::string &path) {
	std::ifstream is(path);
	if (!is) {
		throw ConfigError("cannot open scenario file '" + path + "'");
	}
	return parse_scenario(is, path);
}

/// Fully resolved scenario: simulation config plus what is needed to echo and study it.
struct Scenario {
	SimulationConfig config;
	/// Effective key/value pairs including defaults, in schema order.
	std::vector<std::pair<std::string, std::string>> echo;
	/// Slowest wave speed used to express distances in wavelengths.
	double reference_velocity = 0.0;
	/// Acoustic homogeneous media only: kappa and c for the analytic reference.
	bool has_analytic_reference = false;
	double reference_kappa = 0.0;
	double reference_c = 0.0;
	std::vector<double> meshes;
	double wavelength() const { return reference_velocity / config.source.pulse.f0; }
};

namespace detail {

class ScenarioReader {
public:
	explicit ScenarioReader(const ScenarioFile &f) : f_(f) {}

	bool has(const std::string &sec, const std::string &key) const {
		const auto s = f_.sections.find(sec);
		return s != f_.sections.end() && s->second.contains(key);
	}

	const std::vector<ScenarioEntry> &all(const std::string &sec, const std::string &key) const {
		static const std::vector<ScenarioEntry> none;
		const auto s = f_.sections.find(sec);
		if (s == f_.sections.end()) {
			return none;
		}
		const auto k = s->second.find(key);
		return k == s->second.end() ? none : k->second;
	}

	std::string text(const std::string &sec, const std::string &key) const {
		if (!has(sec, key)) {
			throw ConfigError(f_.path + ": missing required key '" + key + "' in [" + sec + "]");
		}
		return all(sec, key).front().value;
	}

	std::string text(const std::string &sec, const std::string &key, const std::string &fallback) const {
		return has(sec, key) ? text(sec, key) : fallback;
	}

	double number(const std::string &sec, const std::string &key) const {
		const std::string v = text(sec, key);
		return to_number(v, sec, key, all(sec, key).front().line);
	}

	double number(const std::string &sec, const std::string &key, double fallback) const {
		return has(sec, key) ? number(sec, key) : fallback;
	}

	long integer(const std::string &sec, const std::string &key, long fallback) const {
		if (!has(sec, key)) {
			return fallback;
		}
		const double v = number(sec, key);
		if (v != std::floor(v) || std::abs(v) > 1e15) {
			throw ConfigError(where(sec, key) + ": expected an integer");
		}
		return static_cast<long>(v);
	}

	bool boolean(const std::string &sec, const std::string &key, bool fallback) const {
		if (!has(sec, key)) {
			return fallback;
		}
		const auto v = text(sec, key);
		if (v == "true" || v == "1" || v == "yes") {
			return true;
		}
		if (v == "false" || v == "0" || v == "no") {
			return false;
		}
		throw ConfigError(where(sec, key) + ": expected true or false");
	}

	std::vector<double> numbers(const std::string &value, const std::string &sec, const std::string &key,
	                            int line) const {
		std::vector<double> out;
		for (const auto &w : split_words(value)) {
			out.push_back(to_number(w, sec, key, line));
		}
		return out;
	}

	std::string where(const std::string &sec, const std::string &key) const {
		const auto &v = all(sec, key);
		return f_.path + ":" + (v.empty() ? std::string("?") : std::to_string(v.front().line)) + ": [" + sec + "] " +
		       key;
	}

	double to_number(const std::string &s, const std::string &sec, const std::string &key, int line) const {
		errno = 0;
		char *end = nullptr;
		const double v = std::strtod(s.c_str(), &end);
		if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
			throw ConfigError(f_.path + ":" + std::to_string(line) + ": [" + sec + "] " + key + ": '" + s +
			                  "' is not a finite number");
		}
		return v;
	}

	const ScenarioFile &file() const { return f_; }

private:
	const ScenarioFile &f_;
};

inline std::string fmt(double v) {
	// Shortest representation that reads back to the same double.
	char buf[32];
	const auto res = std::to_chars(buf, buf + sizeof buf, v);
	return std::string(buf, res.ptr);
}

} // namespace detail

/// Resolves defaults and builds the media; raster paths are relative to the scenario file.
inline Scenario resolve_scenario(const ScenarioFile &file) {
	detail::ScenarioReader rd(file);
	Scenario sc;
	auto &cfg = sc.config;
	auto &echo = sc.echo;
	auto put = [&](const std::string &k, const std::string &v) { echo.emplace_back(k, v); };
	try {
		const auto physics = rd.text("simulation", "physics", "acoustic");
		if (physics == "acoustic") {
			cfg.physics = Physics::acoustic;
		} else if (physics == "elastic") {
			cfg.physics = Physics::elastic;
		} else {
			throw ConfigError(rd.where("simulation", "physics") + ": expected acoustic or elastic");
		}
		const bool elastic = cfg.physics == Physics::elastic;
		cfg.workers = static_cast<int>(rd.integer("simulation", "workers", 1));
		put("simulation.physics", physics);

		cfg.l1 = rd.number("domain", "l1");
		cfg.l2 = rd.number("domain", "l2");
		if (!(cfg.l1 > 0.0) || !(cfg.l2 > 0.0)) {
			throw ConfigError(file.path + ": [domain] l1 and l2 must be positive");
		}
		put("domain.l1", detail::fmt(cfg.l1));
		put("domain.l2", detail::fmt(cfg.l2));
		if (rd.has("domain", "nr") || rd.has("domain", "nz")) {
			const long nr = rd.integer("domain", "nr", 0);
			const long nz = rd.integer("domain", "nz", 0);
			if (nr < 2 || nz < 2 || rd.has("domain", "step")) {
				throw ConfigError(file.path + ": [domain] give either step or both nr and nz (each >= 2)");
			}
			cfg.nr = static_cast<std::size_t>(nr);
			cfg.nz = static_cast<std::size_t>(nz);
			put("domain.nr", std::to_string(nr));
			put("domain.nz", std::to_string(nz));
		} else {
			cfg.step = rd.number("domain", "step");
			if (!(cfg.step > 0.0)) {
				throw ConfigError(rd.where("domain", "step") + ": must be positive");
			}
			put("domain.step", detail::fmt(cfg.step));
		}

		const auto type = rd.text("medium", "type");
		put("medium.type", type);
		if (type == "homogeneous") {
			const double vp = rd.number("medium", "vp");
			const double rho = rd.number("medium", "rho");
			const double vs = elastic ? rd.number("medium", "vs") : 0.0;
			if (!(vp > 0.0) || !(rho > 0.0) || (elastic && !(vs > 0.0))) {
				throw ConfigError(file.path + ": [medium] velocities and density must be positive");
			}
			put("medium.vp", detail::fmt(vp));
			if (elastic) {
				put("medium.vs", detail::fmt(vs));
			}
			put("medium.rho", detail::fmt(rho));
			if (elastic) {
				if (!(vp * vp > 2.0 * vs * vs)) {
					throw ConfigError(file.path + ": [medium] need vp^2 > 2 vs^2");
				}
				cfg.elastic = homogeneous_elastic(vp, vs, rho);
				sc.reference_velocity = vs;
			} else {
				cfg.acoustic = homogeneous_acoustic(vp, rho);
				sc.reference_velocity = vp;
				sc.has_analytic_reference = true;
				sc.reference_c = vp;
				sc.reference_kappa = rho * vp * vp;
			}
			cfg.medium_label = "homogeneous";
		} else if (type == "layered") {
			std::vector<Layer> layers;
			for (const auto &e : rd.all("medium", "layer")) {
				const auto v = rd.numbers(e.value, "medium", "layer", e.line);
				if (v.size() != 4) {
					throw ConfigError(file.path + ":" + std::to_string(e.line) +
					                  ": layer needs 'z_top vp vs rho' (use vs = 0 for acoustic)");
				}
				layers.push_back({v[0], v[1], v[2], v[3]});
				put("medium.layer", detail::fmt(v[0]) + " " + detail::fmt(v[1]) + " " + detail::fmt(v[2]) + " " +
				                        detail::fmt(v[3]));
			}
			if (layers.empty()) {
				throw ConfigError(file.path + ": layered medium needs at least one 'layer' line");
			}
			double vref = 1e300;
			for (const auto &l : layers) {
				vref = std::min(vref, elastic ? l.vs : l.vp);
			}
			sc.reference_velocity = vref;
			try {
				if (elastic) {
					cfg.elastic = layered_elastic(layers);
				} else {
					cfg.acoustic = layered_acoustic(layers);
				}
			} catch (const std::invalid_argument &e) {
				throw ConfigError(file.path + ": " + e.what());
			}
			cfg.medium_label = "layered";
		} else if (type == "raster") {
			auto path = std::filesystem::path(rd.text("medium", "path"));
			if (path.is_relative()) {
				path = std::filesystem::path(file.path).parent_path() / path;
			}
			RasterMapping map;
			map.vp = rd.text("medium", "vp_param", "vp");
			map.vs = rd.text("medium", "vs_param", "vs");
			map.rho = rd.text("medium", "rho_param", "rho");
			put("medium.path", path.string());
			put("medium.vp_param", map.vp);
			if (elastic) {
				put("medium.vs_param", map.vs);
			}
			put("medium.rho_param", map.rho);
			std::vector<std::string> required{map.vp, map.rho};
			if (elastic) {
				required.push_back(map.vs);
			}
			RasterModel model;
			try {
				model = load_raster_model(path.string(), required);
			} catch (const RasterError &e) {
				throw ConfigError(e.what());
			}
			const auto &ref = model.values[model.param_index(elastic ? map.vs : map.vp)];
			sc.reference_velocity = *std::min_element(ref.begin(), ref.end());
			if (elastic) {
				cfg.elastic = elastic_from_raster(model, map);
			} else {
				cfg.acoustic = acoustic_from_raster(model, map);
			}
			cfg.medium_label = "raster:" + path.string();
		} else {
			throw ConfigError(rd.where("medium", "type") + ": expected homogeneous, layered or raster");
		}

		cfg.basis.alpha = static_cast<int>(rd.integer("basis", "alpha", elastic ? 8 : 9));
		cfg.basis.h = rd.number("basis", "h");
		cfg.basis.n = static_cast<int>(rd.integer("basis", "n", elastic ? 2000 : 3000));
		try {
			cfg.basis.validate();
		} catch (const std::invalid_argument &e) {
			throw ConfigError(file.path + ": [basis] " + e.what());
		}
		put("basis.alpha", std::to_string(cfg.basis.alpha));
		put("basis.h", detail::fmt(cfg.basis.h));
		put("basis.n", std::to_string(cfg.basis.n));

		const auto kind = rd.text("source", "kind", elastic ? "center_of_pressure" : "monopole");
		if (kind == "monopole") {
			cfg.source.kind = SourceKind::monopole;
		} else if (kind == "center_of_pressure") {
			cfg.source.kind = SourceKind::center_of_pressure;
		} else {
			throw ConfigError(rd.where("source", "kind") + ": expected monopole or center_of_pressure");
		}
		cfg.source.r0 = rd.number("source", "r", 0.0);
		cfg.source.z0 = rd.number("source", "z", 0.0);
		cfg.source.pulse.f0 = rd.number("source", "f0", 30.0);
		cfg.source.pulse.t0 = rd.number("source", "t0", 0.2);
		cfg.source.pulse.gamma = rd.number("source", "gamma", 4.0);
		cfg.source.pulse.amplitude = rd.number("source", "amplitude", 1.0);
		put("source.kind", kind);
		put("source.r", detail::fmt(cfg.source.r0));
		put("source.z", detail::fmt(cfg.source.z0));
		put("source.f0", detail::fmt(cfg.source.pulse.f0));
		put("source.t0", detail::fmt(cfg.source.pulse.t0));
		put("source.gamma", detail::fmt(cfg.source.pulse.gamma));
		put("source.amplitude", detail::fmt(cfg.source.pulse.amplitude));

		std::set<std::string> names;
		for (const auto &e : rd.all("receivers", "receiver")) {
			const auto w = detail::split_words(e.value);
			if (w.size() != 3) {
				throw ConfigError(file.path + ":" + std::to_string(e.line) + ": receiver needs 'name r z'");
			}
			if (!names.insert(w[0]).second) {
				throw ConfigError(file.path + ":" + std::to_string(e.line) + ": duplicate receiver name '" + w[0] + "'");
			}
			Receiver rc{w[0], rd.to_number(w[1], "receivers", "receiver", e.line),
			            rd.to_number(w[2], "receivers", "receiver", e.line)};
			cfg.receivers.push_back(rc);
			put("receivers.receiver", rc.name + " " + detail::fmt(rc.r) + " " + detail::fmt(rc.z));
		}

		cfg.output.t_start = rd.number("output", "t_start", 0.0);
		cfg.output.t_end = rd.number("output", "t_end");
		cfg.output.dt = rd.number("output", "dt", 1e-3);
		put("output.t_start", detail::fmt(cfg.output.t_start));
		put("output.t_end", detail::fmt(cfg.output.t_end));
		put("output.dt", detail::fmt(cfg.output.dt));
		for (const auto &e : rd.all("output", "snapshot")) {
			cfg.snapshot_times.push_back(rd.to_number(e.value, "output", "snapshot", e.line));
			put("output.snapshot", detail::fmt(cfg.snapshot_times.back()));
		}

		cfg.solver.tol = rd.number("solver", "tol", 1e-8);
		cfg.solver.max_iters = static_cast<int>(rd.integer("solver", "max_iters", 1000));
		cfg.solver.restart_k = static_cast<int>(rd.integer("solver", "restart_k", 10));
		cfg.preconditioner.u_block_inverse_r = rd.boolean("solver", "u_block_inverse_r", false);
		try {
			cfg.solver.validate();
		} catch (const std::invalid_argument &e) {
			throw ConfigError(file.path + ": [solver] " + e.what());
		}
		put("solver.tol", detail::fmt(cfg.solver.tol));
		put("solver.max_iters", std::to_string(cfg.solver.max_iters));
		if (elastic) {
			put("solver.restart_k", std::to_string(cfg.solver.restart_k));
			put("solver.u_block_inverse_r", cfg.preconditioner.u_block_inverse_r ? "true" : "false");
		}

		if (rd.has("convergence", "meshes")) {
			const auto &e = rd.all("convergence", "meshes").front();
			sc.meshes = rd.numbers(e.value, "convergence", "meshes", e.line);
		}
	} catch (const RasterError &e) {
		throw ConfigError(e.what());
	}
	return sc;
}

inline Scenario load_scenario(const std::string &path) { return resolve_scenario(read_scenario_file(path)); }

} // namespace lwave

#endif // LWAVE_SCENARIO_HPP

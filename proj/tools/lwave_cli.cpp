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

// lwave command-line runner.
//
// Exit codes: 0 success, 1 selftest failure, 2 configuration error,
// 3 solver failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lwave/driver.hpp"
#include "lwave/output.hpp"
#include "lwave/scenario.hpp"
#include "lwave/selftest.hpp"
#include "lwave/study.hpp"
#include "lwave/tridiagonal.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct GlobalOptions {
	int workers = 0; // 0: not given on the command line
	unsigned long seed = lwave::SelftestOptions{}.seed;
	std::string output_dir = ".";
	bool progress = false;
};

int resolve_workers(const GlobalOptions &g, int scenario_value) {
	if (g.workers > 0) {
		return g.workers;
	}
	return lwave::workers_from_env(scenario_value);
}

fs::path prepare_output_dir(const std::string &dir) {
	fs::path p(dir);
	std::error_code ec;
	fs::create_directories(p, ec);
	if (ec || !fs::is_directory(p)) {
		throw lwave::ConfigError("cannot create output directory '" + dir + "'");
	}
	return p;
}

lwave::HarmonicObserver progress_observer(bool on) {
	if (!on) {
		return {};
	}
	return [](const lwave::HarmonicStats &h) {
		if (h.m % 50 == 0) {
			std::fprintf(stderr, "harmonic %zu: %d iterations, residual %.3e\n", h.m, h.iterations, h.residual);
		}
	};
}

std::string snapshot_name(std::size_t index) {
	char buf[40];
	std::snprintf(buf, sizeof buf, "snapshot_%03zu.lwr", index);
	return buf;
}

int cmd_simulate(const GlobalOptions &g, const std::string &scenario_path) {
	auto sc = lwave::load_scenario(scenario_path);
	auto &cfg = sc.config;
	cfg.workers = resolve_workers(g, cfg.workers);
	const auto grid = cfg.make_grid();
	try {
		cfg.validate(grid);
	} catch (const std::invalid_argument &e) {
		throw lwave::ConfigError(e.what());
	}
	const auto out = prepare_output_dir(g.output_dir);

	lwave::SimulationResult res;
	try {
		res = lwave::run_simulation(cfg, progress_observer(g.progress));
	} catch (const lwave::SolverFailure &e) {
		auto j = lwave::report_json(e.report());
		j["failure"] = {{"harmonic", e.harmonic()}, {"message", e.what()}};
		j["config"] = lwave::config_echo_json(sc.echo);
		j["workers"] = cfg.workers;
		j["manifest"] = {"report.json"};
		lwave::write_json(out / "report.json", j);
		std::cerr << "error: solver failure at " << e.what() << '\n';
		return kExitSolver;
	}

	std::vector<std::string> manifest;
	lwave::write_seismograms(out / "seismograms.txt", res.seismograms);
	manifest.push_back("seismograms.txt");
	auto snaps = nlohmann::ordered_json::array();
	for (std::size_t s = 0; s < res.snapshots.size(); ++s) {
		const auto name = snapshot_name(s);
		lwave::write_snapshot(out / name, res.report.grid, res.snapshots[s]);
		manifest.push_back(name);
		snaps.push_back({{"file", name}, {"time", res.snapshots[s].time}, {"fields", res.snapshots[s].names}});
	}
	manifest.push_back("report.json");

	nlohmann::ordered_json j;
	j["config"] = lwave::config_echo_json(sc.echo);
	j["workers"] = cfg.workers;
	auto body = lwave::report_json(res.report);
	for (auto it = body.begin(); it != body.end(); ++it) {
		j[it.key()] = it.value();
	}
	j["snapshots"] = snaps;
	j["manifest"] = manifest;
	lwave::write_json(out / "report.json", j);
	for (const auto &w : res.report.warnings) {
		std::cerr << "warning: " << w << '\n';
	}
	return kExitOk;
}

int cmd_convergence(const GlobalOptions &g, const std::string &scenario_path, std::vector<double> meshes) {
	auto sc = lwave::load_scenario(scenario_path);
	sc.config.workers = resolve_workers(g, sc.config.workers);
	if (meshes.empty()) {
		meshes = sc.meshes;
	}
	if (meshes.empty()) {
		throw lwave::ConfigError("no meshes given (use --meshes or [convergence] meshes)");
	}
	for (double p : meshes) {
		const auto cfg = lwave::mesh_config(sc, p);
		try {
			cfg.validate(cfg.make_grid());
		} catch (const std::invalid_argument &e) {
			throw lwave::ConfigError(e.what());
		}
	}
	const auto out = prepare_output_dir(g.output_dir);
	lwave::ConvergenceStudy st;
	try {
		st = lwave::run_convergence(sc, meshes, progress_observer(g.progress));
	} catch (const lwave::SolverFailure &e) {
		std::cerr << "error: solver failure at " << e.what() << '\n';
		return kExitSolver;
	}
	lwave::write_convergence_table(std::cout, st);
	{
		std::ofstream os(out / "convergence.tsv");
		lwave::write_convergence_table(os, st);
		if (!os) {
			throw lwave::OutputError("cannot write convergence.tsv");
		}
	}
	nlohmann::ordered_json j;
	j["config"] = lwave::config_echo_json(sc.echo);
	j["workers"] = sc.config.workers;
	j["meshes"] = meshes;
	auto runs = nlohmann::ordered_json::array();
	for (const auto &r : st.reports) {
		auto e = lwave::report_json(r);
		e.erase("harmonics");
		runs.push_back(std::move(e));
	}
	j["runs"] = runs;
	j["manifest"] = {"convergence.tsv", "convergence_report.json"};
	lwave::write_json(out / "convergence_report.json", j);
	return kExitOk;
}

int cmd_costmodel(const std::vector<long> &ps, double latency, double beta, double gamma, double l) {
	for (long p : ps) {
		if (!lwave::is_power_of_two(p)) {
			throw lwave::ConfigError("p = " + std::to_string(p) + " is not a power of two");
		}
	}
	if (l < 0.0) {
		throw lwave::ConfigError("l must be >= 0");
	}
	std::printf("p\tallreduce\tdichotomy\tratio\n");
	for (long p : ps) {
		const double a = lwave::comm_time_allreduce(p, latency, beta, gamma);
		const double d = lwave::comm_time_dichotomy(p, l, latency, beta, gamma);
		std::printf("%ld\t%s\t%s\t%s\n", p, lwave::detail::g17(a).c_str(), lwave::detail::g17(d).c_str(),
		            a != 0.0 ? lwave::detail::g17(d / a).c_str() : "-");
	}
	return kExitOk;
}

double perturbed_weight(std::size_t k, int alpha) { return lwave::accumulator_weight(k, alpha) * (1.0 + 1e-6); }

int cmd_selftest(const GlobalOptions &g, const std::string &fault) {
	lwave::SelftestOptions opt;
	opt.seed = g.seed;
	if (fault == "accumulator") {
		opt.accumulator_weight_hook = perturbed_weight;
	} else if (!fault.empty()) {
		throw lwave::ConfigError("unknown fault '" + fault + "' (known: accumulator)");
	}
	const auto results = lwave::run_selftest(opt);
	std::vector<std::string> failed;
	for (const auto &r : results) {
		std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
		if (!r.pass) {
			failed.push_back(r.name);
		}
	}
	if (!failed.empty()) {
		std::string names;
		for (const auto &n : failed) {
			names += (names.empty() ? "" : ", ") + n;
		}
		std::fprintf(stderr, "selftest failed: %s\n", names.c_str());
		return kExitCheckFailed;
	}
	std::printf("selftest passed (%zu checks)\n", results.size());
	return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"lwave: axisymmetric seismic modelling with a Laguerre transform in time"};
	app.require_subcommand(1);
	GlobalOptions g;
	app.add_option("--workers", g.workers, "Worker threads (overrides WORKERS)")->check(CLI::PositiveNumber);
	app.add_option("--seed", g.seed, "Seed for randomized self-test data");
	app.add_option("--output-dir", g.output_dir, "Directory for output files");
	app.add_flag("--progress", g.progress, "Print solver progress to standard error");

	std::string scenario;
	auto *sim = app.add_subcommand("simulate", "Run one scenario");
	sim->fallthrough();
	sim->add_option("scenario", scenario, "Scenario file")->required();

	std::vector<double> meshes;
	auto *conv = app.add_subcommand("convergence", "Rerun a scenario on several meshes");
	conv->fallthrough();
	conv->add_option("scenario", scenario, "Scenario file")->required();
	conv->add_option("--meshes", meshes, "Points per wavelength, e.g. 20,40,80")->delimiter(',');

	std::vector<long> ps{1, 2, 4, 8, 16, 32, 64};
	double latency = 1.0;
	double beta = 0.0;
	double gamma = 0.0;
	double l = 1.0;
	auto *cost = app.add_subcommand("costmodel", "Evaluate the communication cost models");
	cost->fallthrough();
	cost->add_option("--p", ps, "Process counts (powers of two)")->delimiter(',');
	cost->add_option("--alpha-lat", latency, "Message latency");
	cost->add_option("--beta", beta, "Transfer time per word");
	cost->add_option("--gamma", gamma, "Time per arithmetic operation");
	cost->add_option("--l", l, "Right-hand sides per exchange");

	std::string fault;
	auto *self = app.add_subcommand("selftest", "Run the embedded oracle checks");
	self->fallthrough();
	self->add_option("--inject-fault", fault, "Deliberately break a component (accumulator)");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int code = app.exit(e);
		return code == 0 ? kExitOk : kExitConfig;
	}

	try {
		if (*sim) {
			return cmd_simulate(g, scenario);
		}
		if (*conv) {
			return cmd_convergence(g, scenario, meshes);
		}
		if (*cost) {
			return cmd_costmodel(ps, latency, beta, gamma, l);
		}
		return cmd_selftest(g, fault);
	} catch (const lwave::ConfigError &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitConfig;
	} catch (const std::invalid_argument &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitConfig;
	} catch (const std::domain_error &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitConfig;
	} catch (const lwave::SolverFailure &e) {
		std::cerr << "error: solver failure at " << e.what() << '\n';
		return kExitSolver;
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitSolver;
	}
}

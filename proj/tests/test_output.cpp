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
#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lwave/output.hpp"
#include "lwave/selftest.hpp"
#include "lwave/study.hpp"

using namespace lwave;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
	const auto d = fs::temp_directory_path() / "lwave_output_test";
	fs::create_directories(d);
	return d;
}

std::string slurp(const fs::path &p) {
	std::ifstream is(p);
	std::stringstream ss;
	ss << is.rdbuf();
	return ss.str();
}

} // namespace

TEST(Output, ShortestRoundTripNumbers) {
	for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
		const auto s = detail::g17(v);
		double back = 1.0;
		std::from_chars(s.data(), s.data() + s.size(), back);
		EXPECT_EQ(back, v) << s;
	}
	EXPECT_EQ(detail::g17(0.001), "0.001");
}

TEST(Output, SeismogramLayout) {
	Seismograms s;
	s.component_names = {"ur", "uz"};
	s.time = {0.0, 0.5};
	Trace tr;
	tr.receiver = {"a", 10.0, 0.0};
	tr.r_node = 10.0;
	tr.z_node = 0.5;
	tr.components = {{1.0, 2.0}, {-1.0, 0.25}};
	s.traces.push_back(tr);
	const auto p = temp_dir() / "seis.txt";
	write_seismograms(p, s);
	EXPECT_EQ(slurp(p), "# lwave seismograms\n"
	                    "# receiver a r=10 z=0 node_r=10 node_z=0.5\n"
	                    "# t a.ur a.uz\n"
	                    "0 1 -1\n"
	                    "0.5 2 0.25\n");
}

TEST(Output, ConfigEchoGroupsRepeatedKeys) {
	const auto j = config_echo_json({{"basis.h", "400"}, {"receivers.receiver", "a 1 2"}, {"output.snapshot", "0.1"},
	                                 {"output.snapshot", "0.2"}});
	EXPECT_EQ(j["basis.h"], "400");
	EXPECT_TRUE(j["receivers.receiver"].is_array());
	EXPECT_EQ(j["output.snapshot"].size(), 2u);
}

TEST(Output, ReportSummary) {
	RunReport r;
	r.physics = Physics::elastic;
	r.harmonics = {{0, 4, 1e-9, 0.1, true, {0.5}}, {1, 6, 2e-9, 0.1, false, {0.5, 0.6}}};
	const auto j = report_json(r);
	EXPECT_EQ(j["solver_summary"]["total_iterations"], 10);
	EXPECT_EQ(j["solver_summary"]["max_iterations"], 6);
	EXPECT_EQ(j["solver_summary"]["restart_residuals_nonincreasing"], false);
	EXPECT_EQ(j["harmonics"][1]["restart_residuals"].size(), 2u);
}

TEST(Output, MissingDirectoryIsAnError) {
	Seismograms s;
	EXPECT_THROW(write_seismograms(temp_dir() / "no" / "such" / "dir" / "x.txt", s), OutputError);
}

TEST(Study, AlignedStepPutsCoordinateOnNode) {
	for (double x : {100.0, 37.3, 1.0}) {
		for (double h : {3.0, 1.25, 0.4}) {
			const double s = detail::aligned_step(x, h);
			const double cells = x / s - 0.5;
			EXPECT_NEAR(cells, std::round(cells), 1e-9);
			if (x > h) {
				EXPECT_NEAR(s, h, 0.5 * h);
			}
		}
	}
	EXPECT_EQ(detail::aligned_step(0.0, 2.0), 2.0);
}

TEST(Study, MeshConfigAnchorsReceiverAndSource) {
	Scenario sc;
	sc.reference_velocity = 1500.0;
	sc.config.source.pulse.f0 = 30.0;
	sc.config.source.z0 = 120.0;
	sc.config.l1 = 1000.0;
	sc.config.l2 = 500.0;
	sc.config.receivers = {{"x", 733.0, 120.0}};
	const auto cfg = mesh_config(sc, 20.0);
	const auto g = cfg.make_grid();
	EXPECT_NEAR(g.r(g.nearest_r(733.0)), 733.0, 1e-9);
	EXPECT_NEAR(g.z(g.nearest_z(120.0)), 120.0, 1e-9);
	EXPECT_GE(g.l1, 1000.0);
	EXPECT_GE(g.l2, 500.0);
	EXPECT_NEAR(g.hr, 2.5, 0.1);
	EXPECT_THROW(mesh_config(sc, 0.0), ConfigError);
}

TEST(Study, TraceDistance) {
	Trace a, b;
	a.components = {{1.0, 1.0, 1.0}};
	b.components = {{1.0, 1.0, 0.0}};
	EXPECT_DOUBLE_EQ(trace_distance(b, a, 1.0), 0.5);
	EXPECT_EQ(trace_distance(a, a, 1.0), 0.0);
	EXPECT_THROW(trace_distance(a, Trace{{}, 0, 0, 0, 0, {{0.0, 0.0}}}, 1.0), std::invalid_argument);
}

TEST(Study, SmallAnalyticStudyReportsOrders) {
	Scenario sc;
	auto &c = sc.config;
	c.physics = Physics::acoustic;
	c.l1 = 600.0;
	c.l2 = 300.0;
	c.acoustic = homogeneous_acoustic(1500.0, 1.0);
	c.basis = {9, 400.0, 500};
	c.source = {SourceKind::monopole, 0.0, 0.0, {30.0, 0.1, 4.0, 1.0}};
	c.receivers = {{"r", 100.0, 0.0}};
	c.output = {0.0, 0.3, 0.001};
	c.solver = {1e-10, 500, 10};
	sc.reference_velocity = 1500.0;
	sc.has_analytic_reference = true;
	sc.reference_c = 1500.0;
	sc.reference_kappa = 1500.0 * 1500.0;
	const auto st = run_convergence(sc, {10.0, 20.0});
	ASSERT_EQ(st.rows.size(), 2u);
	EXPECT_TRUE(st.analytic);
	ASSERT_TRUE(st.rows[0].epsilon && st.rows[1].epsilon);
	EXPECT_LT(*st.rows[1].epsilon, *st.rows[0].epsilon);
	ASSERT_TRUE(st.rows[1].order.has_value());
	EXPECT_GT(*st.rows[1].order, 1.5);
	std::ostringstream os;
	write_convergence_table(os, st);
	EXPECT_NE(os.str().find("points_per_wavelength\t"), std::string::npos);
}

TEST(Selftest, AllChecksPass) {
	for (const auto &c : run_selftest()) {
		EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
	}
}

TEST(Selftest, InjectedAccumulatorFaultIsCaught) {
	SelftestOptions opt;
	opt.accumulator_weight_hook = [](std::size_t k, int alpha) { return 1.001 * accumulator_weight(k, alpha); };
	for (const auto &c : run_selftest(opt)) {
		if (c.name == "accumulator") {
			EXPECT_FALSE(c.pass);
		} else {
			EXPECT_TRUE(c.pass) << c.name;
		}
	}
}

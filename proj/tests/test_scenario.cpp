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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lwave/scenario.hpp"

using namespace lwave;

namespace {

const char *kMinimal = R"(
# comment line
[domain]
l1 = 500
l2 = 300
step = 5      # trailing comment

[medium]
type = homogeneous
vp = 1500
rho = 1000

[basis]
h = 400

[receivers]
receiver = a 100 0
receiver = b 200 50

[output]
t_end = 0.5
)";

Scenario parse(const std::string &text) {
	std::istringstream is(text);
	return resolve_scenario(parse_scenario(is, "test.ini"));
}

std::string echo_value(const Scenario &sc, const std::string &key) {
	for (const auto &[k, v] : sc.echo) {
		if (k == key) {
			return v;
		}
	}
	return "<missing>";
}

void expect_config_error(const std::string &text, const std::string &fragment) {
	try {
		parse(text);
		FAIL() << "expected ConfigError containing '" << fragment << "'";
	} catch (const ConfigError &e) {
		EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
	}
}

} // namespace

TEST(Scenario, MinimalAcousticWithDefaults) {
	const auto sc = parse(kMinimal);
	const auto &c = sc.config;
	EXPECT_EQ(c.physics, Physics::acoustic);
	EXPECT_EQ(c.basis.alpha, 9);
	EXPECT_EQ(c.basis.n, 3000);
	EXPECT_EQ(c.source.kind, SourceKind::monopole);
	EXPECT_EQ(c.source.pulse.f0, 30.0);
	EXPECT_EQ(c.source.pulse.t0, 0.2);
	EXPECT_EQ(c.source.pulse.gamma, 4.0);
	EXPECT_EQ(c.output.dt, 1e-3);
	EXPECT_EQ(c.solver.tol, 1e-8);
	ASSERT_EQ(c.receivers.size(), 2u);
	EXPECT_EQ(c.receivers[1].name, "b");
	EXPECT_EQ(c.receivers[1].z, 50.0);
	EXPECT_TRUE(sc.has_analytic_reference);
	EXPECT_DOUBLE_EQ(sc.reference_kappa, 1000.0 * 1500.0 * 1500.0);
	EXPECT_DOUBLE_EQ(sc.wavelength(), 50.0);
	EXPECT_EQ(echo_value(sc, "basis.alpha"), "9");
	EXPECT_EQ(echo_value(sc, "source.kind"), "monopole");
	EXPECT_EQ(echo_value(sc, "output.dt"), "0.001");
	EXPECT_EQ(echo_value(sc, "domain.step"), "5");
}

TEST(Scenario, ElasticDefaults) {
	std::string text = kMinimal;
	text.replace(text.find("vp = 1500"), 9, "vp = 3000\nvs = 1500");
	text = "[simulation]\nphysics = elastic\n" + text;
	const auto sc = parse(text);
	EXPECT_EQ(sc.config.physics, Physics::elastic);
	EXPECT_EQ(sc.config.basis.alpha, 8);
	EXPECT_EQ(sc.config.basis.n, 2000);
	EXPECT_EQ(sc.config.source.kind, SourceKind::center_of_pressure);
	EXPECT_FALSE(sc.has_analytic_reference);
	EXPECT_DOUBLE_EQ(sc.reference_velocity, 1500.0);
	EXPECT_EQ(echo_value(sc, "solver.restart_k"), "10");
}

TEST(Scenario, LayeredMedium) {
	std::string text = kMinimal;
	text.replace(text.find("type = homogeneous"), 18, "type = layered\nlayer = 0 1500 0 1000\nlayer = 100 2500 0 2000");
	text.replace(text.find("vp = 1500\n"), 10, "");
	text.replace(text.find("rho = 1000\n"), 11, "");
	const auto sc = parse(text);
	EXPECT_DOUBLE_EQ(sc.config.acoustic.kappa(0.0, 150.0), 2000.0 * 2500.0 * 2500.0);
	EXPECT_DOUBLE_EQ(sc.reference_velocity, 1500.0);
	EXPECT_FALSE(sc.has_analytic_reference);
}

TEST(Scenario, ParseErrorsCarryLineNumbers) {
	expect_config_error(std::string(kMinimal) + "[bogus]\n", "unknown section [bogus]");
	expect_config_error(std::string(kMinimal) + "[output]\ncolour = red\n", "unknown key 'colour'");
	expect_config_error(std::string(kMinimal) + "[domain]\nl1 = 3\n", "duplicate key 'l1'");
	expect_config_error("l1 = 3\n", "key outside of any section");
	expect_config_error("[domain\n", "malformed section header");
	expect_config_error("[domain]\njust words\n", "expected 'key = value'");
	expect_config_error("[domain]\nl1 =\n", "empty value");
	expect_config_error(std::string(kMinimal) + "[bogus]\n", "test.ini:22");
}

TEST(Scenario, SemanticErrors) {
	std::string bad_number = kMinimal;
	bad_number.replace(bad_number.find("l1 = 500"), 8, "l1 = 5x0");
	expect_config_error(bad_number, "l1");

	std::string missing_h = kMinimal;
	missing_h.replace(missing_h.find("h = 400"), 7, "n = 10");
	expect_config_error(missing_h, "h");

	std::string dup_rec = kMinimal;
	dup_rec.replace(dup_rec.find("receiver = b"), 12, "receiver = a");
	expect_config_error(dup_rec, "duplicate receiver name 'a'");

	std::string bad_kind = std::string(kMinimal) + "[source]\nkind = dipole\n";
	expect_config_error(bad_kind, "monopole or center_of_pressure");

	std::string bad_alpha = kMinimal;
	bad_alpha.replace(bad_alpha.find("h = 400"), 7, "h = 400\nalpha = 1");
	expect_config_error(bad_alpha, "alpha");

	std::string both = kMinimal;
	both.replace(both.find("step = 5"), 8, "step = 5\nnr = 10\nnz = 10");
	expect_config_error(both, "either step or both nr and nz");
}

TEST(Scenario, RasterPathRelativeToFile) {
	namespace fs = std::filesystem;
	const auto dir = fs::temp_directory_path() / "lwave_scenario_test";
	fs::create_directories(dir);
	RasterModel m;
	m.nr = 2;
	m.nz = 2;
	m.spacing_r = 600.0;
	m.spacing_z = 400.0;
	m.names = {"vp", "rho"};
	m.values = {{1500.0, 1600.0, 1700.0, 1800.0}, std::vector<double>(4, 1000.0)};
	write_raster_binary((dir / "model.lwr").string(), m);
	std::string text = kMinimal;
	text.replace(text.find("type = homogeneous"), 18, "type = raster\npath = model.lwr");
	text.replace(text.find("vp = 1500\n"), 10, "");
	text.replace(text.find("rho = 1000\n"), 11, "");
	{
		std::ofstream(dir / "s.ini") << text;
	}
	const auto sc = load_scenario((dir / "s.ini").string());
	EXPECT_DOUBLE_EQ(sc.reference_velocity, 1500.0);
	EXPECT_DOUBLE_EQ(sc.config.acoustic.kappa(600.0, 400.0), 1000.0 * 1800.0 * 1800.0);

	m.values[1][2] = -1.0;
	write_raster_binary((dir / "model.lwr").string(), m);
	EXPECT_THROW(load_scenario((dir / "s.ini").string()), ConfigError);
	EXPECT_THROW(load_scenario((dir / "missing.ini").string()), ConfigError);
}

TEST(Scenario, ShippedScenariosLoad) {
	for (const char *name : {"acoustic_homogeneous.ini", "elastic_thin_layer.ini", "acoustic_raster.ini"}) {
		const auto path = std::string(LWAVE_SCENARIO_DIR) + "/" + name;
		EXPECT_NO_THROW({
			const auto sc = load_scenario(path);
			const auto g = sc.config.make_grid();
			sc.config.validate(g);
		}) << path;
	}
}

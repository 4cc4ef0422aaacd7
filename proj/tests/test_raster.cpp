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

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "lwave/raster.hpp"

using namespace lwave;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string &name) {
	const auto dir = fs::temp_directory_path() / "lwave_raster_test";
	fs::create_directories(dir);
	return dir / name;
}

std::vector<char> slurp(const fs::path &p) {
	std::ifstream is(p, std::ios::binary);
	return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

template <typename T> void append(std::vector<char> &buf, T v) {
	const auto *p = reinterpret_cast<const char *>(&v);
	buf.insert(buf.end(), p, p + sizeof(T));
}

RasterModel sample_model() {
	RasterModel m;
	m.nr = 3;
	m.nz = 2;
	m.origin_r = 0.5;
	m.origin_z = -1.25;
	m.spacing_r = 2.0;
	m.spacing_z = 0.1;
	m.names = {"vp", "rho"};
	m.values = {{1500.0, 1600.0, 1700.0, 1800.0, 1900.0, 2000.0}, {1.0, 1.1, 1.2, 1.3, 1.4, 0.1 + 0.2}};
	return m;
}

} // namespace

TEST(RasterBinary, LayoutMatchesHandAssembledBytes) {
	const auto m = sample_model();
	const auto path = temp_path("layout.lwr");
	write_raster_binary(path.string(), m);

	std::vector<char> ref = {'L', 'W', 'R', 'A', 'S', 'T', 'E', 'R'};
	append<std::uint32_t>(ref, 1);
	append<std::uint32_t>(ref, 3);
	append<std::uint32_t>(ref, 2);
	append<std::uint32_t>(ref, 2);
	append<double>(ref, 0.5);
	append<double>(ref, -1.25);
	append<double>(ref, 2.0);
	append<double>(ref, 0.1);
	append<std::uint32_t>(ref, 2);
	ref.insert(ref.end(), {'v', 'p'});
	append<std::uint32_t>(ref, 3);
	ref.insert(ref.end(), {'r', 'h', 'o'});
	for (const auto &v : m.values) {
		for (double x : v) {
			append<double>(ref, x);
		}
	}
	EXPECT_EQ(slurp(path), ref);
}

TEST(RasterBinary, RoundTripIsBitExact) {
	auto m = sample_model();
	m.values[0][3] = std::nextafter(1800.0, 2000.0);
	const auto a = temp_path("a.lwr");
	const auto b = temp_path("b.lwr");
	write_raster_binary(a.string(), m);
	const auto back = read_raster(a.string());
	EXPECT_EQ(back.nr, m.nr);
	EXPECT_EQ(back.nz, m.nz);
	EXPECT_EQ(back.names, m.names);
	ASSERT_EQ(back.values.size(), m.values.size());
	for (std::size_t p = 0; p < m.values.size(); ++p) {
		EXPECT_EQ(std::memcmp(back.values[p].data(), m.values[p].data(), m.values[p].size() * sizeof(double)), 0);
	}
	write_raster_binary(b.string(), back);
	EXPECT_EQ(slurp(a), slurp(b));
}

TEST(RasterText, RoundTripPreservesValues) {
	const auto m = sample_model();
	const auto p = temp_path("t.lwrt");
	write_raster_text(p.string(), m);
	const auto back = read_raster(p.string());
	EXPECT_EQ(back.names, m.names);
	EXPECT_EQ(back.origin_z, m.origin_z);
	EXPECT_EQ(back.spacing_z, m.spacing_z);
	EXPECT_EQ(back.values, m.values);
}

TEST(RasterErrors, ShortPayload) {
	const auto m = sample_model();
	const auto p = temp_path("short.lwr");
	write_raster_binary(p.string(), m);
	auto bytes = slurp(p);
	bytes.resize(bytes.size() - 5);
	std::ofstream(p, std::ios::binary | std::ios::trunc).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
	try {
		read_raster(p.string());
		FAIL() << "expected RasterError";
	} catch (const RasterError &e) {
		EXPECT_EQ(e.code(), RasterErrc::short_payload);
	}
}

TEST(RasterErrors, BadMagicAndMissingFile) {
	const auto p = temp_path("junk.lwr");
	std::ofstream(p) << "NOTARASTER at all\n";
	try {
		read_raster(p.string());
		FAIL();
	} catch (const RasterError &e) {
		EXPECT_EQ(e.code(), RasterErrc::malformed_header);
	}
	try {
		read_raster(temp_path("does_not_exist.lwr").string());
		FAIL();
	} catch (const RasterError &e) {
		EXPECT_EQ(e.code(), RasterErrc::io_error);
	}
}

TEST(RasterErrors, NonPositiveAndUnknownParameter) {
	auto m = sample_model();
	m.values[1][4] = 0.0;
	const auto p = temp_path("zero.lwr");
	write_raster_binary(p.string(), m);
	try {
		load_raster_model(p.string(), {"vp", "rho"});
		FAIL();
	} catch (const RasterError &e) {
		EXPECT_EQ(e.code(), RasterErrc::nonpositive_value);
		EXPECT_NE(std::string(e.what()).find("rho"), std::string::npos);
	}
	try {
		load_raster_model(p.string(), {"vs"});
		FAIL();
	} catch (const RasterError &e) {
		EXPECT_EQ(e.code(), RasterErrc::unknown_parameter);
	}
}

TEST(RasterQuery, NearestCellAndDomain) {
	const auto m = sample_model();
	// cell (i, k) centred at (0.5 + 2 i, -1.25 + 0.1 k)
	EXPECT_EQ(m.query("vp", 0.5, -1.25), 1500.0);
	EXPECT_EQ(m.query("vp", 2.4, -1.16), 1800.0);
	EXPECT_EQ(m.query("vp", 4.5, -1.15), 2000.0);
	EXPECT_THROW(m.query("vp", 6.0, -1.2), RasterError);
	EXPECT_THROW(m.query("vp", 0.5, -1.5), RasterError);
}

TEST(RasterMedia, ElasticParametersFromVelocities) {
	RasterModel m;
	m.nr = 2;
	m.nz = 2;
	m.names = {"vp", "vs", "rho"};
	m.values = {std::vector<double>(4, 3000.0), std::vector<double>(4, 1000.0), std::vector<double>(4, 2000.0)};
	const auto e = elastic_from_raster(m);
	EXPECT_DOUBLE_EQ(e.mu(0.5, 0.5), 2e9);
	EXPECT_DOUBLE_EQ(e.lambda(0.5, 0.5), 2000.0 * (9e6 - 2e6));
	const auto a = acoustic_from_raster(m);
	EXPECT_DOUBLE_EQ(a.kappa(1.0, 1.0), 2000.0 * 9e6);
}

TEST(RasterSnapshot, AlignedWithMesh) {
	const auto g = build_grid(35.0, 15.0, 4, 2);
	Field2D f(g);
	f(3, 1) = 42.0;
	const auto m = snapshot_raster(g, {"p"}, {&f});
	EXPECT_EQ(m.origin_r, g.r(0));
	EXPECT_EQ(m.spacing_z, g.hz);
	EXPECT_EQ(m.query("p", g.r(3), g.z(1)), 42.0);
}

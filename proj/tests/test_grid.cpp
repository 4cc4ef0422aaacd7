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

#include <cmath>
#include <stdexcept>

#include "lwave/grid.hpp"

using namespace lwave;

TEST(Grid, StepsPutLastNodeOnBoundary) {
	const auto g = build_grid(100.0, 50.0, 11, 6);
	EXPECT_DOUBLE_EQ(g.r(10), 100.0);
	EXPECT_DOUBLE_EQ(g.z(5), 50.0);
	EXPECT_DOUBLE_EQ(g.r(0), 0.5 * g.hr);
	EXPECT_DOUBLE_EQ(g.rbar(0), g.hr);
	EXPECT_EQ(g.size(), 66u);
	EXPECT_EQ(g.index(2, 3), 15u);
}

TEST(Grid, SmallestAllowedMesh) {
	const auto g = build_grid(1.0, 1.0, 2, 2);
	EXPECT_DOUBLE_EQ(g.hr, 1.0 / 1.5);
	EXPECT_THROW(build_grid(1.0, 1.0, 1, 4), std::invalid_argument);
	EXPECT_THROW(build_grid(-1.0, 1.0, 4, 4), std::invalid_argument);
}

TEST(Grid, WithStepCoversDomain) {
	const auto g = build_grid_with_step(100.0, 40.0, 3.0);
	EXPECT_DOUBLE_EQ(g.hr, 3.0);
	EXPECT_DOUBLE_EQ(g.hz, 3.0);
	EXPECT_GE(g.l1, 100.0);
	EXPECT_GE(g.l2, 40.0);
	EXPECT_LT(g.l1, 103.0);
}

TEST(Grid, NearestNode) {
	const auto g = build_grid(95.0, 95.0, 10, 10); // h = 10
	EXPECT_EQ(g.nearest_r(0.0), 0u);
	EXPECT_EQ(g.nearest_r(9.9), 0u);
	EXPECT_EQ(g.nearest_r(15.0), 1u);
	EXPECT_EQ(g.nearest_r(95.0), 9u);
	EXPECT_TRUE(g.contains(95.0, 0.0));
	EXPECT_FALSE(g.contains(95.1, 0.0));
}

TEST(Media, HomogeneousAcoustic) {
	const auto m = homogeneous_acoustic(2000.0, 2.0);
	EXPECT_DOUBLE_EQ(m.kappa(1.0, 2.0), 8e6);
	EXPECT_DOUBLE_EQ(m.rho(1.0, 2.0), 2.0);
	EXPECT_THROW(homogeneous_acoustic(0.0, 1.0), std::invalid_argument);
}

TEST(Media, LayersSelectByDepth) {
	const auto m = layered_elastic({{30.0, 3000.0, 1500.0, 2200.0}, {0.0, 2000.0, 1000.0, 2000.0}});
	EXPECT_DOUBLE_EQ(m.rho(0.0, 10.0), 2000.0);
	EXPECT_DOUBLE_EQ(m.rho(0.0, 30.0), 2200.0);
	EXPECT_DOUBLE_EQ(m.mu(0.0, 10.0), 2000.0 * 1e6);
	EXPECT_DOUBLE_EQ(m.lambda(0.0, 10.0), 2000.0 * (4e6 - 2e6));
	EXPECT_THROW(layered_elastic({{0.0, 1000.0, 800.0, 1.0}}), std::invalid_argument);
	EXPECT_THROW(layered_acoustic({}), std::invalid_argument);
}

TEST(Sampling, AcousticCoefficientsUseFacePositions) {
	const auto g = build_grid(35.0, 35.0, 4, 4); // h = 10
	AcousticMedium m{[](double r, double z) { return 1.0 + r + 100.0 * z; }, constant_field(3.0)};
	const auto c = sample_acoustic(m, g, 2.0);
	EXPECT_DOUBLE_EQ(c.a1(1, 2), g.rbar(1) * (1.0 + g.rbar(1) + 100.0 * g.z(2)));
	EXPECT_DOUBLE_EQ(c.a2(1, 2), g.r(1) * (1.0 + g.r(1) + 100.0 * g.zbar(2)));
	EXPECT_DOUBLE_EQ(c.w(1, 2), 3.0 * 1.0 * g.r(1));
}

TEST(Sampling, RejectsNonPositiveMaterial) {
	const auto g = build_grid(35.0, 35.0, 4, 4);
	AcousticMedium bad{[](double, double z) { return z < 20.0 ? 1.0 : -1.0; }, constant_field(1.0)};
	EXPECT_THROW(sample_acoustic(bad, g, 1.0), std::domain_error);
	ElasticMedium eb{constant_field(1.0), constant_field(0.0), constant_field(1.0)};
	EXPECT_THROW(sample_elastic(eb, g), std::domain_error);
}

TEST(Tilde, MidpointOfRange) {
	const auto g = build_grid(35.0, 35.0, 4, 4);
	const auto two_layer = layered_acoustic({{0.0, 1.0, 0.0, 1.0}, {20.0, std::sqrt(3.0), 0.0, 1.0}});
	EXPECT_NEAR(tilde(two_layer.kappa, g), 2.0, 1e-15);
	EXPECT_DOUBLE_EQ(tilde(constant_field(5.0), g), 5.0);
	EXPECT_THROW(tilde(std::span<const double>{}), std::invalid_argument);
}

TEST(Field, ShapeAndAccess) {
	Field2D f(3, 4, 1.5);
	f(2, 3) = 7.0;
	EXPECT_EQ(f.size(), 12u);
	EXPECT_EQ(f.span()[11], 7.0);
	EXPECT_TRUE(f.same_shape(Field2D(3, 4)));
	EXPECT_FALSE(f.same_shape(Field2D(4, 3)));
}

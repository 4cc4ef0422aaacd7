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

#include <atomic>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lwave/parallel.hpp"

using lwave::IndexRange;
using lwave::partition_range;
using lwave::WorkerPool;

TEST(PartitionRange, CoversEveryIndexOnce) {
	for (std::size_t n : {0UL, 1UL, 7UL, 100UL}) {
		for (std::size_t parts : {1UL, 2UL, 3UL, 8UL}) {
			std::size_t expect = 0;
			for (std::size_t p = 0; p < parts; ++p) {
				const IndexRange r = partition_range(n, parts, p);
				EXPECT_EQ(r.begin, expect);
				expect = r.end;
			}
			EXPECT_EQ(expect, n);
		}
	}
}

TEST(PartitionRange, SizesDifferByAtMostOne) {
	std::size_t lo = 1000, hi = 0;
	for (std::size_t p = 0; p < 7; ++p) {
		const auto r = partition_range(100, 7, p);
		lo = std::min(lo, r.size());
		hi = std::max(hi, r.size());
	}
	EXPECT_LE(hi - lo, 1u);
}

TEST(WorkerPool, RunsEveryWorker) {
	WorkerPool pool(4);
	std::vector<int> hits(4, 0);
	pool.run([&](int w) { hits[static_cast<std::size_t>(w)] += 1; });
	for (int h : hits) {
		EXPECT_EQ(h, 1);
	}
}

TEST(WorkerPool, ReusableAcrossCalls) {
	WorkerPool pool(3);
	std::atomic<int> total{0};
	for (int i = 0; i < 50; ++i) {
		pool.for_ranges(10, [&](IndexRange r) { total += static_cast<int>(r.size()); });
	}
	EXPECT_EQ(total.load(), 500);
}

TEST(WorkerPool, PropagatesExceptions) {
	WorkerPool pool(3);
	EXPECT_THROW(pool.run([](int w) {
		if (w == 2) {
			throw std::runtime_error("boom");
		}
	}),
	             std::runtime_error);
	// Still usable afterwards.
	std::atomic<int> n{0};
	pool.run([&](int) { ++n; });
	EXPECT_EQ(n.load(), 3);
}

TEST(Reduction, DotMatchesNaiveSum) {
	std::vector<double> a(10000), b(10000);
	for (std::size_t i = 0; i < a.size(); ++i) {
		a[i] = 1.0 / (1.0 + static_cast<double>(i));
		b[i] = static_cast<double>(i % 7) - 3.0;
	}
	double ref = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		ref += a[i] * b[i];
	}
	EXPECT_NEAR(lwave::dot(a, b), ref, 1e-12 * std::abs(ref) + 1e-14);
	EXPECT_DOUBLE_EQ(lwave::norm2(std::vector<double>{3.0, 4.0}), 5.0);
	EXPECT_DOUBLE_EQ(lwave::max_abs(std::vector<double>{1.0, -7.0, 2.0}), 7.0);
}

TEST(Workers, EnvironmentFallback) {
	::setenv("WORKERS", "5", 1);
	EXPECT_EQ(lwave::workers_from_env(2), 5);
	::setenv("WORKERS", "zero", 1);
	EXPECT_EQ(lwave::workers_from_env(2), 2);
	::unsetenv("WORKERS");
	EXPECT_EQ(lwave::workers_from_env(3), 3);
}

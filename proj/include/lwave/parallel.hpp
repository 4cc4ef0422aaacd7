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
 * Worker pool and deterministic reductions.
 *
 * Work is split into logical partitions whose layout depends only on the
 * problem size and the partition count, never on scheduling. Reductions
 * combine partial results left to right, so a fixed worker count always
 * produces bit-identical results.
 */

#ifndef LWAVE_PARALLEL_HPP
#define LWAVE_PARALLEL_HPP

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lwave {

/// Half-open index range [begin, end).
struct IndexRange {
	std::size_t begin = 0;
	std::size_t end = 0;
	std::size_t size() const { return end - begin; }
};

/// Contiguous split of [0, n) into `parts` nearly equal ranges.
inline IndexRange partition_range(std::size_t n, std::size_t parts, std::size_t index) {
	const std::size_t base = n / parts;
	const std::size_t extra = n % parts;
	const std::size_t begin = index * base + std::min(index, extra);
	return {begin, begin + base + (index < extra ? 1 : 0)};
}

/**
 * Fixed-size pool executing one task per worker and joining on return.
 *
 * With a single worker every task runs inline on the caller's thread.
 */
class WorkerPool {
public:
	explicit WorkerPool(int workers = 1) : workers_(std::max(1, workers)) {
		for (int w = 1; w < workers_; ++w) {
			threads_.emplace_back([this, w] { loop(w); });
		}
	}

	WorkerPool(const WorkerPool &) = delete;
	WorkerPool &operator=(const WorkerPool &) = delete;

	~WorkerPool() {
		{
			std::lock_guard lock(mutex_);
			stop_ = true;
			++generation_;
		}
		wake_.notify_all();
		for (auto &t : threads_) {
			t.join();
		}
	}

	int size() const { return workers_; }

	/// Runs task(w) for w = 0..size()-1 and waits for all of them.
	void run(const std::function<void(int)> &task) {
		if (workers_ == 1) {
			task(0);
			return;
		}
		{
			std::lock_guard lock(mutex_);
			task_ = &task;
			pending_ = workers_ - 1;
			error_ = nullptr;
			++generation_;
		}
		wake_.notify_all();
		std::exception_ptr local;
		try {
			task(0);
		} catch (...) {
			local = std::current_exception();
		}
		std::unique_lock lock(mutex_);
		done_.wait(lock, [this] { return pending_ == 0; });
		task_ = nullptr;
		if (local) {
			std::rethrow_exception(local);
		}
		if (error_) {
			std::rethrow_exception(error_);
		}
	}

	/// Splits [0, n) into size() contiguous ranges and runs body(range) on each.
	void for_ranges(std::size_t n, const std::function<void(IndexRange)> &body) {
		const auto parts = static_cast<std::size_t>(workers_);
		run([&](int w) {
			const auto r = partition_range(n, parts, static_cast<std::size_t>(w));
			if (r.size() > 0) {
				body(r);
			}
		});
	}

private:
	void loop(int w) {
		std::size_t seen = 0;
		for (;;) {
			const std::function<void(int)> *task = nullptr;
			{
				std::unique_lock lock(mutex_);
				wake_.wait(lock, [&] { return generation_ != seen; });
				seen = generation_;
				if (stop_) {
					return;
				}
				task = task_;
			}
			std::exception_ptr err;
			try {
				(*task)(w);
			} catch (...) {
				err = std::current_exception();
			}
			{
				std::lock_guard lock(mutex_);
				if (err && !error_) {
					error_ = err;
				}
				if (--pending_ == 0) {
					done_.notify_one();
				}
			}
		}
	}

	int workers_;
	std::vector<std::thread> threads_;
	std::mutex mutex_;
	std::condition_variable wake_;
	std::condition_variable done_;
	const std::function<void(int)> *task_ = nullptr;
	int pending_ = 0;
	std::size_t generation_ = 0;
	bool stop_ = false;
	std::exception_ptr error_;
};

/// Block length of the fixed-order summation; independent of the worker count.
inline constexpr std::size_t kReductionBlock = 4096;

/// Dot product summed blockwise in a fixed order.
inline double dot(std::span<const double> a, std::span<const double> b) {
	if (a.size() != b.size()) {
		throw std::invalid_argument("dot: size mismatch");
	}
	double total = 0.0;
	for (std::size_t s = 0; s < a.size(); s += kReductionBlock) {
		const std::size_t e = std::min(a.size(), s + kReductionBlock);
		double partial = 0.0;
		for (std::size_t i = s; i < e; ++i) {
			partial += a[i] * b[i];
		}
		total += partial;
	}
	return total;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs(std::span<const double> a) {
	double m = 0.0;
	for (double v : a) {
		m = std::max(m, std::abs(v));
	}
	return m;
}

/// Worker count from the WORKERS environment variable, or `fallback`.
inline int workers_from_env(int fallback = 1) {
	if (const char *env = std::getenv("WORKERS")) {
		try {
			const int w = std::stoi(env);
			if (w >= 1) {
				return w;
			}
		} catch (const std::exception &) {
		}
	}
	return fallback;
}

} // namespace lwave

#endif // LWAVE_PARALLEL_HPP

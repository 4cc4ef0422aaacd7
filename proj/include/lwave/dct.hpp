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
 * Orthonormal cosine transform along z.
 *
 * The cell-centered second difference with zero-flux walls at both ends has
 * eigenvectors cos(pi j (k + 1/2) / N), j = 0..N-1, and eigenvalues
 * -(4/h^2) sin^2(pi j / (2N)). The forward transform maps nodal values to
 * coefficients in that basis (DCT-II), the inverse maps back (DCT-III); both
 * are scaled to be orthogonal.
 */

#ifndef LWAVE_DCT_HPP
#define LWAVE_DCT_HPP

#include <fftw3.h>

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace lwave {

namespace detail {

/// FFTW planning is not thread-safe; execution is.
inline std::mutex &fftw_planner_mutex() {
	static std::mutex m;
	return m;
}

struct FftwPlanDeleter {
	void operator()(fftw_plan_s *p) const {
		if (p) {
			std::lock_guard lock(fftw_planner_mutex());
			fftw_destroy_plan(p);
		}
	}
};

using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

} // namespace detail

/// Eigenvalues of the zero-flux second difference on n cells of width h.
inline std::vector<double> neumann_eigenvalues(std::size_t n, double h) {
	std::vector<double> mu(n);
	for (std::size_t j = 0; j < n; ++j) {
		const double s = std::sin(std::numbers::pi * static_cast<double>(j) / (2.0 * static_cast<double>(n)));
		mu[j] = -4.0 / (h * h) * s * s;
	}
	return mu;
}

/**
 * Orthonormal forward/inverse cosine transform of `count` contiguous rows of
 * length n, applied in place.
 */
class ZModeTransform {
public:
	ZModeTransform() = default;

	ZModeTransform(std::size_t n, std::size_t count) : n_(n), count_(count) {
		if (n == 0 || count == 0) {
			throw std::invalid_argument("ZModeTransform: empty transform");
		}
		std::vector<double> scratch(n * count);
		const int len = static_cast<int>(n);
		const int howmany = static_cast<int>(count);
		const fftw_r2r_kind fwd = FFTW_REDFT10;
		const fftw_r2r_kind inv = FFTW_REDFT01;
		std::lock_guard lock(detail::fftw_planner_mutex());
		const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
		forward_.reset(fftw_plan_many_r2r(1, &len, howmany, scratch.data(), nullptr, 1, len, scratch.data(), nullptr,
		                                  1, len, &fwd, flags));
		inverse_.reset(fftw_plan_many_r2r(1, &len, howmany, scratch.data(), nullptr, 1, len, scratch.data(), nullptr,
		                                  1, len, &inv, flags));
		if (!forward_ || !inverse_) {
			throw std::runtime_error("ZModeTransform: FFTW planning failed");
		}
	}

	std::size_t length() const { return n_; }
	std::size_t rows() const { return count_; }

	void forward(std::span<double> data) const {
		check(data);
		fftw_execute_r2r(forward_.get(), data.data(), data.data());
		const double s0 = std::sqrt(1.0 / (4.0 * static_cast<double>(n_)));
		const double s = std::sqrt(1.0 / (2.0 * static_cast<double>(n_)));
		for (std::size_t row = 0; row < count_; ++row) {
			double *v = data.data() + row * n_;
			v[0] *= s0;
			for (std::size_t j = 1; j < n_; ++j) {
				v[j] *= s;
			}
		}
	}

	void inverse(std::span<double> data) const {
		check(data);
		const double s0 = std::sqrt(1.0 / static_cast<double>(n_));
		const double s = 0.5 * std::sqrt(2.0 / static_cast<double>(n_));
		for (std::size_t row = 0; row < count_; ++row) {
			double *v = data.data() + row * n_;
			v[0] *= s0;
			for (std::size_t j = 1; j < n_; ++j) {
				v[j] *= s;
			}
		}
		fftw_execute_r2r(inverse_.get(), data.data(), data.data());
	}

private:
	void check(std::span<double> data) const {
		if (data.size() != n_ * count_) {
			throw std::invalid_argument("ZModeTransform: data size mismatch");
		}
	}

	std::size_t n_ = 0;
	std::size_t count_ = 0;
	detail::FftwPlan forward_;
	detail::FftwPlan inverse_;
};

} // namespace lwave

#endif // LWAVE_DCT_HPP

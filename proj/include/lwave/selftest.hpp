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
 * Embedded oracle checks run by `lwave selftest`.
 */

#ifndef LWAVE_SELFTEST_HPP
#define LWAVE_SELFTEST_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "driver.hpp"
#include "krylov.hpp"
#include "laguerre.hpp"
#include "operators.hpp"
#include "preconditioner.hpp"
#include "tridiagonal.hpp"

namespace lwave {

struct SelftestOptions {
	unsigned long seed = 20240917;
	/// Replaces the accumulator weight; fault injection only.
	double (*accumulator_weight_hook)(std::size_t, int) = nullptr;
};

struct CheckResult {
	std::string name;
	bool pass = false;
	std::string detail;
};

namespace detail {

/// Dense Gaussian elimination with partial pivoting; oracle for the Krylov checks.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
	const std::size_t n = b.size();
	for (std::size_t c = 0; c < n; ++c) {
		std::size_t p = c;
		for (std::size_t r = c + 1; r < n; ++r) {
			if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) {
				p = r;
			}
		}
		for (std::size_t j = 0; j < n; ++j) {
			std::swap(a[c * n + j], a[p * n + j]);
		}
		std::swap(b[c], b[p]);
		for (std::size_t r = c + 1; r < n; ++r) {
			const double f = a[r * n + c] / a[c * n + c];
			for (std::size_t j = c; j < n; ++j) {
				a[r * n + j] -= f * a[c * n + j];
			}
			b[r] -= f * b[c];
		}
	}
	std::vector<double> x(n);
	for (std::size_t r = n; r-- > 0;) {
		double s = b[r];
		for (std::size_t j = r + 1; j < n; ++j) {
			s -= a[r * n + j] * x[j];
		}
		x[r] = s / a[r * n + r];
	}
	return x;
}

/// Columns of a linear map as a dense row-major matrix.
inline std::vector<double> assemble_dense(const LinearMap &f, std::size_t n) {
	std::vector<double> a(n * n), e(n, 0.0), col(n);
	for (std::size_t j = 0; j < n; ++j) {
		e[j] = 1.0;
		f(e, col);
		e[j] = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			a[i * n + j] = col[i];
		}
	}
	return a;
}

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
	double num = 0.0;
	double den = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		num = std::max(num, std::abs(a[i] - b[i]));
		den = std::max(den, std::abs(b[i]));
	}
	return den > 0.0 ? num / den : num;
}

inline std::string sci(double v) {
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.3e", v);
	return buf;
}

inline CheckResult check(const std::string &name, double err, double tol) {
	return {name, err <= tol, "error " + sci(err) + " (limit " + sci(tol) + ")"};
}

inline AcousticMedium two_layer_medium() {
	return layered_acoustic({{0.0, 1.0, 0.0, 1.0}, {55.0, std::sqrt(2.0), 0.0, 1.0}});
}

} // namespace detail

inline std::vector<CheckResult> run_selftest(const SelftestOptions &opt = {}) {
	std::vector<CheckResult> out;
	std::mt19937_64 rng(opt.seed);
	std::uniform_real_distribution<double> uni(-1.0, 1.0);
	auto random_vector = [&](std::size_t n) {
		std::vector<double> v(n);
		for (auto &x : v) {
			x = uni(rng);
		}
		return v;
	};
	auto guarded = [&](const std::string &name, const std::function<CheckResult()> &body) {
		try {
			out.push_back(body());
		} catch (const std::exception &e) {
			out.push_back({name, false, std::string("exception: ") + e.what()});
		}
	};

	guarded("laguerre_roundtrip", [&] {
		const LaguerreBasis basis{9, 400.0, 800};
		const SourcePulse pulse{30.0, 0.2, 4.0, 1.0};
		const auto coeff = source_coefficients(pulse, basis);
		double err = 0.0;
		for (int j = 0; j <= 100; ++j) {
			const double t = 0.01 * j;
			err = std::max(err, std::abs(inverse_series(coeff, basis, t) - pulse(t)));
		}
		return detail::check("laguerre_roundtrip", err, 1e-6);
	});

	guarded("accumulator", [&] {
		const int alpha = 9;
		const std::size_t n = 120;
		const auto r = random_vector(n);
		ConvolutionAccumulator acc(1, alpha);
		if (opt.accumulator_weight_hook) {
			acc.set_weight_hook(opt.accumulator_weight_hook);
		}
		double err = 0.0;
		for (std::size_t m = 0; m < n; ++m) {
			double direct = 0.0;
			for (std::size_t k = 0; k < m; ++k) {
				direct += conv_weight(static_cast<long>(m), static_cast<long>(k), alpha) * r[k];
			}
			const double viaacc = accumulator_normalization(m, alpha) * acc.sum(m);
			err = std::max(err, std::abs(viaacc - direct) / std::max(1.0, std::abs(direct)));
			acc.push(m, r[m]);
		}
		return detail::check("accumulator", err, 1e-12);
	});

	guarded("tridiagonal_oracle", [&] {
		const std::size_t n = 1000;
		TridiagonalMatrix t;
		t.lower = random_vector(n);
		t.upper = random_vector(n);
		t.diag.resize(n);
		t.lower[0] = 0.0;
		t.upper[n - 1] = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			t.diag[i] = std::abs(t.lower[i]) + std::abs(t.upper[i]) + 0.5 + std::abs(uni(rng));
		}
		const auto rhs = random_vector(n);
		const auto ref = thomas_solve(t, rhs);
		double err = 0.0;
		for (int w : {1, 3, 8}) {
			const auto f = FactoredTridiagonal::factor(t, w);
			auto x = rhs;
			f.solve(x);
			err = std::max(err, detail::rel_diff(x, ref));
		}
		return detail::check("tridiagonal_oracle", err, 1e-12);
	});

	guarded("preconditioner_roundtrip", [&] {
		const auto grid = build_grid(120.0, 90.0, 13, 11);
		const auto pre = build_acoustic_preconditioner(grid, detail::two_layer_medium(), 2.0, 2);
		const auto y = random_vector(grid.size());
		std::vector<double> by(y.size()), back(y.size());
		pre.apply(y, by);
		pre.apply_inverse(by, back);
		return detail::check("preconditioner_roundtrip", detail::rel_diff(back, y), 1e-10);
	});

	guarded("operator_adjointness", [&] {
		const auto grid = build_grid(80.0, 80.0, 8, 8);
		const AcousticOperator op(grid, detail::two_layer_medium(), 2.0);
		const auto n = grid.size();
		const auto a = detail::assemble_dense([&](auto x, auto y) { op.apply_positive(x, y); }, n);
		double asym = 0.0;
		double scale = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			for (std::size_t j = 0; j < n; ++j) {
				asym = std::max(asym, std::abs(a[i * n + j] - a[j * n + i]));
				scale = std::max(scale, std::abs(a[i * n + j]));
			}
		}
		return detail::check("operator_adjointness", asym / scale, 1e-12);
	});

	guarded("pcg_dense", [&] {
		const auto grid = build_grid(160.0, 160.0, 16, 16);
		const auto medium = detail::two_layer_medium();
		const AcousticOperator op(grid, medium, 2.0);
		const auto pre = build_acoustic_preconditioner(grid, medium, 2.0);
		const auto b = random_vector(grid.size());
		const LinearMap a = [&](auto x, auto y) { op.apply_positive(x, y); };
		KrylovConfig cfg;
		cfg.tol = 1e-10;
		const auto sol = pcg(a, [&](auto x, auto y) { pre.apply_inverse(x, y); }, b, cfg);
		const auto ref = detail::dense_solve(detail::assemble_dense(a, b.size()), b);
		return detail::check("pcg_dense", detail::rel_diff(sol.x, ref), 1e-8);
	});

	guarded("gmres_dense", [&] {
		const std::size_t n = 20;
		std::vector<double> c(n * n);
		for (std::size_t i = 0; i < n; ++i) {
			for (std::size_t j = 0; j < n; ++j) {
				c[i * n + j] = 0.3 * uni(rng) / std::sqrt(static_cast<double>(n));
			}
			c[i * n + i] += 2.0;
		}
		const auto b = random_vector(n);
		const LinearMap apply_c = [&](std::span<const double> x, std::span<double> y) {
			for (std::size_t i = 0; i < n; ++i) {
				double s = 0.0;
				for (std::size_t j = 0; j < n; ++j) {
					s += c[i * n + j] * x[j];
				}
				y[i] = s;
			}
		};
		const LinearMap identity = [](std::span<const double> x, std::span<double> y) {
			std::copy(x.begin(), x.end(), y.begin());
		};
		KrylovConfig cfg;
		cfg.tol = 1e-10;
		cfg.restart_k = 5;
		const auto sol = gmres_k(apply_c, identity, b, cfg);
		const auto ref = detail::dense_solve(c, b);
		return detail::check("gmres_dense", detail::rel_diff(sol.x, ref), 1e-9);
	});
	return out;
}

} // namespace lwave

#endif // LWAVE_SELFTEST_HPP

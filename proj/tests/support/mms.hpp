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

// Manufactured solutions for the discrete operators, solved with a sparse LU.

#ifndef LWAVE_TEST_SUPPORT_MMS_HPP
#define LWAVE_TEST_SUPPORT_MMS_HPP

#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>

#include "lwave/operators.hpp"
#include "assemble.hpp"
#include "dual.hpp"

namespace lwave::test {

inline constexpr double kPi = std::numbers::pi;

inline AcousticMedium smooth_acoustic() {
	return {[](double r, double z) { return 1.0 + 0.3 * r * r + 0.2 * z * z; },
	        [](double r, double z) { return 1.0 + 0.1 * r + 0.05 * z; }};
}

inline ElasticSamples smooth_elastic(const Grid2D &g) {
	ElasticSamples s{Field2D(g), Field2D(g), Field2D(g)};
	for (std::size_t i = 0; i < g.nr; ++i) {
		for (std::size_t k = 0; k < g.nz; ++k) {
			const double r = g.r(i), z = g.z(k);
			s.lambda(i, k) = 2.0 + r * r + 0.5 * z;
			s.mu(i, k) = 1.0 + 0.5 * r * z;
			s.rho(i, k) = 1.0;
		}
	}
	return s;
}

inline Apply acoustic_map(const AcousticOperator &op) {
	return [&op](std::span<const double> x, std::span<double> y) { op.apply_positive(x, y); };
}

inline Apply elastic_map(const ElasticOperator &op) {
	return [&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
}

// Manufactured acoustic solution and its load under M = r (-div kappa grad + rho h^2/4).
struct AcousticMms {
	double l1 = 1.0, l2 = 1.0, h = 2.0;

	template <typename T> T kappa(T r, T z) const { return 1.0 + 0.3 * r * r + 0.2 * z * z; }
	template <typename T> T u(T r, T z) const {
		using std::cos;
		return cos(r * (kPi / (2.0 * l1))) * cos(z * (kPi / l2));
	}
	double load(double r, double z) const {
		auto flux_r = [this](auto rr, auto zz) { return rr * kappa(rr, zz) * d_dr([this](auto a, auto b) { return u(a, b); }, rr, zz); };
		auto flux_z = [this](auto rr, auto zz) { return kappa(rr, zz) * d_dz([this](auto a, auto b) { return u(a, b); }, rr, zz); };
		return -d_dr(flux_r, r, z) - r * d_dz(flux_z, r, z) + r * h * h / 4.0 * u(r, z);
	}
};

// The zero-flux face of the last z node lies at nz * hz, half a step beyond l2.
inline double acoustic_mms_error(std::size_t n) {
	const auto g = build_grid(1.0, 1.0, n, n);
	AcousticMms mms;
	mms.l2 = static_cast<double>(g.nz) * g.hz;
	const AcousticMedium med{[&](double r, double z) { return mms.kappa(r, z); }, constant_field(1.0)};
	const AcousticOperator op(g, med, mms.h);
	auto a = assemble_sparse(acoustic_map(op), g, 1, 1);
	Eigen::VectorXd b(static_cast<Eigen::Index>(g.size()));
	for (std::size_t i = 0; i < g.nr; ++i) {
		for (std::size_t k = 0; k < g.nz; ++k) {
			b(static_cast<Eigen::Index>(g.index(i, k))) = i + 1 == g.nr ? 0.0 : mms.load(g.r(i), g.z(k));
		}
	}
	Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
	const Eigen::VectorXd y = lu.solve(b);
	double err = 0.0;
	for (std::size_t i = 0; i < g.nr; ++i) {
		for (std::size_t k = 0; k < g.nz; ++k) {
			err = std::max(err, std::abs(y(static_cast<Eigen::Index>(g.index(i, k))) - mms.u(g.r(i), g.z(k))));
		}
	}
	return err;
}

struct ElasticMms {
	double l1 = 1.0, l2 = 1.0, h = 2.0;

	template <typename T> T lam(T r, T z) const { return 2.0 + r * r + z * 0.5; }
	template <typename T> T mu(T r, T z) const { return 1.0 + r * z * 0.5; }
	template <typename T> T q(T r, T z) const {
		using std::sin;
		const T s = sin(z * (kPi / l2));
		return sin(r * (kPi / l1)) * s * s;
	}
	template <typename T> T u(T r, T z) const {
		using std::cos;
		using std::sin;
		const T s = sin(z * (kPi / l2));
		return cos(r * (kPi / (2.0 * l1))) * s * s;
	}

	// Stress components; r sigma_rr etc. built from autodiff first derivatives.
	template <typename T> T srr(T r, T z) const {
		auto Q = [this](auto a, auto b) { return q(a, b); };
		auto U = [this](auto a, auto b) { return u(a, b); };
		return (lam(r, z) + 2.0 * mu(r, z)) * d_dr(Q, r, z) + lam(r, z) * (q(r, z) / r + d_dz(U, r, z));
	}
	template <typename T> T szz(T r, T z) const {
		auto Q = [this](auto a, auto b) { return q(a, b); };
		auto U = [this](auto a, auto b) { return u(a, b); };
		return (lam(r, z) + 2.0 * mu(r, z)) * d_dz(U, r, z) + lam(r, z) * (q(r, z) / r + d_dr(Q, r, z));
	}
	template <typename T> T srz(T r, T z) const {
		auto Q = [this](auto a, auto b) { return q(a, b); };
		auto U = [this](auto a, auto b) { return u(a, b); };
		return mu(r, z) * (d_dz(Q, r, z) + d_dr(U, r, z));
	}
	template <typename T> T stt(T r, T z) const {
		auto Q = [this](auto a, auto b) { return q(a, b); };
		auto U = [this](auto a, auto b) { return u(a, b); };
		return lam(r, z) * (d_dr(Q, r, z) + d_dz(U, r, z)) + (lam(r, z) + 2.0 * mu(r, z)) * q(r, z) / r;
	}

	// Loads of C = -r (div sigma) + r rho h^2/4 with rho = 1.
	double load_q(double r, double z) const {
		auto f_rr = [this](auto a, auto b) { return a * srr(a, b); };
		auto f_rz = [this](auto a, auto b) { return a * srz(a, b); };
		return -(d_dr(f_rr, r, z) + d_dz(f_rz, r, z) - stt(r, z)) + r * h * h / 4.0 * q(r, z);
	}
	double load_u(double r, double z) const {
		auto f_rz = [this](auto a, auto b) { return a * srz(a, b); };
		auto f_zz = [this](auto a, auto b) { return a * szz(a, b); };
		return -(d_dr(f_rz, r, z) + d_dz(f_zz, r, z)) + r * h * h / 4.0 * u(r, z);
	}
};

inline double elastic_mms_error(std::size_t n) {
	const auto g = build_grid(1.0, 1.0, n, n);
	ElasticMms mms;
	mms.l2 = static_cast<double>(g.nz) * g.hz;
	ElasticSamples s{Field2D(g), Field2D(g), Field2D(g, 1.0)};
	for (std::size_t i = 0; i < g.nr; ++i) {
		for (std::size_t k = 0; k < g.nz; ++k) {
			s.lambda(i, k) = mms.lam(g.r(i), g.z(k));
			s.mu(i, k) = mms.mu(g.r(i), g.z(k));
		}
	}
	const ElasticOperator op(g, s, mms.h);
	auto c = assemble_sparse(elastic_map(op), g, 2, 2);
	const std::size_t n2 = g.size();
	Eigen::VectorXd b(static_cast<Eigen::Index>(2 * n2));
	for (std::size_t i = 0; i < g.nr; ++i) {
		for (std::size_t k = 0; k < g.nz; ++k) {
			const auto j = static_cast<Eigen::Index>(g.index(i, k));
			const bool pinned = i + 1 == g.nr;
			b(j) = pinned ? 0.0 : mms.load_q(g.r(i), g.z(k));
			b(j + static_cast<Eigen::Index>(n2)) = pinned ? 0.0 : mms.load_u(g.r(i), g.z(k));
		}
	}
	Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(c);
	const Eigen::VectorXd x = lu.solve(b);
	double err = 0.0;
	for (std::size_t i = 0; i < g.nr; ++i) {
		for (std::size_t k = 0; k < g.nz; ++k) {
			const auto j = static_cast<Eigen::Index>(g.index(i, k));
			err = std::max(err, std::abs(x(j) - mms.q(g.r(i), g.z(k))));
			err = std::max(err, std::abs(x(j + static_cast<Eigen::Index>(n2)) - mms.u(g.r(i), g.z(k))));
		}
	}
	return err;
}

} // namespace lwave::test

#endif // LWAVE_TEST_SUPPORT_MMS_HPP

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
 * Preconditioned conjugate gradients and restarted GMRES.
 *
 * Both solvers start from x = 0 and stop on the unpreconditioned relative
 * residual |b - A x| / |b| <= tol.
 */

#ifndef LWAVE_KRYLOV_HPP
#define LWAVE_KRYLOV_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "preconditioner.hpp"

namespace lwave {

struct KrylovConfig {
	double tol = 1e-8;
	int max_iters = 1000;
	int restart_k = 10;

	void validate() const {
		if (!(tol > 0.0 && tol < 1.0)) {
			throw std::invalid_argument("KrylovConfig: tol must lie in (0, 1)");
		}
		if (max_iters < 1) {
			throw std::invalid_argument("KrylovConfig: max_iters must be >= 1");
		}
		if (restart_k < 1) {
			throw std::invalid_argument("KrylovConfig: restart_k must be >= 1");
		}
	}
};

struct SolveStats {
	int iterations = 0;
	bool converged = false;
	/// True relative residual of the returned solution.
	double final_residual = 0.0;
	/// Relative residual after each iteration, starting with the initial one.
	/// PCG records the recursive residual; GMRES the preconditioned one.
	std::vector<double> history;
	/// GMRES only: preconditioned and true relative residuals at each restart boundary.
	std::vector<double> restart_residuals;
	std::vector<double> restart_true_residuals;
};

struct SolveResult {
	std::vector<double> x;
	SolveStats stats;
};

/// Raised when p^T A p <= 0: the operator or preconditioner is not positive definite.
class BreakdownError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Raised when GMRES makes no progress over three restart cycles.
class StagnationError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

namespace detail {

inline double true_residual(const LinearMap &apply_a, std::span<const double> x, std::span<const double> b,
                            std::vector<double> &scratch) {
	apply_a(x, scratch);
	for (std::size_t i = 0; i < b.size(); ++i) {
		scratch[i] = b[i] - scratch[i];
	}
	return norm2(scratch);
}

} // namespace detail

inline SolveResult pcg(const LinearMap &apply_a, const LinearMap &apply_binv, std::span<const double> rhs,
                       const KrylovConfig &config = {}) {
	config.validate();
	const std::size_t n = rhs.size();
	SolveResult res;
	res.x.assign(n, 0.0);
	auto &st = res.stats;
	const double bnorm = norm2(rhs);
	if (bnorm == 0.0) {
		st.converged = true;
		st.history.push_back(0.0);
		return res;
	}
	std::vector<double> r(rhs.begin(), rhs.end());
	std::vector<double> z(n), p(n), ap(n);
	apply_binv(r, z);
	p = z;
	double rz = dot(r, z);
	st.history.push_back(1.0);
	double rel = 1.0;
	while (st.iterations < config.max_iters) {
		apply_a(p, ap);
		const double pap = dot(p, ap);
		if (!(pap > 0.0)) {
			throw BreakdownError("pcg: nonpositive curvature p^T A p = " + std::to_string(pap) + " at iteration " +
			                     std::to_string(st.iterations) + "; operator or preconditioner is not SPD");
		}
		const double a = rz / pap;
		for (std::size_t i = 0; i < n; ++i) {
			res.x[i] += a * p[i];
			r[i] -= a * ap[i];
		}
		++st.iterations;
		rel = norm2(r) / bnorm;
		st.history.push_back(rel);
		if (rel <= config.tol) {
			break;
		}
		apply_binv(r, z);
		const double rz_next = dot(r, z);
		const double beta = rz_next / rz;
		rz = rz_next;
		for (std::size_t i = 0; i < n; ++i) {
			p[i] = z[i] + beta * p[i];
		}
	}
	st.final_residual = detail::true_residual(apply_a, res.x, rhs, ap) / bnorm;
	st.converged = rel <= config.tol;
	return res;
}

/**
 * GMRES(k) with left preconditioning. Arnoldi uses modified Gram-Schmidt
 * with a second pass when |(w, v_i)| > 1e-8 |w| for some basis vector.
 *
 * Inner iterations stop on the preconditioned residual; the true residual
 * is checked at every restart and the inner target tightened if it lags.
 */
inline SolveResult gmres_k(const LinearMap &apply_c, const LinearMap &apply_kinv, std::span<const double> rhs,
                           const KrylovConfig &config = {}) {
	config.validate();
	const std::size_t n = rhs.size();
	const auto k = static_cast<std::size_t>(config.restart_k);
	SolveResult res;
	res.x.assign(n, 0.0);
	auto &st = res.stats;
	const double bnorm = norm2(rhs);
	if (bnorm == 0.0) {
		st.converged = true;
		st.history.push_back(0.0);
		return res;
	}
	std::vector<double> tmp(n), w(n);
	std::vector<std::vector<double>> v(k + 1, std::vector<double>(n));
	std::vector<double> h((k + 1) * k, 0.0);
	auto H = [&](std::size_t i, std::size_t j) -> double & { return h[j * (k + 1) + i]; };
	std::vector<double> cs(k), sn(k), g(k + 1);

	// Preconditioned reference norm |K^{-1} b| scales the inner residuals.
	apply_kinv(rhs, w);
	const double pbnorm = norm2(w);
	if (!(pbnorm > 0.0)) {
		throw BreakdownError("gmres: preconditioned right-hand side vanishes");
	}
	double inner_tol = config.tol;
	double true_rel = 1.0;
	double best_true = 1.0;
	int stagnant = 0;
	bool first = true;

	while (true) {
		// Residual of the current iterate.
		if (first) {
			std::copy(rhs.begin(), rhs.end(), tmp.begin());
		} else {
			apply_c(res.x, tmp);
			for (std::size_t i = 0; i < n; ++i) {
				tmp[i] = rhs[i] - tmp[i];
			}
		}
		true_rel = norm2(tmp) / bnorm;
		apply_kinv(tmp, v[0]);
		const double beta = norm2(v[0]);
		if (first) {
			st.history.push_back(beta / pbnorm);
			first = false;
		} else {
			st.restart_residuals.push_back(beta / pbnorm);
			st.restart_true_residuals.push_back(true_rel);
		}
		if (true_rel <= config.tol) {
			st.converged = true;
			break;
		}
		if (st.iterations >= config.max_iters) {
			break;
		}
		if (true_rel < best_true * (1.0 - 1e-12)) {
			best_true = true_rel;
			stagnant = 0;
		} else if (st.restart_true_residuals.size() > 0 && ++stagnant >= 3) {
			throw StagnationError("gmres: no residual decrease over 3 restart cycles (relative residual " +
			                      std::to_string(true_rel) + ")");
		}
		// Tighten the inner target when the true residual lags the preconditioned one.
		if (st.restart_true_residuals.size() > 0) {
			const double prel = beta / pbnorm;
			if (true_rel > config.tol && prel > 0.0) {
				inner_tol = std::min(inner_tol, prel * config.tol / true_rel);
			}
		}
		for (auto &x : v[0]) {
			x /= beta;
		}
		std::fill(g.begin(), g.end(), 0.0);
		g[0] = beta;
		std::size_t j = 0;
		for (; j < k && st.iterations < config.max_iters; ++j) {
			apply_c(v[j], tmp);
			apply_kinv(tmp, w);
			const double before = norm2(w);
			for (std::size_t i = 0; i <= j; ++i) {
				const double c = dot(w, v[i]);
				H(i, j) = c;
				for (std::size_t t = 0; t < n; ++t) {
					w[t] -= c * v[i][t];
				}
			}
			// One more pass when the new vector is measurably off the basis.
			{
				std::vector<double> c(j + 1);
				double worst = 0.0;
				for (std::size_t i = 0; i <= j; ++i) {
					c[i] = dot(w, v[i]);
					worst = std::max(worst, std::abs(c[i]));
				}
				if (worst > 1e-8 * norm2(w)) {
					for (std::size_t i = 0; i <= j; ++i) {
						H(i, j) += c[i];
						for (std::size_t t = 0; t < n; ++t) {
							w[t] -= c[i] * v[i][t];
						}
					}
				}
			}
			const double hn = norm2(w);
			H(j + 1, j) = hn;
			const bool lucky = hn <= 1e-14 * before;
			if (!lucky) {
				for (std::size_t t = 0; t < n; ++t) {
					v[j + 1][t] = w[t] / hn;
				}
			}
			for (std::size_t i = 0; i < j; ++i) {
				const double a = H(i, j);
				const double b = H(i + 1, j);
				H(i, j) = cs[i] * a + sn[i] * b;
				H(i + 1, j) = -sn[i] * a + cs[i] * b;
			}
			const double a = H(j, j);
			const double b = H(j + 1, j);
			const double rr = std::hypot(a, b);
			cs[j] = a / rr;
			sn[j] = b / rr;
			H(j, j) = rr;
			H(j + 1, j) = 0.0;
			g[j + 1] = -sn[j] * g[j];
			g[j] = cs[j] * g[j];
			++st.iterations;
			const double prel = std::abs(g[j + 1]) / pbnorm;
			st.history.push_back(prel);
			if (lucky || prel <= inner_tol) {
				++j;
				break;
			}
		}
		// Back substitution for the cycle's correction.
		std::vector<double> y(j);
		for (std::size_t i = j; i-- > 0;) {
			double s = g[i];
			for (std::size_t t = i + 1; t < j; ++t) {
				s -= H(i, t) * y[t];
			}
			y[i] = s / H(i, i);
		}
		for (std::size_t i = 0; i < j; ++i) {
			for (std::size_t t = 0; t < n; ++t) {
				res.x[t] += y[i] * v[i][t];
			}
		}
	}
	st.final_residual = true_rel;
	return res;
}

} // namespace lwave

#endif // LWAVE_KRYLOV_HPP

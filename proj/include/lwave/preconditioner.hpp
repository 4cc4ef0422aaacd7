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
 * Separable preconditioners: tilde-averaged constant-in-medium operators
 * inverted exactly by a cosine transform in z and one tridiagonal solve in r
 * per z-mode.
 */

#ifndef LWAVE_PRECONDITIONER_HPP
#define LWAVE_PRECONDITIONER_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dct.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "tridiagonal.hpp"

namespace lwave {

/// Coefficients of one separable block in positive orientation.
struct SeparableBlockSpec {
	double a1 = 0.0;  // multiplies rbar_i on r-faces
	double a2 = 0.0;  // multiplies r_i in the z direction
	double mass = 0.0; // multiplies r_i
	double inv_r = 0.0; // multiplies 1 / r_i
};

namespace detail {

inline std::atomic<long> &preconditioner_builds() {
	static std::atomic<long> n{0};
	return n;
}

} // namespace detail

/// Number of preconditioners built by this process so far.
inline long preconditioner_build_count() { return detail::preconditioner_builds().load(); }

/**
 * Exact inverse of one or two separable blocks acting on grid-shaped
 * components stored back to back.
 */
class SeparablePreconditioner {
public:
	SeparablePreconditioner(const Grid2D &grid, std::vector<SeparableBlockSpec> blocks, int workers)
	    : grid_(grid), specs_(std::move(blocks)), mu_(neumann_eigenvalues(grid.nz, grid.hz)),
	      transform_(grid.nz, grid.nr) {
		if (specs_.empty()) {
			throw std::invalid_argument("SeparablePreconditioner: no blocks");
		}
		for (const auto &s : specs_) {
			if (!(s.a1 > 0.0) || !(s.a2 > 0.0) || !(s.mass > 0.0) || !(s.inv_r >= 0.0)) {
				throw std::invalid_argument("SeparablePreconditioner: block coefficients must be positive");
			}
			std::vector<FactoredTridiagonal> modes;
			modes.reserve(grid.nz);
			for (std::size_t j = 0; j < grid.nz; ++j) {
				modes.push_back(FactoredTridiagonal::factor(mode_matrix(s, j), workers));
			}
			factors_.push_back(std::move(modes));
		}
		++detail::preconditioner_builds();
	}

	const Grid2D &grid() const { return grid_; }
	std::size_t blocks() const { return specs_.size(); }
	std::size_t size() const { return specs_.size() * grid_.size(); }
	const SeparableBlockSpec &block(std::size_t b) const { return specs_.at(b); }
	const std::vector<double> &eigenvalues() const { return mu_; }

	/// Tridiagonal system of z-mode j for block b, positive orientation.
	TridiagonalMatrix mode_matrix(std::size_t b, std::size_t j) const { return mode_matrix(specs_.at(b), j); }

	/// out = B^{-1} phi.
	void apply_inverse(std::span<const double> phi, std::span<double> out, WorkerPool *pool = nullptr) const {
		if (phi.size() != size() || out.size() != size()) {
			throw std::invalid_argument("apply_inverse: expected " + std::to_string(size()) + " values, got " +
			                            std::to_string(phi.size()));
		}
		const std::size_t nr = grid_.nr;
		const std::size_t nz = grid_.nz;
		const std::size_t n = grid_.size();
		std::vector<double> modes(n);
		for (std::size_t b = 0; b < specs_.size(); ++b) {
			auto o = out.subspan(b * n, n);
			std::copy_n(phi.begin() + static_cast<std::ptrdiff_t>(b * n), n, o.begin());
			transform_.forward(o);
			for (std::size_t i = 0; i < nr; ++i) {
				for (std::size_t j = 0; j < nz; ++j) {
					modes[j * nr + i] = o[i * nz + j];
				}
			}
			const auto &fac = factors_[b];
			auto solve_range = [&](std::size_t j0, std::size_t j1) {
				for (std::size_t j = j0; j < j1; ++j) {
					fac[j].solve(std::span<double>(modes.data() + j * nr, nr));
				}
			};
			if (pool && pool->size() > 1) {
				pool->for_ranges(nz, [&](IndexRange r) { solve_range(r.begin, r.end); });
			} else {
				solve_range(0, nz);
			}
			for (std::size_t i = 0; i < nr; ++i) {
				for (std::size_t j = 0; j < nz; ++j) {
					o[i * nz + j] = modes[j * nr + i];
				}
			}
			transform_.inverse(o);
		}
	}

	std::vector<double> apply_inverse(std::span<const double> phi, WorkerPool *pool = nullptr) const {
		std::vector<double> out(phi.size());
		apply_inverse(phi, out, pool);
		return out;
	}

	/// out = B x, assembled in physical space; used by tests and diagnostics.
	void apply(std::span<const double> x, std::span<double> out) const {
		if (x.size() != size() || out.size() != size()) {
			throw std::invalid_argument("SeparablePreconditioner::apply: size mismatch");
		}
		const std::size_t nr = grid_.nr;
		const std::size_t nz = grid_.nz;
		const std::size_t n = grid_.size();
		const double ihr2 = 1.0 / (grid_.hr * grid_.hr);
		const double ihz2 = 1.0 / (grid_.hz * grid_.hz);
		for (std::size_t b = 0; b < specs_.size(); ++b) {
			const auto &s = specs_[b];
			const double *y = x.data() + b * n;
			double *o = out.data() + b * n;
			for (std::size_t i = 0; i < nr; ++i) {
				const double r = grid_.r(i);
				const double d = s.mass * r + s.inv_r / r;
				for (std::size_t k = 0; k < nz; ++k) {
					const std::size_t c = i * nz + k;
					if (i + 1 == nr) {
						o[c] = d * y[c];
						continue;
					}
					double v = s.a1 * grid_.rbar(i) * (y[c] - (i + 2 < nr ? y[c + nz] : 0.0));
					if (i > 0) {
						v += s.a1 * grid_.rbar(i - 1) * (y[c] - y[c - nz]);
					}
					double vz = 0.0;
					if (k + 1 < nz) {
						vz += y[c] - y[c + 1];
					}
					if (k > 0) {
						vz += y[c] - y[c - 1];
					}
					o[c] = v * ihr2 + s.a2 * r * vz * ihz2 + d * y[c];
				}
			}
		}
	}

private:
	TridiagonalMatrix mode_matrix(const SeparableBlockSpec &s, std::size_t j) const {
		const std::size_t nr = grid_.nr;
		const double ihr2 = 1.0 / (grid_.hr * grid_.hr);
		TridiagonalMatrix t;
		t.lower.assign(nr, 0.0);
		t.diag.assign(nr, 0.0);
		t.upper.assign(nr, 0.0);
		for (std::size_t i = 0; i < nr; ++i) {
			const double r = grid_.r(i);
			const double d = s.mass * r + s.inv_r / r;
			if (i + 1 == nr) {
				t.diag[i] = d;
				continue;
			}
			const double up = s.a1 * grid_.rbar(i) * ihr2;
			const double dn = i > 0 ? s.a1 * grid_.rbar(i - 1) * ihr2 : 0.0;
			t.diag[i] = up + dn + d - mu_[j] * s.a2 * r;
			if (i > 0) {
				t.lower[i] = -dn;
			}
			if (i + 2 < nr) {
				t.upper[i] = -up;
			}
		}
		return t;
	}

	Grid2D grid_;
	std::vector<SeparableBlockSpec> specs_;
	std::vector<double> mu_;
	ZModeTransform transform_;
	std::vector<std::vector<FactoredTridiagonal>> factors_;
};

/// Acoustic B: tilde kappa in both directions, mass r h^2/4 tilde rho.
inline SeparablePreconditioner build_acoustic_preconditioner(const Grid2D &grid, const AcousticMedium &medium, double h,
                                                             int workers = 1) {
	const double kappa = tilde(medium.kappa, grid);
	const double rho = tilde(medium.rho, grid);
	return SeparablePreconditioner(grid, {SeparableBlockSpec{kappa, kappa, rho * h * h / 4.0, 0.0}}, workers);
}

/// Preconditioner options for the elastic problem.
struct ElasticPreconditionerOptions {
	/// Experimental: adds (lambda + 2 mu)~ / r to the diagonal of the U block as in the Q block.
	bool u_block_inverse_r = false;
};

/// Elastic K = diag(B1, B2) acting on [Q; U].
inline SeparablePreconditioner build_elastic_preconditioner(const Grid2D &grid, const ElasticMedium &medium, double h,
                                                            int workers = 1, ElasticPreconditionerOptions opts = {}) {
	const ScalarField l2m_field = [&](double r, double z) { return medium.lambda(r, z) + 2.0 * medium.mu(r, z); };
	const double l2m = tilde(l2m_field, grid);
	const double mu = tilde(medium.mu, grid);
	const double rho = tilde(medium.rho, grid);
	const double mass = rho * h * h / 4.0;
	return SeparablePreconditioner(grid,
	                               {SeparableBlockSpec{l2m, mu, mass, l2m},
	                                SeparableBlockSpec{mu, l2m, mass, opts.u_block_inverse_r ? l2m : 0.0}},
	                               workers);
}

/// Linear map x -> y on flat vectors.
using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct EnergyBounds {
	double gamma1 = 0.0;
	double gamma2 = 0.0;
	int iterations = 0;
};

class EnergyBoundsError : public std::runtime_error {
public:
	EnergyBoundsError(const std::string &what, EnergyBounds best) : std::runtime_error(what), best_(best) {}
	const EnergyBounds &best() const { return best_; }

private:
	EnergyBounds best_;
};

namespace detail {

/// Number of eigenvalues of the symmetric tridiagonal (a, b) below x (Sturm count).
inline std::size_t sturm_count(const std::vector<double> &a, const std::vector<double> &b, double x) {
	std::size_t count = 0;
	double q = 1.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		const double off = i > 0 ? b[i - 1] * b[i - 1] : 0.0;
		q = a[i] - x - (i > 0 ? off / q : 0.0);
		if (q == 0.0) {
			q = -std::numeric_limits<double>::epsilon() * (std::abs(x) + 1.0);
		}
		if (q < 0.0) {
			++count;
		}
	}
	return count;
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix by bisection.
inline std::pair<double, double> tridiagonal_extremes(const std::vector<double> &a, const std::vector<double> &b) {
	double lo = std::numeric_limits<double>::max();
	double hi = std::numeric_limits<double>::lowest();
	for (std::size_t i = 0; i < a.size(); ++i) {
		const double rad = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i + 1 < a.size() ? std::abs(b[i]) : 0.0);
		lo = std::min(lo, a[i] - rad);
		hi = std::max(hi, a[i] + rad);
	}
	auto kth = [&](std::size_t k) {
		double l = lo;
		double h = hi;
		for (int it = 0; it < 200 && h - l > 1e-15 * std::max(std::abs(l), std::abs(h)); ++it) {
			const double m = 0.5 * (l + h);
			if (sturm_count(a, b, m) > k) {
				h = m;
			} else {
				l = m;
			}
		}
		return 0.5 * (l + h);
	};
	return {kth(0), kth(a.size() - 1)};
}

} // namespace detail

/**
 * Extreme eigenvalues of the pencil (A, B), i.e. the energy equivalence
 * constants, by preconditioned Lanczos: the Lanczos recurrence runs in the
 * B-inner product so only A and B^{-1} are required.
 */
inline EnergyBounds estimate_energy_bounds(const LinearMap &apply_a, const LinearMap &apply_binv, std::size_t n,
                                           int max_iters = 1000, double tol = 1e-8, unsigned seed = 12345) {
	if (n == 0) {
		throw std::invalid_argument("estimate_energy_bounds: empty operator");
	}
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> uni(-1.0, 1.0);
	std::vector<double> r(n), z(n), q(n), p(n), p_prev(n, 0.0), w(n);
	for (auto &v : r) {
		v = uni(rng);
	}
	apply_binv(r, z);
	double beta = std::sqrt(dot(r, z));
	std::vector<double> alphas;
	std::vector<double> betas;
	EnergyBounds best;
	const int limit = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(max_iters), n));
	for (int it = 0; it < limit; ++it) {
		if (!(beta > 0.0)) {
			throw EnergyBoundsError("estimate_energy_bounds: B is not positive definite", best);
		}
		for (std::size_t i = 0; i < n; ++i) {
			q[i] = z[i] / beta;
			p[i] = r[i] / beta;
		}
		apply_a(q, w);
		const double alpha = dot(q, w);
		alphas.push_back(alpha);
		for (std::size_t i = 0; i < n; ++i) {
			r[i] = w[i] - alpha * p[i] - beta * p_prev[i];
		}
		const auto [lo, hi] = detail::tridiagonal_extremes(alphas, betas);
		const bool settled =
		    it > 2 && std::abs(lo - best.gamma1) <= tol * std::abs(lo) && std::abs(hi - best.gamma2) <= tol * std::abs(hi);
		best = {lo, hi, it + 1};
		apply_binv(r, z);
		const double rz = dot(r, z);
		const double next = rz > 0.0 ? std::sqrt(rz) : 0.0;
		// An invariant subspace makes the Ritz values exact.
		if (settled || next <= 1e-14 * std::abs(hi) || it + 1 == static_cast<int>(n)) {
			return best;
		}
		betas.push_back(next);
		std::swap(p_prev, p);
		beta = next;
	}
	throw EnergyBoundsError("estimate_energy_bounds: no convergence after " + std::to_string(limit) + " iterations",
	                        best);
}

} // namespace lwave

#endif // LWAVE_PRECONDITIONER_HPP

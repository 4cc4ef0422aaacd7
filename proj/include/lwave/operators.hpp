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
 * Discrete operators of the spectral-domain problems and their right-hand
 * sides.
 *
 * Both operators are assembled in r-weighted form: every row is the
 * continuous equation multiplied by r_i, so the acoustic operator is
 * symmetric in the plain Euclidean inner product. The positive orientation
 * M = -(Lambda_r + Lambda_z) + w is what the Krylov solvers see; the
 * acoustic operator also exposes the opposite sign convention A = -M.
 *
 * Boundary handling:
 *  - r = 0: the face flux vanishes because rbar_0 = 0; for the elastic pair
 *    Q is odd (ghost -Q_1) and U even (ghost U_1).
 *  - r = l1: node N_r lies on the boundary and is pinned to zero. Its row is
 *    the mass term alone and neighbours read it as zero.
 *  - z = 0 and z = l2: zero normal flux (acoustic) or zero traction
 *    sigma_rz = sigma_zz = 0 (elastic), imposed through vanishing face fluxes.
 */

#ifndef LWAVE_OPERATORS_HPP
#define LWAVE_OPERATORS_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "laguerre.hpp"
#include "parallel.hpp"

namespace lwave {

namespace detail {

inline void check_size(std::size_t got, std::size_t want, const char *who) {
	if (got != want) {
		throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(want) + " values, got " +
		                            std::to_string(got));
	}
}

inline void for_rows(WorkerPool *pool, std::size_t nr, const std::function<void(std::size_t, std::size_t)> &body) {
	if (pool && pool->size() > 1) {
		pool->for_ranges(nr, [&](IndexRange r) { body(r.begin, r.end); });
	} else {
		body(0, nr);
	}
}

} // namespace detail

/// Second-order acoustic operator on a cell-centered r-z mesh.
class AcousticOperator {
public:
	AcousticOperator(const Grid2D &grid, AcousticCoefficients coeff) : grid_(grid), c_(std::move(coeff)) {
		if (!c_.a1.same_shape(Field2D(grid)) || !c_.a2.same_shape(c_.a1) || !c_.w.same_shape(c_.a1)) {
			throw std::invalid_argument("AcousticOperator: coefficient shape mismatch");
		}
	}

	AcousticOperator(const Grid2D &grid, const AcousticMedium &medium, double h)
	    : AcousticOperator(grid, sample_acoustic(medium, grid, h)) {}

	const Grid2D &grid() const { return grid_; }
	const AcousticCoefficients &coefficients() const { return c_; }
	std::size_t size() const { return grid_.size(); }

	/// out = M y with M = -(Lambda_r + Lambda_z) + w, symmetric positive definite.
	void apply_positive(std::span<const double> y, std::span<double> out, WorkerPool *pool = nullptr) const {
		detail::check_size(y.size(), size(), "AcousticOperator");
		detail::check_size(out.size(), size(), "AcousticOperator");
		const std::size_t nr = grid_.nr;
		const std::size_t nz = grid_.nz;
		const double ihr2 = 1.0 / (grid_.hr * grid_.hr);
		const double ihz2 = 1.0 / (grid_.hz * grid_.hz);
		const double *a1 = c_.a1.data().data();
		const double *a2 = c_.a2.data().data();
		const double *w = c_.w.data().data();
		detail::for_rows(pool, nr, [&](std::size_t i0, std::size_t i1) {
			for (std::size_t i = i0; i < i1; ++i) {
				const std::size_t row = i * nz;
				if (i + 1 == nr) {
					for (std::size_t k = 0; k < nz; ++k) {
						out[row + k] = w[row + k] * y[row + k];
					}
					continue;
				}
				const bool has_up = i + 2 < nr; // node i+1 is not pinned
				for (std::size_t k = 0; k < nz; ++k) {
					const std::size_t c = row + k;
					const double yc = y[c];
					double v = a1[c] * (yc - (has_up ? y[c + nz] : 0.0));
					if (i > 0) {
						v += a1[c - nz] * (yc - y[c - nz]);
					}
					v *= ihr2;
					double vz = 0.0;
					if (k + 1 < nz) {
						vz += a2[c] * (yc - y[c + 1]);
					}
					if (k > 0) {
						vz += a2[c - 1] * (yc - y[c - 1]);
					}
					out[c] = v + vz * ihz2 + w[c] * yc;
				}
			}
		});
	}

	/// out = A y = (Lambda_r + Lambda_z) y - w y.
	void apply(std::span<const double> y, std::span<double> out, WorkerPool *pool = nullptr) const {
		apply_positive(y, out, pool);
		for (auto &v : out) {
			v = -v;
		}
	}

private:
	Grid2D grid_;
	AcousticCoefficients c_;
};

inline Field2D apply_acoustic(const AcousticOperator &op, const Field2D &y) {
	Field2D out(op.grid());
	op.apply(y.span(), out.span());
	return out;
}

/**
 * Finite-volume operator of the elastic spectral problem acting on the
 * stacked pair x = [Q; U] (radial, vertical displacement coefficients).
 *
 * Unknowns are collocated at nodes; normal fluxes live on faces with
 * arithmetic-mean material parameters; tangential derivatives on faces are
 * averages of the centered node derivatives of the two adjacent nodes. Node
 * derivatives along z use second-order one-sided differences at the first
 * and last node.
 */
class ElasticOperator {
public:
	ElasticOperator(const Grid2D &grid, const ElasticSamples &samples, double h) : grid_(grid), h_(h) {
		if (grid.nz < 3) {
			throw std::invalid_argument("ElasticOperator: need at least 3 nodes in z");
		}
		if (!(h > 0.0)) {
			throw std::invalid_argument("ElasticOperator: Laguerre scale must be positive");
		}
		const std::size_t nr = grid.nr;
		const std::size_t nz = grid.nz;
		lam_ = samples.lambda;
		l2m_ = Field2D(grid);
		mass_ = Field2D(grid);
		lam_rf_ = Field2D(grid);
		mu_rf_ = Field2D(grid);
		l2m_rf_ = Field2D(grid);
		lam_zf_ = Field2D(grid);
		mu_zf_ = Field2D(grid);
		l2m_zf_ = Field2D(grid);
		const auto &lam = samples.lambda;
		const auto &mu = samples.mu;
		for (std::size_t i = 0; i < nr; ++i) {
			for (std::size_t k = 0; k < nz; ++k) {
				l2m_(i, k) = lam(i, k) + 2.0 * mu(i, k);
				mass_(i, k) = grid.r(i) * samples.rho(i, k) * h * h / 4.0;
			}
		}
		for (std::size_t i = 0; i < nr; ++i) {
			for (std::size_t k = 0; k < nz; ++k) {
				if (i + 1 < nr) {
					lam_rf_(i, k) = 0.5 * (lam(i, k) + lam(i + 1, k));
					mu_rf_(i, k) = 0.5 * (mu(i, k) + mu(i + 1, k));
					l2m_rf_(i, k) = 0.5 * (l2m_(i, k) + l2m_(i + 1, k));
				}
				if (k + 1 < nz) {
					lam_zf_(i, k) = 0.5 * (lam(i, k) + lam(i, k + 1));
					mu_zf_(i, k) = 0.5 * (mu(i, k) + mu(i, k + 1));
					l2m_zf_(i, k) = 0.5 * (l2m_(i, k) + l2m_(i, k + 1));
				}
			}
		}
	}

	ElasticOperator(const Grid2D &grid, const ElasticMedium &medium, double h)
	    : ElasticOperator(grid, sample_elastic(medium, grid), h) {}

	const Grid2D &grid() const { return grid_; }
	double laguerre_scale() const { return h_; }
	/// Length of the stacked pair.
	std::size_t size() const { return 2 * grid_.size(); }
	const Field2D &mass() const { return mass_; }

	/// out = C x for x = [Q; U]; C is positive definite but not symmetric.
	void apply(std::span<const double> x, std::span<double> out, WorkerPool *pool = nullptr) const {
		detail::check_size(x.size(), size(), "ElasticOperator");
		detail::check_size(out.size(), size(), "ElasticOperator");
		const std::size_t nr = grid_.nr;
		const std::size_t nz = grid_.nz;
		const std::size_t n = grid_.size();
		const double hr = grid_.hr;
		const double hz = grid_.hz;
		const double *qv = x.data();
		const double *uv = x.data() + n;
		double *oq = out.data();
		double *ou = out.data() + n;

		auto Q = [&](std::size_t i, std::size_t k) { return i + 1 == nr ? 0.0 : qv[i * nz + k]; };
		auto U = [&](std::size_t i, std::size_t k) { return i + 1 == nr ? 0.0 : uv[i * nz + k]; };
		auto dz = [&](auto &&f, std::size_t i, std::size_t k) {
			if (k == 0) {
				return (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) / (2.0 * hz);
			}
			if (k + 1 == nz) {
				return (3.0 * f(i, k) - 4.0 * f(i, k - 1) + f(i, k - 2)) / (2.0 * hz);
			}
			return (f(i, k + 1) - f(i, k - 1)) / (2.0 * hz);
		};
		auto drQ = [&](std::size_t i, std::size_t k) {
			const double below = i == 0 ? -Q(0, k) : Q(i - 1, k);
			return (Q(i + 1, k) - below) / (2.0 * hr);
		};
		auto drU = [&](std::size_t i, std::size_t k) {
			const double below = i == 0 ? U(0, k) : U(i - 1, k);
			return (U(i + 1, k) - below) / (2.0 * hr);
		};
		auto dzQ = [&](std::size_t i, std::size_t k) { return dz(Q, i, k); };
		auto dzU = [&](std::size_t i, std::size_t k) { return dz(U, i, k); };

		// r-face f sits between nodes f and f+1 (f + 1 < nr).
		auto flux_rr = [&](std::size_t f, std::size_t k) {
			const std::size_t c = f * nz + k;
			const double qa = Q(f, k);
			const double qb = Q(f + 1, k);
			return grid_.rbar(f) * (l2m_rf_.data()[c] * (qb - qa) / hr + 0.5 * lam_rf_.data()[c] * (dzU(f, k) + dzU(f + 1, k))) +
			       lam_rf_.data()[c] * 0.5 * (qa + qb);
		};
		auto flux_rz_r = [&](std::size_t f, std::size_t k) {
			const std::size_t c = f * nz + k;
			return grid_.rbar(f) * mu_rf_.data()[c] * ((U(f + 1, k) - U(f, k)) / hr + 0.5 * (dzQ(f, k) + dzQ(f + 1, k)));
		};
		// z-face g sits between nodes g and g+1 (g + 1 < nz).
		auto flux_rz_z = [&](std::size_t i, std::size_t g) {
			const std::size_t c = i * nz + g;
			return grid_.r(i) * mu_zf_.data()[c] * ((Q(i, g + 1) - Q(i, g)) / hz + 0.5 * (drU(i, g) + drU(i, g + 1)));
		};
		auto flux_zz = [&](std::size_t i, std::size_t g) {
			const std::size_t c = i * nz + g;
			const double r = grid_.r(i);
			const double tangential = 0.5 * (drQ(i, g) + Q(i, g) / r + drQ(i, g + 1) + Q(i, g + 1) / r);
			return r * (l2m_zf_.data()[c] * (U(i, g + 1) - U(i, g)) / hz + lam_zf_.data()[c] * tangential);
		};

		detail::for_rows(pool, nr, [&](std::size_t i0, std::size_t i1) {
			for (std::size_t i = i0; i < i1; ++i) {
				const std::size_t row = i * nz;
				if (i + 1 == nr) {
					for (std::size_t k = 0; k < nz; ++k) {
						oq[row + k] = mass_.data()[row + k] * qv[row + k];
						ou[row + k] = mass_.data()[row + k] * uv[row + k];
					}
					continue;
				}
				const double r = grid_.r(i);
				for (std::size_t k = 0; k < nz; ++k) {
					const std::size_t c = row + k;
					const double fr_up = flux_rr(i, k);
					const double fr_dn = i > 0 ? flux_rr(i - 1, k) : 0.0;
					const double fz_up = k + 1 < nz ? flux_rz_z(i, k) : 0.0;
					const double fz_dn = k > 0 ? flux_rz_z(i, k - 1) : 0.0;
					const double hoop = lam_.data()[c] * (drQ(i, k) + dzU(i, k)) + l2m_.data()[c] * Q(i, k) / r;
					const double eq_q = (fr_up - fr_dn) / hr + (fz_up - fz_dn) / hz - hoop;

					const double gr_up = flux_rz_r(i, k);
					const double gr_dn = i > 0 ? flux_rz_r(i - 1, k) : 0.0;
					const double gz_up = k + 1 < nz ? flux_zz(i, k) : 0.0;
					const double gz_dn = k > 0 ? flux_zz(i, k - 1) : 0.0;
					const double eq_u = (gr_up - gr_dn) / hr + (gz_up - gz_dn) / hz;

					oq[c] = -eq_q + mass_.data()[c] * qv[c];
					ou[c] = -eq_u + mass_.data()[c] * uv[c];
				}
			}
		});
	}

private:
	Grid2D grid_;
	double h_;
	Field2D lam_, l2m_, mass_;
	Field2D lam_rf_, mu_rf_, l2m_rf_;
	Field2D lam_zf_, mu_zf_, l2m_zf_;
};

enum class SourceKind { monopole, center_of_pressure };

inline const char *to_string(SourceKind k) { return k == SourceKind::monopole ? "monopole" : "center_of_pressure"; }

/// Point source: position in meters and time pulse.
struct SourceSpec {
	SourceKind kind = SourceKind::monopole;
	double r0 = 0.0;
	double z0 = 0.0;
	SourcePulse pulse;
};

/// Source position snapped to the nearest node.
struct SourceCell {
	std::size_t i0 = 0;
	std::size_t j0 = 0;
};

inline SourceCell locate_source(const SourceSpec &s, const Grid2D &grid) {
	if (!(s.r0 >= 0.0) || !(s.z0 >= 0.0) || !grid.contains(s.r0, s.z0)) {
		throw std::invalid_argument("source at (r=" + std::to_string(s.r0) + ", z=" + std::to_string(s.z0) +
		                            ") lies outside the domain");
	}
	SourceCell c{grid.nearest_r(s.r0), grid.nearest_z(s.z0)};
	if (c.i0 + 1 >= grid.nr) {
		throw std::invalid_argument("source snaps onto the pinned boundary r = l1");
	}
	if (s.kind == SourceKind::center_of_pressure) {
		if (c.j0 == 0 || c.j0 + 1 >= grid.nz || c.i0 + 2 >= grid.nr) {
			throw std::invalid_argument("center-of-pressure source needs one node of clearance from the z boundaries");
		}
	}
	return c;
}

/// Acoustic load for one harmonic: -(1/2pi) delta(x - x0) / r f_m with delta ~ Kronecker / (h_r h_z).
inline Field2D discretize_source(const SourceSpec &s, const Grid2D &grid, double f_m) {
	if (s.kind != SourceKind::monopole) {
		throw std::invalid_argument("discretize_source: acoustic problems take a monopole source");
	}
	const auto c = locate_source(s, grid);
	Field2D load(grid);
	load(c.i0, c.j0) = -f_m / (2.0 * std::numbers::pi * grid.r(c.i0) * grid.hr * grid.hz);
	return load;
}

/// Radial and vertical components of an elastic load.
struct FieldPair {
	Field2D q;
	Field2D u;
};

/**
 * Elastic load for one harmonic, -F f_m per unit mass.
 *
 * A monopole loads U alone. A center of pressure takes centered differences
 * of the discrete 3D delta G = Kronecker / (2 pi r_i0 h_r h_z), even across
 * the axis: F_r = dG/dr, F_z = dG/dz.
 */
inline FieldPair discretize_source_elastic(const SourceSpec &s, const Grid2D &grid, double f_m) {
	const auto c = locate_source(s, grid);
	FieldPair load{Field2D(grid), Field2D(grid)};
	const double g = 1.0 / (2.0 * std::numbers::pi * grid.r(c.i0) * grid.hr * grid.hz);
	if (s.kind == SourceKind::monopole) {
		load.u(c.i0, c.j0) = -f_m * g;
		return load;
	}
	const double dr = g / (2.0 * grid.hr);
	const double dzv = g / (2.0 * grid.hz);
	// dG/dr at node i: (G_{i+1} - G_{i-1}) / (2 h_r), with G_{-1} = G_0.
	if (c.i0 == 0) {
		load.q(0, c.j0) += f_m * dr;
		load.q(1, c.j0) += f_m * dr;
	} else {
		load.q(c.i0 - 1, c.j0) += -f_m * dr;
		load.q(c.i0 + 1, c.j0) += f_m * dr;
	}
	load.u(c.i0, c.j0 - 1) += -f_m * dzv;
	load.u(c.i0, c.j0 + 1) += f_m * dzv;
	return load;
}

/**
 * Right-hand side of the acoustic spectral problem for harmonic m:
 * phi = f_m L + rho h^2 sqrt(m!/(m+alpha)!) S_m, with L the unit-amplitude
 * source load and S_m the raw convolution sum of the accumulator.
 */
inline Field2D build_acoustic_rhs(std::size_t m, double f_m, const Field2D &unit_load,
                                  const ConvolutionAccumulator &acc, const Field2D &rho, double h) {
	const auto s = acc.raw_sum(m);
	if (s.size() != rho.size() || unit_load.size() != rho.size()) {
		throw std::invalid_argument("build_acoustic_rhs: field size mismatch");
	}
	const double tail = h * h * accumulator_normalization(m, acc.alpha());
	Field2D phi(rho.nr(), rho.nz());
	auto out = phi.span();
	const auto l = unit_load.span();
	const auto p = rho.span();
	for (std::size_t j = 0; j < out.size(); ++j) {
		out[j] = f_m * l[j] + tail * p[j] * s[j];
	}
	return phi;
}

/// b = -r_i phi, with the pinned boundary row set to zero; M y = b then solves the problem.
inline void system_rhs(const Grid2D &grid, std::span<const double> phi, std::span<double> b) {
	for (std::size_t i = 0; i < grid.nr; ++i) {
		const double r = grid.r(i);
		for (std::size_t k = 0; k < grid.nz; ++k) {
			const std::size_t c = grid.index(i, k);
			b[c] = i + 1 == grid.nr ? 0.0 : -r * phi[c];
		}
	}
}

} // namespace lwave

#endif // LWAVE_OPERATORS_HPP

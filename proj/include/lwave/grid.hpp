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
 * Cell-centered r-z mesh, grid fields and material models.
 *
 * Node (i, k), 1-based in the formulas and 0-based in code, sits at
 * r_i = (i - 1/2) h_r, z_k = (k - 1/2) h_z with h_r = l1 / (N_r - 1/2),
 * h_z = l2 / (N_z - 1/2). The last r node lies on r = l1. Faces sit half a
 * step above each node: rbar_i = r_i + h_r / 2, zbar_k = z_k + h_z / 2.
 */

#ifndef LWAVE_GRID_HPP
#define LWAVE_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lwave {

struct Grid2D {
	std::size_t nr = 0;
	std::size_t nz = 0;
	double l1 = 0.0;
	double l2 = 0.0;
	double hr = 0.0;
	double hz = 0.0;

	std::size_t size() const { return nr * nz; }
	/// Flat index; z runs fastest.
	std::size_t index(std::size_t i, std::size_t k) const { return i * nz + k; }

	double r(std::size_t i) const { return (static_cast<double>(i) + 0.5) * hr; }
	double z(std::size_t k) const { return (static_cast<double>(k) + 0.5) * hz; }
	/// r-face between node i and i+1.
	double rbar(std::size_t i) const { return static_cast<double>(i + 1) * hr; }
	double zbar(std::size_t k) const { return static_cast<double>(k + 1) * hz; }

	/// Nearest node to a coordinate, clamped to the mesh.
	std::size_t nearest_r(double rr) const { return nearest(rr, hr, nr); }
	std::size_t nearest_z(double zz) const { return nearest(zz, hz, nz); }

	bool contains(double rr, double zz) const { return rr >= 0.0 && rr <= l1 && zz >= 0.0 && zz <= l2; }

private:
	static std::size_t nearest(double x, double h, std::size_t n) {
		const double pos = std::floor(x / h);
		if (pos <= 0.0) {
			return 0;
		}
		return std::min(static_cast<std::size_t>(pos), n - 1);
	}
};

/// Mesh with h_r = l1/(N_r - 0.5), h_z = l2/(N_z - 0.5).
inline Grid2D build_grid(double l1, double l2, std::size_t nr, std::size_t nz) {
	if (!(l1 > 0.0) || !(l2 > 0.0) || !std::isfinite(l1) || !std::isfinite(l2)) {
		throw std::invalid_argument("build_grid: extents must be positive");
	}
	if (nr < 2 || nz < 2) {
		throw std::invalid_argument("build_grid: need at least 2 nodes per direction");
	}
	Grid2D g;
	g.nr = nr;
	g.nz = nz;
	g.l1 = l1;
	g.l2 = l2;
	g.hr = l1 / (static_cast<double>(nr) - 0.5);
	g.hz = l2 / (static_cast<double>(nz) - 0.5);
	return g;
}

/// Mesh with exact step h whose extents cover at least (l1, l2).
inline Grid2D build_grid_with_step(double l1, double l2, double h) {
	if (!(h > 0.0)) {
		throw std::invalid_argument("build_grid_with_step: step must be positive");
	}
	const auto nr = static_cast<std::size_t>(std::ceil(l1 / h + 0.5 - 1e-9));
	const auto nz = static_cast<std::size_t>(std::ceil(l2 / h + 0.5 - 1e-9));
	return build_grid((static_cast<double>(nr) - 0.5) * h, (static_cast<double>(nz) - 0.5) * h, nr, nz);
}

/// Scalar field on a grid, z fastest.
class Field2D {
public:
	Field2D() = default;
	Field2D(std::size_t nr, std::size_t nz, double value = 0.0) : nr_(nr), nz_(nz), data_(nr * nz, value) {}
	explicit Field2D(const Grid2D &g, double value = 0.0) : Field2D(g.nr, g.nz, value) {}

	std::size_t nr() const { return nr_; }
	std::size_t nz() const { return nz_; }
	std::size_t size() const { return data_.size(); }

	double &operator()(std::size_t i, std::size_t k) { return data_[i * nz_ + k]; }
	double operator()(std::size_t i, std::size_t k) const { return data_[i * nz_ + k]; }

	std::span<double> span() { return data_; }
	std::span<const double> span() const { return data_; }
	std::vector<double> &data() { return data_; }
	const std::vector<double> &data() const { return data_; }

	bool same_shape(const Field2D &o) const { return nr_ == o.nr_ && nz_ == o.nz_; }

private:
	std::size_t nr_ = 0;
	std::size_t nz_ = 0;
	std::vector<double> data_;
};

/// Material parameter as a function of (r, z) in SI units.
using ScalarField = std::function<double(double r, double z)>;

inline ScalarField constant_field(double value) {
	return [value](double, double) { return value; };
}

struct AcousticMedium {
	ScalarField kappa; // Pa
	ScalarField rho;   // kg/m^3
};

struct ElasticMedium {
	ScalarField lambda; // Pa
	ScalarField mu;     // Pa
	ScalarField rho;    // kg/m^3
};

/// Horizontal layer starting at depth z_top; it extends down to the next layer.
struct Layer {
	double z_top = 0.0;
	double vp = 0.0;
	double vs = 0.0;
	double rho = 0.0;
};

namespace detail {

inline const Layer &layer_at(const std::vector<Layer> &layers, double z) {
	const Layer *hit = &layers.front();
	for (const auto &l : layers) {
		if (l.z_top <= z) {
			hit = &l;
		}
	}
	return *hit;
}

inline std::shared_ptr<const std::vector<Layer>> checked_layers(std::vector<Layer> layers, bool elastic) {
	if (layers.empty()) {
		throw std::invalid_argument("layered medium: at least one layer required");
	}
	std::stable_sort(layers.begin(), layers.end(), [](const Layer &a, const Layer &b) { return a.z_top < b.z_top; });
	for (const auto &l : layers) {
		if (!(l.vp > 0.0) || !(l.rho > 0.0) || (elastic && !(l.vs > 0.0))) {
			throw std::invalid_argument("layered medium: velocities and density must be positive");
		}
		if (elastic && !(l.vp * l.vp > 2.0 * l.vs * l.vs)) {
			throw std::invalid_argument("layered medium: need vp^2 > 2 vs^2 so that lambda > 0");
		}
	}
	return std::make_shared<const std::vector<Layer>>(std::move(layers));
}

} // namespace detail

/// kappa = rho c^2.
inline AcousticMedium homogeneous_acoustic(double c, double rho) {
	if (!(c > 0.0) || !(rho > 0.0)) {
		throw std::invalid_argument("homogeneous_acoustic: c and rho must be positive");
	}
	return {constant_field(rho * c * c), constant_field(rho)};
}

inline AcousticMedium layered_acoustic(std::vector<Layer> layers) {
	auto ls = detail::checked_layers(std::move(layers), false);
	return {[ls](double, double z) {
		        const auto &l = detail::layer_at(*ls, z);
		        return l.rho * l.vp * l.vp;
	        },
	        [ls](double, double z) { return detail::layer_at(*ls, z).rho; }};
}

inline ElasticMedium homogeneous_elastic(double vp, double vs, double rho) {
	return {constant_field(rho * (vp * vp - 2.0 * vs * vs)), constant_field(rho * vs * vs), constant_field(rho)};
}

inline ElasticMedium layered_elastic(std::vector<Layer> layers) {
	auto ls = detail::checked_layers(std::move(layers), true);
	return {[ls](double, double z) {
		        const auto &l = detail::layer_at(*ls, z);
		        return l.rho * (l.vp * l.vp - 2.0 * l.vs * l.vs);
	        },
	        [ls](double, double z) {
		        const auto &l = detail::layer_at(*ls, z);
		        return l.rho * l.vs * l.vs;
	        },
	        [ls](double, double z) { return detail::layer_at(*ls, z).rho; }};
}

/// Coefficient arrays of the acoustic scheme.
struct AcousticCoefficients {
	Field2D a1; // rbar_i kappa(rbar_i, z_k): r-face above node i
	Field2D a2; // r_i kappa(r_i, zbar_k): z-face above node k
	Field2D w;  // rho(r_i, z_k) h^2/4 r_i
	Field2D rho; // rho(r_i, z_k)
};

namespace detail {

inline double checked_positive(double v, const char *what, double r, double z) {
	if (!(v > 0.0) || !std::isfinite(v)) {
		throw std::domain_error(std::string(what) + " must be positive; got " + std::to_string(v) + " at (r=" +
		                        std::to_string(r) + ", z=" + std::to_string(z) + ")");
	}
	return v;
}

} // namespace detail

inline AcousticCoefficients sample_acoustic(const AcousticMedium &medium, const Grid2D &grid, double h) {
	if (!(h > 0.0)) {
		throw std::invalid_argument("sample_acoustic: Laguerre scale must be positive");
	}
	AcousticCoefficients c{Field2D(grid), Field2D(grid), Field2D(grid), Field2D(grid)};
	const double mass = h * h / 4.0;
	for (std::size_t i = 0; i < grid.nr; ++i) {
		const double r = grid.r(i);
		const double rb = grid.rbar(i);
		for (std::size_t k = 0; k < grid.nz; ++k) {
			const double z = grid.z(k);
			const double zb = grid.zbar(k);
			c.a1(i, k) = rb * detail::checked_positive(medium.kappa(rb, z), "kappa", rb, z);
			c.a2(i, k) = r * detail::checked_positive(medium.kappa(r, zb), "kappa", r, zb);
			const double rho = detail::checked_positive(medium.rho(r, z), "rho", r, z);
			c.rho(i, k) = rho;
			c.w(i, k) = rho * mass * r;
		}
	}
	return c;
}

/// Cell-center samples of the elastic parameters.
struct ElasticSamples {
	Field2D lambda;
	Field2D mu;
	Field2D rho;
};

inline ElasticSamples sample_elastic(const ElasticMedium &medium, const Grid2D &grid) {
	ElasticSamples s{Field2D(grid), Field2D(grid), Field2D(grid)};
	for (std::size_t i = 0; i < grid.nr; ++i) {
		const double r = grid.r(i);
		for (std::size_t k = 0; k < grid.nz; ++k) {
			const double z = grid.z(k);
			s.lambda(i, k) = detail::checked_positive(medium.lambda(r, z), "lambda", r, z);
			s.mu(i, k) = detail::checked_positive(medium.mu(r, z), "mu", r, z);
			s.rho(i, k) = detail::checked_positive(medium.rho(r, z), "rho", r, z);
		}
	}
	return s;
}

/// Midpoint of the range: (min f + max f) / 2.
inline double tilde(std::span<const double> values) {
	if (values.empty()) {
		throw std::invalid_argument("tilde: empty field");
	}
	const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
	return 0.5 * (*lo + *hi);
}

/// tilde of a material function sampled at every grid node.
inline double tilde(const ScalarField &f, const Grid2D &grid) {
	std::vector<double> v;
	v.reserve(grid.size());
	for (std::size_t i = 0; i < grid.nr; ++i) {
		for (std::size_t k = 0; k < grid.nz; ++k) {
			v.push_back(f(grid.r(i), grid.z(k)));
		}
	}
	return tilde(v);
}

} // namespace lwave

#endif // LWAVE_GRID_HPP

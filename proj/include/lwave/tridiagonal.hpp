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
 * Tridiagonal solvers: a sequential Thomas reference and a partitioned
 * factor-once/solve-many engine.
 *
 * The partitioned engine splits the rows into W contiguous partitions. The
 * last row of every partition but the final one is a separator; the rest
 * are interior rows. Factoring eliminates each interior block once, keeps
 * its spike vectors (responses to the two neighbouring separators) and the
 * inverse of the (W-1)x(W-1) separator Schur complement. A solve then needs
 *
 *   1. an independent local sweep per partition,
 *   2. one sum over partitions of per-partition separator contributions,
 *   3. an independent local update per partition.
 *
 * Step 2 is the only cross-partition exchange. It is an associative
 * reduction and is always combined left to right, so a fixed partition count
 * gives bit-identical results.
 */

#ifndef LWAVE_TRIDIAGONAL_HPP
#define LWAVE_TRIDIAGONAL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"

namespace lwave {

class SingularMatrixError : public std::runtime_error {
public:
	SingularMatrixError(std::size_t row, double pivot)
	    : std::runtime_error("tridiagonal: zero pivot " + std::to_string(pivot) + " at row " + std::to_string(row)),
	      row_(row) {}
	std::size_t row() const { return row_; }

private:
	std::size_t row_;
};

inline constexpr double kMinPivot = 1e-300;

/// Row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]; lower[0] and upper[n-1] are ignored.
struct TridiagonalMatrix {
	std::vector<double> lower;
	std::vector<double> diag;
	std::vector<double> upper;

	TridiagonalMatrix() = default;
	explicit TridiagonalMatrix(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

	std::size_t size() const { return diag.size(); }

	void validate() const {
		if (diag.empty()) {
			throw std::invalid_argument("tridiagonal: empty matrix");
		}
		if (lower.size() != diag.size() || upper.size() != diag.size()) {
			throw std::invalid_argument("tridiagonal: band lengths differ");
		}
	}

	/// y = T x.
	void multiply(std::span<const double> x, std::span<double> y) const {
		const std::size_t n = size();
		for (std::size_t i = 0; i < n; ++i) {
			double v = diag[i] * x[i];
			if (i > 0) {
				v += lower[i] * x[i - 1];
			}
			if (i + 1 < n) {
				v += upper[i] * x[i + 1];
			}
			y[i] = v;
		}
	}
};

/// Sequential Thomas elimination without pivoting.
inline std::vector<double> thomas_solve(const TridiagonalMatrix &t, std::span<const double> rhs) {
	t.validate();
	const std::size_t n = t.size();
	if (rhs.size() != n) {
		throw std::invalid_argument("thomas_solve: rhs length mismatch");
	}
	std::vector<double> c(n);
	std::vector<double> x(rhs.begin(), rhs.end());
	double denom = t.diag[0];
	if (std::abs(denom) < kMinPivot) {
		throw SingularMatrixError(0, denom);
	}
	c[0] = n > 1 ? t.upper[0] / denom : 0.0;
	x[0] /= denom;
	for (std::size_t i = 1; i < n; ++i) {
		denom = t.diag[i] - t.lower[i] * c[i - 1];
		if (std::abs(denom) < kMinPivot) {
			throw SingularMatrixError(i, denom);
		}
		c[i] = i + 1 < n ? t.upper[i] / denom : 0.0;
		x[i] = (x[i] - t.lower[i] * x[i - 1]) / denom;
	}
	for (std::size_t i = n - 1; i-- > 0;) {
		x[i] -= c[i] * x[i + 1];
	}
	return x;
}

/// B right-hand sides of length N stored column after column.
class RhsBatch {
public:
	RhsBatch() = default;
	RhsBatch(std::size_t n, std::size_t columns, double value = 0.0)
	    : n_(n), columns_(columns), data_(n * columns, value) {}

	std::size_t rows() const { return n_; }
	std::size_t columns() const { return columns_; }
	std::span<double> column(std::size_t j) { return {data_.data() + j * n_, n_}; }
	std::span<const double> column(std::size_t j) const { return {data_.data() + j * n_, n_}; }
	std::vector<double> &data() { return data_; }
	const std::vector<double> &data() const { return data_; }

private:
	std::size_t n_ = 0;
	std::size_t columns_ = 0;
	std::vector<double> data_;
};

/**
 * Immutable factored tridiagonal matrix over a fixed partition layout.
 *
 * Factoring costs O(N) plus O(W^2); each solve costs O(N) plus O(W^2).
 */
class FactoredTridiagonal {
public:
	FactoredTridiagonal() = default;

	static FactoredTridiagonal factor(const TridiagonalMatrix &t, int workers) {
		t.validate();
		if (workers < 1) {
			throw std::invalid_argument("factor: worker count must be >= 1");
		}
		FactoredTridiagonal f;
		f.n_ = t.size();
		// Every partition needs at least one interior row besides its separator.
		const std::size_t parts = std::max<std::size_t>(1, std::min<std::size_t>(workers, f.n_ / 2));
		f.parts_.resize(parts);
		for (std::size_t p = 0; p < parts; ++p) {
			const auto r = partition_range(f.n_, parts, p);
			auto &part = f.parts_[p];
			part.begin = r.begin;
			part.end = p + 1 < parts ? r.end - 1 : r.end;
		}
		f.lower_ = t.lower;
		f.upper_ = t.upper;
		f.diag_ = t.diag;
		f.cprime_.assign(f.n_, 0.0);
		f.inv_denom_.assign(f.n_, 0.0);
		for (std::size_t p = 0; p < parts; ++p) {
			f.factor_block(p);
		}
		f.build_schur();
		return f;
	}

	std::size_t size() const { return n_; }
	int partitions() const { return static_cast<int>(parts_.size()); }

	/// Solves T x = b in place for one column.
	void solve(std::span<double> x) const {
		if (x.size() != n_) {
			throw std::invalid_argument("FactoredTridiagonal::solve: length mismatch");
		}
		const std::size_t ns = parts_.size() - 1;
		if (ns == 0) {
			sweep(parts_[0], x);
			return;
		}
		std::vector<double> sep(ns, 0.0);
		std::vector<double> contrib(ns);
		for (std::size_t p = 0; p < parts_.size(); ++p) {
			sweep(parts_[p], x);
			contribution(p, x, contrib);
			for (std::size_t q = 0; q < ns; ++q) {
				sep[q] += contrib[q];
			}
		}
		for (std::size_t p = 0; p < parts_.size(); ++p) {
			update(p, x, sep);
		}
	}

	/**
	 * Solves every column of the batch in place. Partitions run on the pool's
	 * workers; the separator reduction is summed over partitions in order.
	 */
	void solve_batched(RhsBatch &batch, WorkerPool *pool = nullptr) const {
		if (batch.rows() != n_) {
			throw std::invalid_argument("solve_batched: column length " + std::to_string(batch.rows()) +
			                            " does not match matrix size " + std::to_string(n_));
		}
		const std::size_t cols = batch.columns();
		const std::size_t np = parts_.size();
		const std::size_t ns = np - 1;
		if (cols == 0) {
			return;
		}
		auto for_partitions = [&](const std::function<void(std::size_t)> &body) {
			if (pool && pool->size() > 1) {
				const auto w = static_cast<std::size_t>(pool->size());
				pool->run([&](int worker) {
					for (std::size_t p = static_cast<std::size_t>(worker); p < np; p += w) {
						body(p);
					}
				});
			} else {
				for (std::size_t p = 0; p < np; ++p) {
					body(p);
				}
			}
		};
		// contributions[p][c * ns + q]
		std::vector<std::vector<double>> contributions(np, std::vector<double>(cols * ns));
		for_partitions([&](std::size_t p) {
			for (std::size_t c = 0; c < cols; ++c) {
				auto x = batch.column(c);
				sweep(parts_[p], x);
				if (ns > 0) {
					contribution(p, x, std::span<double>(contributions[p].data() + c * ns, ns));
				}
			}
		});
		if (ns == 0) {
			return;
		}
		std::vector<double> sep(cols * ns, 0.0);
		for (std::size_t p = 0; p < np; ++p) {
			for (std::size_t j = 0; j < sep.size(); ++j) {
				sep[j] += contributions[p][j];
			}
		}
		for_partitions([&](std::size_t p) {
			for (std::size_t c = 0; c < cols; ++c) {
				update(p, batch.column(c), std::span<const double>(sep.data() + c * ns, ns));
			}
		});
	}

private:
	struct Partition {
		std::size_t begin = 0; // first interior row
		std::size_t end = 0;   // one past the last interior row; the separator (if any) is `end`
		std::vector<double> left_spike;  // response to the left separator
		std::vector<double> right_spike; // response to the right separator
	};

	void factor_block(std::size_t p) {
		auto &part = parts_[p];
		const std::size_t b = part.begin;
		const std::size_t e = part.end;
		double denom = diag_[b];
		if (std::abs(denom) < kMinPivot) {
			throw SingularMatrixError(b, denom);
		}
		inv_denom_[b] = 1.0 / denom;
		cprime_[b] = b + 1 < e ? upper_[b] * inv_denom_[b] : 0.0;
		for (std::size_t i = b + 1; i < e; ++i) {
			denom = diag_[i] - lower_[i] * cprime_[i - 1];
			if (std::abs(denom) < kMinPivot) {
				throw SingularMatrixError(i, denom);
			}
			inv_denom_[i] = 1.0 / denom;
			cprime_[i] = i + 1 < e ? upper_[i] * inv_denom_[i] : 0.0;
		}
		const std::size_t len = e - b;
		if (p > 0) {
			part.left_spike.assign(len, 0.0);
			part.left_spike[0] = lower_[b];
			local_solve(part, part.left_spike.data(), b);
		}
		if (p + 1 < parts_.size()) {
			part.right_spike.assign(len, 0.0);
			part.right_spike[len - 1] = upper_[e - 1];
			local_solve(part, part.right_spike.data(), b);
		}
	}

	/// Solves the interior block for a vector v indexed from `offset`.
	void local_solve(const Partition &part, double *v, std::size_t offset) const {
		const std::size_t b = part.begin;
		const std::size_t e = part.end;
		v[b - offset] *= inv_denom_[b];
		for (std::size_t i = b + 1; i < e; ++i) {
			v[i - offset] = (v[i - offset] - lower_[i] * v[i - 1 - offset]) * inv_denom_[i];
		}
		for (std::size_t i = e - 1; i-- > b;) {
			v[i - offset] -= cprime_[i] * v[i + 1 - offset];
		}
	}

	void sweep(const Partition &part, std::span<double> x) const { local_solve(part, x.data(), 0); }

	void build_schur() {
		const std::size_t ns = parts_.size() - 1;
		schur_inv_.assign(ns * ns, 0.0);
		if (ns == 0) {
			return;
		}
		TridiagonalMatrix s(ns);
		for (std::size_t q = 0; q < ns; ++q) {
			const std::size_t row = parts_[q].end;
			const auto &left = parts_[q];
			const auto &right = parts_[q + 1];
			double d = diag_[row] - lower_[row] * left.right_spike.back() - upper_[row] * right.left_spike.front();
			s.diag[q] = d;
			if (q > 0) {
				s.lower[q] = -lower_[row] * left.left_spike.back();
			}
			if (q + 1 < ns) {
				s.upper[q] = -upper_[row] * right.right_spike.front();
			}
		}
		std::vector<double> unit(ns, 0.0);
		for (std::size_t c = 0; c < ns; ++c) {
			std::fill(unit.begin(), unit.end(), 0.0);
			unit[c] = 1.0;
			const auto col = thomas_solve(s, unit);
			for (std::size_t q = 0; q < ns; ++q) {
				schur_inv_[q * ns + c] = col[q];
			}
		}
	}

	/// Partition p's share of the separator solution, given its swept interior.
	void contribution(std::size_t p, std::span<const double> x, std::span<double> out) const {
		const std::size_t ns = parts_.size() - 1;
		std::fill(out.begin(), out.end(), 0.0);
		const auto &part = parts_[p];
		if (p < ns) {
			const std::size_t row = part.end;
			const double g = x[row] - lower_[row] * x[part.end - 1];
			for (std::size_t q = 0; q < ns; ++q) {
				out[q] += schur_inv_[q * ns + p] * g;
			}
		}
		if (p > 0) {
			const std::size_t row = part.begin - 1;
			const double g = -upper_[row] * x[part.begin];
			for (std::size_t q = 0; q < ns; ++q) {
				out[q] += schur_inv_[q * ns + (p - 1)] * g;
			}
		}
	}

	void update(std::size_t p, std::span<double> x, std::span<const double> sep) const {
		const auto &part = parts_[p];
		const std::size_t ns = parts_.size() - 1;
		const double xl = p > 0 ? sep[p - 1] : 0.0;
		const double xr = p < ns ? sep[p] : 0.0;
		for (std::size_t i = part.begin; i < part.end; ++i) {
			double v = x[i];
			if (p > 0) {
				v -= xl * part.left_spike[i - part.begin];
			}
			if (p < ns) {
				v -= xr * part.right_spike[i - part.begin];
			}
			x[i] = v;
		}
		if (p < ns) {
			x[part.end] = xr;
		}
	}

	std::size_t n_ = 0;
	std::vector<Partition> parts_;
	std::vector<double> lower_;
	std::vector<double> diag_;
	std::vector<double> upper_;
	std::vector<double> cprime_;
	std::vector<double> inv_denom_;
	std::vector<double> schur_inv_; // (W-1)x(W-1), row-major
};

inline FactoredTridiagonal factor(const TridiagonalMatrix &t, int workers) {
	return FactoredTridiagonal::factor(t, workers);
}

inline void solve_batched(const FactoredTridiagonal &f, RhsBatch &batch, WorkerPool *pool = nullptr) {
	f.solve_batched(batch, pool);
}

/// True when p is a power of two >= 1.
inline bool is_power_of_two(long p) { return p >= 1 && std::has_single_bit(static_cast<unsigned long>(p)); }

/// Communication time of an all-reduce for one norm over p processes.
inline double comm_time_allreduce(long p, double latency, double beta, double gamma) {
	if (!is_power_of_two(p)) {
		throw std::invalid_argument("comm_time_allreduce: p must be a power of two, got " + std::to_string(p));
	}
	const double lg = std::log2(static_cast<double>(p));
	const double pd = static_cast<double>(p);
	return 2.0 * lg * latency + (pd - 1.0) / pd * (gamma + 2.0 * beta);
}

/// Communication time of the partitioned tridiagonal solve with l right-hand sides per exchange.
inline double comm_time_dichotomy(long p, double l, double latency, double beta, double gamma) {
	if (!is_power_of_two(p)) {
		throw std::invalid_argument("comm_time_dichotomy: p must be a power of two, got " + std::to_string(p));
	}
	if (l < 0.0) {
		throw std::invalid_argument("comm_time_dichotomy: l must be >= 0");
	}
	const double lg = std::log2(static_cast<double>(p));
	const double pd = static_cast<double>(p);
	return latency * (lg + 1.0) * lg + l * (lg - (pd - 1.0) / pd) * (gamma + 2.0 * beta);
}

} // namespace lwave

#endif // LWAVE_TRIDIAGONAL_HPP

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
 * Harmonic loop: one elliptic solve per Laguerre harmonic, receivers kept as
 * spectral series, snapshots accumulated as partial sums.
 */

#ifndef LWAVE_DRIVER_HPP
#define LWAVE_DRIVER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "krylov.hpp"
#include "laguerre.hpp"
#include "operators.hpp"
#include "parallel.hpp"
#include "preconditioner.hpp"

namespace lwave {

enum class Physics { acoustic, elastic };

inline const char *to_string(Physics p) { return p == Physics::acoustic ? "acoustic" : "elastic"; }

struct Receiver {
	std::string name;
	double r = 0.0;
	double z = 0.0;
};

/// Uniform output times t_start, t_start + dt, ... <= t_end.
struct TimeGrid {
	double t_start = 0.0;
	double t_end = 1.0;
	double dt = 1e-3;

	std::vector<double> times() const {
		const auto count = static_cast<std::size_t>(std::floor((t_end - t_start) / dt + 1e-9)) + 1;
		std::vector<double> t(count);
		for (std::size_t j = 0; j < count; ++j) {
			t[j] = t_start + static_cast<double>(j) * dt;
		}
		return t;
	}
};

struct SimulationConfig {
	Physics physics = Physics::acoustic;
	double l1 = 0.0;
	double l2 = 0.0;
	/// Mesh step; ignored when nr and nz are both set.
	double step = 0.0;
	std::size_t nr = 0;
	std::size_t nz = 0;
	AcousticMedium acoustic;
	ElasticMedium elastic;
	std::string medium_label;
	LaguerreBasis basis;
	SourceSpec source;
	std::vector<Receiver> receivers;
	std::vector<double> snapshot_times;
	TimeGrid output;
	KrylovConfig solver;
	ElasticPreconditionerOptions preconditioner;
	int workers = 1;

	Grid2D make_grid() const {
		if (nr > 0 && nz > 0) {
			return build_grid(l1, l2, nr, nz);
		}
		if (!(step > 0.0)) {
			throw std::invalid_argument("mesh step must be positive");
		}
		return build_grid_with_step(l1, l2, step);
	}

	void validate(const Grid2D &grid) const {
		basis.validate();
		solver.validate();
		if (!(output.dt > 0.0) || !(output.t_start >= 0.0) || !(output.t_end >= output.t_start)) {
			throw std::invalid_argument("output times need 0 <= t_start <= t_end and dt > 0");
		}
		if (!(source.pulse.f0 > 0.0) || !(source.pulse.gamma > 0.0) || !(source.pulse.t0 >= 0.0)) {
			throw std::invalid_argument("source pulse needs f0 > 0, gamma > 0, t0 >= 0");
		}
		locate_source(source, grid);
		if (physics == Physics::acoustic && source.kind != SourceKind::monopole) {
			throw std::invalid_argument("acoustic runs take a monopole source");
		}
		for (const auto &rc : receivers) {
			if (!(rc.r >= 0.0) || !(rc.z >= 0.0) || !grid.contains(rc.r, rc.z)) {
				throw std::invalid_argument("receiver '" + rc.name + "' at (r=" + std::to_string(rc.r) +
				                            ", z=" + std::to_string(rc.z) + ") lies outside the domain");
			}
		}
		for (double t : snapshot_times) {
			if (!(t >= 0.0)) {
				throw std::invalid_argument("snapshot times must be >= 0");
			}
		}
		if (workers < 1) {
			throw std::invalid_argument("worker count must be >= 1");
		}
	}
};

struct Trace {
	Receiver receiver;
	std::size_t i = 0;
	std::size_t k = 0;
	/// Node the receiver snapped to.
	double r_node = 0.0;
	double z_node = 0.0;
	/// components[c][t]
	std::vector<std::vector<double>> components;
};

struct Seismograms {
	std::vector<std::string> component_names;
	std::vector<double> time;
	std::vector<Trace> traces;
};

struct Snapshot {
	double time = 0.0;
	std::vector<std::string> names;
	std::vector<Field2D> fields;
};

struct HarmonicStats {
	std::size_t m = 0;
	int iterations = 0;
	double residual = 0.0;
	double seconds = 0.0;
	/// GMRES only: preconditioned residuals at restart boundaries never increased.
	bool restart_monotone = true;
	std::vector<double> restart_residuals;
};

struct RunReport {
	Physics physics = Physics::acoustic;
	Grid2D grid;
	std::size_t nr = 0;
	std::size_t nz = 0;
	double hr = 0.0;
	double hz = 0.0;
	double max_velocity = 0.0;
	long preconditioner_builds = 0;
	double seconds = 0.0;
	double source_seconds = 0.0;
	std::vector<HarmonicStats> harmonics;
	std::vector<std::string> warnings;
};

struct SimulationResult {
	Seismograms seismograms;
	std::vector<Snapshot> snapshots;
	RunReport report;
};

/// Raised when a harmonic fails to converge; carries the report up to that point.
class SolverFailure : public std::runtime_error {
public:
	SolverFailure(const std::string &what, std::size_t harmonic, RunReport report)
	    : std::runtime_error(what), harmonic_(harmonic), report_(std::move(report)) {}
	std::size_t harmonic() const { return harmonic_; }
	const RunReport &report() const { return report_; }

private:
	std::size_t harmonic_;
	RunReport report_;
};

/// (1/2pi) f(t - r/c) / (kappa r); zero before the arrival.
inline double exact_acoustic_solution(double r, double t, double c, const SourcePulse &pulse, double kappa = 1.0) {
	if (!(r > 0.0)) {
		throw std::invalid_argument("exact_acoustic_solution: r must be positive");
	}
	const double tau = t - r / c;
	if (tau < 0.0) {
		return 0.0;
	}
	return pulse(tau) / (2.0 * std::numbers::pi * kappa * r);
}

/// Relative L2-in-time misfit with trapezoid quadrature.
inline double error_metric(std::span<const double> exact, std::span<const double> approx, double dt) {
	if (exact.size() != approx.size()) {
		throw std::invalid_argument("error_metric: series lengths differ");
	}
	if (exact.size() < 2 || !(dt > 0.0)) {
		throw std::invalid_argument("error_metric: need at least two samples and dt > 0");
	}
	double num = 0.0;
	double den = 0.0;
	const std::size_t last = exact.size() - 1;
	for (std::size_t j = 0; j <= last; ++j) {
		const double w = (j == 0 || j == last) ? 0.5 * dt : dt;
		const double d = exact[j] - approx[j];
		num += w * d * d;
		den += w * exact[j] * exact[j];
	}
	if (!(den > 0.0)) {
		throw std::invalid_argument("error_metric: reference trace has zero energy");
	}
	return std::sqrt(num / den);
}

/// Laguerre coefficients of the source pulse.
inline SpectralSeries source_coefficients(const SourcePulse &pulse, const LaguerreBasis &basis) {
	const double sigma = pulse.gamma / (2.0 * std::numbers::pi * pulse.f0);
	const double t_end = pulse.t0 + std::max(pulse.t0, 12.0 * sigma);
	const double dt = std::min(1.0 / (2000.0 * pulse.f0), t_end / 16.0);
	return forward_transform(pulse, basis, dt, t_end);
}

/**
 * Warnings for outputs that may contain reflections from the artificial
 * boundaries r = l1 and z = l2.
 */
inline std::vector<std::string> credible_window_warnings(const SimulationConfig &cfg, const Grid2D &grid,
                                                         double vmax) {
	std::vector<std::string> out;
	const double sigma = cfg.source.pulse.gamma / (2.0 * std::numbers::pi * cfg.source.pulse.f0);
	const double onset = std::max(0.0, cfg.source.pulse.t0 - 5.0 * sigma);
	const double r0 = cfg.source.r0;
	const double z0 = cfg.source.z0;
	for (const auto &rc : cfg.receivers) {
		const double side = (grid.l1 - r0) + (grid.l1 - rc.r);
		const double bottom = std::hypot(rc.r - r0, 2.0 * grid.l2 - z0 - rc.z);
		const double t_refl = std::min(side, bottom) / vmax + onset;
		if (cfg.output.t_end > t_refl) {
			out.push_back("receiver '" + rc.name + "': boundary reflections may arrive from t = " +
			              std::to_string(t_refl) + " s, before t_end = " + std::to_string(cfg.output.t_end) + " s");
		}
	}
	const double first = std::min(grid.l1 - r0, grid.l2 - z0) / vmax + onset;
	for (double t : cfg.snapshot_times) {
		if (t > first) {
			out.push_back("snapshot at t = " + std::to_string(t) + " s: waves reach the domain boundary at t = " +
			              std::to_string(first) + " s");
		}
	}
	return out;
}

namespace detail {

/// sqrt(h) (h t)^alpha phi_m(h t) for m < n.
inline std::vector<double> synthesis_weights(const LaguerreBasis &basis, double t) {
	std::vector<double> w(static_cast<std::size_t>(basis.n), 0.0);
	const double x = basis.h * t;
	if (x <= 0.0) {
		return w;
	}
	const auto k = scaled_kernel(basis.alpha, x, w.size() - 1);
	const double pre = 0.5 * std::log(basis.h) + basis.alpha * std::log(x);
	for (std::size_t m = 0; m < w.size(); ++m) {
		const double a = k.mantissa[m];
		if (a != 0.0) {
			w[m] = std::copysign(std::exp(std::log(std::abs(a)) + k.log_scale[m] + pre), a);
		}
	}
	return w;
}

struct LoopState {
	Grid2D grid;
	std::vector<std::size_t> receiver_nodes;
	std::vector<std::vector<double>> snapshot_weights;
};

inline LoopState prepare(const SimulationConfig &cfg, const Grid2D &grid, SimulationResult &result,
                         const std::vector<std::string> &names) {
	LoopState s{grid, {}, {}};
	result.seismograms.component_names = names;
	result.seismograms.time = cfg.output.times();
	for (const auto &rc : cfg.receivers) {
		Trace tr;
		tr.receiver = rc;
		tr.i = grid.nearest_r(rc.r);
		tr.k = grid.nearest_z(rc.z);
		tr.r_node = grid.r(tr.i);
		tr.z_node = grid.z(tr.k);
		s.receiver_nodes.push_back(grid.index(tr.i, tr.k));
		result.seismograms.traces.push_back(std::move(tr));
	}
	for (double t : cfg.snapshot_times) {
		s.snapshot_weights.push_back(synthesis_weights(cfg.basis, t));
		Snapshot snap;
		snap.time = t;
		snap.names = names;
		snap.fields.assign(names.size(), Field2D(grid));
		result.snapshots.push_back(std::move(snap));
	}
	return s;
}

/// Turns receiver spectral series into time traces.
inline void synthesize_traces(const LaguerreBasis &basis, const std::vector<std::vector<SpectralSeries>> &series,
                              Seismograms &seis) {
	const auto &time = seis.time;
	for (std::size_t r = 0; r < seis.traces.size(); ++r) {
		seis.traces[r].components.assign(series[r].size(), std::vector<double>(time.size()));
	}
	std::vector<SpectralSeries> flat;
	for (const auto &per : series) {
		flat.insert(flat.end(), per.begin(), per.end());
	}
	std::vector<double> values(flat.size());
	for (std::size_t j = 0; j < time.size(); ++j) {
		inverse_series_many(flat, basis, time[j], values);
		std::size_t f = 0;
		for (auto &tr : seis.traces) {
			for (auto &c : tr.components) {
				c[j] = values[f++];
			}
		}
	}
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
	return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Progress callback invoked after every harmonic.
using HarmonicObserver = std::function<void(const HarmonicStats &)>;

inline SimulationResult run_acoustic(const SimulationConfig &cfg, const HarmonicObserver &observer = {}) {
	const auto start = std::chrono::steady_clock::now();
	const Grid2D grid = cfg.make_grid();
	cfg.validate(grid);
	SimulationResult result;
	auto &report = result.report;
	report.physics = Physics::acoustic;
	report.grid = grid;
	report.nr = grid.nr;
	report.nz = grid.nz;
	report.hr = grid.hr;
	report.hz = grid.hz;
	auto state = detail::prepare(cfg, grid, result, {"u"});

	const double h = cfg.basis.h;
	const auto n = static_cast<std::size_t>(cfg.basis.n);
	WorkerPool pool(cfg.workers);
	AcousticOperator op(grid, cfg.acoustic, h);
	const auto &rho = op.coefficients().rho;
	double vmax = 0.0;
	for (std::size_t i = 0; i < grid.nr; ++i) {
		for (std::size_t k = 0; k < grid.nz; ++k) {
			vmax = std::max(vmax, std::sqrt(cfg.acoustic.kappa(grid.r(i), grid.z(k)) / rho(i, k)));
		}
	}
	report.max_velocity = vmax;
	report.warnings = credible_window_warnings(cfg, grid, vmax);

	const long builds_before = preconditioner_build_count();
	const auto precond = build_acoustic_preconditioner(grid, cfg.acoustic, h, cfg.workers);
	report.preconditioner_builds = preconditioner_build_count() - builds_before;

	const auto src_start = std::chrono::steady_clock::now();
	const auto fm = source_coefficients(cfg.source.pulse, cfg.basis);
	report.source_seconds = detail::seconds_since(src_start);
	const Field2D unit_load = discretize_source(cfg.source, grid, 1.0);

	ConvolutionAccumulator acc(grid.size(), cfg.basis.alpha);
	std::vector<std::vector<SpectralSeries>> rec(cfg.receivers.size(), std::vector<SpectralSeries>(1, SpectralSeries(n)));
	std::vector<double> b(grid.size());
	const LinearMap apply_a = [&](std::span<const double> x, std::span<double> y) { op.apply_positive(x, y, &pool); };
	const LinearMap apply_binv = [&](std::span<const double> x, std::span<double> y) {
		precond.apply_inverse(x, y, &pool);
	};

	for (std::size_t m = 0; m < n; ++m) {
		const auto t0 = std::chrono::steady_clock::now();
		const Field2D phi = build_acoustic_rhs(m, fm[m], unit_load, acc, rho, h);
		system_rhs(grid, phi.span(), b);
		SolveResult sol;
		try {
			sol = pcg(apply_a, apply_binv, b, cfg.solver);
		} catch (const std::exception &e) {
			throw SolverFailure("harmonic " + std::to_string(m) + ": " + e.what(), m, report);
		}
		HarmonicStats hs{m, sol.stats.iterations, sol.stats.final_residual, 0.0, true, {}};
		if (!sol.stats.converged) {
			report.harmonics.push_back(hs);
			throw SolverFailure("harmonic " + std::to_string(m) + ": PCG reached " + std::to_string(cfg.solver.max_iters) +
			                        " iterations at relative residual " + std::to_string(sol.stats.final_residual),
			                    m, report);
		}
		acc.push(m, sol.x);
		for (std::size_t r = 0; r < rec.size(); ++r) {
			rec[r][0][m] = sol.x[state.receiver_nodes[r]];
		}
		for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
			const double w = state.snapshot_weights[s][m];
			if (w != 0.0) {
				auto f = result.snapshots[s].fields[0].span();
				for (std::size_t j = 0; j < f.size(); ++j) {
					f[j] += w * sol.x[j];
				}
			}
		}
		hs.seconds = detail::seconds_since(t0);
		report.harmonics.push_back(hs);
		if (observer) {
			observer(hs);
		}
	}
	detail::synthesize_traces(cfg.basis, rec, result.seismograms);
	report.seconds = detail::seconds_since(start);
	return result;
}

inline SimulationResult run_elastic(const SimulationConfig &cfg, const HarmonicObserver &observer = {}) {
	const auto start = std::chrono::steady_clock::now();
	const Grid2D grid = cfg.make_grid();
	cfg.validate(grid);
	SimulationResult result;
	auto &report = result.report;
	report.physics = Physics::elastic;
	report.grid = grid;
	report.nr = grid.nr;
	report.nz = grid.nz;
	report.hr = grid.hr;
	report.hz = grid.hz;
	auto state = detail::prepare(cfg, grid, result, {"ur", "uz"});

	const double h = cfg.basis.h;
	const auto n = static_cast<std::size_t>(cfg.basis.n);
	const std::size_t np = grid.size();
	WorkerPool pool(cfg.workers);
	const auto samples = sample_elastic(cfg.elastic, grid);
	ElasticOperator op(grid, samples, h);
	double vmax = 0.0;
	for (std::size_t j = 0; j < np; ++j) {
		const double l2m = samples.lambda.data()[j] + 2.0 * samples.mu.data()[j];
		vmax = std::max(vmax, std::sqrt(l2m / samples.rho.data()[j]));
	}
	report.max_velocity = vmax;
	report.warnings = credible_window_warnings(cfg, grid, vmax);

	const long builds_before = preconditioner_build_count();
	const auto precond = build_elastic_preconditioner(grid, cfg.elastic, h, cfg.workers, cfg.preconditioner);
	report.preconditioner_builds = preconditioner_build_count() - builds_before;

	const auto src_start = std::chrono::steady_clock::now();
	const auto fm = source_coefficients(cfg.source.pulse, cfg.basis);
	report.source_seconds = detail::seconds_since(src_start);
	const FieldPair unit_load = discretize_source_elastic(cfg.source, grid, 1.0);

	ConvolutionAccumulator acc_q(np, cfg.basis.alpha);
	ConvolutionAccumulator acc_u(np, cfg.basis.alpha);
	std::vector<std::vector<SpectralSeries>> rec(cfg.receivers.size(),
	                                             std::vector<SpectralSeries>(2, SpectralSeries(n)));
	std::vector<double> b(2 * np);
	const auto &rho = samples.rho;
	const LinearMap apply_c = [&](std::span<const double> x, std::span<double> y) { op.apply(x, y, &pool); };
	const LinearMap apply_kinv = [&](std::span<const double> x, std::span<double> y) {
		precond.apply_inverse(x, y, &pool);
	};

	for (std::size_t m = 0; m < n; ++m) {
		const auto t0 = std::chrono::steady_clock::now();
		const double tail = h * h * accumulator_normalization(m, cfg.basis.alpha);
		const auto sq = acc_q.raw_sum(m);
		const auto su = acc_u.raw_sum(m);
		for (std::size_t i = 0; i < grid.nr; ++i) {
			const double r = grid.r(i);
			for (std::size_t k = 0; k < grid.nz; ++k) {
				const std::size_t c = grid.index(i, k);
				if (i + 1 == grid.nr) {
					b[c] = 0.0;
					b[np + c] = 0.0;
					continue;
				}
				const double p = rho.data()[c];
				b[c] = -r * p * (fm[m] * unit_load.q.data()[c] + tail * sq[c]);
				b[np + c] = -r * p * (fm[m] * unit_load.u.data()[c] + tail * su[c]);
			}
		}
		SolveResult sol;
		try {
			sol = gmres_k(apply_c, apply_kinv, b, cfg.solver);
		} catch (const std::exception &e) {
			throw SolverFailure("harmonic " + std::to_string(m) + ": " + e.what(), m, report);
		}
		HarmonicStats hs{m, sol.stats.iterations, sol.stats.final_residual, 0.0, true, sol.stats.restart_residuals};
		double prev = sol.stats.history.empty() ? 0.0 : sol.stats.history.front();
		for (double v : sol.stats.restart_residuals) {
			hs.restart_monotone = hs.restart_monotone && v <= prev * (1.0 + 1e-12);
			prev = v;
		}
		if (!sol.stats.converged) {
			report.harmonics.push_back(hs);
			throw SolverFailure("harmonic " + std::to_string(m) + ": GMRES reached " + std::to_string(cfg.solver.max_iters) +
			                        " iterations at relative residual " + std::to_string(sol.stats.final_residual),
			                    m, report);
		}
		const std::span<const double> q(sol.x.data(), np);
		const std::span<const double> u(sol.x.data() + np, np);
		acc_q.push(m, q);
		acc_u.push(m, u);
		for (std::size_t r = 0; r < rec.size(); ++r) {
			rec[r][0][m] = q[state.receiver_nodes[r]];
			rec[r][1][m] = u[state.receiver_nodes[r]];
		}
		for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
			const double w = state.snapshot_weights[s][m];
			if (w != 0.0) {
				auto fq = result.snapshots[s].fields[0].span();
				auto fu = result.snapshots[s].fields[1].span();
				for (std::size_t j = 0; j < np; ++j) {
					fq[j] += w * q[j];
					fu[j] += w * u[j];
				}
			}
		}
		hs.seconds = detail::seconds_since(t0);
		report.harmonics.push_back(hs);
		if (observer) {
			observer(hs);
		}
	}
	detail::synthesize_traces(cfg.basis, rec, result.seismograms);
	report.seconds = detail::seconds_since(start);
	return result;
}

inline SimulationResult run_simulation(const SimulationConfig &cfg, const HarmonicObserver &observer = {}) {
	return cfg.physics == Physics::acoustic ? run_acoustic(cfg, observer) : run_elastic(cfg, observer);
}

} // namespace lwave

#endif // LWAVE_DRIVER_HPP

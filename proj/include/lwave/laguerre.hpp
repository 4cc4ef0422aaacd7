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
 * Laguerre time transform.
 *
 * A causal signal u(t) is expanded as
 *
 *   u(t) = (ht)^{alpha/2} sum_m R_m l_m(ht),
 *   R_m  = int_0^inf u(t) (ht)^{-alpha/2} l_m(ht) dt,
 *
 * with l_m the orthonormal Laguerre functions of order alpha and scale h.
 * Internally everything is expressed through the normalized functions
 *
 *   phi_m(x) = sqrt(m!/(m+alpha)!) e^{-x/2} L_m^alpha(x),   x = ht,
 *
 * so that the forward kernel equals sqrt(h) phi_m(ht) and the inverse kernel
 * equals sqrt(h) (ht)^alpha phi_m(ht). The phi_m obey a three-term recurrence
 * whose terms stay O(1); the e^{-x/2} envelope is carried as a separate log
 * scale so that neither overflow nor premature underflow can occur.
 */

#ifndef LWAVE_LAGUERRE_HPP
#define LWAVE_LAGUERRE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lwave {

/// Transform parameters: integer order alpha, scale h (1/s), harmonic count n.
struct LaguerreBasis {
	int alpha = 9;
	double h = 400.0;
	int n = 3000;

	void validate() const {
		if (alpha < 2) {
			throw std::invalid_argument("LaguerreBasis: alpha must be >= 2, got " + std::to_string(alpha));
		}
		if (!(h > 0.0) || !std::isfinite(h)) {
			throw std::invalid_argument("LaguerreBasis: h must be positive");
		}
		if (n < 1) {
			throw std::invalid_argument("LaguerreBasis: n must be >= 1");
		}
	}
};

/// Spectral coefficients R_0..R_{n-1} of one signal.
using SpectralSeries = std::vector<double>;

/**
 * phi_0..phi_{m_max} at x as mantissa * exp(log_scale[m]).
 *
 * The log scale is piecewise constant in m; it changes only when the
 * recurrence is renormalized.
 */
struct ScaledKernel {
	std::vector<double> mantissa;
	std::vector<double> log_scale;

	double value(std::size_t m) const { return mantissa[m] * std::exp(log_scale[m]); }
};

namespace detail {

inline constexpr double kRescaleThreshold = 1e200;
inline const double kLogRescale = std::log(kRescaleThreshold);

/// prod_{j=1}^{alpha} (m + j), evaluated in floating point.
inline double rising_product(double m, int alpha) {
	double p = 1.0;
	for (int j = 1; j <= alpha; ++j) {
		p *= m + j;
	}
	return p;
}

} // namespace detail

/// Evaluates phi_0..phi_{m_max} at x >= 0 with the normalized recurrence.
inline ScaledKernel scaled_kernel(int alpha, double x, std::size_t m_max) {
	ScaledKernel k;
	k.mantissa.resize(m_max + 1);
	k.log_scale.resize(m_max + 1);
	const double a = alpha;
	double scale = -0.5 * x - 0.5 * std::lgamma(a + 1.0);
	double prev = 0.0;
	double cur = 1.0;
	k.mantissa[0] = cur;
	k.log_scale[0] = scale;
	for (std::size_t m = 0; m < m_max; ++m) {
		const double md = static_cast<double>(m);
		const double next =
		    ((2.0 * md + a + 1.0 - x) * cur - std::sqrt(md * (md + a)) * prev) / std::sqrt((md + 1.0) * (md + 1.0 + a));
		prev = cur;
		cur = next;
		if (std::abs(cur) > detail::kRescaleThreshold) {
			cur /= detail::kRescaleThreshold;
			prev /= detail::kRescaleThreshold;
			scale += detail::kLogRescale;
		}
		k.mantissa[m + 1] = cur;
		k.log_scale[m + 1] = scale;
	}
	return k;
}

/// phi_0..phi_{m_max} at x = h t.
inline std::vector<double> eval_kernel_functions(const LaguerreBasis &basis, double t, int m_max) {
	basis.validate();
	if (!(t >= 0.0)) {
		throw std::invalid_argument("eval_kernel_functions: t must be >= 0");
	}
	if (m_max < 0 || m_max >= basis.n) {
		throw std::invalid_argument("eval_kernel_functions: m_max must lie in [0, n)");
	}
	const auto k = scaled_kernel(basis.alpha, basis.h * t, static_cast<std::size_t>(m_max));
	std::vector<double> out(k.mantissa.size());
	for (std::size_t m = 0; m < out.size(); ++m) {
		out[m] = k.value(m);
	}
	return out;
}

/**
 * Forward transform of equally spaced samples f(j dt), j = 0..samples.size()-1,
 * by the composite trapezoid rule.
 */
inline SpectralSeries forward_transform_samples(std::span<const double> samples, const LaguerreBasis &basis, double dt) {
	basis.validate();
	if (!(dt > 0.0)) {
		throw std::invalid_argument("forward_transform: dt must be positive");
	}
	SpectralSeries coeff(static_cast<std::size_t>(basis.n), 0.0);
	const std::size_t last = samples.empty() ? 0 : samples.size() - 1;
	const double root_h = std::sqrt(basis.h);
	for (std::size_t j = 0; j < samples.size(); ++j) {
		if (samples[j] == 0.0) {
			continue;
		}
		const double weight = (j == 0 || j == last) ? 0.5 * dt : dt;
		const auto k = scaled_kernel(basis.alpha, basis.h * static_cast<double>(j) * dt, coeff.size() - 1);
		double scale = k.log_scale[0];
		double factor = std::exp(scale) * weight * root_h * samples[j];
		for (std::size_t m = 0; m < coeff.size(); ++m) {
			if (k.log_scale[m] != scale) {
				scale = k.log_scale[m];
				factor = std::exp(scale) * weight * root_h * samples[j];
			}
			coeff[m] += factor * k.mantissa[m];
		}
	}
	return coeff;
}

/// Forward transform of a callable signal on [0, t_end] with step <= dt.
template <typename Signal>
SpectralSeries forward_transform(Signal &&signal, const LaguerreBasis &basis, double dt, double t_end) {
	if (!(t_end > 0.0)) {
		throw std::invalid_argument("forward_transform: t_end must be positive");
	}
	if (!(dt > 0.0) || dt >= t_end) {
		throw std::invalid_argument("forward_transform: dt must lie in (0, t_end)");
	}
	const auto intervals = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
	const double step = t_end / static_cast<double>(intervals);
	std::vector<double> samples(intervals + 1);
	for (std::size_t j = 0; j <= intervals; ++j) {
		samples[j] = signal(static_cast<double>(j) * step);
	}
	return forward_transform_samples(samples, basis, step);
}

/**
 * Synthesizes u(t) = sqrt(h) (ht)^alpha sum_m R_m phi_m(ht) for several
 * series at once, sharing one kernel evaluation.
 */
inline void inverse_series_many(std::span<const SpectralSeries> series, const LaguerreBasis &basis, double t,
                                std::span<double> out) {
	basis.validate();
	if (!(t >= 0.0)) {
		throw std::invalid_argument("inverse_series: t must be >= 0");
	}
	if (out.size() != series.size()) {
		throw std::invalid_argument("inverse_series: output size mismatch");
	}
	for (const auto &s : series) {
		if (s.size() > static_cast<std::size_t>(basis.n)) {
			throw std::invalid_argument("inverse_series: series longer than basis");
		}
	}
	std::fill(out.begin(), out.end(), 0.0);
	const double x = basis.h * t;
	if (x == 0.0 || series.empty()) {
		return;
	}
	const auto k = scaled_kernel(basis.alpha, x, static_cast<std::size_t>(basis.n) - 1);
	const double prefactor = 0.5 * std::log(basis.h) + basis.alpha * std::log(x);
	std::size_t m = 0;
	while (m < k.mantissa.size()) {
		// Sum one run of constant log scale, then apply the scale once.
		std::size_t e = m;
		while (e < k.mantissa.size() && k.log_scale[e] == k.log_scale[m]) {
			++e;
		}
		const double factor = std::exp(k.log_scale[m] + prefactor);
		for (std::size_t s = 0; s < series.size(); ++s) {
			const auto &r = series[s];
			double partial = 0.0;
			for (std::size_t j = m; j < std::min(e, r.size()); ++j) {
				partial += r[j] * k.mantissa[j];
			}
			out[s] += factor * partial;
		}
		m = e;
	}
}

inline double inverse_series(const SpectralSeries &series, const LaguerreBasis &basis, double t) {
	double out = 0.0;
	inverse_series_many(std::span<const SpectralSeries>(&series, 1), basis, t, std::span<double>(&out, 1));
	return out;
}

/**
 * Convolution weight c_{m,k} = (m-k) sqrt(m!/(m+alpha)!) sqrt((k+alpha)!/k!).
 *
 * The factorial ratios collapse to alpha-term products, which avoids both
 * overflow and the cancellation of large log-gamma differences.
 */
inline double conv_weight(long m, long k, int alpha) {
	if (k < 0 || k >= m) {
		throw std::invalid_argument("conv_weight: requires 0 <= k < m");
	}
	if (alpha < 0) {
		throw std::invalid_argument("conv_weight: alpha must be >= 0");
	}
	double ratio = 1.0;
	for (int j = 1; j <= alpha; ++j) {
		ratio *= (static_cast<double>(k) + j) / (static_cast<double>(m) + j);
	}
	return static_cast<double>(m - k) * std::sqrt(ratio);
}

/// w_k = sqrt((k+alpha)!/k!).
inline double accumulator_weight(std::size_t k, int alpha) {
	return std::sqrt(detail::rising_product(static_cast<double>(k), alpha));
}

/// sqrt(m!/(m+alpha)!), the prefactor that turns a raw sum into the RHS tail.
inline double accumulator_normalization(std::size_t m, int alpha) {
	return 1.0 / std::sqrt(detail::rising_product(static_cast<double>(m), alpha));
}

/**
 * Running accumulators for S_m = sum_{k<m} (m-k) w_k R_k.
 *
 * Holds P = sum_{k<m} w_k R_k and S = S_m. Pushing R_m updates
 * P += w_m R_m, then S += P, which yields S_{m+1} with additions only.
 * Storage is two arrays of the field size regardless of how many
 * harmonics have been pushed.
 */
class ConvolutionAccumulator {
public:
	ConvolutionAccumulator(std::size_t points, int alpha) : alpha_(alpha), p_(points, 0.0), s_(points, 0.0) {
		if (alpha < 0) {
			throw std::invalid_argument("ConvolutionAccumulator: alpha must be >= 0");
		}
	}

	/// Index of the next harmonic expected by push().
	std::size_t next_index() const { return m_; }
	std::size_t points() const { return p_.size(); }
	int alpha() const { return alpha_; }

	void push(std::size_t m, std::span<const double> r) {
		if (m != m_) {
			throw std::invalid_argument("ConvolutionAccumulator: harmonic " + std::to_string(m) +
			                            " presented out of order (expected " + std::to_string(m_) + ")");
		}
		if (r.size() != p_.size()) {
			throw std::invalid_argument("ConvolutionAccumulator: field size mismatch");
		}
		const double w = weight_hook_ ? weight_hook_(m, alpha_) : accumulator_weight(m, alpha_);
		for (std::size_t i = 0; i < p_.size(); ++i) {
			p_[i] += w * r[i];
			s_[i] += p_[i];
		}
		++m_;
	}

	void push(std::size_t m, double r) { push(m, std::span<const double>(&r, 1)); }

	/// Raw sum S_m; requires harmonics 0..m-1 to have been pushed.
	void sum(std::size_t m, std::span<double> out) const {
		check_current(m);
		if (out.size() != s_.size()) {
			throw std::invalid_argument("ConvolutionAccumulator: output size mismatch");
		}
		std::copy(s_.begin(), s_.end(), out.begin());
	}

	double sum(std::size_t m) const {
		check_current(m);
		return s_.at(0);
	}

	std::span<const double> raw_sum(std::size_t m) const {
		check_current(m);
		return s_;
	}

	/// Overrides the weight function; used only for fault injection.
	void set_weight_hook(double (*hook)(std::size_t, int)) { weight_hook_ = hook; }

private:
	void check_current(std::size_t m) const {
		if (m != m_) {
			throw std::invalid_argument("ConvolutionAccumulator: sum requested for harmonic " + std::to_string(m) +
			                            " but accumulators are current through " + std::to_string(m_));
		}
	}

	int alpha_;
	std::size_t m_ = 0;
	std::vector<double> p_;
	std::vector<double> s_;
	double (*weight_hook_)(std::size_t, int) = nullptr;
};

/// Gaussian-windowed sine pulse exp[-(2 pi f0 (t-t0))^2 / gamma^2] sin(2 pi f0 (t-t0)).
inline double source_time_function(double t, double f0, double t0, double gamma) {
	const double phase = 2.0 * std::numbers::pi * f0 * (t - t0);
	return std::exp(-phase * phase / (gamma * gamma)) * std::sin(phase);
}

struct SourcePulse {
	double f0 = 30.0;
	double t0 = 0.2;
	double gamma = 4.0;
	double amplitude = 1.0;

	double operator()(double t) const { return amplitude * source_time_function(t, f0, t0, gamma); }

	/// Half-width beyond which the envelope is below e^{-9}.
	double half_width() const { return 3.0 * gamma / (2.0 * std::numbers::pi * f0); }
};

} // namespace lwave

#endif // LWAVE_LAGUERRE_HPP

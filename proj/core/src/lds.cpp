#include "sire/lds.hpp"

#include "sire/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sire::lds {

const Mat5 &transition() {
	static const Mat5 A = [] {
		Mat5 m;
		// clang-format off
		m << 0, 1, 1, 0.5, 1,
		     0, 1, 1, 0.5, 0,
		     0, 0, 1, 1,   0,
		     0, 0, 0, 1,   0,
		     0, 0, 0, 0,   1;
		// clang-format on
		return m;
	}();
	return A;
}

const Row5 &measurement_vector() {
	static const Row5 c = (Row5() << 1, 0, 0, 0, 0).finished();
	return c;
}

Mat5 project_psd(const Mat5 &m) {
	const Mat5 sym = 0.5 * (m + m.transpose());
	Eigen::SelfAdjointEigenSolver<Mat5> eig(sym);
	const Vec5 clipped = eig.eigenvalues().cwiseMax(0.0);
	Mat5 out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
	return 0.5 * (out + out.transpose());
}

ModelParams init_params(std::span<const double> booked, std::span<const double> measured) {
	if (booked.size() < 3) {
		throw InsufficientHistory("parameter initialization needs at least 3 booked points, got " +
		                          std::to_string(booked.size()));
	}
	if (measured.size() + 1 != booked.size()) {
		throw std::invalid_argument("init_params: expected y_1..y_T for booked u_0..u_T");
	}
	double d_sum = 0.0;
	for (std::size_t t = 0; t < measured.size(); ++t) {
		d_sum += measured[t] - booked[t + 1];
	}
	const double d_mean = d_sum / static_cast<double>(measured.size());
	const double u0 = booked[0];
	const double u1 = booked[1];
	const double u2 = booked[2];

	ModelParams p;
	p.Q = Mat5::Identity();
	p.R = 1.0;
	p.Omega = Mat5::Identity();
	p.mu << u0 + d_mean, u0, (u1 - u0), ((u2 - u1) - (u1 - u0)) / 2.0, d_mean;
	return p;
}

namespace {

FilterStep update(const ModelParams &params, const Vec5 &x_pred, const Mat5 &P_pred, double y, std::size_t t) {
	FilterStep s;
	s.x_pred = x_pred;
	s.P_pred = 0.5 * (P_pred + P_pred.transpose());
	s.innovation_var = s.P_pred(0, 0) + params.R;
	if (!(s.innovation_var > 0.0) || !std::isfinite(s.innovation_var)) {
		throw NumericalDegeneracy("non-positive innovation variance", t);
	}
	s.innovation = y - x_pred(0);
	s.gain = s.P_pred.col(0) / s.innovation_var;
	s.x_filt = x_pred + s.gain * s.innovation;
	Mat5 P = s.P_pred - s.gain * s.P_pred.row(0);
	s.P_filt = 0.5 * (P + P.transpose());
	s.log_likelihood = -0.5 * (std::log(2.0 * std::numbers::pi * s.innovation_var) +
	                           s.innovation * s.innovation / s.innovation_var);
	return s;
}

} // namespace

FilterStep initial_filter_step(const ModelParams &params, double y) {
	return update(params, params.mu, params.Omega, y, 1);
}

FilterStep filter_step(const ModelParams &params, const Vec5 &x_prev, const Mat5 &P_prev, double y) {
	const Mat5 &A = transition();
	return update(params, A * x_prev, A * P_prev * A.transpose() + params.Q, y, 0);
}

FilterPass forward_filter(const ModelParams &params, std::span<const double> y) {
	FilterPass pass;
	pass.steps.reserve(y.size());
	const Mat5 &A = transition();
	for (std::size_t t = 0; t < y.size(); ++t) {
		if (t == 0) {
			pass.steps.push_back(update(params, params.mu, params.Omega, y[0], 1));
		} else {
			const auto &prev = pass.steps.back();
			pass.steps.push_back(
			    update(params, A * prev.x_filt, A * prev.P_filt * A.transpose() + params.Q, y[t], t + 1));
		}
		pass.log_likelihood += pass.steps.back().log_likelihood;
	}
	return pass;
}

namespace {

// J = P_filt A' P_pred^{-1}, via a Cholesky solve when P_pred is comfortably positive definite.
Mat5 smoother_gain(const Mat5 &P_filt, const Mat5 &P_pred, bool &used_pinv) {
	const Mat5 &A = transition();
	const Mat5 rhs = A * P_filt; // = (P_filt A')'
	Eigen::LLT<Mat5> llt(P_pred);
	if (llt.info() == Eigen::Success && llt.rcond() > 1e-13) {
		used_pinv = false;
		return llt.solve(rhs).transpose();
	}
	used_pinv = true;
	Eigen::CompleteOrthogonalDecomposition<Mat5> cod(P_pred);
	return (cod.pseudoInverse() * rhs).transpose();
}

} // namespace

SmoothPass backward_smooth(const FilterPass &filter, const ModelParams &params) {
	(void)params; // The recursion needs only the filter quantities and A.
	const std::size_t T = filter.size();
	if (T == 0) {
		throw std::invalid_argument("backward_smooth: empty filter pass");
	}
	const Mat5 &A = transition();
	const Row5 &c = measurement_vector();
	const auto &f = filter.steps;

	SmoothPass out;
	out.steps.resize(T);
	out.steps[T - 1].x = f[T - 1].x_filt;
	out.steps[T - 1].P = f[T - 1].P_filt;

	for (std::size_t i = T - 1; i-- > 0;) {
		auto &s = out.steps[i];
		const auto &next = out.steps[i + 1];
		bool pinv = false;
		s.J = smoother_gain(f[i].P_filt, f[i + 1].P_pred, pinv);
		out.pseudo_inverse_fallbacks += pinv ? 1 : 0;
		s.x = f[i].x_filt + s.J * (next.x - f[i + 1].x_pred);
		const Mat5 P = f[i].P_filt + s.J * (next.P - f[i + 1].P_pred) * s.J.transpose();
		s.P = 0.5 * (P + P.transpose());
	}

	// Lag-one cross-covariances, anchored at the last step and run backwards.
	if (T >= 2) {
		out.steps[T - 1].P_cross = (Mat5::Identity() - f[T - 1].gain * c) * A * f[T - 2].P_filt;
		for (std::size_t j = T - 1; j >= 2; --j) {
			const Mat5 &J_prev = out.steps[j - 1].J;
			const Mat5 &J_prev2 = out.steps[j - 2].J;
			out.steps[j - 1].P_cross = f[j - 1].P_filt * J_prev2.transpose() +
			                           J_prev * (out.steps[j].P_cross - A * f[j - 1].P_filt) * J_prev2.transpose();
		}
	}

	for (std::size_t i = 0; i < T; ++i) {
		auto &s = out.steps[i];
		s.second_moment = s.P + s.x * s.x.transpose();
		if (i > 0) {
			s.cross_moment = s.P_cross + s.x * out.steps[i - 1].x.transpose();
		}
	}
	return out;
}

SufficientStats sufficient_stats(const SmoothPass &smooth) {
	SufficientStats st{Mat5::Zero(), Mat5::Zero(), Mat5::Zero()};
	for (std::size_t i = 1; i < smooth.size(); ++i) {
		st.E += smooth.steps[i - 1].second_moment;
		st.F += smooth.steps[i].cross_moment;
		st.G += smooth.steps[i].second_moment;
	}
	return st;
}

double measurement_noise_floor(std::span<const double> y) {
	double ss = 0.0;
	for (double v : y) {
		ss += v * v;
	}
	const double scale = y.empty() ? 1.0 : ss / static_cast<double>(y.size());
	return 1e-9 * (scale > 0.0 ? scale : 1.0);
}

namespace {

double measurement_residual_sum(const SmoothPass &smooth, std::span<const double> y) {
	double sum = 0.0;
	for (std::size_t t = 0; t < y.size(); ++t) {
		const double r = y[t] - smooth.steps[t].x(0);
		sum += r * r + smooth.steps[t].P(0, 0);
	}
	return sum;
}

Mat5 transition_residual(const SufficientStats &st) {
	const Mat5 &A = transition();
	return st.G - st.F * A.transpose() - A * st.F.transpose() + A * st.E * A.transpose();
}

} // namespace

ModelParams m_step(const SmoothPass &smooth, std::span<const double> y, const ModelParams &current) {
	const std::size_t T = smooth.size();
	if (T == 0 || y.size() != T) {
		throw std::invalid_argument("m_step: smoothed pass and measurements must align");
	}
	ModelParams next = current;
	next.R = std::max(measurement_residual_sum(smooth, y) / static_cast<double>(T), measurement_noise_floor(y));
	if (T >= 2) {
		next.Q = project_psd(transition_residual(sufficient_stats(smooth)) / static_cast<double>(T - 1));
	}
	next.mu = smooth.steps[0].x;
	next.Omega = project_psd(smooth.steps[0].second_moment - next.mu * next.mu.transpose());
	return next;
}

namespace {

// -0.5 tr(S^{-1} M) - (weight / 2) log|S|
double gaussian_trace_term(const Mat5 &S, const Mat5 &M, double weight, const char *name) {
	Eigen::LLT<Mat5> llt(S);
	if (llt.info() != Eigen::Success) {
		throw NumericalDegeneracy(std::string(name) + " is not positive definite");
	}
	const Mat5 L = llt.matrixL();
	double logdet = 0.0;
	for (int i = 0; i < kStateDim; ++i) {
		logdet += 2.0 * std::log(L(i, i));
	}
	return -0.5 * llt.solve(M).trace() - 0.5 * weight * logdet;
}

} // namespace

double expected_log_likelihood(const ModelParams &params, const SmoothPass &smooth, std::span<const double> y) {
	const std::size_t T = smooth.size();
	if (T == 0 || y.size() != T) {
		throw std::invalid_argument("expected_log_likelihood: smoothed pass and measurements must align");
	}
	if (!(params.R > 0.0)) {
		throw NumericalDegeneracy("R is not positive");
	}
	double value = -0.5 * measurement_residual_sum(smooth, y) / params.R -
	               0.5 * static_cast<double>(T) * std::log(params.R);
	if (T >= 2) {
		value += gaussian_trace_term(params.Q, transition_residual(sufficient_stats(smooth)),
		                             static_cast<double>(T - 1), "Q");
	}
	const Vec5 dx = smooth.steps[0].x - params.mu;
	value += gaussian_trace_term(params.Omega, smooth.steps[0].P + dx * dx.transpose(), 1.0, "Omega");
	return value;
}

EmFit fit_em(std::span<const double> y, const ModelParams &init, int iterations) {
	if (y.empty()) {
		throw std::invalid_argument("fit_em: no measurements");
	}
	EmFit fit;
	fit.params = init;
	for (int i = 0; i < iterations; ++i) {
		const FilterPass f = forward_filter(fit.params, y);
		const SmoothPass s = backward_smooth(f, fit.params);
		fit.log_likelihoods.push_back(f.log_likelihood);
		fit.params = m_step(s, y, fit.params);
	}
	fit.filter = forward_filter(fit.params, y);
	fit.smooth = backward_smooth(fit.filter, fit.params);
	fit.log_likelihoods.push_back(fit.filter.log_likelihood);
	return fit;
}

} // namespace sire::lds

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace sire::lds {

/// State ordering: measured revenue, latent revenue, velocity, acceleration, unit measurement error.
inline constexpr int kStateDim = 5;
inline constexpr int kLatentIndex = 1;

using Vec5 = Eigen::Matrix<double, kStateDim, 1>;
using Mat5 = Eigen::Matrix<double, kStateDim, kStateDim>;
using Row5 = Eigen::Matrix<double, 1, kStateDim>;

/// Second-order Taylor transition with a static unit error, discretized at one period.
const Mat5 &transition();
/// Picks the measured-revenue component: c x = x[0].
const Row5 &measurement_vector();

struct ModelParams {
	Mat5 Q = Mat5::Identity();
	double R = 1.0;
	Vec5 mu = Vec5::Zero();
	Mat5 Omega = Mat5::Identity();

	bool operator==(const ModelParams &other) const {
		return Q == other.Q && R == other.R && mu == other.mu && Omega == other.Omega;
	}
};

/// Q = Omega = I, R = 1, and mu from the first three booked points plus the mean measurement
/// error d = y_t - u_t over t = 1..T.
///
/// `booked` holds u_0..u_T, `measured` holds y_1..y_T (so measured.size() == booked.size() - 1).
/// Throws InsufficientHistory with fewer than three booked points.
ModelParams init_params(std::span<const double> booked, std::span<const double> measured);

struct FilterStep {
	Vec5 x_pred;  ///< x_t^{t-1}
	Mat5 P_pred;  ///< P_t^{t-1}
	Vec5 gain;    ///< K_t
	Vec5 x_filt;  ///< x_t^t
	Mat5 P_filt;  ///< P_t^t
	double innovation = 0.0;
	double innovation_var = 0.0;
	double log_likelihood = 0.0; ///< log N(y_t; c x_t^{t-1}, c P_t^{t-1} c' + R)
};

struct FilterPass {
	std::vector<FilterStep> steps;
	double log_likelihood = 0.0;

	std::size_t size() const {
		return steps.size();
	}
};

/// One predict/update step from (x_prev, P_prev) = (x_{t-1}^{t-1}, P_{t-1}^{t-1}).
FilterStep filter_step(const ModelParams &params, const Vec5 &x_prev, const Mat5 &P_prev, double y);
/// The first step, predicted directly from the initial state (mu, Omega).
FilterStep initial_filter_step(const ModelParams &params, double y);

/// Kalman recursion over y_1..y_T. Throws NumericalDegeneracy if an innovation variance is not positive.
FilterPass forward_filter(const ModelParams &params, std::span<const double> y);

struct SmoothStep {
	Mat5 J = Mat5::Zero(); ///< J_t; zero at t = T.
	Vec5 x;                ///< x_t^T
	Mat5 P;                ///< P_t^T
	Mat5 P_cross = Mat5::Zero(); ///< P_{t,t-1}^T; zero at t = 1.
	Mat5 second_moment;          ///< P_t = P_t^T + x_t^T x_t^T'
	Mat5 cross_moment = Mat5::Zero(); ///< P_{t,t-1} = P_{t,t-1}^T + x_t^T x_{t-1}^T'
};

struct SmoothPass {
	std::vector<SmoothStep> steps;
	std::size_t pseudo_inverse_fallbacks = 0; ///< Steps where P_t^{t-1} was singular.

	std::size_t size() const {
		return steps.size();
	}
};

/// Rauch-Tung-Striebel recursion with lag-one cross-covariances.
SmoothPass backward_smooth(const FilterPass &filter, const ModelParams &params);

struct SufficientStats {
	Mat5 E; ///< sum_{t=2..T} P_{t-1}
	Mat5 F; ///< sum_{t=2..T} P_{t,t-1}
	Mat5 G; ///< sum_{t=2..T} P_t
};

SufficientStats sufficient_stats(const SmoothPass &smooth);

/// R floor relative to the measurement scale: 1e-9 * mean(y^2).
double measurement_noise_floor(std::span<const double> y);

/// Closed-form maximizers of the expected complete-data log-likelihood for fixed A and c.
/// Q and Omega are symmetrized and projected onto the PSD cone; R is floored. With a single
/// observation there is no transition to learn from and `current.Q` is kept.
ModelParams m_step(const SmoothPass &smooth, std::span<const double> y, const ModelParams &current);

/// Expected complete-data log-likelihood (constants dropped) given the smoothed moments.
/// Throws NumericalDegeneracy if R, Q or Omega is not invertible.
double expected_log_likelihood(const ModelParams &params, const SmoothPass &smooth, std::span<const double> y);

struct EmFit {
	ModelParams params;
	FilterPass filter; ///< Under `params`.
	SmoothPass smooth; ///< Under `params`.
	/// Observed-data log-likelihood of the parameters entering each iteration, then of the final ones.
	std::vector<double> log_likelihoods;
};

/// Alternates E-steps and M-steps for a fixed number of iterations (no convergence test).
EmFit fit_em(std::span<const double> y, const ModelParams &init, int iterations = 10);

/// Symmetric part with negative eigenvalues clipped to zero.
Mat5 project_psd(const Mat5 &m);

} // namespace sire::lds

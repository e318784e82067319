#pragma once

#include "sire/dataset.hpp"
#include "sire/lds.hpp"
#include "sire/measurement.hpp"
#include "sire/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sire {

struct ForecastConfig {
	int horizon = 1;
	int trials = 10;
	double z_value = 1.96;
	std::uint64_t seed = 0;
	int em_iterations = 10;
	MeasureConfig measure;
	/// Fit the history once and randomize only the horizon measurements across trials.
	bool shared_fit = false;
	/// Worker threads for the trial loop; trials are combined in index order regardless.
	int threads = 1;

	void validate() const;
};

/// Growth at horizon time `tau` (period offset from the first booked point, tau >= booked.size()).
///
/// `latent[k]` is the rolling latent revenue at offset k (offset 0 is unused). The denominator is
/// the booked revenue p periods back when it exists, else the latent value there; when tau - p
/// precedes the series, the earliest latent value is used and `fallback` is set.
struct GrowthEstimate {
	double growth = 1.0;
	bool booked_denominator = false;
	bool fallback = false;
};
GrowthEstimate predict_growth(std::span<const double> latent, std::span<const double> booked, int tau,
                              int periodicity);

/// One stochastic extrapolation run.
struct Trajectory {
	std::vector<CalendarDate> dates;           ///< Horizon dates, continuing the booked calendar.
	std::vector<double> values;                ///< Globally smoothed latent revenue per horizon step.
	std::vector<MeasurementDraw> provenance;   ///< The measurement absorbed at each horizon step.
	std::vector<double> smoothed_history;      ///< Latent revenue at booked offsets 1..N-1 after global smoothing.
	lds::ModelParams params;
	std::vector<double> em_log_likelihoods;
	int base_floor_events = 0;   ///< Horizon bases floored because the latent went non-positive.
	int growth_fallbacks = 0;    ///< Horizon growths computed without p periods of history.
};

/// Measurements y_1..y_N for booked u_0..u_{N-1}: y_i uses base u_{i-1} and cutoff b_{i-1}.
std::vector<MeasurementDraw> measure_history(const Dataset &dataset, const CompanySeries &focus,
                                             const MeasureConfig &cfg, Rng &rng);

/// History measurements plus the EM fit on y_1..y_{N-1}.
struct HistoryFit {
	std::vector<MeasurementDraw> measurements; ///< y_1..y_N; the last one seeds the horizon.
	lds::EmFit fit;
};
HistoryFit fit_history(const Dataset &dataset, const CompanySeries &focus, const ForecastConfig &cfg, Rng &rng);

/// Horizon roll-out from a fitted history: seed step, T'-1 measure/filter steps, global smoothing.
Trajectory roll_out(const Dataset &dataset, const CompanySeries &focus, const HistoryFit &history,
                    const ForecastConfig &cfg, Rng &rng);

Trajectory forecast_one_trajectory(const Dataset &dataset, const CompanySeries &focus, const ForecastConfig &cfg,
                                   Rng &rng);

/// RTS smoothing over the concatenated history and horizon filter passes.
lds::SmoothPass global_smooth(const lds::FilterPass &history, const lds::FilterPass &horizon,
                              const lds::ModelParams &params);

struct ForecastStep {
	CalendarDate date;
	double mean = 0.0;
	double stddev = 0.0; ///< Across-trial sample standard deviation (n - 1).
	double margin = 0.0; ///< beta = zeta * sqrt(sum (x - mean)^2 / (M (M - 1)))
	double lower = 0.0;
	double upper = 0.0;
};

struct ConfidenceBand {
	std::vector<double> mean;
	std::vector<double> stddev;
	std::vector<double> margin;
};

/// Column statistics of an M x T' trajectory matrix. Requires M >= 2.
ConfidenceBand confidence_band(const Eigen::MatrixXd &trajectories, double z_value);

struct ForecastResult {
	std::string company_id;
	int periodicity = 12;
	int horizon = 0;
	ForecastConfig config;
	std::vector<ForecastStep> steps;
	Eigen::MatrixXd trajectories;                        ///< M x T'
	std::vector<std::vector<MeasurementDraw>> provenance; ///< [trial][step]
	std::vector<double> smoothed_history;                 ///< Trial mean of the imputed history.
	int base_floor_events = 0;
	int growth_fallbacks = 0;
};

/// M independent trajectories (trial m uses stream derive_seed(seed, m)) aggregated into mean and margin.
ForecastResult forecast_with_confidence(const Dataset &dataset, const CompanySeries &focus, const ForecastConfig &cfg);

/// Build the aggregated result from already-computed trajectories.
ForecastResult aggregate_trajectories(const CompanySeries &focus, const ForecastConfig &cfg,
                                      std::vector<Trajectory> trials);

} // namespace sire

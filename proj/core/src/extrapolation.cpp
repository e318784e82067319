#include "sire/extrapolation.hpp"

#include "sire/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace sire {

void ForecastConfig::validate() const {
	measure.validate();
	if (horizon < 1) {
		throw ValidationError("horizon must be >= 1");
	}
	if (trials < 2) {
		throw ValidationError("at least 2 trials are needed for a margin of error");
	}
	if (!(z_value > 0.0)) {
		throw ValidationError("z value must be positive");
	}
	if (em_iterations < 0) {
		throw ValidationError("EM iteration count must be >= 0");
	}
}

GrowthEstimate predict_growth(std::span<const double> latent, std::span<const double> booked, int tau,
                              int periodicity) {
	if (tau < 1 || static_cast<std::size_t>(tau) >= latent.size()) {
		throw std::out_of_range("predict_growth: no latent value at tau");
	}
	GrowthEstimate est;
	const double numerator = latent[static_cast<std::size_t>(tau)];
	const int back = tau - periodicity;
	double denominator = 0.0;
	if (back >= 0 && static_cast<std::size_t>(back) < booked.size()) {
		denominator = booked[static_cast<std::size_t>(back)];
		est.booked_denominator = true;
	} else if (back >= 1) {
		denominator = latent[static_cast<std::size_t>(back)];
	} else {
		denominator = latent[1];
		est.fallback = true;
	}
	est.growth = numerator / denominator;
	return est;
}

std::vector<MeasurementDraw> measure_history(const Dataset &dataset, const CompanySeries &focus,
                                             const MeasureConfig &cfg, Rng &rng) {
	const auto &booked = focus.booked;
	const auto growth = compute_growth_series(booked, cfg.periodicity, focus.profile.company_id);
	std::vector<MeasurementDraw> draws;
	draws.reserve(booked.size());
	for (std::size_t i = 0; i < booked.size(); ++i) {
		draws.push_back(measure_with_provenance(dataset, focus.profile, booked[i].revenue, growth[i], booked[i].date,
		                                        cfg, rng));
	}
	return draws;
}

namespace {

void check_forecastable(const Dataset &dataset, const CompanySeries &focus, const ForecastConfig &cfg) {
	const auto &booked = focus.booked;
	if (booked.size() < 3) {
		throw InsufficientHistory("company '" + focus.profile.company_id + "' has " + std::to_string(booked.size()) +
		                          " booked points, at least 3 are needed");
	}
	if (dataset.periodicity() != cfg.measure.periodicity) {
		throw ValidationError("forecast periodicity " + std::to_string(cfg.measure.periodicity) +
		                      " does not match dataset periodicity " + std::to_string(dataset.periodicity()));
	}
}

} // namespace

HistoryFit fit_history(const Dataset &dataset, const CompanySeries &focus, const ForecastConfig &cfg, Rng &rng) {
	check_forecastable(dataset, focus, cfg);
	const auto &booked = focus.booked;
	HistoryFit out;
	out.measurements = measure_history(dataset, focus, cfg.measure, rng);

	std::vector<double> u(booked.size());
	std::transform(booked.begin(), booked.end(), u.begin(), [](const BookedPoint &p) { return p.revenue; });
	std::vector<double> y(booked.size() - 1);
	for (std::size_t i = 0; i + 1 < booked.size(); ++i) {
		y[i] = out.measurements[i].measured_y;
	}
	out.fit = lds::fit_em(y, lds::init_params(u, y), cfg.em_iterations);
	return out;
}

lds::SmoothPass global_smooth(const lds::FilterPass &history, const lds::FilterPass &horizon,
                              const lds::ModelParams &params) {
	lds::FilterPass all;
	all.steps.reserve(history.size() + horizon.size());
	all.steps.insert(all.steps.end(), history.steps.begin(), history.steps.end());
	all.steps.insert(all.steps.end(), horizon.steps.begin(), horizon.steps.end());
	all.log_likelihood = history.log_likelihood + horizon.log_likelihood;
	return lds::backward_smooth(all, params);
}

Trajectory roll_out(const Dataset &dataset, const CompanySeries &focus, const HistoryFit &history,
                    const ForecastConfig &cfg, Rng &rng) {
	const auto &booked = focus.booked;
	const std::size_t N = booked.size();
	const auto H = static_cast<std::size_t>(cfg.horizon);
	const auto &params = history.fit.params;
	const auto &hist = history.fit.filter;
	const int p = cfg.measure.periodicity;

	Trajectory traj;
	traj.params = params;
	traj.em_log_likelihoods = history.fit.log_likelihoods;

	std::vector<double> u(N);
	std::transform(booked.begin(), booked.end(), u.begin(), [](const BookedPoint &b) { return b.revenue; });

	// latent[k]: rolling (filtered) latent revenue at period offset k from the first booked point.
	std::vector<double> latent(N + H, std::numeric_limits<double>::quiet_NaN());
	for (std::size_t k = 1; k < N; ++k) {
		latent[k] = hist.steps[k - 1].x_filt(lds::kLatentIndex);
	}

	lds::FilterPass horizon;
	horizon.steps.reserve(H);
	const auto &seed_draw = history.measurements.back();
	const auto &last = hist.steps.back();
	horizon.steps.push_back(lds::filter_step(params, last.x_filt, last.P_filt, seed_draw.measured_y));
	latent[N] = horizon.steps.back().x_filt(lds::kLatentIndex);
	traj.provenance.push_back(seed_draw);

	const CalendarDate origin = booked.front().date;
	for (std::size_t tau = N; tau + 1 < N + H; ++tau) {
		const auto est = predict_growth(std::span<const double>(latent.data(), tau + 1), u, static_cast<int>(tau), p);
		traj.growth_fallbacks += est.fallback ? 1 : 0;

		double base = latent[tau];
		if (!(base > kGrowthFloor) || !std::isfinite(base)) {
			base = kGrowthFloor;
			++traj.base_floor_events;
		}
		const CalendarDate cutoff = origin.plus(static_cast<int>(tau));
		auto draw = measure_with_provenance(dataset, focus.profile, base, est.growth, cutoff, cfg.measure, rng);

		const auto &prev = horizon.steps.back();
		horizon.steps.push_back(lds::filter_step(params, prev.x_filt, prev.P_filt, draw.measured_y));
		horizon.log_likelihood += horizon.steps.back().log_likelihood;
		latent[tau + 1] = horizon.steps.back().x_filt(lds::kLatentIndex);
		traj.provenance.push_back(std::move(draw));
	}

	const auto smooth = global_smooth(hist, horizon, params);
	traj.smoothed_history.reserve(N - 1);
	for (std::size_t k = 0; k + 1 < N; ++k) {
		traj.smoothed_history.push_back(smooth.steps[k].x(lds::kLatentIndex));
	}
	for (std::size_t h = 0; h < H; ++h) {
		traj.dates.push_back(origin.plus(static_cast<int>(N + h)));
		traj.values.push_back(smooth.steps[N - 1 + h].x(lds::kLatentIndex));
	}
	return traj;
}

Trajectory forecast_one_trajectory(const Dataset &dataset, const CompanySeries &focus, const ForecastConfig &cfg,
                                   Rng &rng) {
	const auto history = fit_history(dataset, focus, cfg, rng);
	return roll_out(dataset, focus, history, cfg, rng);
}

ConfidenceBand confidence_band(const Eigen::MatrixXd &trajectories, double z_value) {
	const auto M = trajectories.rows();
	if (M < 2) {
		throw std::invalid_argument("confidence_band: need at least 2 trajectories");
	}
	ConfidenceBand band;
	const auto cols = trajectories.cols();
	band.mean.resize(static_cast<std::size_t>(cols));
	band.stddev.resize(static_cast<std::size_t>(cols));
	band.margin.resize(static_cast<std::size_t>(cols));
	const double m = static_cast<double>(M);
	for (Eigen::Index j = 0; j < cols; ++j) {
		const auto col = trajectories.col(j);
		const bool constant = (col.array() == col(0)).all();
		const double mean = constant ? col(0) : col.mean();
		const double ss = constant ? 0.0 : (col.array() - mean).square().sum();
		const auto idx = static_cast<std::size_t>(j);
		band.mean[idx] = mean;
		band.stddev[idx] = std::sqrt(ss / (m - 1.0));
		band.margin[idx] = z_value * std::sqrt(ss / (m * (m - 1.0)));
	}
	return band;
}

ForecastResult aggregate_trajectories(const CompanySeries &focus, const ForecastConfig &cfg,
                                      std::vector<Trajectory> trials) {
	ForecastResult res;
	res.company_id = focus.profile.company_id;
	res.periodicity = cfg.measure.periodicity;
	res.horizon = cfg.horizon;
	res.config = cfg;

	const auto M = static_cast<Eigen::Index>(trials.size());
	const auto H = static_cast<Eigen::Index>(cfg.horizon);
	res.trajectories.resize(M, H);
	for (Eigen::Index m = 0; m < M; ++m) {
		const auto &t = trials[static_cast<std::size_t>(m)];
		for (Eigen::Index h = 0; h < H; ++h) {
			res.trajectories(m, h) = t.values[static_cast<std::size_t>(h)];
		}
	}
	const auto band = confidence_band(res.trajectories, cfg.z_value);
	for (Eigen::Index h = 0; h < H; ++h) {
		const auto i = static_cast<std::size_t>(h);
		ForecastStep s;
		s.date = trials.front().dates[i];
		s.mean = band.mean[i];
		s.stddev = band.stddev[i];
		s.margin = band.margin[i];
		s.lower = s.mean - s.margin;
		s.upper = s.mean + s.margin;
		res.steps.push_back(s);
	}

	const std::size_t hist_len = trials.front().smoothed_history.size();
	res.smoothed_history.assign(hist_len, 0.0);
	for (auto &t : trials) {
		for (std::size_t k = 0; k < hist_len; ++k) {
			res.smoothed_history[k] += t.smoothed_history[k] / static_cast<double>(M);
		}
		res.base_floor_events += t.base_floor_events;
		res.growth_fallbacks += t.growth_fallbacks;
		res.provenance.push_back(std::move(t.provenance));
	}
	return res;
}

namespace {

constexpr std::uint64_t kSharedFitStream = 0x5f17'0000'0000'0001ULL;

} // namespace

ForecastResult forecast_with_confidence(const Dataset &dataset, const CompanySeries &focus, const ForecastConfig &cfg) {
	cfg.validate();
	check_forecastable(dataset, focus, cfg);
	const auto M = static_cast<std::size_t>(cfg.trials);

	std::optional<HistoryFit> shared;
	if (cfg.shared_fit) {
		Rng fit_rng = make_stream(cfg.seed, kSharedFitStream);
		shared = fit_history(dataset, focus, cfg, fit_rng);
	}

	std::vector<Trajectory> trials(M);
	std::vector<std::exception_ptr> errors(M);
	auto run_trial = [&](std::size_t m) {
		try {
			Rng rng = make_stream(cfg.seed, m);
			trials[m] = shared ? roll_out(dataset, focus, *shared, cfg, rng)
			                   : forecast_one_trajectory(dataset, focus, cfg, rng);
		} catch (...) {
			errors[m] = std::current_exception();
		}
	};

	const auto workers = static_cast<std::size_t>(std::clamp(cfg.threads, 1, static_cast<int>(M)));
	if (workers == 1) {
		for (std::size_t m = 0; m < M; ++m) {
			run_trial(m);
		}
	} else {
		std::vector<std::thread> pool;
		for (std::size_t w = 0; w < workers; ++w) {
			pool.emplace_back([&, w] {
				for (std::size_t m = w; m < M; m += workers) {
					run_trial(m);
				}
			});
		}
		for (auto &t : pool) {
			t.join();
		}
	}

	for (std::size_t m = 0; m < M; ++m) {
		if (errors[m]) {
			try {
				std::rethrow_exception(errors[m]);
			} catch (const std::exception &e) {
				throw TrialFailed(static_cast<int>(m), e.what());
			}
		}
	}
	return aggregate_trajectories(focus, cfg, std::move(trials));
}

} // namespace sire

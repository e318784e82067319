#pragma once

#include "sire/dataset.hpp"
#include "sire/extrapolation.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sire {

struct PointMetrics {
	std::size_t n = 0;
	double rmse = 0.0;
	std::optional<double> mape;     ///< Absent when every actual is zero.
	std::size_t mape_excluded = 0;  ///< Pairs dropped from MAPE because u = 0.
	std::optional<double> pcc;      ///< Absent for n < 2 or a constant series.
};

/// RMSE, MAPE and Pearson correlation over aligned (actual, predicted) pairs. Requires n >= 1.
PointMetrics point_metrics(std::span<const double> actual, std::span<const double> predicted);

/// One held-out booked value aligned with a forecast step.
struct AlignedPoint {
	std::string company_id;
	CalendarDate cutoff;
	CalendarDate date;
	int step = 0; ///< 1-based horizon step.
	double actual = 0.0;
	double mean = 0.0;
	double stddev = 0.0;
	double lower = 0.0;
	double upper = 0.0;
};

struct DistributionMetrics {
	std::size_t n = 0;
	double nll = 0.0; ///< -mean log N(u; mean, s^2), s floored at 1e-6 |mean|.
	double acc = 0.0; ///< Fraction of u inside the closed band [lower, upper].
};

DistributionMetrics distribution_metrics(std::span<const AlignedPoint> points);

/// One company's held-out path against its forecast, both indexed by horizon step (1-based at index 0).
struct InvestorCase {
	std::string company_id;
	double base_revenue = 0.0; ///< Booked revenue at the cutoff.
	std::vector<std::optional<double>> actual;
	std::vector<double> predicted;
};

struct InvestorMetrics {
	std::optional<double> tpr;
	std::size_t counted = 0;          ///< Companies whose held-out data covers the window.
	std::size_t actual_positives = 0;
	std::size_t true_positives = 0;
};

/// TPR of "reaches `multiple` x the cutoff revenue somewhere within years [year_lo, year_hi]".
InvestorMetrics investor_metrics(std::span<const InvestorCase> cases, double multiple, int year_lo, int year_hi,
                                 int periods_per_year);

/// A forecaster sees only the cutoff-restricted dataset and the focus history up to the cutoff.
using Forecaster = std::function<ForecastResult(const Dataset &visible, const CompanySeries &focus, int horizon)>;

struct NamedForecaster {
	std::string name;
	Forecaster forecast;
};

/// SiRE with `base` settings; the seed of each (company, cutoff) cell is derived from base.seed.
Forecaster sire_forecaster(ForecastConfig base);

/// Carries the last observed YoY growth forward forever (period-over-period growth when no p-back value).
/// Zero-width band.
Forecaster persistence_forecaster(int periodicity);

struct EvalPlan {
	std::map<std::string, std::vector<CalendarDate>> cutoffs;
	int horizon = 12;
	int min_history = 3;

	/// Cutoffs every `every` periods, starting once `min_history` points are visible, each leaving >= 1 held-out point.
	static EvalPlan rolling(const Dataset &dataset, int horizon, int every = 1, int min_history = 3);
	/// One cutoff per company, `holdout` periods before its last date.
	static EvalPlan holdout(const Dataset &dataset, int holdout, int horizon, int min_history = 3);

	/// Throws ValidationError if a cutoff is outside its company's range or leaves no held-out point.
	void validate(const Dataset &dataset) const;
};

struct CellKey {
	std::string company_id;
	CalendarDate cutoff;

	auto operator<=>(const CellKey &) const = default;
};

struct CellResult {
	CellKey key;
	bool ok = false;
	std::string error;
	std::vector<ForecastStep> steps;
	std::vector<AlignedPoint> points;
	std::size_t provenance_records = 0;
	std::size_t leakage_violations = 0; ///< Provenance peers dated after the cutoff.
};

struct MethodReport {
	std::string name;
	PointMetrics point;
	DistributionMetrics distribution;
	std::vector<CellResult> cells; ///< Sorted by key.
	std::size_t failed_cells = 0;
	std::size_t provenance_records = 0;
	std::size_t leakage_violations = 0;
	std::vector<AlignedPoint> scored; ///< The common points that entered the metrics.
};

struct MetricReport {
	std::vector<MethodReport> methods;
	std::vector<CellKey> common_cells;
	std::size_t common_points = 0;
	int horizon = 0;
};

/// Rolling-origin backtest. Each cell restricts the dataset to the cutoff, forecasts, aligns with the
/// held-out booked values by date. Metrics use only the (company, cutoff, date) points that every
/// method produced. Failed cells are recorded and skipped.
MetricReport rolling_origin(const Dataset &dataset, std::span<const NamedForecaster> methods, const EvalPlan &plan,
                            int threads = 1);

/// Investor cases from one method's cells, using the earliest cutoff per company (longest held-out window).
std::vector<InvestorCase> investor_cases(const Dataset &dataset, const MethodReport &method, std::size_t horizon);

} // namespace sire

#include "sire/evaluation.hpp"

#include "sire/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <iterator>
#include <set>
#include <thread>
#include <tuple>

namespace sire {

PointMetrics point_metrics(std::span<const double> actual, std::span<const double> predicted) {
	if (actual.size() != predicted.size()) {
		throw std::invalid_argument("point_metrics: length mismatch");
	}
	if (actual.empty()) {
		throw std::invalid_argument("point_metrics: no pairs");
	}
	PointMetrics m;
	m.n = actual.size();
	const double n = static_cast<double>(m.n);

	double se = 0.0;
	double ape = 0.0;
	std::size_t ape_n = 0;
	for (std::size_t i = 0; i < m.n; ++i) {
		const double e = predicted[i] - actual[i];
		se += e * e;
		if (actual[i] == 0.0) {
			++m.mape_excluded;
		} else {
			ape += std::abs((actual[i] - predicted[i]) / actual[i]);
			++ape_n;
		}
	}
	m.rmse = std::sqrt(se / n);
	if (ape_n > 0) {
		m.mape = ape / static_cast<double>(ape_n);
	}

	if (m.n >= 2) {
		double mu_a = 0.0;
		double mu_p = 0.0;
		for (std::size_t i = 0; i < m.n; ++i) {
			mu_a += actual[i];
			mu_p += predicted[i];
		}
		mu_a /= n;
		mu_p /= n;
		double sap = 0.0;
		double saa = 0.0;
		double spp = 0.0;
		for (std::size_t i = 0; i < m.n; ++i) {
			const double da = actual[i] - mu_a;
			const double dp = predicted[i] - mu_p;
			sap += da * dp;
			saa += da * da;
			spp += dp * dp;
		}
		if (saa > 0.0 && spp > 0.0) {
			m.pcc = sap / std::sqrt(saa * spp);
		}
	}
	return m;
}

DistributionMetrics distribution_metrics(std::span<const AlignedPoint> points) {
	DistributionMetrics m;
	m.n = points.size();
	if (points.empty()) {
		return m;
	}
	double nll = 0.0;
	std::size_t inside = 0;
	for (const auto &p : points) {
		const double floor = 1e-6 * std::max(std::abs(p.mean), 1.0e-300);
		const double s = std::max(p.stddev, floor);
		const double z = (p.actual - p.mean) / s;
		nll += 0.5 * std::log(2.0 * std::numbers::pi) + std::log(s) + 0.5 * z * z;
		if (p.actual >= p.lower && p.actual <= p.upper) {
			++inside;
		}
	}
	m.nll = nll / static_cast<double>(m.n);
	m.acc = static_cast<double>(inside) / static_cast<double>(m.n);
	return m;
}

InvestorMetrics investor_metrics(std::span<const InvestorCase> cases, double multiple, int year_lo, int year_hi,
                                 int periods_per_year) {
	if (year_lo < 1 || year_hi < year_lo || periods_per_year < 1) {
		throw std::invalid_argument("investor_metrics: invalid window");
	}
	const auto first = static_cast<std::size_t>(year_lo * periods_per_year);
	const auto last = static_cast<std::size_t>(year_hi * periods_per_year);

	InvestorMetrics m;
	for (const auto &c : cases) {
		if (c.actual.size() < last || c.predicted.size() < last || !(c.base_revenue > 0.0)) {
			continue;
		}
		bool covered = true;
		double best_actual = 0.0;
		double best_predicted = 0.0;
		for (std::size_t h = first; h <= last; ++h) {
			const auto &a = c.actual[h - 1];
			if (!a) {
				covered = false;
				break;
			}
			best_actual = std::max(best_actual, *a / c.base_revenue);
			best_predicted = std::max(best_predicted, c.predicted[h - 1] / c.base_revenue);
		}
		if (!covered) {
			continue;
		}
		++m.counted;
		if (best_actual >= multiple) {
			++m.actual_positives;
			if (best_predicted >= multiple) {
				++m.true_positives;
			}
		}
	}
	if (m.actual_positives > 0) {
		m.tpr = static_cast<double>(m.true_positives) / static_cast<double>(m.actual_positives);
	}
	return m;
}

Forecaster sire_forecaster(ForecastConfig base) {
	return [base](const Dataset &visible, const CompanySeries &focus, int horizon) {
		ForecastConfig cfg = base;
		cfg.horizon = horizon;
		cfg.measure.periodicity = visible.periodicity();
		const auto cutoff = focus.booked.back().date;
		cfg.seed = derive_seed(base.seed ^ fnv1a64(focus.profile.company_id),
		                       static_cast<std::uint64_t>(static_cast<std::int64_t>(cutoff.ordinal())));
		return forecast_with_confidence(visible, focus, cfg);
	};
}

Forecaster persistence_forecaster(int periodicity) {
	return [periodicity](const Dataset &, const CompanySeries &focus, int horizon) {
		const auto &b = focus.booked;
		if (b.empty()) {
			throw InsufficientHistory("persistence baseline needs at least one booked point");
		}
		const std::size_t N = b.size();
		const auto p = static_cast<std::size_t>(periodicity);
		double step_growth = 1.0;
		if (N > p) {
			step_growth = std::pow(b[N - 1].revenue / b[N - 1 - p].revenue, 1.0 / static_cast<double>(periodicity));
		} else if (N >= 2) {
			step_growth = b[N - 1].revenue / b[N - 2].revenue;
		}
		ForecastResult res;
		res.company_id = focus.profile.company_id;
		res.periodicity = periodicity;
		res.horizon = horizon;
		res.config.horizon = horizon;
		res.config.trials = 1;
		res.config.measure.periodicity = periodicity;
		res.trajectories.resize(1, horizon);
		double x = b.back().revenue;
		for (int h = 0; h < horizon; ++h) {
			x *= step_growth;
			res.trajectories(0, h) = x;
			res.steps.push_back({b.back().date.plus(h + 1), x, 0.0, 0.0, x, x});
		}
		return res;
	};
}

EvalPlan EvalPlan::rolling(const Dataset &dataset, int horizon, int every, int min_history) {
	if (every < 1) {
		throw ValidationError("cutoff spacing must be >= 1");
	}
	EvalPlan plan;
	plan.horizon = horizon;
	plan.min_history = min_history;
	for (const auto &[id, c] : dataset.companies()) {
		std::vector<CalendarDate> cuts;
		for (std::size_t i = static_cast<std::size_t>(std::max(min_history, 1)) - 1; i + 1 < c.booked.size();
		     i += static_cast<std::size_t>(every)) {
			cuts.push_back(c.booked[i].date);
		}
		if (!cuts.empty()) {
			plan.cutoffs.emplace(id, std::move(cuts));
		}
	}
	return plan;
}

EvalPlan EvalPlan::holdout(const Dataset &dataset, int holdout, int horizon, int min_history) {
	if (holdout < 1) {
		throw ValidationError("holdout must be >= 1 period");
	}
	EvalPlan plan;
	plan.horizon = horizon;
	plan.min_history = min_history;
	for (const auto &[id, c] : dataset.companies()) {
		const auto n = static_cast<int>(c.booked.size());
		if (n - holdout >= min_history) {
			plan.cutoffs[id].push_back(c.booked[static_cast<std::size_t>(n - holdout - 1)].date);
		}
	}
	return plan;
}

void EvalPlan::validate(const Dataset &dataset) const {
	if (horizon < 1) {
		throw ValidationError("evaluation horizon must be >= 1");
	}
	for (const auto &[id, cuts] : cutoffs) {
		if (!dataset.contains(id)) {
			throw ValidationError("evaluation plan references unknown company '" + id + "'");
		}
		const auto &booked = dataset.company(id).booked;
		for (const auto &cut : cuts) {
			if (booked.empty() || cut < booked.front().date || !(cut < booked.back().date)) {
				throw ValidationError("cutoff " + cut.to_string() + " for '" + id +
				                      "' must leave at least one held-out point inside the series");
			}
		}
	}
}

namespace {

CellResult run_cell(const Dataset &dataset, const Forecaster &forecaster, const CellKey &key, const EvalPlan &plan) {
	CellResult cell;
	cell.key = key;
	try {
		const Dataset visible = dataset.restricted_to(key.cutoff);
		const auto &focus = visible.company(key.company_id);
		if (static_cast<int>(focus.booked.size()) < plan.min_history) {
			throw InsufficientHistory("only " + std::to_string(focus.booked.size()) + " points before cutoff");
		}
		const ForecastResult res = forecaster(visible, focus, plan.horizon);
		cell.steps = res.steps;

		for (const auto &trial : res.provenance) {
			for (const auto &draw : trial) {
				for (const auto &peer : draw.peers) {
					++cell.provenance_records;
					if (key.cutoff < peer.date) {
						++cell.leakage_violations;
					}
				}
			}
		}

		const auto &truth = dataset.company(key.company_id).booked;
		for (const auto &pt : truth) {
			if (!(key.cutoff < pt.date)) {
				continue;
			}
			const int step = key.cutoff.periods_until(pt.date);
			if (step < 1 || step > static_cast<int>(res.steps.size())) {
				continue;
			}
			const auto &s = res.steps[static_cast<std::size_t>(step - 1)];
			if (!(s.date == pt.date)) {
				continue;
			}
			cell.points.push_back(
			    {key.company_id, key.cutoff, pt.date, step, pt.revenue, s.mean, s.stddev, s.lower, s.upper});
		}
		cell.ok = true;
	} catch (const std::exception &e) {
		cell.ok = false;
		cell.error = e.what();
	}
	return cell;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn &&fn) {
	const auto workers = static_cast<std::size_t>(std::max(1, threads));
	if (workers == 1 || count < 2) {
		for (std::size_t i = 0; i < count; ++i) {
			fn(i);
		}
		return;
	}
	std::vector<std::thread> pool;
	for (std::size_t w = 0; w < std::min(workers, count); ++w) {
		pool.emplace_back([&, w] {
			for (std::size_t i = w; i < count; i += workers) {
				fn(i);
			}
		});
	}
	for (auto &t : pool) {
		t.join();
	}
}

} // namespace

MetricReport rolling_origin(const Dataset &dataset, std::span<const NamedForecaster> methods, const EvalPlan &plan,
                            int threads) {
	plan.validate(dataset);
	std::vector<CellKey> keys;
	for (const auto &[id, cuts] : plan.cutoffs) {
		for (const auto &c : cuts) {
			keys.push_back({id, c});
		}
	}
	std::sort(keys.begin(), keys.end());

	MetricReport report;
	report.horizon = plan.horizon;
	for (const auto &method : methods) {
		MethodReport mr;
		mr.name = method.name;
		mr.cells.resize(keys.size());
		parallel_for(keys.size(), threads,
		             [&](std::size_t i) { mr.cells[i] = run_cell(dataset, method.forecast, keys[i], plan); });
		for (const auto &cell : mr.cells) {
			mr.failed_cells += cell.ok ? 0 : 1;
			mr.provenance_records += cell.provenance_records;
			mr.leakage_violations += cell.leakage_violations;
		}
		report.methods.push_back(std::move(mr));
	}

	// Intersection rule: only cells and dates every method produced are scored.
	using PointKey = std::tuple<std::string, CalendarDate, CalendarDate>;
	std::set<PointKey> common;
	bool first = true;
	for (std::size_t i = 0; i < keys.size(); ++i) {
		const bool all_ok = std::all_of(report.methods.begin(), report.methods.end(),
		                                [&](const MethodReport &m) { return m.cells[i].ok; });
		if (all_ok) {
			report.common_cells.push_back(keys[i]);
		}
	}
	for (const auto &m : report.methods) {
		std::set<PointKey> mine;
		for (const auto &cell : m.cells) {
			if (!std::binary_search(report.common_cells.begin(), report.common_cells.end(), cell.key)) {
				continue;
			}
			for (const auto &p : cell.points) {
				mine.emplace(p.company_id, p.cutoff, p.date);
			}
		}
		if (first) {
			common = std::move(mine);
			first = false;
		} else {
			std::set<PointKey> both;
			std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(),
			                      std::inserter(both, both.end()));
			common = std::move(both);
		}
	}
	report.common_points = common.size();

	for (auto &m : report.methods) {
		for (const auto &cell : m.cells) {
			for (const auto &p : cell.points) {
				if (common.count({p.company_id, p.cutoff, p.date}) != 0) {
					m.scored.push_back(p);
				}
			}
		}
		if (!m.scored.empty()) {
			std::vector<double> actual;
			std::vector<double> predicted;
			for (const auto &p : m.scored) {
				actual.push_back(p.actual);
				predicted.push_back(p.mean);
			}
			m.point = point_metrics(actual, predicted);
			m.distribution = distribution_metrics(m.scored);
		}
	}
	return report;
}

std::vector<InvestorCase> investor_cases(const Dataset &dataset, const MethodReport &method, std::size_t horizon) {
	std::vector<InvestorCase> out;
	std::set<std::string> seen;
	for (const auto &cell : method.cells) {
		if (!cell.ok || !seen.insert(cell.key.company_id).second) {
			continue;
		}
		const auto &booked = dataset.company(cell.key.company_id).booked;
		InvestorCase c;
		c.company_id = cell.key.company_id;
		c.actual.assign(horizon, std::nullopt);
		for (const auto &pt : booked) {
			if (pt.date == cell.key.cutoff) {
				c.base_revenue = pt.revenue;
			}
			const int step = cell.key.cutoff.periods_until(pt.date);
			if (step >= 1 && static_cast<std::size_t>(step) <= horizon) {
				c.actual[static_cast<std::size_t>(step - 1)] = pt.revenue;
			}
		}
		for (std::size_t h = 0; h < std::min(horizon, cell.steps.size()); ++h) {
			c.predicted.push_back(cell.steps[h].mean);
		}
		out.push_back(std::move(c));
	}
	return out;
}

} // namespace sire

#include "sire/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sire {

void MeasureConfig::validate() const {
	if (!(relax > 0.0 && relax < 1.0)) {
		throw ValidationError("relaxing term r must lie in (0, 1), got " + std::to_string(relax));
	}
	if (quantiles < 1) {
		throw ValidationError("quantile count n must be >= 1");
	}
	if (periodicity < 1) {
		throw ValidationError("periodicity must be >= 1");
	}
}

namespace {

struct FilterSettings {
	double relax;
	bool business;
};

bool passes(const RevenueTuple &t, const CompanyProfile &focus, const std::string &focus_key,
            const Dataset &dataset, double base, const CalendarDate &cutoff, const FilterSettings &s,
            bool exclude_focus) {
	if (exclude_focus && t.company_id == focus.company_id) {
		return false;
	}
	if (!(t.date <= cutoff)) {
		return false;
	}
	if (t.revenue < (1.0 - s.relax) * base || t.revenue > (1.0 + s.relax) * base) {
		return false;
	}
	// Cheapest predicates first; the business lookup goes through the profile map.
	return !s.business || dataset.profile(t.company_id).business_key() == focus_key;
}

std::vector<std::size_t> scan(const Dataset &dataset, const CompanyProfile &focus, double base,
                              const CalendarDate &cutoff, const FilterSettings &s, bool exclude_focus) {
	const std::string key = focus.business_key();
	const auto &tuples = dataset.tuples();
	std::vector<std::size_t> out;
	for (std::size_t i = 0; i < tuples.size(); ++i) {
		if (passes(tuples[i], focus, key, dataset, base, cutoff, s, exclude_focus)) {
			out.push_back(i);
		}
	}
	return out;
}

// First filter stage that leaves nothing, applying the filters in order.
FilterStage empty_stage(const Dataset &dataset, const CompanyProfile &focus, double base, const CalendarDate &cutoff,
                        const FilterSettings &s, bool exclude_focus) {
	const std::string key = focus.business_key();
	bool any_business = false;
	bool any_date = false;
	for (const auto &t : dataset.tuples()) {
		if (exclude_focus && t.company_id == focus.company_id) {
			continue;
		}
		if (s.business && dataset.profile(t.company_id).business_key() != key) {
			continue;
		}
		any_business = true;
		if (!(t.date <= cutoff)) {
			continue;
		}
		any_date = true;
		if (t.revenue >= (1.0 - s.relax) * base && t.revenue <= (1.0 + s.relax) * base) {
			return FilterStage::Growth;
		}
	}
	if (!any_business) {
		return FilterStage::Business;
	}
	return any_date ? FilterStage::Revenue : FilterStage::Date;
}

constexpr double kMaxRelax = 0.95;

} // namespace

std::vector<std::size_t> assemble_candidates(const Dataset &dataset, const CompanyProfile &focus, double base_revenue,
                                             const CalendarDate &cutoff, const MeasureConfig &cfg) {
	return scan(dataset, focus, base_revenue, cutoff, FilterSettings{cfg.relax, true}, cfg.exclude_focus);
}

std::vector<double> empirical_quantiles(std::vector<double> values, int n) {
	if (values.empty()) {
		throw std::invalid_argument("empirical_quantiles: empty sample");
	}
	if (n < 1) {
		throw std::invalid_argument("empirical_quantiles: n must be >= 1");
	}
	std::sort(values.begin(), values.end());
	// Position (N-1) j / n in integers so exact order statistics are hit exactly.
	const std::size_t last = values.size() - 1;
	const auto un = static_cast<std::size_t>(n);
	std::vector<double> bounds(un + 1);
	for (std::size_t j = 0; j <= un; ++j) {
		const std::size_t lo = last * j / un;
		const auto hi = std::min(lo + 1, last);
		const double frac = static_cast<double>(last * j % un) / static_cast<double>(un);
		bounds[j] = values[lo] + frac * (values[hi] - values[lo]);
	}
	bounds.front() = values.front();
	bounds.back() = values.back();
	return bounds;
}

int quantile_bucket(double z, std::span<const double> bounds) {
	const int n = static_cast<int>(bounds.size()) - 1;
	for (int k = 1; k < n; ++k) {
		if (z < bounds[static_cast<std::size_t>(k)]) {
			return k;
		}
	}
	return std::max(n, 1);
}

MeasuringContext growth_quantile_filter(std::span<const RevenueTuple> tuples, std::vector<std::size_t> candidates,
                                        double z_current, int n) {
	if (candidates.empty()) {
		throw std::invalid_argument("growth_quantile_filter: empty candidate set");
	}
	MeasuringContext ctx;
	std::vector<double> growths;
	growths.reserve(candidates.size());
	for (auto i : candidates) {
		growths.push_back(tuples[i].growth);
	}
	ctx.quantile_bounds = empirical_quantiles(std::move(growths), n);
	ctx.bucket = quantile_bucket(z_current, ctx.quantile_bounds);
	for (auto i : candidates) {
		if (quantile_bucket(tuples[i].growth, ctx.quantile_bounds) == ctx.bucket) {
			ctx.measuring_set.push_back(i);
			ctx.next_growth_pool.push_back(tuples[i].next_growth);
		}
	}
	ctx.candidates = std::move(candidates);
	return ctx;
}

double silverman_term(std::span<const double> pool) {
	if (pool.empty()) {
		throw std::invalid_argument("silverman_term: empty pool");
	}
	const double count = static_cast<double>(pool.size());
	const double mean = std::accumulate(pool.begin(), pool.end(), 0.0) / count;
	double ss = 0.0;
	for (double z : pool) {
		ss += (z - mean) * (z - mean);
	}
	const double sigma = std::sqrt(ss / count);
	return std::pow((4.0 / 3.0) * std::pow(sigma, 5) / count, 0.2);
}

double kernel_stddev(std::span<const double> pool, BandwidthMode mode) {
	const double term = silverman_term(pool);
	return mode == BandwidthMode::Variance ? std::sqrt(term) : term;
}

GrowthSample sample_growth(std::span<const double> pool, Rng &rng, BandwidthMode mode) {
	if (pool.empty()) {
		throw std::invalid_argument("sample_growth: empty pool");
	}
	std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
	GrowthSample s;
	s.anchor = pool[pick(rng)];
	const double sd = kernel_stddev(pool, mode);
	if (sd > 0.0) {
		std::normal_distribution<double> noise(s.anchor, sd);
		s.sampled = noise(rng);
	} else {
		s.sampled = s.anchor;
	}
	s.sampled = std::max(s.sampled, kGrowthFloor);
	return s;
}

double measure_revenue(double base, double growth, int periodicity) {
	if (periodicity == 1) {
		return base * growth;
	}
	return base * std::pow(growth, 1.0 / static_cast<double>(periodicity));
}

MeasurementDraw measure_with_provenance(const Dataset &dataset, const CompanyProfile &focus, double base,
                                        std::optional<double> z_current, const CalendarDate &cutoff,
                                        const MeasureConfig &cfg, Rng &rng) {
	cfg.validate();
	if (!(base > 0.0) || !std::isfinite(base)) {
		throw std::invalid_argument("measure_with_provenance: base revenue must be positive and finite");
	}

	struct Level {
		double relax;
		bool business;
		bool growth;
	};
	const bool growth_available = z_current.has_value();
	const double r1 = std::min(2.0 * cfg.relax, kMaxRelax);
	const double r2 = std::min(4.0 * cfg.relax, kMaxRelax);
	std::vector<Level> ladder{{cfg.relax, true, growth_available}};
	if (cfg.fallback == FallbackPolicy::Relax) {
		ladder.push_back({std::max(r1, cfg.relax), true, growth_available});
		ladder.push_back({std::max(r2, cfg.relax), true, growth_available});
		ladder.push_back({std::max(r2, cfg.relax), true, false});
		ladder.push_back({std::max(r2, cfg.relax), false, false});
	}

	const auto &tuples = dataset.tuples();
	FilterStage failed = FilterStage::Business;
	for (std::size_t level = 0; level < ladder.size(); ++level) {
		const auto &lv = ladder[level];
		const FilterSettings settings{lv.relax, lv.business};
		auto candidates = scan(dataset, focus, base, cutoff, settings, cfg.exclude_focus);
		if (candidates.empty()) {
			failed = empty_stage(dataset, focus, base, cutoff, settings, cfg.exclude_focus);
			continue;
		}

		std::vector<std::size_t> measuring;
		std::vector<double> pool;
		if (lv.growth) {
			auto ctx = growth_quantile_filter(tuples, std::move(candidates), *z_current, cfg.quantiles);
			measuring = std::move(ctx.measuring_set);
			pool = std::move(ctx.next_growth_pool);
		} else {
			measuring = std::move(candidates);
			for (auto i : measuring) {
				pool.push_back(tuples[i].next_growth);
			}
		}
		if (measuring.empty()) {
			failed = FilterStage::Growth;
			continue;
		}

		const auto sample = sample_growth(pool, rng, cfg.bandwidth);
		MeasurementDraw draw;
		draw.z_anchor = sample.anchor;
		draw.z_hat = sample.sampled;
		draw.base = base;
		draw.periodicity = cfg.periodicity;
		draw.measured_y = measure_revenue(base, sample.sampled, cfg.periodicity);
		draw.cutoff = cutoff;
		draw.relax_used = lv.relax;
		draw.business_filter = lv.business;
		draw.growth_filter = lv.growth;
		draw.fallback_level = static_cast<int>(level);
		draw.peers.reserve(measuring.size());
		for (auto i : measuring) {
			const auto &t = tuples[i];
			draw.peers.push_back({t.company_id, t.date, t.revenue, t.growth, t.next_growth});
		}
		return draw;
	}
	throw MeasurementUnavailable(failed);
}

} // namespace sire

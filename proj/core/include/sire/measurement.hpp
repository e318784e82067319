#pragma once

#include "sire/calendar.hpp"
#include "sire/dataset.hpp"
#include "sire/errors.hpp"
#include "sire/rng.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sire {

enum class FallbackPolicy { Strict, Relax };

/// How the Silverman term of the growth sampler is used.
enum class BandwidthMode {
	Variance, ///< The Silverman value is the Normal's variance (literal reading).
	StdDev,   ///< The Silverman value is the Normal's standard deviation.
};

struct MeasureConfig {
	double relax = 0.5; ///< r: the revenue band is [(1-r) base, (1+r) base].
	int quantiles = 4;  ///< n: number of growth quantile buckets.
	int periodicity = 12;
	FallbackPolicy fallback = FallbackPolicy::Relax;
	bool exclude_focus = true; ///< Keep the focus company's own tuples out of the candidate set.
	BandwidthMode bandwidth = BandwidthMode::Variance;

	/// Throws ValidationError unless 0 < r < 1, n >= 1, p >= 1.
	void validate() const;
};

/// Lower clamp on sampled growth so downstream powers stay defined.
inline constexpr double kGrowthFloor = 1e-6;

/// Indices into `dataset.tuples()` of same-business peers dated <= cutoff with revenue in the band.
std::vector<std::size_t> assemble_candidates(const Dataset &dataset, const CompanyProfile &focus, double base_revenue,
                                             const CalendarDate &cutoff, const MeasureConfig &cfg);

/// Empirical quantiles at j/n, j = 0..n, with linear interpolation between order statistics.
/// q_0 is the minimum and q_n the maximum. `values` must be non-empty.
std::vector<double> empirical_quantiles(std::vector<double> values, int n);

/// 1-based bucket k with z in [q_{k-1}, q_k). Values below q_0 go to bucket 1, values >= q_{n-1}
/// (including q_n itself) to bucket n.
int quantile_bucket(double z, std::span<const double> bounds);

struct MeasuringContext {
	std::vector<std::size_t> candidates;
	std::vector<double> quantile_bounds; ///< q_0..q_n over the candidates' growth.
	int bucket = 1;
	std::vector<std::size_t> measuring_set;
	std::vector<double> next_growth_pool; ///< z_next of the measuring set, in measuring-set order.
};

/// Keeps the candidates whose growth shares z_current's quantile bucket. Requires non-empty candidates.
MeasuringContext growth_quantile_filter(std::span<const RevenueTuple> tuples, std::vector<std::size_t> candidates,
                                        double z_current, int n);

/// [(4/3) sigma^5 / |pool|]^{1/5}, sigma the population standard deviation of the pool.
double silverman_term(std::span<const double> pool);

/// Standard deviation of the Normal kernel implied by `mode`.
double kernel_stddev(std::span<const double> pool, BandwidthMode mode);

struct GrowthSample {
	double anchor = 0.0;  ///< z-acute, drawn uniformly from the pool.
	double sampled = 0.0; ///< z-hat, Normal around the anchor, clamped at kGrowthFloor.
};

GrowthSample sample_growth(std::span<const double> pool, Rng &rng, BandwidthMode mode = BandwidthMode::Variance);

/// base * growth^(1/p).
double measure_revenue(double base, double growth, int periodicity);

struct PeerRecord {
	std::string company_id;
	CalendarDate date;
	double revenue = 0.0;
	double growth = 0.0;
	double next_growth = 0.0;

	bool operator==(const PeerRecord &) const = default;
};

struct MeasurementDraw {
	double measured_y = 0.0;
	double z_hat = 0.0;
	double z_anchor = 0.0;
	double base = 0.0;
	int periodicity = 12;
	CalendarDate cutoff;
	double relax_used = 0.5;
	bool business_filter = true;
	bool growth_filter = true;
	int fallback_level = 0; ///< 0 when no relaxation was needed.
	std::vector<PeerRecord> peers;

	bool operator==(const MeasurementDraw &) const = default;
};

/// Full measuring step: candidates, growth bucket, growth sample, measured revenue.
///
/// With `z_current` absent (the focus has no p-back revenue yet) the growth filter is skipped.
/// Under FallbackPolicy::Relax an empty measuring set triggers, cumulatively: doubling r (twice,
/// capped below 1), dropping the growth filter, dropping the business filter. Under Strict, or
/// when the ladder is exhausted, MeasurementUnavailable names the stage that emptied the set.
MeasurementDraw measure_with_provenance(const Dataset &dataset, const CompanyProfile &focus, double base,
                                        std::optional<double> z_current, const CalendarDate &cutoff,
                                        const MeasureConfig &cfg, Rng &rng);

} // namespace sire

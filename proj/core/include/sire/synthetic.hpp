#pragma once

#include "sire/calendar.hpp"
#include "sire/dataset.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sire {

/// Growth dynamics shared by the companies of one sector.
struct SectorProfile {
	std::string sector;
	std::vector<std::string> customer_focus{"B2B", "B2C"};
	double initial_growth_lo = 1.5; ///< Initial YoY growth, drawn uniformly.
	double initial_growth_hi = 2.5;
	double decay = 0.97;            ///< Per-period pull of (g - 1) toward 0, in (0, 1].
	double growth_noise = 0.01;     ///< Std of the additive per-period growth shock.
};

struct CohortSpec {
	int companies = 50;
	std::vector<SectorProfile> sectors{{"Fintech"}, {"Gaming"}, {"Health"}};
	Granularity granularity = Granularity::Monthly;
	int min_length = 36;
	int max_length = 36;
	int max_start_offset = 24;        ///< Start dates are staggered by up to this many periods.
	CalendarDate first_start = CalendarDate::monthly(2015, 1);
	double log_revenue_lo = 0.0;      ///< Initial revenue is exp(U(lo, hi)).
	double log_revenue_hi = std::log(50.0);
	double measurement_noise = 0.0;   ///< Std of the multiplicative log-normal booking noise.
	std::uint64_t seed = 1;

	int periodicity() const {
		return periods_per_year(granularity);
	}
	void validate() const;
};

/// Companies C001.. with mean-reverting YoY growth g_{t+1} = 1 + decay (g_t - 1) + noise and
/// u_{t+1} = u_t g_{t+1}^{1/p}. Company i draws from its own RNG stream, so the output is a pure
/// function of the spec.
std::vector<CompanySeries> generate_cohort_series(const CohortSpec &spec);

Dataset generate_cohort(const CohortSpec &spec);

} // namespace sire

#include "sire/synthetic.hpp"

#include "sire/errors.hpp"
#include "sire/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace sire {

void CohortSpec::validate() const {
	if (companies < 1) {
		throw ValidationError("cohort needs at least one company");
	}
	if (sectors.empty()) {
		throw ValidationError("cohort needs at least one sector");
	}
	for (const auto &s : sectors) {
		if (s.customer_focus.empty()) {
			throw ValidationError("sector '" + s.sector + "' has no customer focus");
		}
		if (!(s.initial_growth_lo > 0.0) || s.initial_growth_hi < s.initial_growth_lo) {
			throw ValidationError("sector '" + s.sector + "' has an invalid initial growth range");
		}
		if (!(s.decay > 0.0 && s.decay <= 1.0)) {
			throw ValidationError("sector '" + s.sector + "' decay must lie in (0, 1]");
		}
		if (s.growth_noise < 0.0) {
			throw ValidationError("growth noise must be >= 0");
		}
	}
	if (min_length < 1 || max_length < min_length) {
		throw ValidationError("invalid series length range");
	}
	if (max_start_offset < 0) {
		throw ValidationError("start offset must be >= 0");
	}
	if (log_revenue_hi < log_revenue_lo) {
		throw ValidationError("invalid initial revenue range");
	}
	if (measurement_noise < 0.0) {
		throw ValidationError("measurement noise must be >= 0");
	}
	if (first_start.granularity() != granularity) {
		throw ValidationError("first start date granularity does not match the cohort granularity");
	}
}

namespace {

constexpr double kMinGrowth = 0.05;

double uniform(Rng &rng, double lo, double hi) {
	if (hi <= lo) {
		return lo;
	}
	return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng &rng, int lo, int hi) {
	return std::uniform_int_distribution<int>(lo, hi)(rng);
}

} // namespace

std::vector<CompanySeries> generate_cohort_series(const CohortSpec &spec) {
	spec.validate();
	const int p = spec.periodicity();
	std::vector<CompanySeries> out;
	out.reserve(static_cast<std::size_t>(spec.companies));

	for (int i = 0; i < spec.companies; ++i) {
		Rng rng = make_stream(spec.seed, static_cast<std::uint64_t>(i));
		const auto &sector = spec.sectors[static_cast<std::size_t>(i) % spec.sectors.size()];
		const auto &focus =
		    sector.customer_focus[static_cast<std::size_t>(i / static_cast<int>(spec.sectors.size())) %
		                          sector.customer_focus.size()];

		char id[16];
		std::snprintf(id, sizeof id, "C%03d", i + 1);
		CompanySeries series{{id, sector.sector, focus}, {}};

		const int length = uniform_int(rng, spec.min_length, spec.max_length);
		const CalendarDate start = spec.first_start.plus(uniform_int(rng, 0, spec.max_start_offset));
		double u = std::exp(uniform(rng, spec.log_revenue_lo, spec.log_revenue_hi));
		double g = uniform(rng, sector.initial_growth_lo, sector.initial_growth_hi);
		std::normal_distribution<double> shock(0.0, 1.0);

		for (int t = 0; t < length; ++t) {
			if (t > 0) {
				g = 1.0 + sector.decay * (g - 1.0) + sector.growth_noise * shock(rng);
				g = std::max(g, kMinGrowth);
				u *= std::pow(g, 1.0 / static_cast<double>(p));
			}
			double booked = u;
			if (spec.measurement_noise > 0.0) {
				booked *= std::exp(spec.measurement_noise * shock(rng));
			}
			series.booked.push_back({start.plus(t), booked});
		}
		out.push_back(std::move(series));
	}
	return out;
}

Dataset generate_cohort(const CohortSpec &spec) {
	return build_dataset(generate_cohort_series(spec), spec.periodicity());
}

} // namespace sire

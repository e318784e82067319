#pragma once

#include "sire/dataset.hpp"
#include "sire/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace sire::fixture {

/// Monthly cohort with widely staggered starts, so late starters have dated peers from day one.
inline CohortSpec staggered(int companies, int length, std::uint64_t seed) {
	CohortSpec spec;
	spec.companies = companies;
	spec.min_length = length;
	spec.max_length = length;
	spec.max_start_offset = 48;
	spec.seed = seed;
	return spec;
}

/// Company whose first booked date is the latest in the panel (ties broken by id).
inline const CompanySeries &latest_starter(const Dataset &d) {
	const CompanySeries *best = nullptr;
	for (const auto &[id, c] : d.companies()) {
		if (!best || best->booked.front().date < c.booked.front().date) {
			best = &c;
		}
	}
	return *best;
}

/// Established monthly panel (`panel` companies, 60 months) plus `entrants` young companies E001..
/// with `entrant_length` months, all ending on the panel's last month. The panel starts from a wider
/// size range than the entrants, so entrants of any size have peers.
inline Dataset with_entrants(int panel, int entrants, int entrant_length, std::uint64_t seed) {
	CohortSpec old;
	old.companies = panel;
	old.min_length = 60;
	old.max_length = 60;
	old.max_start_offset = 0;
	old.seed = seed;
	old.log_revenue_lo = std::log(0.2);
	auto series = generate_cohort_series(old);

	CohortSpec young = old;
	young.companies = entrants;
	young.min_length = entrant_length;
	young.max_length = entrant_length;
	young.first_start = old.first_start.plus(60 - entrant_length);
	young.seed = seed + 1;
	young.log_revenue_lo = 0.0;
	int k = 0;
	for (auto c : generate_cohort_series(young)) {
		char id[16];
		std::snprintf(id, sizeof id, "E%03d", ++k);
		c.profile.company_id = id;
		series.push_back(std::move(c));
	}
	return build_dataset(std::move(series), 12);
}

/// Entrants of a `with_entrants` dataset.
inline std::vector<const CompanySeries *> entrants(const Dataset &d) {
	std::vector<const CompanySeries *> out;
	for (const auto &[id, c] : d.companies()) {
		if (id.front() == 'E') {
			out.push_back(&c);
		}
	}
	return out;
}

/// The last `n` booked points of a company.
inline CompanySeries tail(const CompanySeries &c, std::size_t n) {
	CompanySeries out{c.profile, {}};
	out.booked.assign(c.booked.end() - static_cast<std::ptrdiff_t>(n), c.booked.end());
	return out;
}

} // namespace sire::fixture

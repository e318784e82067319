#include "sire/dataset.hpp"

#include "sire/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sire {

namespace {

std::string where(std::string_view company_id, const CalendarDate &date) {
	std::string s = "company '" + std::string(company_id) + "'";
	return s + " at " + date.to_string();
}

} // namespace

std::vector<std::optional<double>> compute_growth_series(std::span<const BookedPoint> booked, int periodicity,
                                                         std::string_view company_id) {
	if (periodicity < 1) {
		throw ValidationError("periodicity must be >= 1");
	}
	for (std::size_t i = 0; i < booked.size(); ++i) {
		const double u = booked[i].revenue;
		if (!(u > 0.0) || !std::isfinite(u)) {
			throw ValidationError("non-positive revenue for " + where(company_id, booked[i].date));
		}
		if (i > 0) {
			const auto &prev = booked[i - 1].date;
			if (prev.granularity() != booked[i].date.granularity()) {
				throw ValidationError("mixed date granularity for " + where(company_id, booked[i].date));
			}
			if (prev.periods_until(booked[i].date) != 1) {
				throw ValidationError("gap or non-increasing date before " + where(company_id, booked[i].date));
			}
		}
	}

	const auto p = static_cast<std::size_t>(periodicity);
	std::vector<std::optional<double>> growth(booked.size());
	for (std::size_t i = p; i < booked.size(); ++i) {
		growth[i] = booked[i].revenue / booked[i - p].revenue;
	}
	return growth;
}

bool Dataset::contains(std::string_view company_id) const {
	return companies_.find(std::string(company_id)) != companies_.end();
}

const CompanySeries &Dataset::company(std::string_view company_id) const {
	auto it = companies_.find(std::string(company_id));
	if (it == companies_.end()) {
		throw std::out_of_range("unknown company '" + std::string(company_id) + "'");
	}
	return it->second;
}

const CompanyProfile &Dataset::profile(std::string_view company_id) const {
	return company(company_id).profile;
}

Dataset Dataset::restricted_to(const CalendarDate &cutoff) const {
	std::vector<CompanySeries> raw;
	raw.reserve(companies_.size());
	for (const auto &[id, series] : companies_) {
		CompanySeries cut{series.profile, {}};
		for (const auto &pt : series.booked) {
			if (pt.date <= cutoff) {
				cut.booked.push_back(pt);
			}
		}
		if (!cut.booked.empty()) {
			raw.push_back(std::move(cut));
		}
	}
	Dataset out = build_dataset(std::move(raw), periodicity_);
	out.granularity_ = granularity_;
	return out;
}

Dataset Dataset::from_parts(std::vector<CompanySeries> companies, std::vector<RevenueTuple> tuples, int periodicity,
                            Granularity granularity, std::vector<IngestWarning> warnings) {
	Dataset d;
	d.periodicity_ = periodicity;
	d.granularity_ = granularity;
	d.warnings_ = std::move(warnings);
	for (auto &c : companies) {
		std::string id = c.profile.company_id;
		if (!d.companies_.emplace(id, std::move(c)).second) {
			throw ValidationError("duplicate company '" + id + "'");
		}
	}
	std::set<std::pair<std::string, int>> seen;
	for (const auto &t : tuples) {
		if (!d.contains(t.company_id)) {
			throw ValidationError("tuple references company '" + t.company_id + "' without a profile");
		}
		if (!seen.emplace(t.company_id, t.period_index).second) {
			throw ValidationError("duplicate tuple (" + t.company_id + ", " + std::to_string(t.period_index) + ")");
		}
		if (!(t.revenue > 0.0) || !(t.growth > 0.0) || !(t.next_growth > 0.0)) {
			throw ValidationError("non-positive tuple values for " + where(t.company_id, t.date));
		}
	}
	d.tuples_ = std::move(tuples);
	return d;
}

Dataset build_dataset(std::vector<CompanySeries> raw, int periodicity) {
	if (periodicity < 1) {
		throw ValidationError("periodicity must be >= 1");
	}
	std::sort(raw.begin(), raw.end(),
	          [](const CompanySeries &a, const CompanySeries &b) { return a.profile.company_id < b.profile.company_id; });

	Dataset d;
	d.periodicity_ = periodicity;
	bool granularity_set = false;
	const auto p = static_cast<std::size_t>(periodicity);

	for (auto &series : raw) {
		const std::string &id = series.profile.company_id;
		if (d.companies_.count(id) != 0) {
			throw ValidationError("duplicate company '" + id + "'");
		}
		if (!series.booked.empty()) {
			const Granularity g = series.booked.front().date.granularity();
			if (!granularity_set) {
				d.granularity_ = g;
				granularity_set = true;
			} else if (g != d.granularity_) {
				throw ValidationError("mixed date granularity across companies (company '" + id + "')");
			}
		}

		const auto growth = compute_growth_series(series.booked, periodicity, id);
		const std::size_t n = series.booked.size();
		if (n < p + 2) {
			d.warnings_.push_back({id, "skipped: " + std::to_string(n) + " points, need at least " +
			                               std::to_string(p + 2) + " for one complete tuple"});
		} else {
			int index = 1;
			for (std::size_t i = p; i + 1 < n; ++i) {
				d.tuples_.push_back(RevenueTuple{id, index++, series.booked[i].date, series.booked[i].revenue,
				                                 *growth[i], *growth[i + 1]});
			}
		}
		d.companies_.emplace(id, std::move(series));
	}
	return d;
}

namespace {

std::string trim(std::string_view s) {
	const auto first = s.find_first_not_of(" \t\r\n");
	if (first == std::string_view::npos) {
		return {};
	}
	const auto last = s.find_last_not_of(" \t\r\n");
	return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string &line) {
	std::vector<std::string> fields;
	std::size_t start = 0;
	while (true) {
		const auto comma = line.find(',', start);
		fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
		if (comma == std::string::npos) {
			break;
		}
		start = comma + 1;
	}
	return fields;
}

} // namespace

std::vector<CompanySeries> ingest_csv(std::istream &in) {
	static const std::vector<std::string> kHeader{"company_id", "date", "revenue", "sector", "customer_focus"};

	std::string line;
	std::size_t line_no = 0;
	bool header_seen = false;
	std::optional<Granularity> granularity;
	std::map<std::string, CompanySeries> by_company;

	while (std::getline(in, line)) {
		++line_no;
		const auto stripped = trim(line);
		if (stripped.empty() || stripped.front() == '#') {
			continue;
		}
		auto fields = split_row(line);
		if (!header_seen) {
			if (fields != kHeader) {
				throw ValidationError("expected header company_id,date,revenue,sector,customer_focus", line_no);
			}
			header_seen = true;
			continue;
		}
		if (fields.size() != kHeader.size()) {
			throw ValidationError("expected 5 fields, got " + std::to_string(fields.size()), line_no);
		}
		if (fields[0].empty()) {
			throw ValidationError("empty company_id", line_no);
		}

		CalendarDate date;
		try {
			date = CalendarDate::parse(fields[1]);
		} catch (const ValidationError &e) {
			throw ValidationError(e.what(), line_no);
		}
		if (!granularity) {
			granularity = date.granularity();
		} else if (*granularity != date.granularity()) {
			throw ValidationError("mixed date granularity: '" + fields[1] + "' in a " + to_string(*granularity) +
			                          " file",
			                      line_no);
		}

		double revenue = 0.0;
		const auto &rev = fields[2];
		auto [ptr, ec] = std::from_chars(rev.data(), rev.data() + rev.size(), revenue);
		if (ec != std::errc() || ptr != rev.data() + rev.size() || !std::isfinite(revenue)) {
			throw ValidationError("malformed revenue '" + rev + "'", line_no);
		}
		if (!(revenue > 0.0)) {
			throw ValidationError("non-positive revenue " + rev + " for company '" + fields[0] + "' at " + fields[1],
			                      line_no);
		}

		CompanyProfile profile{fields[0], fields[3], fields[4]};
		auto [it, inserted] = by_company.try_emplace(profile.company_id, CompanySeries{profile, {}});
		if (!inserted && !(it->second.profile == profile)) {
			throw ValidationError("inconsistent sector/customer_focus for company '" + profile.company_id + "'",
			                      line_no);
		}
		it->second.booked.push_back({date, revenue});
	}
	if (!header_seen) {
		throw ValidationError("empty input: missing header");
	}

	std::vector<CompanySeries> out;
	out.reserve(by_company.size());
	for (auto &[id, series] : by_company) {
		std::stable_sort(series.booked.begin(), series.booked.end(),
		                 [](const BookedPoint &a, const BookedPoint &b) { return a.date < b.date; });
		for (std::size_t i = 1; i < series.booked.size(); ++i) {
			if (series.booked[i].date == series.booked[i - 1].date) {
				throw ValidationError("duplicate date " + series.booked[i].date.to_string() + " for company '" + id +
				                      "'");
			}
		}
		out.push_back(std::move(series));
	}
	return out;
}

void write_csv(std::ostream &out, std::span<const CompanySeries> companies) {
	std::ostringstream buf;
	buf << std::setprecision(std::numeric_limits<double>::max_digits10);
	buf << "company_id,date,revenue,sector,customer_focus\n";
	for (const auto &c : companies) {
		for (const auto &pt : c.booked) {
			buf << c.profile.company_id << ',' << pt.date.to_string() << ',' << pt.revenue << ',' << c.profile.sector
			    << ',' << c.profile.customer_focus << '\n';
		}
	}
	out << buf.str();
}

std::vector<CompanySeries> company_list(const Dataset &dataset) {
	std::vector<CompanySeries> out;
	out.reserve(dataset.companies().size());
	for (const auto &[id, c] : dataset.companies()) {
		out.push_back(c);
	}
	return out;
}

} // namespace sire

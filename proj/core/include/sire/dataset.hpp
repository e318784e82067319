#pragma once

#include "sire/calendar.hpp"

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sire {

struct CompanyProfile {
	std::string company_id;
	std::string sector;
	std::string customer_focus;

	/// "sector+customer_focus"; the business filter matches on this key.
	std::string business_key() const {
		return sector + "+" + customer_focus;
	}

	bool operator==(const CompanyProfile &) const = default;
};

struct BookedPoint {
	CalendarDate date;
	double revenue = 0.0;

	bool operator==(const BookedPoint &) const = default;
};

using BookedSeries = std::vector<BookedPoint>;

struct CompanySeries {
	CompanyProfile profile;
	BookedSeries booked;

	bool operator==(const CompanySeries &) const = default;
};

/// One revenue state (u_t, b_t, z_t, z_{t+1}) of a company.
struct RevenueTuple {
	std::string company_id;
	int period_index = 0; ///< 1 for the first complete tuple of the company.
	CalendarDate date;
	double revenue = 0.0;
	double growth = 0.0;
	double next_growth = 0.0;

	bool operator==(const RevenueTuple &) const = default;
};

struct IngestWarning {
	std::string company_id;
	std::string message;

	bool operator==(const IngestWarning &) const = default;
};

/// z_t = u_t / u_{t-p}; absent for the first p positions.
/// Throws ValidationError on non-positive revenue or non-uniform date spacing.
std::vector<std::optional<double>> compute_growth_series(std::span<const BookedPoint> booked, int periodicity,
                                                         std::string_view company_id = {});

/// Immutable tuple panel plus the booked series it was built from.
///
/// Companies too short to yield a complete tuple keep their booked series (they can still be
/// forecast) but contribute no tuples, and a warning is recorded.
class Dataset {
public:
	Dataset() = default;

	const std::vector<RevenueTuple> &tuples() const {
		return tuples_;
	}
	const std::map<std::string, CompanySeries> &companies() const {
		return companies_;
	}
	const std::vector<IngestWarning> &warnings() const {
		return warnings_;
	}
	int periodicity() const {
		return periodicity_;
	}
	Granularity granularity() const {
		return granularity_;
	}

	bool contains(std::string_view company_id) const;
	/// Throws std::out_of_range for unknown companies.
	const CompanySeries &company(std::string_view company_id) const;
	const CompanyProfile &profile(std::string_view company_id) const;

	/// Rebuilds the panel from booked points dated <= cutoff; no tuple can reference later data.
	Dataset restricted_to(const CalendarDate &cutoff) const;

	/// Assembles a dataset from already-computed parts, checking the panel invariants
	/// (every tuple has a profile, no duplicate (company, period) pairs). Used by JSON loading.
	static Dataset from_parts(std::vector<CompanySeries> companies, std::vector<RevenueTuple> tuples, int periodicity,
	                          Granularity granularity, std::vector<IngestWarning> warnings = {});

	bool operator==(const Dataset &) const = default;

private:
	friend Dataset build_dataset(std::vector<CompanySeries> raw, int periodicity);

	std::vector<RevenueTuple> tuples_;
	std::map<std::string, CompanySeries> companies_;
	std::vector<IngestWarning> warnings_;
	int periodicity_ = 12;
	Granularity granularity_ = Granularity::Monthly;
};

/// Emits one tuple per position where u_t, z_t and z_{t+1} are defined
/// (series length - p - 1 tuples for a gap-free series).
Dataset build_dataset(std::vector<CompanySeries> raw, int periodicity);

/// Reads `company_id,date,revenue,sector,customer_focus` rows. Companies come back sorted by id,
/// points sorted by date. Blank lines and lines starting with # are skipped. Throws ValidationError
/// with the offending line number.
std::vector<CompanySeries> ingest_csv(std::istream &in);

/// Writes the ingest format; `ingest_csv(write_csv(x)) == x` for validated input.
void write_csv(std::ostream &out, std::span<const CompanySeries> companies);

/// Convenience: flattens the dataset's companies in id order.
std::vector<CompanySeries> company_list(const Dataset &dataset);

} // namespace sire

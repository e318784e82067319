#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace sire {

enum class Granularity { Monthly, Yearly };

/// Periods per calendar year; also the default YoY periodicity.
constexpr int periods_per_year(Granularity g) {
	return g == Granularity::Monthly ? 12 : 1;
}

std::string to_string(Granularity g);

/// A year-month or a year. Stored as an ordinal so period arithmetic is exact.
class CalendarDate {
public:
	constexpr CalendarDate() = default;

	static CalendarDate monthly(int year, int month);
	static CalendarDate yearly(int year);

	/// Accepts "YYYY-MM" or "YYYY". Throws ValidationError otherwise.
	static CalendarDate parse(std::string_view text);

	Granularity granularity() const {
		return granularity_;
	}
	int ordinal() const {
		return ordinal_;
	}
	int year() const;
	int month() const;

	CalendarDate plus(int periods) const;
	/// Number of periods from this date to `later` (negative if earlier). Granularities must match.
	int periods_until(const CalendarDate &later) const;

	std::string to_string() const;

	// Granularity compares first; mixing granularities in one dataset is rejected at ingest.
	auto operator<=>(const CalendarDate &) const = default;

private:
	constexpr CalendarDate(Granularity g, int ordinal) : granularity_(g), ordinal_(ordinal) {
	}

	Granularity granularity_ = Granularity::Monthly;
	int ordinal_ = 0;
};

} // namespace sire

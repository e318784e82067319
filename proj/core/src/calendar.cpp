#include "sire/calendar.hpp"

#include "sire/errors.hpp"

#include <charconv>
#include <cstdio>

namespace sire {

std::string to_string(Granularity g) {
	return g == Granularity::Monthly ? "monthly" : "yearly";
}

std::string to_string(FilterStage stage) {
	switch (stage) {
	case FilterStage::Business:
		return "business-filter";
	case FilterStage::Date:
		return "date-filter";
	case FilterStage::Revenue:
		return "revenue-filter";
	case FilterStage::Growth:
		return "growth-filter";
	}
	return "unknown-filter";
}

CalendarDate CalendarDate::monthly(int year, int month) {
	if (month < 1 || month > 12) {
		throw ValidationError("month out of range: " + std::to_string(month));
	}
	return CalendarDate(Granularity::Monthly, year * 12 + (month - 1));
}

CalendarDate CalendarDate::yearly(int year) {
	return CalendarDate(Granularity::Yearly, year);
}

namespace {

bool parse_int(std::string_view text, int &out) {
	if (text.empty()) {
		return false;
	}
	for (char c : text) {
		if (c < '0' || c > '9') {
			return false;
		}
	}
	auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
	return ec == std::errc() && ptr == text.data() + text.size();
}

} // namespace

CalendarDate CalendarDate::parse(std::string_view text) {
	int year = 0;
	if (text.size() == 4 && parse_int(text, year)) {
		return yearly(year);
	}
	int month = 0;
	if (text.size() == 7 && text[4] == '-' && parse_int(text.substr(0, 4), year) &&
	    parse_int(text.substr(5, 2), month)) {
		return monthly(year, month);
	}
	throw ValidationError("malformed date '" + std::string(text) + "' (expected YYYY-MM or YYYY)");
}

int CalendarDate::year() const {
	if (granularity_ == Granularity::Yearly) {
		return ordinal_;
	}
	return ordinal_ >= 0 ? ordinal_ / 12 : (ordinal_ - 11) / 12;
}

int CalendarDate::month() const {
	if (granularity_ == Granularity::Yearly) {
		return 1;
	}
	return ordinal_ - year() * 12 + 1;
}

CalendarDate CalendarDate::plus(int periods) const {
	return CalendarDate(granularity_, ordinal_ + periods);
}

int CalendarDate::periods_until(const CalendarDate &later) const {
	if (later.granularity_ != granularity_) {
		throw ValidationError("cannot compare " + to_string() + " with " + later.to_string() +
		                      ": mixed date granularity");
	}
	return later.ordinal_ - ordinal_;
}

std::string CalendarDate::to_string() const {
	char buf[32];
	if (granularity_ == Granularity::Yearly) {
		std::snprintf(buf, sizeof buf, "%04d", ordinal_);
	} else {
		std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
	}
	return buf;
}

} // namespace sire

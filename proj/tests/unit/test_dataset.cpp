#include "sire/dataset.hpp"
#include "sire/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace sire;

namespace {

CompanySeries monthly_series(const std::string &id, int n, double u0, double ratio, int year = 2018) {
	CompanySeries c{{id, "Fintech", "B2B"}, {}};
	double u = u0;
	for (int i = 0; i < n; ++i) {
		c.booked.push_back({CalendarDate::monthly(year, 1).plus(i), u});
		u *= ratio;
	}
	return c;
}

} // namespace

TEST_CASE("tuple construction on a two-year monthly series") {
	// 24 points, p = 12: tuples at positions 12..22, so 11 of them.
	const auto d = build_dataset({monthly_series("A", 24, 10.0, 1.05)}, 12);
	REQUIRE(d.tuples().size() == 11);
	const auto &t = d.tuples().front();
	CHECK(t.period_index == 1);
	CHECK(t.date.to_string() == "2019-01");
	CHECK(t.growth == doctest::Approx(std::pow(1.05, 12)).epsilon(1e-12));
	CHECK(t.next_growth == doctest::Approx(std::pow(1.05, 12)).epsilon(1e-12));
	CHECK(d.tuples().back().date.to_string() == "2019-11");
}

TEST_CASE("yearly growth from a hand example") {
	CompanySeries c{{"Y", "Gaming", "B2C"}, {}};
	const double u[] = {2.0, 3.0, 6.0, 9.0};
	for (int i = 0; i < 4; ++i) {
		c.booked.push_back({CalendarDate::yearly(2010 + i), u[i]});
	}
	const auto d = build_dataset({c}, 1);
	REQUIRE(d.tuples().size() == 2);
	CHECK(d.tuples()[0].revenue == 3.0);
	CHECK(d.tuples()[0].growth == 1.5);
	CHECK(d.tuples()[0].next_growth == 2.0);
	CHECK(d.tuples()[1].growth == 2.0);
	CHECK(d.tuples()[1].next_growth == 1.5);
}

TEST_CASE("short companies keep booked data but emit no tuples") {
	const auto d = build_dataset({monthly_series("S", 13, 5.0, 1.0), monthly_series("L", 20, 5.0, 1.0)}, 12);
	CHECK(d.contains("S"));
	CHECK(d.company("S").booked.size() == 13);
	REQUIRE(d.warnings().size() == 1);
	CHECK(d.warnings()[0].company_id == "S");
	for (const auto &t : d.tuples()) {
		CHECK(t.company_id == "L");
	}
}

TEST_CASE("non-positive revenue and gaps are rejected") {
	auto bad = monthly_series("B", 14, 5.0, 1.0);
	bad.booked[3].revenue = 0.0;
	CHECK_THROWS_AS(build_dataset({bad}, 12), ValidationError);

	auto gap = monthly_series("G", 14, 5.0, 1.0);
	gap.booked.erase(gap.booked.begin() + 5);
	CHECK_THROWS_AS(build_dataset({gap}, 12), ValidationError);
}

TEST_CASE("restriction drops everything after the cutoff") {
	const auto d = build_dataset({monthly_series("A", 30, 10.0, 1.02), monthly_series("B", 30, 8.0, 1.03, 2017)}, 12);
	const auto cutoff = CalendarDate::monthly(2019, 6);
	const auto r = d.restricted_to(cutoff);
	for (const auto &t : r.tuples()) {
		CHECK(t.date <= cutoff);
		// z_next is u_{t+1}/u_{t+1-p}, so the next booked point must also be visible.
		CHECK(t.date.plus(1) <= cutoff);
	}
	for (const auto &[id, c] : r.companies()) {
		CHECK(c.booked.back().date <= cutoff);
	}
	CHECK(r.tuples().size() < d.tuples().size());
}

TEST_CASE("csv ingest round trip") {
	const std::vector<CompanySeries> raw{monthly_series("A", 15, 10.123456789, 1.01),
	                                     monthly_series("B", 15, 3.5, 0.99)};
	std::stringstream s;
	write_csv(s, raw);
	const auto back = ingest_csv(s);
	CHECK(back == raw);
}

TEST_CASE("csv ingest errors carry line numbers") {
	auto fails_with = [](const std::string &text, const std::string &needle) {
		std::istringstream in(text);
		try {
			ingest_csv(in);
		} catch (const ValidationError &e) {
			return std::string(e.what()).find(needle) != std::string::npos;
		}
		return false;
	};
	const std::string header = "company_id,date,revenue,sector,customer_focus\n";
	CHECK(fails_with("id,date\n", "line 1"));
	CHECK(fails_with(header + "A,2019-01,abc,F,B2B\n", "line 2"));
	CHECK(fails_with(header + "A,2019-01,-1,F,B2B\n", "non-positive"));
	CHECK(fails_with(header + "A,2019-01,1,F,B2B\nA,2020,1,F,B2B\n", "mixed date granularity"));
	CHECK(fails_with(header + "A,2019-01,1,F,B2B\nA,2019-02,1,G,B2B\n", "inconsistent"));
	CHECK(fails_with(header + "A,2019-01,1,F,B2B\nA,2019-01,2,F,B2B\n", "duplicate date"));
	CHECK(fails_with(header + "A,2019-01,1,F\n", "expected 5 fields"));
	CHECK(fails_with("", "missing header"));
}

TEST_CASE("comment lines are skipped") {
	std::istringstream in("# config: {}\ncompany_id,date,revenue,sector,customer_focus\n# note\nA,2019-01,1.5,F,B2B\n");
	const auto rows = ingest_csv(in);
	REQUIRE(rows.size() == 1);
	CHECK(rows[0].booked.size() == 1);
}

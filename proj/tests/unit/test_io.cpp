#include "sire/errors.hpp"
#include "sire/io.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace sire;

TEST_CASE("dataset json round trip") {
	const auto d = generate_cohort(fixture::staggered(6, 16, 3));
	const auto j = to_json(d);
	CHECK(j["periodicity"] == 12);
	CHECK(j["granularity"] == "monthly");
	CHECK(j["companies"].size() == 6);
	CHECK(dataset_from_json(j) == d);
	CHECK(dataset_from_json(Json::parse(j.dump())) == d);
}

TEST_CASE("schema violations are validation errors") {
	CHECK_THROWS_AS(dataset_from_json(Json::parse(R"({"periodicity": 12})")), ValidationError);
	CHECK_THROWS_AS(dataset_from_json(Json::parse(R"({"periodicity": 12, "granularity": "weekly", "companies": []})")),
	                ValidationError);
	CHECK_THROWS_AS(params_from_json(Json::parse(R"({"Q": [[1]]})")), ValidationError);
}

TEST_CASE("model parameters round trip exactly") {
	Rng rng(4);
	const auto p = oracle::random_params(rng);
	const auto j = to_json(p);
	CHECK(j["Q"].size() == 5);
	CHECK(j["Q"][1].size() == 5);
	CHECK(j["Q"][1][2].get<double>() == p.Q(1, 2)); // row-major
	CHECK(params_from_json(Json::parse(j.dump())) == p);
}

TEST_CASE("forecast and report serialization") {
	const auto d = generate_cohort(fixture::staggered(12, 24, 7));
	const auto &focus = fixture::latest_starter(d);
	ForecastConfig cfg;
	cfg.horizon = 4;
	cfg.trials = 3;
	cfg.seed = 5;
	const auto res = forecast_with_confidence(d, focus, cfg);

	const auto plain = to_json(res);
	CHECK(plain["company_id"] == focus.profile.company_id);
	CHECK(plain["horizon"] == 4);
	CHECK(plain["steps"].size() == 4);
	CHECK(plain["steps"][0].contains("margin"));
	CHECK(plain["config"]["seed"] == 5);
	CHECK(plain["config"]["measure"]["relax_r"] == 0.5);
	CHECK_FALSE(plain.contains("trials"));
	CHECK_FALSE(plain.contains("provenance"));

	const auto full = to_json(res, {true, true});
	CHECK(full["trials"].size() == 3);
	CHECK(full["trials"][0].size() == 4);
	CHECK(full["provenance"].size() == 3);
	const auto &draw = full["provenance"][0][0];
	for (const char *key : {"measured_y", "z_hat", "z_anchor", "peers"}) {
		CHECK(draw.contains(key));
	}
	CHECK(draw["peers"][0].contains("z_next"));

	std::ostringstream csv;
	write_forecast_csv(csv, res);
	const auto text = csv.str();
	CHECK(text.rfind("company_id,date,mean,lower,upper,margin,stddev\n", 0) == 0);
	CHECK(std::count(text.begin(), text.end(), '\n') == 5);

	const std::vector<NamedForecaster> methods{{"sire", sire_forecaster(cfg)}, {"persistence", persistence_forecaster(12)}};
	const auto report = rolling_origin(d, methods, EvalPlan::holdout(d, 3, 3, 3));
	std::ostringstream rc;
	write_report_csv(rc, report);
	const auto rtext = rc.str();
	CHECK(std::count(rtext.begin(), rtext.end(), '\n') == 11);
	CHECK(rtext.find("sire,MAPE,") != std::string::npos);
	CHECK(rtext.find("persistence,ACC,") != std::string::npos);
	const auto rj = to_json(report);
	CHECK(rj["methods"].size() == 2);
	CHECK(rj["methods"][0]["cells"].size() == report.methods[0].cells.size());
}

TEST_CASE("fallback policy names") {
	CHECK(to_string(FallbackPolicy::Strict) == "strict");
	CHECK(fallback_from_string("relax") == FallbackPolicy::Relax);
	CHECK_THROWS_AS(fallback_from_string("loose"), ValidationError);
}

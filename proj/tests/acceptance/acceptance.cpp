// One line per acceptance criterion: PASS/FAIL, the measured quantity and the threshold.
// Exit status is non-zero if any criterion fails.

#include "sire/cli.hpp"
#include "sire/errors.hpp"
#include "sire/evaluation.hpp"
#include "sire/extrapolation.hpp"
#include "sire/lds.hpp"
#include "sire/measurement.hpp"
#include "sire/synthetic.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sire;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
	return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
	bool pass = false;
	std::string detail;
};

int failures = 0;

void report(int id, const std::string &name, const std::function<Outcome()> &fn) {
	Outcome o;
	const auto t0 = Clock::now();
	try {
		o = fn();
	} catch (const std::exception &e) {
		o = {false, std::string("exception: ") + e.what()};
	}
	char timing[32];
	std::snprintf(timing, sizeof timing, "%.2f s", seconds_since(t0));
	std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << " | " << o.detail << " | " << timing
	          << std::endl;
	failures += o.pass ? 0 : 1;
}

std::string fmt(const char *f, double v) {
	char buf[64];
	std::snprintf(buf, sizeof buf, f, v);
	return buf;
}

// 1 ------------------------------------------------------------------------------------------

Outcome filter_smoother_exactness() {
	const auto t0 = Clock::now();
	Rng rng(20240601);
	double worst = 0.0;
	for (int rep = 0; rep < 100; ++rep) {
		const auto params = oracle::random_params(rng);
		const std::size_t T = 2 + static_cast<std::size_t>(rep % 4);
		const auto y = oracle::simulate_measurements(params, T, rng);
		const auto f = lds::forward_filter(params, y);
		const auto s = lds::backward_smooth(f, params);
		const auto fo = oracle::filtered(params, y);
		const auto so = oracle::condition(oracle::joint_prior(params, T), y, T);
		for (std::size_t t = 0; t < T; ++t) {
			worst = std::max({worst, oracle::rel_err(f.steps[t].x_filt, fo.mean[t]),
			                  oracle::rel_err(f.steps[t].P_filt, fo.cov[t]),
			                  oracle::rel_err(s.steps[t].x, so.state_mean(t)),
			                  oracle::rel_err(s.steps[t].P, so.state_cov(t))});
		}
	}
	const double secs = seconds_since(t0);
	return {worst < 1e-8 && secs < 10.0,
	        "100 instances, T in 2..5, max rel err " + fmt("%.2e", worst) + " (< 1e-8), " + fmt("%.2f", secs) +
	            " s (< 10 s)"};
}

// 2 ------------------------------------------------------------------------------------------

// Companies sharing one calendar, so a late window of any of them has dated peers throughout.
Dataset aligned_cohort(int companies, int length, std::uint64_t seed) {
	CohortSpec spec;
	spec.companies = companies;
	spec.min_length = length;
	spec.max_length = length;
	spec.max_start_offset = 0;
	spec.seed = seed;
	return generate_cohort(spec);
}

Outcome em_monotonicity() {
	const auto t0 = Clock::now();
	const auto d = aligned_cohort(20, 48, 31);
	ForecastConfig cfg;
	double worst_drop = 0.0;
	int series = 0;
	for (const auto &[id, c] : d.companies()) {
		// 25 booked points give T = 24 measurements.
		Rng rng = make_stream(77, static_cast<std::uint64_t>(series));
		const auto hist = fit_history(d, fixture::tail(c, 25), cfg, rng);
		const auto &ll = hist.fit.log_likelihoods;
		if (ll.size() != 11 || hist.measurements.size() != 25) {
			return {false, "unexpected EM trace length"};
		}
		for (std::size_t i = 1; i < ll.size(); ++i) {
			worst_drop = std::max(worst_drop, ll[i - 1] - ll[i]);
		}
		++series;
	}
	const double secs = seconds_since(t0);
	return {series == 20 && worst_drop <= 1e-6 && secs < 10.0,
	        std::to_string(series) + " series, T = 24, 10 iterations, largest decrease " + fmt("%.2e", worst_drop) +
	            " (<= 1e-6), " + fmt("%.2f", secs) + " s (< 10 s)"};
}

// 3 ------------------------------------------------------------------------------------------

Outcome measurement_set_oracle() {
	Rng rng(99);
	std::uniform_real_distribution<double> revenue(1.0, 40.0), growth(0.5, 3.5);
	std::uniform_int_distribution<int> ntuples(1, 500), when(-60, 12), ncomp(2, 25);
	const std::vector<std::string> sectors{"Fintech", "Gaming", "Health", "Retail"};
	const std::vector<std::string> focus{"B2B", "B2C"};
	const CalendarDate cutoff = CalendarDate::monthly(2021, 6);
	int mismatches = 0;
	int nonempty = 0;
	std::size_t max_tuples = 0;
	for (int rep = 0; rep < 50; ++rep) {
		const int nc = ncomp(rng);
		std::vector<CompanySeries> companies;
		for (int c = 0; c < nc; ++c) {
			companies.push_back({{"K" + std::to_string(c), sectors[static_cast<std::size_t>(c) % sectors.size()],
			                      focus[static_cast<std::size_t>(c / 4) % 2]},
			                     {}});
		}
		std::vector<RevenueTuple> tuples;
		const int nt = ntuples(rng);
		std::vector<int> counts(static_cast<std::size_t>(nc), 0);
		for (int i = 0; i < nt; ++i) {
			const int c = i % nc;
			tuples.push_back({"K" + std::to_string(c), ++counts[static_cast<std::size_t>(c)], cutoff.plus(when(rng)),
			                  revenue(rng), growth(rng), growth(rng)});
		}
		max_tuples = std::max(max_tuples, tuples.size());
		const auto d = Dataset::from_parts(companies, tuples, 12, Granularity::Monthly);

		MeasureConfig cfg;
		cfg.relax = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
		cfg.quantiles = 1 + rep % 8;
		cfg.exclude_focus = rep % 5 != 0;
		for (int probe = 0; probe < 10; ++probe) {
			const auto &prof = d.profile("K" + std::to_string((rep + probe) % nc));
			const double base = revenue(rng);
			const auto cut = cutoff.plus(when(rng));
			const auto got = assemble_candidates(d, prof, base, cut, cfg);
			const auto want = oracle::brute_candidates(d, prof, base, cut, cfg.relax, cfg.exclude_focus);
			if (got != want) {
				++mismatches;
				continue;
			}
			if (got.empty()) {
				continue;
			}
			++nonempty;
			const double zc = growth(rng);
			const auto ctx = growth_quantile_filter(d.tuples(), got, zc, cfg.quantiles);
			std::vector<double> z;
			for (auto i : want) {
				z.push_back(d.tuples()[i].growth);
			}
			if (ctx.measuring_set != oracle::brute_measuring_set(d, want, zc, cfg.quantiles) ||
			    ctx.quantile_bounds != oracle::brute_quantiles(z, cfg.quantiles)) {
				++mismatches;
			}
		}
	}
	return {mismatches == 0 && nonempty > 50,
	        "50 datasets (<= " + std::to_string(max_tuples) + " tuples), 500 probes, " + std::to_string(nonempty) +
	            " non-empty, " + std::to_string(mismatches) + " mismatches (== 0)"};
}

// 4 ------------------------------------------------------------------------------------------

Outcome sampler_law() {
	const std::vector<std::vector<double>> pools{
	    {1.0, 2.0},
	    {0.8, 1.1, 1.3, 1.35, 2.4},
	    {1.05, 1.1, 1.2, 1.2, 1.25, 1.4, 1.5, 1.6, 1.8, 2.0, 2.2, 2.5, 3.0, 3.1, 3.3}};
	double worst = 0.0;
	std::string per;
	for (std::size_t k = 0; k < pools.size(); ++k) {
		const auto &pool = pools[k];
		Rng rng = make_stream(4242, k);
		std::vector<double> draws(100000);
		for (auto &v : draws) {
			v = sample_growth(pool, rng, BandwidthMode::Variance).sampled;
		}
		const double variance = oracle::silverman(pool);
		const double D = oracle::ks_statistic(
		    draws, [&](double x) { return oracle::clamped_mixture_cdf(x, pool, variance, kGrowthFloor); });
		worst = std::max(worst, D);
		per += (k ? ", " : "") + fmt("%.4f", D);
	}
	return {worst < 0.01, "3 pools x 1e5 draws, KS " + per + " (< 0.01)"};
}

// 5 ------------------------------------------------------------------------------------------

Outcome expected_ll_dense() {
	Rng rng(515);
	double worst = 0.0;
	for (int rep = 0; rep < 50; ++rep) {
		const auto params = oracle::random_params(rng);
		const auto y = oracle::simulate_measurements(params, 4, rng);
		const auto s = lds::backward_smooth(lds::forward_filter(params, y), params);
		worst = std::max(worst, oracle::rel_err(lds::expected_log_likelihood(params, s, y),
		                                        oracle::expected_log_likelihood(params, y)));
	}
	return {worst < 1e-10, "50 instances, T = 4, max rel err " + fmt("%.2e", worst) + " (< 1e-10)"};
}

// 6 ------------------------------------------------------------------------------------------

struct CliRun {
	int status = 0;
	std::string out;
};

CliRun cli(std::vector<std::string> args) {
	args.insert(args.begin(), "sire");
	std::vector<const char *> argv;
	for (const auto &a : args) {
		argv.push_back(a.c_str());
	}
	std::ostringstream out, err;
	const int status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
	return {status, out.str()};
}

std::string slurp(const std::string &path) {
	std::ifstream in(path, std::ios::binary);
	std::ostringstream s;
	s << in.rdbuf();
	return s.str();
}

Outcome confidence_mechanics() {
	std::vector<std::string> notes;
	bool ok = true;

	Eigen::MatrixXd two(2, 1);
	two << 10.0, 14.0;
	const double beta = confidence_band(two, 1.96).margin[0];
	ok = ok && beta == 3.92 && confidence_band(two, 1.96).mean[0] == 12.0;
	notes.push_back("M=2 beta " + fmt("%.17g", beta));

	const auto d = fixture::with_entrants(30, 1, 24, 61);
	const auto &focus = *fixture::entrants(d).front();
	ForecastConfig cfg;
	cfg.horizon = 12;
	cfg.seed = 7;
	const auto base = forecast_with_confidence(d, focus, cfg);
	Eigen::MatrixXd same(10, base.trajectories.cols());
	for (Eigen::Index m = 0; m < 10; ++m) {
		same.row(m) = base.trajectories.row(2);
	}
	double max_beta = 0.0;
	for (double b : confidence_band(same, 1.96).margin) {
		max_beta = std::max(max_beta, std::abs(b));
	}
	ok = ok && max_beta == 0.0;
	notes.push_back("identical trials beta " + fmt("%g", max_beta));

	auto wide = cfg;
	wide.z_value = 2.576;
	auto unit = cfg;
	unit.z_value = 1.0;
	const auto a = forecast_with_confidence(d, focus, wide);
	const auto u = forecast_with_confidence(d, focus, unit);
	bool rescale = a.trajectories == base.trajectories;
	for (std::size_t h = 0; h < base.steps.size(); ++h) {
		rescale = rescale && a.steps[h].margin == 2.576 * u.steps[h].margin &&
		          base.steps[h].margin == 1.96 * u.steps[h].margin;
	}
	ok = ok && rescale;
	notes.push_back(std::string("zeta rescale ") + (rescale ? "exact" : "inexact"));

	std::string first_metrics, first_forecast;
	bool identical = true;
	for (int pass = 0; pass < 2; ++pass) {
		// Same paths both times; the config echo records them.
		const std::string tag = "acc6";
		ok = ok && cli({"synth", "--seed", "5", "--companies", "30", "--min-length", "40", "--max-start-offset", "48",
		                "--output", tag + "_cohort.csv"})
		                   .status == 0;
		const auto f = cli({"forecast", "--input", tag + "_cohort.csv", "--seed", "5", "--horizon", "6",
		                    "--include-trials", "--include-provenance", "--output", tag + "_forecast.json"});
		const auto e = cli({"evaluate", "--input", tag + "_cohort.csv", "--seed", "5", "--horizon", "6", "--holdout",
		                    "6", "--format", "csv", "--output", tag + "_metrics.csv"});
		ok = ok && f.status == 0 && e.status == 0;
		const auto m = slurp(tag + "_metrics.csv");
		const auto fc = slurp(tag + "_forecast.json");
		if (pass == 0) {
			first_metrics = m;
			first_forecast = fc;
		} else {
			identical = m == first_metrics && fc == first_forecast && !m.empty() && !fc.empty();
		}
	}
	ok = ok && identical;
	notes.push_back(std::string("two pipeline runs ") + (identical ? "byte-identical" : "differ"));

	std::string detail;
	for (std::size_t i = 0; i < notes.size(); ++i) {
		detail += (i ? ", " : "") + notes[i];
	}
	return {ok, detail};
}

// 7 ------------------------------------------------------------------------------------------

Outcome uncertainty_accumulation() {
	const auto d = aligned_cohort(30, 48, 71);
	ForecastConfig cfg;
	cfg.horizon = 12;
	cfg.trials = 100;
	double first = 0.0, last = 0.0;
	int n = 0;
	for (const auto &[id, c] : d.companies()) {
		cfg.seed = derive_seed(700, static_cast<std::uint64_t>(n));
		const auto res = forecast_with_confidence(d, fixture::tail(c, 24), cfg);
		first += res.steps.front().margin;
		last += res.steps.back().margin;
		++n;
	}
	first /= n;
	last /= n;
	return {n == 30 && last >= first,
	        std::to_string(n) + " companies, M = 100, T' = 12, mean beta step 1 " + fmt("%.4f", first) + ", step T' " +
	            fmt("%.4f", last)};
}

// 8, 10, 11 share the cohort evaluations ------------------------------------------------------

struct AuditedEval {
	MetricReport report;
	double seconds = 0.0;
	std::size_t provenance_records = 0;
	std::size_t late_records = 0;
};

AuditedEval audited_evaluation(std::uint64_t seed) {
	auto spec = fixture::staggered(50, 48, seed);
	const auto d = generate_cohort(spec);
	ForecastConfig cfg;
	cfg.seed = seed;
	AuditedEval out;
	const Forecaster sire = sire_forecaster(cfg);
	// Independent scan: every peer behind every measurement must be dated on or before the cutoff.
	Forecaster audited = [&](const Dataset &visible, const CompanySeries &focus, int horizon) {
		auto res = sire(visible, focus, horizon);
		const auto cutoff = focus.booked.back().date;
		for (const auto &trial : res.provenance) {
			for (const auto &draw : trial) {
				for (const auto &peer : draw.peers) {
					++out.provenance_records;
					out.late_records += cutoff < peer.date ? 1 : 0;
				}
			}
		}
		return res;
	};
	const std::vector<NamedForecaster> methods{{"sire", audited}, {"persistence", persistence_forecaster(12)}};
	const auto t0 = Clock::now();
	out.report = rolling_origin(d, methods, EvalPlan::holdout(d, 12, 12, 3));
	out.seconds = seconds_since(t0);
	return out;
}

std::vector<AuditedEval> evaluations;

Outcome direction_vs_baseline() {
	const auto t0 = Clock::now();
	int wins = 0;
	std::string per;
	for (std::uint64_t seed : {101u, 202u, 303u}) {
		evaluations.push_back(audited_evaluation(seed));
		const auto &r = evaluations.back().report;
		const auto &s = r.methods[0].point;
		const auto &p = r.methods[1].point;
		const bool win = s.mape && p.mape && s.pcc && p.pcc && *s.mape < *p.mape && *s.pcc > *p.pcc;
		wins += win ? 1 : 0;
		per += (per.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": MAPE " +
		       fmt("%.4f", s.mape.value_or(NAN)) + " vs " + fmt("%.4f", p.mape.value_or(NAN)) + ", PCC " +
		       fmt("%.5f", s.pcc.value_or(NAN)) + " vs " + fmt("%.5f", p.pcc.value_or(NAN)) + ", " +
		       std::to_string(r.common_cells.size()) + "/50 cells";
	}
	const double secs = seconds_since(t0);
	return {wins >= 2 && secs < 300.0, std::to_string(wins) + "/3 seeds won (>= 2) [" + per + "]"};
}

// 9 ------------------------------------------------------------------------------------------

Outcome short_series() {
	// Young companies with three booked months against an established panel.
	const auto d = fixture::with_entrants(40, 20, 3, 91);
	ForecastConfig cfg;
	cfg.horizon = 36;
	int ok = 0;
	double min_lower = INFINITY, min_margin = INFINITY;
	std::string first_error;
	int n = 0;
	for (const auto *c : fixture::entrants(d)) {
		cfg.seed = derive_seed(900, static_cast<std::uint64_t>(n++));
		try {
			if (c->booked.size() != 3) {
				throw std::logic_error("entrant length");
			}
			const auto res = forecast_with_confidence(d, *c, cfg);
			bool good = res.steps.size() == 36;
			for (const auto &s : res.steps) {
				good = good && std::isfinite(s.lower) && std::isfinite(s.upper) && s.lower > 0.0 && s.margin > 0.0;
				min_lower = std::min(min_lower, s.lower);
				min_margin = std::min(min_margin, s.margin);
			}
			ok += good ? 1 : 0;
		} catch (const std::exception &e) {
			if (first_error.empty()) {
				first_error = e.what();
			}
		}
	}
	std::string detail = std::to_string(ok) + "/20 companies with finite positive bands over 36 steps, min lower " +
	                     fmt("%.4g", min_lower) + ", min margin " + fmt("%.4g", min_margin);
	if (!first_error.empty()) {
		detail += ", first error: " + first_error;
	}
	return {n == 20 && ok == 20, detail};
}

// 10 -----------------------------------------------------------------------------------------

Outcome efficiency() {
	auto spec = fixture::staggered(42, 36, 10);
	const auto d = generate_cohort(spec);
	std::size_t points = 0;
	for (const auto &[id, c] : d.companies()) {
		points += c.booked.size();
	}
	ForecastConfig cfg;
	cfg.horizon = 12;
	const auto t0 = Clock::now();
	forecast_with_confidence(d, fixture::latest_starter(d), cfg);
	const double single = seconds_since(t0);
	double worst_eval = 0.0;
	for (const auto &e : evaluations) {
		worst_eval = std::max(worst_eval, e.seconds);
	}
	return {single < 5.0 && !evaluations.empty() && worst_eval < 300.0,
	        "train+forecast on " + std::to_string(points) + " points " + fmt("%.3f", single) +
	            " s (< 5 s), slowest 50-company evaluation " + fmt("%.2f", worst_eval) + " s (< 300 s)"};
}

// 11 -----------------------------------------------------------------------------------------

Outcome no_peeking() {
	std::size_t records = 0, late = 0, reported = 0;
	for (const auto &e : evaluations) {
		records += e.provenance_records;
		late += e.late_records;
		reported += e.report.methods[0].leakage_violations;
	}
	return {!evaluations.empty() && records > 0 && late == 0 && reported == 0,
	        std::to_string(records) + " provenance records scanned across " + std::to_string(evaluations.size()) +
	            " evaluation runs, " + std::to_string(late) + " dated after their cutoff (== 0)"};
}

} // namespace

int main() {
	report(1, "filter/smoother exactness", filter_smoother_exactness);
	report(2, "EM monotonicity", em_monotonicity);
	report(3, "measurement-set oracle", measurement_set_oracle);
	report(4, "sampler law", sampler_law);
	report(5, "expected log-likelihood vs dense", expected_ll_dense);
	report(6, "confidence mechanics", confidence_mechanics);
	report(7, "uncertainty accumulation", uncertainty_accumulation);
	report(8, "direction vs persistence baseline", direction_vs_baseline);
	report(9, "short-series viability", short_series);
	report(10, "efficiency envelope", efficiency);
	report(11, "no-peeking audit", no_peeking);
	std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
	return failures == 0 ? 0 : 1;
}

#include "sire/cli.hpp"

#include "sire/dataset.hpp"
#include "sire/errors.hpp"
#include "sire/evaluation.hpp"
#include "sire/extrapolation.hpp"
#include "sire/io.hpp"
#include "sire/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sire::cli {
namespace {

struct RunConfig {
	std::string subcommand;
	std::string input;
	std::string output;
	std::uint64_t seed = 0;
	double relax = 0.5;
	int quantiles = 4;
	int trials = 10;
	double z_value = 1.96;
	int horizon = 12;
	int em_iterations = 10;
	std::optional<int> periodicity;
	std::string fallback = "relax";
	std::string format = "json";
	int threads = 1;
	bool shared_fit = false;

	// forecast / explain
	std::string company = "all";
	bool include_trials = false;
	bool include_provenance = false;
	int step = 1;
	std::optional<int> trial;

	// evaluate
	std::string plan = "holdout";
	int holdout = 12;
	int every = 1;
	int min_history = 3;

	// synth
	int companies = 50;
	int min_length = 36;
	int max_length = 36;
	int max_start_offset = 24;
	std::string granularity = "monthly";
	double noise = 0.0;
};

class UsageError : public Error {
public:
	using Error::Error;
};

Json config_json(const RunConfig &rc, int periodicity) {
	Json j;
	j["subcommand"] = rc.subcommand;
	if (!rc.input.empty()) {
		j["input"] = rc.input;
	}
	j["seed"] = rc.seed;
	if (rc.subcommand == "synth") {
		j["companies"] = rc.companies;
		j["granularity"] = rc.granularity;
		j["min_length"] = rc.min_length;
		j["max_length"] = rc.max_length;
		j["max_start_offset"] = rc.max_start_offset;
		j["measurement_noise"] = rc.noise;
		return j;
	}
	j["periodicity"] = periodicity;
	if (rc.subcommand == "validate") {
		return j;
	}
	j["relax_r"] = rc.relax;
	j["quantiles"] = rc.quantiles;
	j["trials"] = rc.trials;
	j["z_value"] = rc.z_value;
	j["horizon"] = rc.horizon;
	j["em_iterations"] = rc.em_iterations;
	j["fallback"] = rc.fallback;
	j["shared_fit"] = rc.shared_fit;
	if (rc.subcommand == "evaluate") {
		j["plan"] = rc.plan;
		if (rc.plan == "holdout") {
			j["holdout"] = rc.holdout;
		} else {
			j["every"] = rc.every;
		}
		j["min_history"] = rc.min_history;
	} else {
		j["company"] = rc.company;
	}
	if (rc.subcommand == "explain") {
		j["step"] = rc.step;
		if (rc.trial) {
			j["trial"] = *rc.trial;
		}
	}
	return j;
}

Dataset load_dataset(const RunConfig &rc) {
	std::ifstream in(rc.input);
	if (!in) {
		throw UsageError("cannot open input file '" + rc.input + "'");
	}
	auto raw = ingest_csv(in);
	if (raw.empty()) {
		throw ValidationError("input has a header but no data rows");
	}
	const int p = rc.periodicity.value_or(periods_per_year(raw.front().booked.front().date.granularity()));
	if (p < 1) {
		throw UsageError("--periodicity must be >= 1");
	}
	return build_dataset(std::move(raw), p);
}

ForecastConfig forecast_config(const RunConfig &rc, int periodicity) {
	ForecastConfig cfg;
	cfg.horizon = rc.horizon;
	cfg.trials = rc.trials;
	cfg.z_value = rc.z_value;
	cfg.seed = rc.seed;
	cfg.em_iterations = rc.em_iterations;
	cfg.shared_fit = rc.shared_fit;
	cfg.threads = rc.threads;
	cfg.measure.relax = rc.relax;
	cfg.measure.quantiles = rc.quantiles;
	cfg.measure.periodicity = periodicity;
	cfg.measure.fallback = fallback_from_string(rc.fallback);
	cfg.validate();
	return cfg;
}

// Artifacts are buffered and written once, after all work succeeded.
void emit(const RunConfig &rc, std::ostream &out, const std::string &text) {
	if (rc.output.empty() || rc.output == "-") {
		out << text;
		return;
	}
	std::ofstream f(rc.output, std::ios::binary);
	if (!f) {
		throw UsageError("cannot open output file '" + rc.output + "'");
	}
	f << text;
	if (!f) {
		throw Error("failed writing '" + rc.output + "'");
	}
}

std::string csv_preamble(const Json &config) {
	return "# config: " + config.dump() + "\n";
}

std::vector<const CompanySeries *> select_companies(const Dataset &dataset, const std::string &company) {
	std::vector<const CompanySeries *> out;
	if (company == "all") {
		for (const auto &[id, c] : dataset.companies()) {
			out.push_back(&c);
		}
		return out;
	}
	if (!dataset.contains(company)) {
		throw ValidationError("unknown company '" + company + "'");
	}
	out.push_back(&dataset.company(company));
	return out;
}

int cmd_validate(const RunConfig &rc, std::ostream &out) {
	const auto dataset = load_dataset(rc);
	Json j;
	j["config"] = config_json(rc, dataset.periodicity());
	j["errors"] = 0;
	j["granularity"] = to_string(dataset.granularity());
	j["periodicity"] = dataset.periodicity();
	j["companies"] = dataset.companies().size();
	std::size_t points = 0;
	for (const auto &[id, c] : dataset.companies()) {
		points += c.booked.size();
	}
	j["booked_points"] = points;
	j["tuples"] = dataset.tuples().size();
	Json warnings = Json::array();
	for (const auto &w : dataset.warnings()) {
		warnings.push_back({{"company_id", w.company_id}, {"message", w.message}});
	}
	j["warnings"] = std::move(warnings);
	emit(rc, out, j.dump(2) + "\n");
	return 0;
}

int cmd_forecast(const RunConfig &rc, std::ostream &out, std::ostream &err) {
	const auto dataset = load_dataset(rc);
	const auto cfg = forecast_config(rc, dataset.periodicity());
	const auto config = config_json(rc, dataset.periodicity());

	std::vector<ForecastResult> results;
	int failures = 0;
	for (const auto *c : select_companies(dataset, rc.company)) {
		try {
			results.push_back(forecast_with_confidence(dataset, *c, cfg));
		} catch (const Error &e) {
			if (rc.company != "all") {
				throw;
			}
			++failures;
			err << "warning: " << c->profile.company_id << ": " << e.what() << '\n';
		}
	}

	if (rc.format == "csv") {
		std::ostringstream s;
		s << csv_preamble(config);
		bool first = true;
		for (const auto &r : results) {
			std::ostringstream one;
			write_forecast_csv(one, r);
			auto text = one.str();
			if (!first) {
				text.erase(0, text.find('\n') + 1);
			}
			first = false;
			s << text;
		}
		emit(rc, out, s.str());
	} else {
		Json j;
		j["config"] = config;
		Json arr = Json::array();
		for (const auto &r : results) {
			arr.push_back(to_json(r, {rc.include_trials, rc.include_provenance}));
		}
		j["forecasts"] = std::move(arr);
		j["failed_companies"] = failures;
		emit(rc, out, j.dump(2) + "\n");
	}
	return results.empty() ? 1 : 0;
}

void print_summary(std::ostream &os, const MetricReport &report) {
	auto cell = [](const std::optional<double> &v) {
		if (!v) {
			return std::string("n/a");
		}
		char buf[32];
		std::snprintf(buf, sizeof buf, "%.4f", *v);
		return std::string(buf);
	};
	os << std::left << std::setw(14) << "method" << std::right << std::setw(12) << "RMSE" << std::setw(10) << "MAPE"
	   << std::setw(10) << "PCC" << std::setw(16) << "NLL" << std::setw(8) << "ACC" << std::setw(8) << "n" << '\n';
	for (const auto &m : report.methods) {
		os << std::left << std::setw(14) << m.name << std::right << std::setw(12) << cell(m.point.rmse)
		   << std::setw(10) << cell(m.point.mape) << std::setw(10) << cell(m.point.pcc) << std::setw(16)
		   << cell(m.distribution.nll) << std::setw(8) << cell(m.distribution.acc) << std::setw(8) << m.point.n << '\n';
	}
	os << "common cells: " << report.common_cells.size() << ", common points: " << report.common_points << '\n';
}

int cmd_evaluate(const RunConfig &rc, std::ostream &out, std::ostream &err) {
	const auto dataset = load_dataset(rc);
	const auto cfg = forecast_config(rc, dataset.periodicity());
	const auto config = config_json(rc, dataset.periodicity());

	EvalPlan plan;
	if (rc.plan == "holdout") {
		plan = EvalPlan::holdout(dataset, rc.holdout, rc.horizon, rc.min_history);
	} else {
		plan = EvalPlan::rolling(dataset, rc.horizon, rc.every, rc.min_history);
	}
	if (plan.cutoffs.empty()) {
		throw ValidationError("no company has enough history for the evaluation plan");
	}
	std::vector<NamedForecaster> methods{{"sire", sire_forecaster(cfg)},
	                                     {"persistence", persistence_forecaster(dataset.periodicity())}};
	const auto report = rolling_origin(dataset, methods, plan, rc.threads);

	if (rc.format == "csv") {
		std::ostringstream s;
		s << csv_preamble(config);
		write_report_csv(s, report);
		emit(rc, out, s.str());
	} else {
		Json j;
		j["config"] = config;
		j["report"] = to_json(report);
		emit(rc, out, j.dump(2) + "\n");
	}
	print_summary(rc.output.empty() || rc.output == "-" ? err : out, report);
	for (const auto &m : report.methods) {
		if (m.leakage_violations > 0) {
			err << "error: " << m.name << " used " << m.leakage_violations << " peer records dated after a cutoff\n";
			return 1;
		}
	}
	return 0;
}

int cmd_explain(const RunConfig &rc, std::ostream &out) {
	if (rc.company == "all") {
		throw UsageError("explain needs --company");
	}
	if (rc.step < 1) {
		throw UsageError("--step is 1-based");
	}
	const auto dataset = load_dataset(rc);
	RunConfig effective = rc;
	effective.horizon = std::max(rc.horizon, rc.step);
	const auto cfg = forecast_config(effective, dataset.periodicity());
	const auto config = config_json(effective, dataset.periodicity());
	if (rc.trial && (*rc.trial < 0 || *rc.trial >= cfg.trials)) {
		throw UsageError("--trial must be in [0, " + std::to_string(cfg.trials) + ")");
	}

	const auto &focus = dataset.company(select_companies(dataset, rc.company).front()->profile.company_id);
	const auto result = forecast_with_confidence(dataset, focus, cfg);
	const auto idx = static_cast<std::size_t>(rc.step - 1);
	const auto &step = result.steps.at(idx);

	Json j;
	j["config"] = config;
	j["company_id"] = result.company_id;
	j["step"] = rc.step;
	j["date"] = step.date.to_string();
	j["mean"] = step.mean;
	j["lower"] = step.lower;
	j["upper"] = step.upper;
	bool all_precede = true;
	Json trials = Json::array();
	for (std::size_t m = 0; m < result.provenance.size(); ++m) {
		if (rc.trial && static_cast<int>(m) != *rc.trial) {
			continue;
		}
		const auto &draw = result.provenance[m].at(idx);
		for (const auto &peer : draw.peers) {
			all_precede = all_precede && peer.date < step.date;
		}
		Json t = to_json(draw);
		t["trial"] = m;
		trials.push_back(std::move(t));
	}
	j["peers_precede_step"] = all_precede;
	j["trials"] = std::move(trials);
	emit(rc, out, j.dump(2) + "\n");
	return 0;
}

int cmd_synth(const RunConfig &rc, std::ostream &out) {
	CohortSpec spec;
	spec.companies = rc.companies;
	spec.min_length = rc.min_length;
	spec.max_length = rc.max_length;
	spec.max_start_offset = rc.max_start_offset;
	spec.measurement_noise = rc.noise;
	spec.seed = rc.seed;
	if (rc.granularity == "yearly") {
		spec.granularity = Granularity::Yearly;
		spec.first_start = CalendarDate::yearly(2000);
		for (auto &s : spec.sectors) {
			s.decay = 0.7;
			s.growth_noise = 0.05;
		}
	}
	spec.validate();
	const auto series = generate_cohort_series(spec);
	std::ostringstream s;
	s << csv_preamble(config_json(rc, spec.periodicity()));
	write_csv(s, series);
	emit(rc, out, s.str());
	return 0;
}

void add_model_options(CLI::App &sub, RunConfig &rc) {
	sub.add_option("--relax-r", rc.relax, "Revenue band half-width r")->check(CLI::Range(0.0, 1.0));
	sub.add_option("--quantiles", rc.quantiles, "Growth quantile buckets n")->check(CLI::PositiveNumber);
	sub.add_option("--trials", rc.trials, "Trials M")->check(CLI::Range(2, 100000));
	sub.add_option("--z-value", rc.z_value, "Band multiplier zeta")->check(CLI::PositiveNumber);
	sub.add_option("--horizon", rc.horizon, "Forecast horizon in periods")->check(CLI::PositiveNumber);
	sub.add_option("--em-iters", rc.em_iterations, "EM iterations")->check(CLI::NonNegativeNumber);
	sub.add_option("--fallback", rc.fallback, "Empty measuring set policy")
	    ->check(CLI::IsMember({"strict", "relax"}));
	sub.add_flag("--shared-fit", rc.shared_fit, "Fit the history once and share it across trials");
	sub.add_option("--threads", rc.threads, "Worker threads")->check(CLI::PositiveNumber);
	sub.add_option("--format", rc.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

void add_io_options(CLI::App &sub, RunConfig &rc, bool needs_input) {
	auto *in = sub.add_option("--input", rc.input, "Ingest CSV (company_id,date,revenue,sector,customer_focus)");
	if (needs_input) {
		in->required()->check(CLI::ExistingFile);
	}
	sub.add_option("--output", rc.output, "Output path (default stdout)");
	sub.add_option("--seed", rc.seed, "RNG seed");
	sub.add_option("--periodicity", rc.periodicity, "YoY periodicity p (default from date granularity)")
	    ->check(CLI::PositiveNumber);
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
	RunConfig rc;
	CLI::App app{"Simulation-informed revenue extrapolation", "sire"};
	app.require_subcommand(1);

	auto *validate = app.add_subcommand("validate", "Ingest a dataset and report its shape");
	add_io_options(*validate, rc, true);

	auto *forecast = app.add_subcommand("forecast", "Forecast one company or all companies");
	add_io_options(*forecast, rc, true);
	add_model_options(*forecast, rc);
	forecast->add_option("--company", rc.company, "Company id, or 'all'");
	forecast->add_flag("--include-trials", rc.include_trials, "Embed the trial matrix");
	forecast->add_flag("--include-provenance", rc.include_provenance, "Embed per-step peer provenance");

	auto *evaluate = app.add_subcommand("evaluate", "Rolling-origin backtest against persistence");
	add_io_options(*evaluate, rc, true);
	add_model_options(*evaluate, rc);
	evaluate->add_option("--plan", rc.plan, "Cutoff plan")->check(CLI::IsMember({"holdout", "rolling"}));
	evaluate->add_option("--holdout", rc.holdout, "Held-out periods per company (holdout plan)")
	    ->check(CLI::PositiveNumber);
	evaluate->add_option("--every", rc.every, "Cutoff spacing (rolling plan)")->check(CLI::PositiveNumber);
	evaluate->add_option("--min-history", rc.min_history, "Minimum booked points at a cutoff")
	    ->check(CLI::PositiveNumber);

	auto *explain = app.add_subcommand("explain", "Dump the peer provenance behind one forecast step");
	add_io_options(*explain, rc, true);
	add_model_options(*explain, rc);
	explain->add_option("--company", rc.company, "Company id")->required();
	explain->add_option("--step", rc.step, "Horizon step, 1-based")->required();
	explain->add_option("--trial", rc.trial, "Only this trial (default all)");

	auto *synth = app.add_subcommand("synth", "Generate a synthetic cohort in the ingest format");
	synth->add_option("--output", rc.output, "Output path (default stdout)");
	synth->add_option("--seed", rc.seed, "RNG seed");
	synth->add_option("--companies", rc.companies, "Number of companies")->check(CLI::PositiveNumber);
	synth->add_option("--min-length", rc.min_length, "Shortest series")->check(CLI::PositiveNumber);
	synth->add_option("--max-length", rc.max_length, "Longest series")->check(CLI::PositiveNumber);
	synth->add_option("--max-start-offset", rc.max_start_offset, "Start stagger in periods")
	    ->check(CLI::NonNegativeNumber);
	synth->add_option("--granularity", rc.granularity, "Date granularity")
	    ->check(CLI::IsMember({"monthly", "yearly"}));
	synth->add_option("--noise", rc.noise, "Log-normal booking noise std")->check(CLI::NonNegativeNumber);

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		return app.exit(e, out, err);
	}
	for (auto *sub : app.get_subcommands()) {
		rc.subcommand = sub->get_name();
	}
	if (synth->parsed() && synth->count("--max-length") == 0 && rc.min_length > rc.max_length) {
		rc.max_length = rc.min_length;
	}

	try {
		if (rc.subcommand == "validate") {
			return cmd_validate(rc, out);
		}
		if (rc.subcommand == "forecast") {
			return cmd_forecast(rc, out, err);
		}
		if (rc.subcommand == "evaluate") {
			return cmd_evaluate(rc, out, err);
		}
		if (rc.subcommand == "explain") {
			return cmd_explain(rc, out);
		}
		return cmd_synth(rc, out);
	} catch (const UsageError &e) {
		err << "usage error: " << e.what() << '\n';
		return 2;
	} catch (const ValidationError &e) {
		err << "validation error: " << e.what() << '\n';
		return 3;
	} catch (const std::exception &e) {
		err << "error: " << e.what() << '\n';
		return 1;
	}
}

} // namespace sire::cli

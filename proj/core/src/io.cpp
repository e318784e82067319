#include "sire/io.hpp"

#include "sire/errors.hpp"

#include <iomanip>
#include <limits>
#include <sstream>

namespace sire {

std::string to_string(FallbackPolicy policy) {
	return policy == FallbackPolicy::Strict ? "strict" : "relax";
}

FallbackPolicy fallback_from_string(const std::string &text) {
	if (text == "strict") {
		return FallbackPolicy::Strict;
	}
	if (text == "relax") {
		return FallbackPolicy::Relax;
	}
	throw ValidationError("unknown fallback policy '" + text + "' (expected strict or relax)");
}

Json to_json(const Dataset &dataset) {
	Json j;
	j["periodicity"] = dataset.periodicity();
	j["granularity"] = to_string(dataset.granularity());
	Json companies = Json::array();
	for (const auto &[id, c] : dataset.companies()) {
		Json cj;
		cj["company_id"] = id;
		cj["sector"] = c.profile.sector;
		cj["customer_focus"] = c.profile.customer_focus;
		Json booked = Json::array();
		for (const auto &pt : c.booked) {
			booked.push_back({{"date", pt.date.to_string()}, {"revenue", pt.revenue}});
		}
		cj["booked"] = std::move(booked);
		cj["tuples"] = Json::array();
		companies.push_back(std::move(cj));
	}
	// Tuples are grouped under their company, in panel order.
	std::map<std::string, std::size_t> index;
	for (std::size_t i = 0; i < companies.size(); ++i) {
		index[companies[i]["company_id"].get<std::string>()] = i;
	}
	for (const auto &t : dataset.tuples()) {
		companies[index.at(t.company_id)]["tuples"].push_back({{"period_index", t.period_index},
		                                                       {"date", t.date.to_string()},
		                                                       {"u", t.revenue},
		                                                       {"z", t.growth},
		                                                       {"z_next", t.next_growth}});
	}
	j["companies"] = std::move(companies);
	Json warnings = Json::array();
	for (const auto &w : dataset.warnings()) {
		warnings.push_back({{"company_id", w.company_id}, {"message", w.message}});
	}
	j["warnings"] = std::move(warnings);
	return j;
}

Dataset dataset_from_json(const Json &j) {
	try {
		const int periodicity = j.at("periodicity").get<int>();
		const auto g = j.at("granularity").get<std::string>();
		if (g != "monthly" && g != "yearly") {
			throw ValidationError("unknown granularity '" + g + "'");
		}
		const Granularity granularity = g == "monthly" ? Granularity::Monthly : Granularity::Yearly;
		std::vector<CompanySeries> companies;
		std::vector<RevenueTuple> tuples;
		for (const auto &cj : j.at("companies")) {
			CompanySeries c;
			c.profile = {cj.at("company_id").get<std::string>(), cj.at("sector").get<std::string>(),
			             cj.at("customer_focus").get<std::string>()};
			for (const auto &pj : cj.at("booked")) {
				c.booked.push_back({CalendarDate::parse(pj.at("date").get<std::string>()), pj.at("revenue").get<double>()});
			}
			for (const auto &tj : cj.at("tuples")) {
				tuples.push_back({c.profile.company_id, tj.at("period_index").get<int>(),
				                  CalendarDate::parse(tj.at("date").get<std::string>()), tj.at("u").get<double>(),
				                  tj.at("z").get<double>(), tj.at("z_next").get<double>()});
			}
			companies.push_back(std::move(c));
		}
		std::vector<IngestWarning> warnings;
		if (j.contains("warnings")) {
			for (const auto &wj : j.at("warnings")) {
				warnings.push_back({wj.at("company_id").get<std::string>(), wj.at("message").get<std::string>()});
			}
		}
		return Dataset::from_parts(std::move(companies), std::move(tuples), periodicity, granularity,
		                           std::move(warnings));
	} catch (const nlohmann::json::exception &e) {
		throw ValidationError(std::string("dataset JSON schema violation: ") + e.what());
	}
}

namespace {

Json matrix_json(const lds::Mat5 &m) {
	Json rows = Json::array();
	for (int r = 0; r < lds::kStateDim; ++r) {
		Json row = Json::array();
		for (int c = 0; c < lds::kStateDim; ++c) {
			row.push_back(m(r, c));
		}
		rows.push_back(std::move(row));
	}
	return rows;
}

lds::Mat5 matrix_from_json(const Json &j) {
	lds::Mat5 m;
	for (int r = 0; r < lds::kStateDim; ++r) {
		for (int c = 0; c < lds::kStateDim; ++c) {
			m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
		}
	}
	return m;
}

} // namespace

Json to_json(const lds::ModelParams &params) {
	Json mu = Json::array();
	for (int i = 0; i < lds::kStateDim; ++i) {
		mu.push_back(params.mu(i));
	}
	return {{"Q", matrix_json(params.Q)}, {"R", params.R}, {"mu", std::move(mu)}, {"Omega", matrix_json(params.Omega)}};
}

lds::ModelParams params_from_json(const Json &j) {
	try {
		lds::ModelParams p;
		p.Q = matrix_from_json(j.at("Q"));
		p.R = j.at("R").get<double>();
		for (int i = 0; i < lds::kStateDim; ++i) {
			p.mu(i) = j.at("mu").at(static_cast<std::size_t>(i)).get<double>();
		}
		p.Omega = matrix_from_json(j.at("Omega"));
		return p;
	} catch (const nlohmann::json::exception &e) {
		throw ValidationError(std::string("model parameter JSON schema violation: ") + e.what());
	}
}

Json to_json(const MeasurementDraw &draw) {
	Json peers = Json::array();
	for (const auto &p : draw.peers) {
		peers.push_back({{"company_id", p.company_id},
		                 {"date", p.date.to_string()},
		                 {"u", p.revenue},
		                 {"z", p.growth},
		                 {"z_next", p.next_growth}});
	}
	return {{"measured_y", draw.measured_y},
	        {"z_hat", draw.z_hat},
	        {"z_anchor", draw.z_anchor},
	        {"base", draw.base},
	        {"periodicity", draw.periodicity},
	        {"cutoff", draw.cutoff.to_string()},
	        {"relax_used", draw.relax_used},
	        {"business_filter", draw.business_filter},
	        {"growth_filter", draw.growth_filter},
	        {"fallback_level", draw.fallback_level},
	        {"peers", std::move(peers)}};
}

Json to_json(const MeasureConfig &cfg) {
	return {{"relax_r", cfg.relax},
	        {"quantiles", cfg.quantiles},
	        {"periodicity", cfg.periodicity},
	        {"fallback", to_string(cfg.fallback)},
	        {"exclude_focus", cfg.exclude_focus},
	        {"bandwidth", cfg.bandwidth == BandwidthMode::Variance ? "variance" : "stddev"}};
}

Json to_json(const ForecastConfig &cfg) {
	return {{"horizon", cfg.horizon},       {"trials", cfg.trials},         {"z_value", cfg.z_value},
	        {"seed", cfg.seed},             {"em_iterations", cfg.em_iterations},
	        {"shared_fit", cfg.shared_fit}, {"measure", to_json(cfg.measure)}};
}

Json to_json(const ForecastResult &result, const ForecastJsonOptions &options) {
	Json j;
	j["company_id"] = result.company_id;
	j["periodicity"] = result.periodicity;
	j["horizon"] = result.horizon;
	j["config"] = to_json(result.config);
	Json steps = Json::array();
	for (const auto &s : result.steps) {
		steps.push_back({{"date", s.date.to_string()},
		                 {"mean", s.mean},
		                 {"margin", s.margin},
		                 {"lower", s.lower},
		                 {"upper", s.upper},
		                 {"stddev", s.stddev}});
	}
	j["steps"] = std::move(steps);
	j["base_floor_events"] = result.base_floor_events;
	j["growth_fallbacks"] = result.growth_fallbacks;
	if (options.include_trials) {
		Json rows = Json::array();
		for (Eigen::Index m = 0; m < result.trajectories.rows(); ++m) {
			Json row = Json::array();
			for (Eigen::Index h = 0; h < result.trajectories.cols(); ++h) {
				row.push_back(result.trajectories(m, h));
			}
			rows.push_back(std::move(row));
		}
		j["trials"] = std::move(rows);
	}
	if (options.include_provenance) {
		Json trials = Json::array();
		for (const auto &trial : result.provenance) {
			Json steps_j = Json::array();
			for (const auto &draw : trial) {
				steps_j.push_back(to_json(draw));
			}
			trials.push_back(std::move(steps_j));
		}
		j["provenance"] = std::move(trials);
	}
	return j;
}

namespace {

Json optional_json(const std::optional<double> &v) {
	return v ? Json(*v) : Json(nullptr);
}

} // namespace

Json to_json(const MetricReport &report) {
	Json j;
	j["horizon"] = report.horizon;
	j["common_points"] = report.common_points;
	Json cells = Json::array();
	for (const auto &k : report.common_cells) {
		cells.push_back({{"company_id", k.company_id}, {"cutoff", k.cutoff.to_string()}});
	}
	j["common_cells"] = std::move(cells);
	Json methods = Json::array();
	for (const auto &m : report.methods) {
		Json mj;
		mj["name"] = m.name;
		mj["metrics"] = {{"RMSE", m.point.rmse},
		                 {"MAPE", optional_json(m.point.mape)},
		                 {"PCC", optional_json(m.point.pcc)},
		                 {"NLL", m.distribution.nll},
		                 {"ACC", m.distribution.acc},
		                 {"n", m.point.n}};
		mj["failed_cells"] = m.failed_cells;
		mj["provenance_records"] = m.provenance_records;
		mj["leakage_violations"] = m.leakage_violations;
		Json cj = Json::array();
		for (const auto &cell : m.cells) {
			Json c;
			c["company_id"] = cell.key.company_id;
			c["cutoff"] = cell.key.cutoff.to_string();
			c["ok"] = cell.ok;
			if (!cell.ok) {
				c["error"] = cell.error;
			}
			Json pts = Json::array();
			for (const auto &p : cell.points) {
				pts.push_back({{"date", p.date.to_string()},
				               {"step", p.step},
				               {"actual", p.actual},
				               {"mean", p.mean},
				               {"stddev", p.stddev},
				               {"lower", p.lower},
				               {"upper", p.upper}});
			}
			c["points"] = std::move(pts);
			cj.push_back(std::move(c));
		}
		mj["cells"] = std::move(cj);
		methods.push_back(std::move(mj));
	}
	j["methods"] = std::move(methods);
	return j;
}

namespace {

std::string fmt_optional(const std::optional<double> &v) {
	if (!v) {
		return "";
	}
	std::ostringstream s;
	s << std::setprecision(std::numeric_limits<double>::max_digits10) << *v;
	return s.str();
}

std::string fmt(double v) {
	return fmt_optional(v);
}

} // namespace

void write_report_csv(std::ostream &out, const MetricReport &report) {
	out << "method,metric,value,count\n";
	for (const auto &m : report.methods) {
		const auto n = std::to_string(m.point.n);
		out << m.name << ",RMSE," << fmt(m.point.rmse) << ',' << n << '\n';
		out << m.name << ",MAPE," << fmt_optional(m.point.mape) << ',' << (m.point.n - m.point.mape_excluded) << '\n';
		out << m.name << ",PCC," << fmt_optional(m.point.pcc) << ',' << n << '\n';
		out << m.name << ",NLL," << fmt(m.distribution.nll) << ',' << m.distribution.n << '\n';
		out << m.name << ",ACC," << fmt(m.distribution.acc) << ',' << m.distribution.n << '\n';
	}
}

void write_forecast_csv(std::ostream &out, const ForecastResult &result) {
	out << "company_id,date,mean,lower,upper,margin,stddev\n";
	for (const auto &s : result.steps) {
		out << result.company_id << ',' << s.date.to_string() << ',' << fmt(s.mean) << ',' << fmt(s.lower) << ','
		    << fmt(s.upper) << ',' << fmt(s.margin) << ',' << fmt(s.stddev) << '\n';
	}
}

} // namespace sire

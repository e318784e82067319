#pragma once

#include "sire/dataset.hpp"
#include "sire/evaluation.hpp"
#include "sire/extrapolation.hpp"
#include "sire/lds.hpp"
#include "sire/measurement.hpp"

#include <nlohmann/json.hpp>

#include <ostream>

namespace sire {

using Json = nlohmann::ordered_json;

// Dataset: {periodicity, granularity, companies: [{company_id, sector, customer_focus, booked, tuples}], warnings}
Json to_json(const Dataset &dataset);
Dataset dataset_from_json(const Json &j);

// Matrices are row-major nested arrays.
Json to_json(const lds::ModelParams &params);
lds::ModelParams params_from_json(const Json &j);

// {measured_y, z_hat, z_anchor, base, periodicity, cutoff, relax_used, business_filter, growth_filter,
//  fallback_level, peers: [{company_id, date, u, z, z_next}]}
Json to_json(const MeasurementDraw &draw);

Json to_json(const MeasureConfig &cfg);
Json to_json(const ForecastConfig &cfg);

struct ForecastJsonOptions {
	bool include_trials = false;
	bool include_provenance = false;
};

// {company_id, periodicity, horizon, config, steps: [{date, mean, margin, lower, upper, stddev}], trials?, provenance?}
Json to_json(const ForecastResult &result, const ForecastJsonOptions &options = {});

Json to_json(const MetricReport &report);

/// One row per metric per method: method,metric,value,count.
void write_report_csv(std::ostream &out, const MetricReport &report);

/// Per-step band, suitable for plotting: date,mean,lower,upper,margin,stddev.
void write_forecast_csv(std::ostream &out, const ForecastResult &result);

std::string to_string(FallbackPolicy policy);
FallbackPolicy fallback_from_string(const std::string &text);

} // namespace sire

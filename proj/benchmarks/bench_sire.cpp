#include "sire/evaluation.hpp"
#include "sire/extrapolation.hpp"
#include "sire/lds.hpp"
#include "sire/measurement.hpp"
#include "sire/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

sire::Dataset cohort(int companies, int length) {
	sire::CohortSpec spec;
	spec.companies = companies;
	spec.min_length = length;
	spec.max_length = length;
	spec.max_start_offset = 48;
	spec.seed = 1;
	return sire::generate_cohort(spec);
}

const sire::CompanySeries &latest(const sire::Dataset &d) {
	const sire::CompanySeries *best = nullptr;
	for (const auto &[id, c] : d.companies()) {
		if (!best || best->booked.front().date < c.booked.front().date) {
			best = &c;
		}
	}
	return *best;
}

std::vector<double> noisy_ramp(std::size_t T) {
	std::mt19937_64 rng(7);
	std::normal_distribution<double> e(0.0, 0.5);
	std::vector<double> y(T);
	for (std::size_t t = 0; t < T; ++t) {
		y[t] = 10.0 + 0.4 * static_cast<double>(t) + e(rng);
	}
	return y;
}

void BM_FilterSmooth(benchmark::State &state) {
	const auto y = noisy_ramp(static_cast<std::size_t>(state.range(0)));
	sire::lds::ModelParams p;
	p.mu(0) = p.mu(1) = 10.0;
	for (auto _ : state) {
		const auto f = sire::lds::forward_filter(p, y);
		benchmark::DoNotOptimize(sire::lds::backward_smooth(f, p));
	}
	state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterSmooth)->Arg(24)->Arg(36)->Arg(120);

void BM_Em(benchmark::State &state) {
	const auto y = noisy_ramp(static_cast<std::size_t>(state.range(0)));
	sire::lds::ModelParams p;
	p.mu(0) = p.mu(1) = 10.0;
	for (auto _ : state) {
		benchmark::DoNotOptimize(sire::lds::fit_em(y, p, 10));
	}
}
BENCHMARK(BM_Em)->Arg(24)->Arg(36);

void BM_Measure(benchmark::State &state) {
	const auto d = cohort(50, 36);
	const auto &focus = latest(d);
	sire::MeasureConfig cfg;
	sire::Rng rng(3);
	const auto &last = focus.booked.back();
	for (auto _ : state) {
		benchmark::DoNotOptimize(
		    sire::measure_with_provenance(d, focus.profile, last.revenue, 1.8, last.date, cfg, rng));
	}
}
BENCHMARK(BM_Measure);

// ~1,500 data points in the panel, one company trained and forecast.
void BM_ForecastOneCompany(benchmark::State &state) {
	const auto d = cohort(42, 36);
	const auto &focus = latest(d);
	sire::ForecastConfig cfg;
	cfg.horizon = 12;
	cfg.trials = static_cast<int>(state.range(0));
	for (auto _ : state) {
		benchmark::DoNotOptimize(sire::forecast_with_confidence(d, focus, cfg));
	}
}
BENCHMARK(BM_ForecastOneCompany)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State &state) {
	const auto d = cohort(50, 48);
	sire::ForecastConfig cfg;
	const std::vector<sire::NamedForecaster> methods{{"sire", sire::sire_forecaster(cfg)},
	                                                 {"persistence", sire::persistence_forecaster(12)}};
	const auto plan = sire::EvalPlan::holdout(d, 12, 12, 3);
	for (auto _ : state) {
		benchmark::DoNotOptimize(sire::rolling_origin(d, methods, plan));
	}
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kSecond)->Iterations(1);

} // namespace

BENCHMARK_MAIN();

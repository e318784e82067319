#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace sire {

class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Rejected input: malformed CSV rows, non-positive revenue, calendar gaps.
class ValidationError : public Error {
public:
	explicit ValidationError(const std::string &message, std::optional<std::size_t> line = std::nullopt)
	    : Error(line ? "line " + std::to_string(*line) + ": " + message : message), line_(line) {
	}

	std::optional<std::size_t> line() const {
		return line_;
	}

private:
	std::optional<std::size_t> line_;
};

/// Fewer booked points than parameter initialization needs (three).
class InsufficientHistory : public Error {
public:
	using Error::Error;
};

/// Filtering stage of the measuring-set construction, in application order.
enum class FilterStage { Business, Date, Revenue, Growth };

std::string to_string(FilterStage stage);

/// No peer tuple survived the filters and the fallback policy does not allow relaxing them.
class MeasurementUnavailable : public Error {
public:
	explicit MeasurementUnavailable(FilterStage stage)
	    : Error("measurement unavailable: empty set after " + to_string(stage)), stage_(stage) {
	}

	FilterStage stage() const {
		return stage_;
	}

private:
	FilterStage stage_;
};

/// Non-positive or non-finite innovation variance, or a non-invertible noise covariance.
class NumericalDegeneracy : public Error {
public:
	NumericalDegeneracy(const std::string &what, std::optional<std::size_t> step = std::nullopt)
	    : Error(step ? what + " at step " + std::to_string(*step) : what), step_(step) {
	}

	std::optional<std::size_t> step() const {
		return step_;
	}

private:
	std::optional<std::size_t> step_;
};

/// A Monte-Carlo trial failed; the whole forecast is abandoned.
class TrialFailed : public Error {
public:
	TrialFailed(int trial, const std::string &cause)
	    : Error("trial " + std::to_string(trial) + " failed: " + cause), trial_(trial) {
	}

	int trial() const {
		return trial_;
	}

private:
	int trial_;
};

} // namespace sire

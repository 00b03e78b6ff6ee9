#pragma once

#include <string>
#include <vector>

#include "debias/estimators.hpp"
#include "debias/experiment.hpp"
#include "debias/geometry.hpp"

namespace debias {

/// Round-trip exact decimal formatting shared by every CSV writer.
std::string csv_number(double v);

/// Writes points as CSV with header `x,y`.
void write_points_csv(const std::string& path, const std::vector<Vec2>& points);

/// Reads a `x,y` CSV. Malformed rows raise errors naming the line number.
std::vector<Vec2> read_points_csv(const std::string& path);

/// Reads a `x,y,error` CSV into an evaluation sample. A missing error column
/// is a usage error (std::invalid_argument); malformed rows are runtime
/// errors naming the line number.
EvaluationSample read_points_errors_csv(const std::string& path);

/// Header: trial,true_risk,mce,ise,ise_e,coverage. Estimators that were not
/// computed are written as nan.
void write_trials_csv(const std::string& path, const ExperimentReport& report);

/// Header: n,estimator,mean_bias,mape.
void write_sweep_csv(const std::string& path, const SweepReport& report);

} // namespace debias

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "core/filter.hpp"
#include "core/forecast.hpp"
#include "core/inference.hpp"
#include "core/observations.hpp"
#include "core/synthgen.hpp"

namespace epifilter::io {

/// Proleptic Gregorian calendar date.
struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;
};

long days_from_civil(const CivilDate& cd);
CivilDate civil_from_days(long z);
CivilDate parse_date(const std::string& text);  // "YYYY-MM-DD"
std::string format_date(const CivilDate& cd);

/// Fixed numeric formatting for all CSV artifacts: 12 significant digits.
std::string format_number(double x);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

/// Reads `date,active_cases` and normalizes counts by the population.
/// Day 0 is the first row's date.
ObservationSeries ingest(const std::string& path, double population);

/// Inverse of ingest: one row per observation, dates offset from start_date.
void write_dataset(const std::string& path, const ObservationSeries& obs, double population,
                   const CivilDate& start_date);

void write_truth_csv(const std::string& path, const synthgen::SyntheticTruth& truth);
void write_meta_json(const std::string& path, const synthgen::ScenarioConfig& cfg,
                     const synthgen::SyntheticTruth& truth, double population,
                     const CivilDate& start_date);

void write_posterior_csv(const std::string& path, const inference::PosteriorEnsemble& ens);
Eigen::MatrixXd read_posterior_csv(const std::string& path);  // columns: phi(4) + loglik

void write_summary_json(const std::string& path, const inference::PosteriorSummary& summary,
                        const std::vector<inference::StageDiagnostics>& stages);
Eigen::VectorXd read_map_from_summary(const std::string& path);

/// One row per day: mean/std of S, I, R, beta plus delta-method R_e moments.
void write_states_csv(const std::string& path, const filter::FilterRun& run,
                      const model::StaticParams& p);

/// One row per daily mark; the day column is absolute (grid origin at 0).
void write_forecast_csv(const std::string& path, const forecast::ForecastResult& fc, double dt);

}  // namespace epifilter::io

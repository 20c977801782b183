#include "core/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "core/errors.hpp"

namespace epifilter::io {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
  fail(ErrorKind::Parse, path + ":" + std::to_string(line) + ": " + what);
}

/// Strips one trailing carriage return so CRLF files parse cleanly.
std::string chomp(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& text, const std::string& path, std::size_t line,
                    const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) parse_fail(path, line, std::string("trailing characters in ") + what);
    return v;
  } catch (const std::exception&) {
    parse_fail(path, line, std::string("cannot parse ") + what + " '" + text + "'");
  }
}

std::vector<std::string> split_csv(const std::string& row) {
  std::vector<std::string> out;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!row.empty() && row.back() == ',') out.emplace_back();
  return out;
}

long steps_per_day(double dt) {
  const long steps = std::lround(1.0 / dt);
  if (steps < 1 || std::abs(steps * dt - 1.0) > 1e-6)
    fail(ErrorKind::Alignment,
         "dt = " + std::to_string(dt) + " does not subdivide a day evenly");
  return steps;
}

}  // namespace

long days_from_civil(const CivilDate& cd) {
  long y = cd.year;
  const unsigned m = static_cast<unsigned>(cd.month);
  const unsigned d = static_cast<unsigned>(cd.day);
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

CivilDate civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

CivilDate parse_date(const std::string& text) {
  int y = 0, m = 0, d = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3 || text.size() != 10)
    fail(ErrorKind::Parse, "invalid ISO-8601 date '" + text + "' (want YYYY-MM-DD)");
  const CivilDate cd{y, m, d};
  if (m < 1 || m > 12 || d < 1) fail(ErrorKind::Parse, "invalid calendar date '" + text + "'");
  const CivilDate back = civil_from_days(days_from_civil(cd));
  if (back.year != y || back.month != m || back.day != d)
    fail(ErrorKind::Parse, "invalid calendar date '" + text + "'");
  return cd;
}

std::string format_date(const CivilDate& cd) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", cd.year, cd.month, cd.day);
  return buf;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Config, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) fail(ErrorKind::Config, "failed writing '" + path + "'");
}

ObservationSeries ingest(const std::string& path, double population) {
  if (!(population > 0.0)) fail(ErrorKind::InvalidArgument, "ingest: population must be positive");

  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");

  std::string row;
  std::size_t line = 0;
  if (!std::getline(in, row)) fail(ErrorKind::Parse, path + ": empty file");
  ++line;
  if (chomp(row) != "date,active_cases")
    parse_fail(path, line, "expected header 'date,active_cases'");

  ObservationSeries obs;
  bool have_start = false;
  long start_day = 0, prev_day = 0;
  while (std::getline(in, row)) {
    ++line;
    row = chomp(row);
    if (row.empty()) continue;
    const auto cells = split_csv(row);
    if (cells.size() != 2) parse_fail(path, line, "expected 2 columns, got " +
                                                      std::to_string(cells.size()));
    CivilDate cd;
    try {
      cd = parse_date(cells[0]);
    } catch (const Error& e) {
      parse_fail(path, line, e.what());
    }
    const double count = parse_double(cells[1], path, line, "active_cases");
    if (!std::isfinite(count) || count < 0.0)
      parse_fail(path, line, "active_cases must be finite and non-negative");

    const long abs_day = days_from_civil(cd);
    if (!have_start) {
      start_day = abs_day;
      have_start = true;
    } else if (abs_day <= prev_day) {
      parse_fail(path, line, "dates must be strictly increasing");
    }
    prev_day = abs_day;
    obs.items.push_back({static_cast<double>(abs_day - start_day), count / population});
  }
  if (obs.empty()) fail(ErrorKind::Parse, path + ": no data rows");
  return obs;
}

void write_dataset(const std::string& path, const ObservationSeries& obs, double population,
                   const CivilDate& start_date) {
  if (!(population > 0.0))
    fail(ErrorKind::InvalidArgument, "write_dataset: population must be positive");
  const long start = days_from_civil(start_date);
  std::ostringstream out;
  out << "date,active_cases\n";
  for (const auto& o : obs.items) {
    const double frac = o.day - std::floor(o.day);
    if (frac > 1e-9 && frac < 1.0 - 1e-9)
      fail(ErrorKind::InvalidArgument, "write_dataset: sub-daily observations cannot be dated");
    out << format_date(civil_from_days(start + std::lround(o.day))) << ','
        << format_number(o.value * population) << '\n';
  }
  write_text(path, out.str());
}

void write_truth_csv(const std::string& path, const synthgen::SyntheticTruth& truth) {
  const long per_day = steps_per_day(truth.dt);
  std::ostringstream out;
  out << "t,S,I,R,beta\n";
  for (std::size_t k = 0; k < truth.states.size(); k += per_day) {
    const auto& x = truth.states[k];
    out << format_number(truth.times[k]) << ',' << format_number(x.s) << ','
        << format_number(x.i) << ',' << format_number(x.r) << ',' << format_number(x.beta)
        << '\n';
  }
  write_text(path, out.str());
}

void write_meta_json(const std::string& path, const synthgen::ScenarioConfig& cfg,
                     const synthgen::SyntheticTruth& truth, double population,
                     const CivilDate& start_date) {
  json j;
  j["scenario"] = {
      {"kind", synthgen::scenario_name(cfg.kind)},
      {"duration", cfg.duration},
      {"obs_days", cfg.obs_days.value_or(cfg.duration)},
      {"obs_per_day", cfg.obs_per_day},
      {"dt", cfg.dt},
      {"seed", cfg.seed},
      {"rho_true", cfg.rho_true},
      {"q_eps_true", cfg.q_eps_true},
      {"gamma", cfg.gamma},
      {"beta0", cfg.resolved_beta0()},
      {"i0", cfg.i0},
  };
  switch (cfg.kind) {
    case synthgen::ScenarioKind::RandomWalk:
      j["scenario"]["q_xi_true"] = cfg.q_xi_true;
      j["scenario"]["beta_clip_events"] = truth.beta_clip_events;
      break;
    case synthgen::ScenarioKind::Seasonal:
      j["scenario"]["amplitude"] = cfg.amplitude;
      j["scenario"]["period"] = cfg.period;
      j["scenario"]["phase"] = cfg.phase;
      break;
    case synthgen::ScenarioKind::Lockdown:
      j["scenario"]["drop_depth"] = cfg.drop_depth;
      j["scenario"]["onset_day"] = cfg.onset_day;
      j["scenario"]["onset_width"] = cfg.onset_width;
      j["scenario"]["recovery_day"] = cfg.recovery_day;
      j["scenario"]["recovery_width"] = cfg.recovery_width;
      break;
    case synthgen::ScenarioKind::Constant:
      break;
  }
  j["population"] = population;
  j["start_date"] = format_date(start_date);
  j["observations"] = truth.observations.size();
  write_text(path, j.dump(2) + "\n");
}

void write_posterior_csv(const std::string& path, const inference::PosteriorEnsemble& ens) {
  std::ostringstream out;
  out << "rho,q_xi,beta0_mean,i0_mean,loglik\n";
  for (Eigen::Index i = 0; i < ens.samples.rows(); ++i) {
    for (Eigen::Index k = 0; k < ens.samples.cols(); ++k)
      out << format_number(ens.samples(i, k)) << ',';
    out << format_number(ens.logliks[i]) << '\n';
  }
  write_text(path, out.str());
}

Eigen::MatrixXd read_posterior_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
  std::string row;
  std::size_t line = 0;
  if (!std::getline(in, row)) fail(ErrorKind::Parse, path + ": empty file");
  ++line;
  if (chomp(row) != "rho,q_xi,beta0_mean,i0_mean,loglik")
    parse_fail(path, line, "unexpected posterior_samples header");

  std::vector<std::array<double, 5>> rows;
  while (std::getline(in, row)) {
    ++line;
    row = chomp(row);
    if (row.empty()) continue;
    const auto cells = split_csv(row);
    if (cells.size() != 5) parse_fail(path, line, "expected 5 columns");
    std::array<double, 5> r{};
    for (int k = 0; k < 5; ++k) r[k] = parse_double(cells[k], path, line, "value");
    rows.push_back(r);
  }
  if (rows.empty()) fail(ErrorKind::Parse, path + ": no posterior samples");

  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), 5);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < 5; ++k) out(static_cast<Eigen::Index>(i), k) = rows[i][k];
  return out;
}

void write_summary_json(const std::string& path, const inference::PosteriorSummary& summary,
                        const std::vector<inference::StageDiagnostics>& stages) {
  json j;
  for (const auto& p : summary.params)
    j["parameters"][p.name] = {{"map", p.map}, {"mean", p.mean}, {"std", p.stddev}};
  j["log_evidence"] = summary.log_evidence;
  j["map_log_posterior"] = summary.map_log_posterior;
  j["map"] = std::vector<double>(summary.map_sample.data(),
                                 summary.map_sample.data() + summary.map_sample.size());
  j["stages"] = json::array();
  for (const auto& s : stages)
    j["stages"].push_back({{"exponent", s.exponent},
                           {"log_mean_weight", s.log_mean_weight},
                           {"weight_cov", s.weight_cov},
                           {"acceptance_rate", s.acceptance_rate}});
  write_text(path, j.dump(2) + "\n");
}

Eigen::VectorXd read_map_from_summary(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, path + ": " + e.what());
  }
  if (!j.contains("map") || !j["map"].is_array())
    fail(ErrorKind::Parse, path + ": missing 'map' array");
  const auto& arr = j["map"];
  Eigen::VectorXd phi(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (!arr[k].is_number()) fail(ErrorKind::Parse, path + ": non-numeric 'map' entry");
    phi[static_cast<Eigen::Index>(k)] = arr[k].get<double>();
  }
  return phi;
}

void write_states_csv(const std::string& path, const filter::FilterRun& run,
                      const model::StaticParams& p) {
  if (run.beliefs.empty())
    fail(ErrorKind::InvalidArgument, "write_states_csv: run has no recorded beliefs");
  const long per_day = steps_per_day(p.dt);
  std::ostringstream out;
  out << "day,S_mean,S_std,I_mean,I_std,R_mean,R_std,beta_mean,beta_std,Re_mean,Re_std\n";
  for (std::size_t k = 0; k < run.beliefs.size(); k += per_day) {
    const auto& b = run.beliefs[k];
    const auto re = filter::re_moments(b, p.gamma);
    out << format_number(static_cast<double>(k / per_day));
    for (int d = 0; d < 4; ++d)
      out << ',' << format_number(b.mean[d]) << ','
          << format_number(std::sqrt(std::max(0.0, b.cov(d, d))));
    out << ',' << format_number(re.mean) << ','
        << format_number(std::sqrt(std::max(0.0, re.variance))) << '\n';
  }
  write_text(path, out.str());
}

void write_forecast_csv(const std::string& path, const forecast::ForecastResult& fc, double dt) {
  std::ostringstream out;
  out << "day,I_mean,I_std,beta_mean,beta_std,Re_mean,Re_std\n";
  const double start_day = fc.start.time_index * dt;
  for (const auto& pt : fc.points) {
    const auto& b = pt.belief;
    out << format_number(start_day + pt.day) << ',' << format_number(b.mean[1]) << ','
        << format_number(std::sqrt(std::max(0.0, b.cov(1, 1)))) << ','
        << format_number(b.mean[3]) << ','
        << format_number(std::sqrt(std::max(0.0, b.cov(3, 3)))) << ','
        << format_number(pt.re.mean) << ','
        << format_number(std::sqrt(std::max(0.0, pt.re.variance))) << '\n';
  }
  write_text(path, out.str());
}

}  // namespace epifilter::io

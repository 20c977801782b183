/* epifilter: joint state/parameter estimation for stochastic SIR models.
 *
 * C interface to the workflow layer. All functions returning epi_status set a
 * thread-local message retrievable through epi_last_error() on failure.
 * Handles returned through out-parameters are owned by the caller and must be
 * released with the matching *_free function.
 */
#ifndef EPIFILTER_H
#define EPIFILTER_H

#include <stddef.h>
#include <stdint.h>

#if defined(EPIFILTER_BUILD) && defined(__GNUC__)
#define EPI_API __attribute__((visibility("default")))
#else
#define EPI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum epi_status {
  EPI_OK = 0,
  EPI_ERR_INVALID = 1,   /* validation, config, parse, workflow errors */
  EPI_ERR_NUMERICAL = 2  /* divergence, degenerate updates or posteriors */
} epi_status;

/* Message for the most recent failure on this thread; empty string if none. */
EPI_API const char* epi_last_error(void);
EPI_API const char* epi_version(void);

typedef struct epi_config epi_config;
typedef struct epi_observations epi_observations;
typedef struct epi_posterior epi_posterior;
typedef struct epi_track epi_track;
typedef struct epi_forecast epi_forecast;

/* ---- configuration ---- */

EPI_API epi_status epi_config_load(const char* path, epi_config** out);
EPI_API void epi_config_free(epi_config* cfg);

EPI_API epi_status epi_config_set_seed(epi_config* cfg, uint64_t seed);
EPI_API epi_status epi_config_set_output_dir(epi_config* cfg, const char* dir);
EPI_API epi_status epi_config_set_prior_only(epi_config* cfg, int enabled);
EPI_API epi_status epi_config_set_use_map(epi_config* cfg, int enabled);
EPI_API epi_status epi_config_set_horizon(epi_config* cfg, int days);

/* ---- workflows ---- */

/* Writes data.csv, truth.csv, meta.json into the config's output directory. */
EPI_API epi_status epi_generate(const epi_config* cfg);

/* Loads the configured dataset (or regenerates the scenario observations). */
EPI_API epi_status epi_ingest(const epi_config* cfg, epi_observations** out);
EPI_API size_t epi_observations_size(const epi_observations* obs);
EPI_API epi_status epi_observations_get(const epi_observations* obs, size_t idx, double* day,
                                        double* value);
EPI_API void epi_observations_free(epi_observations* obs);

/* Runs the sampler; writes posterior_samples.csv and summary.json. */
EPI_API epi_status epi_calibrate(const epi_config* cfg, epi_posterior** out);
EPI_API size_t epi_posterior_size(const epi_posterior* post);
/* phi is (rho, q_xi, beta0_mean, i0_mean). */
EPI_API epi_status epi_posterior_sample(const epi_posterior* post, size_t idx, double phi[4],
                                        double* loglik);
EPI_API epi_status epi_posterior_map(const epi_posterior* post, double phi[4]);
EPI_API double epi_posterior_log_evidence(const epi_posterior* post);
EPI_API void epi_posterior_free(epi_posterior* post);

/* Runs the filter at fixed parameters; writes states.csv. */
EPI_API epi_status epi_smooth(const epi_config* cfg, epi_track** out);
EPI_API size_t epi_track_days(const epi_track* track);
/* mean/std are (S, I, R, beta) at the given day index. */
EPI_API epi_status epi_track_day(const epi_track* track, size_t day, double mean[4],
                                 double stddev[4], double* re_mean, double* re_std);
EPI_API void epi_track_free(epi_track* track);

/* Forecasts from the final analysis belief; writes forecast.csv. */
EPI_API epi_status epi_forecast_run(const epi_config* cfg, epi_forecast** out);
EPI_API size_t epi_forecast_size(const epi_forecast* fc);
EPI_API epi_status epi_forecast_day(const epi_forecast* fc, size_t idx, double* day,
                                    double mean[4], double stddev[4], double* re_mean,
                                    double* re_std);
EPI_API void epi_forecast_free(epi_forecast* fc);

/* Reads the MAP parameter vector back from a summary.json. */
EPI_API epi_status epi_read_map(const char* summary_path, double phi[4]);

#ifdef __cplusplus
}
#endif

#endif /* EPIFILTER_H */

/*
 * C interface of the sgphonon library: phonon-induced contrast loss of a
 * Stern-Gerlach interferometer with a nanodiamond test mass.
 *
 * Objects are opaque handles created by sgp_*_create / _from_* / _preset and
 * released with the matching _free. Every fallible call returns sgp_status;
 * on failure sgp_last_error() describes the problem (thread-local, valid until
 * the next failing call on the same thread). Strings returned through char**
 * are owned by the caller and released with sgp_string_free.
 */
#ifndef SGPHONON_H
#define SGPHONON_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(SGPHONON_BUILDING)
#    define SGP_API __declspec(dllexport)
#  else
#    define SGP_API __declspec(dllimport)
#  endif
#else
#  define SGP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sgp_status {
    SGP_OK = 0,
    SGP_ERR_DOMAIN = 1,
    SGP_ERR_CONFIG = 2,
    SGP_ERR_NONCONVERGENCE = 3,
    SGP_ERR_IO = 4,
    SGP_ERR_EVALUATION = 5,
    SGP_ERR_INVALID_ARGUMENT = 6,
    SGP_ERR_INTERNAL = 7
} sgp_status;

typedef enum sgp_channel {
    SGP_CHANNEL_SPIN = 0,
    SGP_CHANNEL_DIA = 1,
    SGP_CHANNEL_INDUCED_DIPOLE = 2,
    SGP_CHANNEL_INTRINSIC_DIPOLE = 3
} sgp_channel;

typedef enum sgp_arm { SGP_ARM_LEFT = -1, SGP_ARM_RIGHT = 1 } sgp_arm;

typedef enum sgp_gamma { SGP_GAMMA_EXACT = 0, SGP_GAMMA_UNIT = 1 } sgp_gamma;

typedef enum sgp_regime { SGP_REGIME_HIGH_T = 0, SGP_REGIME_LOW_T = 1 } sgp_regime;

typedef struct sgp_material sgp_material;
typedef struct sgp_protocol sgp_protocol;
typedef struct sgp_report sgp_report;

SGP_API const char* sgp_version(void);
SGP_API const char* sgp_last_error(void);
SGP_API const char* sgp_status_name(sgp_status status);
SGP_API void sgp_string_free(char* str);

/* ---- materials ---------------------------------------------------------- */

SGP_API sgp_status sgp_material_preset(const char* name, sgp_material** out);
SGP_API sgp_status sgp_material_from_json(const char* json, sgp_material** out);
/* Preset name or path to a JSON material file. */
SGP_API sgp_status sgp_material_load(const char* name_or_path, sgp_material** out);
SGP_API void sgp_material_free(sgp_material* material);
SGP_API sgp_status sgp_material_to_json(const sgp_material* material, char** out);
SGP_API sgp_status sgp_cube_side(const sgp_material* material, double mass, double* side);
SGP_API sgp_status sgp_fundamental_tone(const sgp_material* material, double mass, double* omega0);

/* ---- protocol ----------------------------------------------------------- */

typedef struct sgp_protocol_info {
    double tau_a;
    double tau_f;
    double eta_b;
    double bias_field;
    double mass;
    double acceleration;
    double delta_t;
    double delta_x_max;
} sgp_protocol_info;

SGP_API sgp_status sgp_protocol_create(double tau_a, double tau_f, double eta_b, double bias_field,
                                       double mass, sgp_protocol** out);
SGP_API sgp_status sgp_protocol_from_target(double mass, double delta_x_max, double delta_t,
                                            double flight_fraction, sgp_protocol** out);
SGP_API sgp_status sgp_protocol_from_json(const char* json, sgp_protocol** out);
SGP_API void sgp_protocol_free(sgp_protocol* protocol);
SGP_API sgp_status sgp_protocol_to_json(const sgp_protocol* protocol, char** out);
SGP_API sgp_status sgp_protocol_get_info(const sgp_protocol* protocol, sgp_protocol_info* info);
SGP_API sgp_status sgp_protocol_gradient(const sgp_protocol* protocol, double t, double* gradient);
/* Outside the run the outputs are zero and *in_run is 0. */
SGP_API sgp_status sgp_protocol_kinematics(const sgp_protocol* protocol, sgp_arm arm, double t,
                                           double* position, double* velocity,
                                           double* acceleration, int* in_run);
SGP_API sgp_status sgp_protocol_check_budget(const sgp_protocol* protocol, double cap, int* pass,
                                             double* ratio);

/* ---- per-mode primitives ------------------------------------------------ */

SGP_API sgp_status sgp_thermal_occupation(double omega, double temperature, double* occupation);
SGP_API sgp_status sgp_gamma_factor(double omega, double tau_a, double tau_f, double* gamma);
/* Analytic |Delta f(omega)|^2; eta_e is used by the induced dipole only. */
SGP_API sgp_status sgp_transfer_sq(sgp_channel channel, const sgp_protocol* protocol,
                                   const sgp_material* material, double omega, double eta_e,
                                   double* transfer_sq);
SGP_API sgp_status sgp_mode_ln_contrast(double transfer_sq, double omega, double temperature,
                                        double* ln_c);
/* Independent numeric transform of the time-domain force (segment-exact). */
SGP_API sgp_status sgp_oracle_transfer_sq(sgp_channel channel, const sgp_protocol* protocol,
                                          const sgp_material* material, double omega,
                                          double eta_e, double* transfer_sq);

/* ---- contrast reports --------------------------------------------------- */

typedef struct sgp_contrast_options {
    size_t fixed_modes;  /* 0 selects the adaptive ladder */
    double tolerance;    /* adaptive relative tail bound */
    size_t cap;          /* adaptive mode cap */
    sgp_gamma gamma;
    int keep_per_mode;
    double eta_e;        /* induced dipole gradient, V/m^2 */
} sgp_contrast_options;

SGP_API void sgp_contrast_options_default(sgp_contrast_options* options);
/* options may be NULL for defaults. */
SGP_API sgp_status sgp_ln_contrast(sgp_channel channel, const sgp_protocol* protocol,
                                   const sgp_material* material, double temperature,
                                   const sgp_contrast_options* options, sgp_report** out);
SGP_API void sgp_report_free(sgp_report* report);
SGP_API sgp_status sgp_report_totals(const sgp_report* report, double* ln_contrast,
                                     double* contrast, size_t* modes_used, int* converged);
SGP_API sgp_status sgp_report_mode_count(const sgp_report* report, size_t* count);
SGP_API sgp_status sgp_report_mode(const sgp_report* report, size_t index, size_t* n,
                                   double* omega, double* ln_c);
SGP_API sgp_status sgp_report_to_json(const sgp_report* report, char** out);
/* Footnote limits, returned as -lnC. Spin and dia only. */
SGP_API sgp_status sgp_asymptotic_neg_ln_contrast(sgp_channel channel, sgp_regime regime,
                                                  const sgp_protocol* protocol,
                                                  const sgp_material* material,
                                                  double temperature, double* neg_ln_c);

/* ---- runners ------------------------------------------------------------ */

/* material_override: preset name or JSON file path, NULL keeps the config's.
 * jobs_override: 0 keeps the config's. */
SGP_API sgp_status sgp_run_scenario_file(const char* config_path, const char* material_override,
                                         unsigned jobs_override, char** summary_json);
SGP_API sgp_status sgp_sweep_file(const char* grid_path, const char* channels,
                                  const char* output_dir, unsigned jobs,
                                  const char* material_override, char** summary_json);
/* grid_path NULL builds the default separation-curve grid. */
SGP_API sgp_status sgp_golden_build(const char* grid_path, const char* output_path,
                                    const char* material_override, unsigned jobs);
SGP_API sgp_status sgp_golden_check(const char* golden_path, double tolerance,
                                    const char* material_override, unsigned jobs, int* ok,
                                    char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* SGPHONON_H */

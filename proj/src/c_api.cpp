#include "sgphonon/sgphonon.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sgphonon/contrast.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/materials.hpp"
#include "sgphonon/oracle.hpp"
#include "sgphonon/protocol.hpp"
#include "sgphonon/scenario.hpp"

struct sgp_material {
    sgp::MaterialModel value;
};
struct sgp_protocol {
    sgp::SplitProtocol value;
};
struct sgp_report {
    sgp::ContrastReport value;
};

namespace {

thread_local std::string last_error;

sgp_status fail(sgp_status status, const std::string& message)
{
    last_error = message;
    return status;
}

template <class F>
sgp_status guarded(F&& body)
{
    try {
        body();
        return SGP_OK;
    } catch (const sgp::NonConvergence& e) {
        return fail(SGP_ERR_NONCONVERGENCE, e.what());
    } catch (const sgp::EvaluationError& e) {
        return fail(SGP_ERR_EVALUATION, e.what());
    } catch (const sgp::ConfigError& e) {
        return fail(SGP_ERR_CONFIG, e.what());
    } catch (const sgp::IoError& e) {
        return fail(SGP_ERR_IO, e.what());
    } catch (const sgp::DomainError& e) {
        return fail(SGP_ERR_DOMAIN, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SGP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SGP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SGP_ERR_INTERNAL, "unknown error");
    }
}


#define SGP_REQUIRE(cond, msg) \
    do {                       \
        if (!(cond)) return fail(SGP_ERR_INVALID_ARGUMENT, msg); \
    } while (0)

char* dup_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string read_file(const char* path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sgp::IoError(std::string("cannot read '") + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

sgp::CouplingChannel make_channel(sgp_channel channel, double eta_e)
{
    switch (channel) {
    case SGP_CHANNEL_SPIN: return sgp::CouplingChannel::spin();
    case SGP_CHANNEL_DIA: return sgp::CouplingChannel::diamagnetic();
    case SGP_CHANNEL_INDUCED_DIPOLE: return sgp::CouplingChannel::induced_dipole(0.0, eta_e);
    case SGP_CHANNEL_INTRINSIC_DIPOLE: return sgp::CouplingChannel::intrinsic_dipole(1.0, 0.0, eta_e);
    }
    throw sgp::DomainError("unknown channel");
}

bool valid_channel(sgp_channel c)
{
    return c == SGP_CHANNEL_SPIN || c == SGP_CHANNEL_DIA || c == SGP_CHANNEL_INDUCED_DIPOLE ||
           c == SGP_CHANNEL_INTRINSIC_DIPOLE;
}

sgp::MaterialModel resolve_material(const char* override_name)
{
    return override_name ? sgp::load_material(override_name) : sgp::MaterialModel::diamond();
}

}  // namespace

extern "C" {

const char* sgp_version(void)
{
    return "0.1.0";
}

const char* sgp_last_error(void)
{
    return last_error.c_str();
}

const char* sgp_status_name(sgp_status status)
{
    switch (status) {
    case SGP_OK: return "ok";
    case SGP_ERR_DOMAIN: return "domain error";
    case SGP_ERR_CONFIG: return "configuration error";
    case SGP_ERR_NONCONVERGENCE: return "non-convergence";
    case SGP_ERR_IO: return "I/O error";
    case SGP_ERR_EVALUATION: return "evaluation error";
    case SGP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SGP_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void sgp_string_free(char* str)
{
    std::free(str);
}

sgp_status sgp_material_preset(const char* name, sgp_material** out)
{
    SGP_REQUIRE(name && out, "null argument");
    return guarded([&] {
        if (std::strcmp(name, "diamond") != 0) throw sgp::ConfigError(std::string("unknown material preset '") + name + "'");
        *out = new sgp_material{sgp::MaterialModel::diamond()};
    });
}

sgp_status sgp_material_from_json(const char* json, sgp_material** out)
{
    SGP_REQUIRE(json && out, "null argument");
    return guarded([&] { *out = new sgp_material{sgp::material_from_json(json)}; });
}

sgp_status sgp_material_load(const char* name_or_path, sgp_material** out)
{
    SGP_REQUIRE(name_or_path && out, "null argument");
    return guarded([&] { *out = new sgp_material{sgp::load_material(name_or_path)}; });
}

void sgp_material_free(sgp_material* material)
{
    delete material;
}

sgp_status sgp_material_to_json(const sgp_material* material, char** out)
{
    SGP_REQUIRE(material && out, "null argument");
    return guarded([&] { *out = dup_string(sgp::material_to_json(material->value)); });
}

sgp_status sgp_cube_side(const sgp_material* material, double mass, double* side)
{
    SGP_REQUIRE(material && side, "null argument");
    return guarded([&] { *side = sgp::cube_side(mass, material->value); });
}

sgp_status sgp_fundamental_tone(const sgp_material* material, double mass, double* omega0)
{
    SGP_REQUIRE(material && omega0, "null argument");
    return guarded([&] { *omega0 = sgp::fundamental_tone_for_mass(mass, material->value); });
}

sgp_status sgp_protocol_create(double tau_a, double tau_f, double eta_b, double bias_field, double mass,
                               sgp_protocol** out)
{
    SGP_REQUIRE(out, "null argument");
    return guarded([&] { *out = new sgp_protocol{sgp::SplitProtocol(tau_a, tau_f, eta_b, bias_field, mass)}; });
}

sgp_status sgp_protocol_from_target(double mass, double delta_x_max, double delta_t, double flight_fraction,
                                    sgp_protocol** out)
{
    SGP_REQUIRE(out, "null argument");
    return guarded([&] {
        *out = new sgp_protocol{sgp::SplitProtocol::from_target(mass, delta_x_max, delta_t, flight_fraction)};
    });
}

sgp_status sgp_protocol_from_json(const char* json, sgp_protocol** out)
{
    SGP_REQUIRE(json && out, "null argument");
    return guarded([&] { *out = new sgp_protocol{sgp::protocol_from_json(json)}; });
}

void sgp_protocol_free(sgp_protocol* protocol)
{
    delete protocol;
}

sgp_status sgp_protocol_to_json(const sgp_protocol* protocol, char** out)
{
    SGP_REQUIRE(protocol && out, "null argument");
    return guarded([&] { *out = dup_string(sgp::protocol_to_json(protocol->value)); });
}

sgp_status sgp_protocol_get_info(const sgp_protocol* protocol, sgp_protocol_info* info)
{
    SGP_REQUIRE(protocol && info, "null argument");
    const auto& p = protocol->value;
    *info = {p.tau_a(), p.tau_f(), p.eta_b(), p.bias_field(), p.mass(), p.acceleration(), p.delta_t(), p.delta_x_max()};
    return SGP_OK;
}

sgp_status sgp_protocol_gradient(const sgp_protocol* protocol, double t, double* gradient)
{
    SGP_REQUIRE(protocol && gradient, "null argument");
    return guarded([&] { *gradient = sgp::gradient_at(protocol->value, t); });
}

sgp_status sgp_protocol_kinematics(const sgp_protocol* protocol, sgp_arm arm, double t, double* position,
                                   double* velocity, double* acceleration, int* in_run)
{
    SGP_REQUIRE(protocol, "null protocol");
    SGP_REQUIRE(arm == SGP_ARM_LEFT || arm == SGP_ARM_RIGHT, "invalid arm");
    return guarded([&] {
        const auto k = sgp::kinematics_at(protocol->value, arm == SGP_ARM_LEFT ? sgp::Arm::Left : sgp::Arm::Right, t);
        if (position) *position = k.position;
        if (velocity) *velocity = k.velocity;
        if (acceleration) *acceleration = k.acceleration;
        if (in_run) *in_run = k.in_run ? 1 : 0;
    });
}

sgp_status sgp_protocol_check_budget(const sgp_protocol* protocol, double cap, int* pass, double* ratio)
{
    SGP_REQUIRE(protocol, "null protocol");
    return guarded([&] {
        const auto b = sgp::check_gradient_budget(protocol->value, cap);
        if (pass) *pass = b.pass ? 1 : 0;
        if (ratio) *ratio = b.ratio;
    });
}

sgp_status sgp_thermal_occupation(double omega, double temperature, double* occupation)
{
    SGP_REQUIRE(occupation, "null argument");
    return guarded([&] { *occupation = sgp::thermal_occupation(omega, temperature); });
}

sgp_status sgp_gamma_factor(double omega, double tau_a, double tau_f, double* gamma)
{
    SGP_REQUIRE(gamma, "null argument");
    return guarded([&] {
        if (!(tau_a > 0.0) || !(tau_f >= 0.0)) throw sgp::DomainError("gamma: need tau_a > 0 and tau_f >= 0");
        *gamma = sgp::gamma_factor(omega, tau_a, tau_f);
    });
}

sgp_status sgp_transfer_sq(sgp_channel channel, const sgp_protocol* protocol, const sgp_material* material,
                           double omega, double eta_e, double* transfer_sq)
{
    SGP_REQUIRE(protocol && material && transfer_sq, "null argument");
    SGP_REQUIRE(valid_channel(channel), "invalid channel");
    return guarded([&] {
        switch (channel) {
        case SGP_CHANNEL_SPIN: *transfer_sq = sgp::transfer_spin_sq(protocol->value, omega); break;
        case SGP_CHANNEL_DIA: *transfer_sq = sgp::transfer_dia_sq(protocol->value, material->value, omega); break;
        case SGP_CHANNEL_INDUCED_DIPOLE:
            *transfer_sq = sgp::transfer_induced_dipole_sq(protocol->value, material->value, omega, eta_e);
            break;
        case SGP_CHANNEL_INTRINSIC_DIPOLE:
            if (!(omega > 0.0)) throw sgp::DomainError("omega must be > 0");
            *transfer_sq = 0.0;
            break;
        }
    });
}

sgp_status sgp_mode_ln_contrast(double transfer_sq, double omega, double temperature, double* ln_c)
{
    SGP_REQUIRE(ln_c, "null argument");
    return guarded([&] { *ln_c = sgp::mode_ln_contrast(transfer_sq, omega, temperature); });
}

sgp_status sgp_oracle_transfer_sq(sgp_channel channel, const sgp_protocol* protocol, const sgp_material* material,
                                  double omega, double eta_e, double* transfer_sq)
{
    SGP_REQUIRE(protocol && material && transfer_sq, "null argument");
    SGP_REQUIRE(valid_channel(channel), "invalid channel");
    return guarded([&] {
        *transfer_sq = sgp::oracle::transfer_segments(make_channel(channel, eta_e), protocol->value, material->value, omega);
    });
}

void sgp_contrast_options_default(sgp_contrast_options* options)
{
    if (!options) return;
    const sgp::TruncationPolicy t = sgp::TruncationPolicy::adaptive();
    *options = {0, t.tolerance, t.cap, SGP_GAMMA_EXACT, 1, 0.0};
}

sgp_status sgp_ln_contrast(sgp_channel channel, const sgp_protocol* protocol, const sgp_material* material,
                           double temperature, const sgp_contrast_options* options, sgp_report** out)
{
    SGP_REQUIRE(protocol && material && out, "null argument");
    SGP_REQUIRE(valid_channel(channel), "invalid channel");
    sgp_contrast_options o;
    sgp_contrast_options_default(&o);
    if (options) o = *options;
    SGP_REQUIRE(o.gamma == SGP_GAMMA_EXACT || o.gamma == SGP_GAMMA_UNIT, "invalid gamma treatment");
    return guarded([&] {
        sgp::ContrastOptions opts;
        if (o.fixed_modes > 0) {
            opts.truncation = sgp::TruncationPolicy::fixed(o.fixed_modes);
        } else {
            if (!(o.tolerance > 0.0) || o.cap == 0) throw sgp::DomainError("adaptive ladder needs tolerance > 0 and cap > 0");
            opts.truncation = sgp::TruncationPolicy::adaptive(o.tolerance, o.cap);
        }
        opts.gamma = o.gamma == SGP_GAMMA_UNIT ? sgp::GammaTreatment::Unit : sgp::GammaTreatment::Exact;
        opts.keep_per_mode = o.keep_per_mode != 0;
        *out = new sgp_report{sgp::ln_contrast(make_channel(channel, o.eta_e), protocol->value, material->value,
                                               temperature, opts)};
    });
}

void sgp_report_free(sgp_report* report)
{
    delete report;
}

sgp_status sgp_report_totals(const sgp_report* report, double* ln_contrast, double* contrast, size_t* modes_used,
                             int* converged)
{
    SGP_REQUIRE(report, "null report");
    const auto& r = report->value;
    if (ln_contrast) *ln_contrast = r.ln_contrast_total;
    if (contrast) *contrast = r.contrast();
    if (modes_used) *modes_used = r.modes_used;
    if (converged) *converged = r.converged ? 1 : 0;
    return SGP_OK;
}

sgp_status sgp_report_mode_count(const sgp_report* report, size_t* count)
{
    SGP_REQUIRE(report && count, "null argument");
    *count = report->value.per_mode.size();
    return SGP_OK;
}

sgp_status sgp_report_mode(const sgp_report* report, size_t index, size_t* n, double* omega, double* ln_c)
{
    SGP_REQUIRE(report, "null report");
    SGP_REQUIRE(index < report->value.per_mode.size(), "mode index out of range");
    const auto& m = report->value.per_mode[index];
    if (n) *n = m.n;
    if (omega) *omega = m.omega;
    if (ln_c) *ln_c = m.ln_c;
    return SGP_OK;
}

sgp_status sgp_report_to_json(const sgp_report* report, char** out)
{
    SGP_REQUIRE(report && out, "null argument");
    return guarded([&] { *out = dup_string(sgp::report_to_json(report->value)); });
}

sgp_status sgp_asymptotic_neg_ln_contrast(sgp_channel channel, sgp_regime regime, const sgp_protocol* protocol,
                                          const sgp_material* material, double temperature, double* neg_ln_c)
{
    SGP_REQUIRE(protocol && material && neg_ln_c, "null argument");
    SGP_REQUIRE(valid_channel(channel), "invalid channel");
    SGP_REQUIRE(regime == SGP_REGIME_HIGH_T || regime == SGP_REGIME_LOW_T, "invalid regime");
    return guarded([&] {
        const auto kind = make_channel(channel, 0.0).kind;
        const auto r = regime == SGP_REGIME_HIGH_T ? sgp::Regime::HighTemperature : sgp::Regime::LowTemperature;
        *neg_ln_c = sgp::asymptotic_neg_ln_contrast(kind, r, protocol->value, material->value, temperature);
    });
}

sgp_status sgp_run_scenario_file(const char* config_path, const char* material_override, unsigned jobs_override,
                                 char** summary_json)
{
    SGP_REQUIRE(config_path, "null config path");
    return guarded([&] {
        const std::string text = read_file(config_path);
        const auto base = std::filesystem::path(config_path).parent_path();
        auto config = sgp::ScenarioConfig::from_json(text, base);
        if (material_override) config.material = sgp::load_material(material_override);
        if (jobs_override > 0) config.jobs = jobs_override;
        const std::string summary = sgp::run_scenario(config);
        if (summary_json) *summary_json = dup_string(summary);
    });
}

sgp_status sgp_sweep_file(const char* grid_path, const char* channels, const char* output_dir, unsigned jobs,
                          const char* material_override, char** summary_json)
{
    SGP_REQUIRE(grid_path && channels && output_dir, "null argument");
    return guarded([&] {
        const auto grid = sgp::SweepGrid::from_json(read_file(grid_path));
        const auto list = sgp::parse_channel_list(channels);
        const auto material = resolve_material(material_override);
        const std::string summary = sgp::run_sweep(grid, list, material, output_dir, jobs == 0 ? 1 : jobs);
        if (summary_json) *summary_json = dup_string(summary);
    });
}

sgp_status sgp_golden_build(const char* grid_path, const char* output_path, const char* material_override,
                            unsigned jobs)
{
    SGP_REQUIRE(output_path, "null output path");
    return guarded([&] {
        const auto grid = grid_path ? sgp::oracle::GoldenGridSpec::from_json(read_file(grid_path))
                                    : sgp::oracle::GoldenGridSpec::contrast_curves();
        const auto material = resolve_material(material_override);
        const auto parent = std::filesystem::path(output_path).parent_path();
        if (!parent.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(parent, ec);
            if (ec) throw sgp::IoError("cannot create '" + parent.string() + "': " + ec.message());
        }
        std::ofstream probe(output_path, std::ios::binary | std::ios::app);
        if (!probe) throw sgp::IoError(std::string("cannot write '") + output_path + "'");
        probe.close();
        const auto rows = sgp::oracle::golden_table_build(grid, material, jobs == 0 ? 1 : jobs);
        std::ofstream out(output_path, std::ios::binary | std::ios::trunc);
        sgp::oracle::write_golden_csv(out, rows);
        if (!out) throw sgp::IoError(std::string("write failed for '") + output_path + "'");
    });
}

sgp_status sgp_golden_check(const char* golden_path, double tolerance, const char* material_override,
                            unsigned jobs, int* ok, char** report_json)
{
    SGP_REQUIRE(golden_path, "null golden path");
    SGP_REQUIRE(tolerance > 0.0, "tolerance must be > 0");
    return guarded([&] {
        std::ifstream in(golden_path, std::ios::binary);
        if (!in) throw sgp::IoError(std::string("cannot read '") + golden_path + "'");
        const auto rows = sgp::oracle::read_golden_csv(in);
        const auto material = resolve_material(material_override);
        const auto check = sgp::oracle::golden_check(rows, material, tolerance, jobs == 0 ? 1 : jobs);
        if (ok) *ok = check.ok() ? 1 : 0;
        if (report_json) {
            nlohmann::ordered_json j;
            j["rows"] = check.rows.size();
            j["tolerance"] = tolerance;
            j["max_drift"] = check.max_drift;
            j["failures"] = check.failures;
            auto bad = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i < check.rows.size(); ++i) {
                const auto& r = check.rows[i];
                if (r.drift <= tolerance) continue;
                bad.push_back({{"row", i + 1},
                               {"channel", sgp::channel_name(r.golden.channel)},
                               {"M", r.golden.mass},
                               {"delta_x", r.golden.delta_x},
                               {"T", r.golden.temperature},
                               {"golden", r.golden.neg_ln_c},
                               {"library", r.library},
                               {"drift", r.drift}});
            }
            j["mismatches"] = bad;
            *report_json = dup_string(j.dump(2));
        }
    });
}

}  // extern "C"

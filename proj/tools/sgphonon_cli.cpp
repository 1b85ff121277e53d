// Command-line front end. Talks to the library only through sgphonon.h.
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sgphonon/sgphonon.h"

namespace {

int exit_code(sgp_status s)
{
    switch (s) {
    case SGP_OK: return 0;
    case SGP_ERR_CONFIG:
    case SGP_ERR_IO:
    case SGP_ERR_DOMAIN:
    case SGP_ERR_INVALID_ARGUMENT: return 2;
    case SGP_ERR_NONCONVERGENCE: return 3;
    default: return 1;
    }
}

int report(sgp_status s)
{
    if (s != SGP_OK) std::cerr << "sgphonon: " << sgp_status_name(s) << ": " << sgp_last_error() << "\n";
    return exit_code(s);
}

int print_owned(sgp_status s, char* text)
{
    if (s == SGP_OK && text) std::cout << text << "\n";
    sgp_string_free(text);
    return report(s);
}

sgp_channel channel_of(const std::string& name)
{
    if (name == "spin") return SGP_CHANNEL_SPIN;
    if (name == "dia" || name == "diamagnetic") return SGP_CHANNEL_DIA;
    if (name == "dipole" || name == "induced_dipole") return SGP_CHANNEL_INDUCED_DIPOLE;
    if (name == "intrinsic_dipole") return SGP_CHANNEL_INTRINSIC_DIPOLE;
    throw CLI::ValidationError("--channel", "unknown channel '" + name + "'");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Phonon-induced contrast loss for Stern-Gerlach nanodiamond interferometry"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sgp_version()));

    std::string material;
    app.add_option("--material", material, "Material preset name or JSON file (default: diamond)");

    auto* run = app.add_subcommand("run", "Run a scenario config");
    std::string config;
    unsigned run_jobs = 0;
    run->add_option("config", config, "Scenario JSON")->required();
    run->add_option("--jobs", run_jobs, "Override worker count");

    auto* sweep = app.add_subcommand("sweep", "Contrast sweep over a parameter grid");
    std::string grid, channels = "spin,dia", out_dir;
    unsigned jobs = 1;
    sweep->add_option("--grid", grid, "Grid JSON")->required();
    sweep->add_option("--channels", channels, "Comma-separated channels")->capture_default_str();
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--jobs", jobs, "Worker count")->capture_default_str()->check(CLI::Range(1u, 1024u));

    auto* golden = app.add_subcommand("golden", "Build or check the golden contrast table");
    golden->require_subcommand(1);
    auto* gbuild = golden->add_subcommand("build", "Build the table from the segment oracle");
    std::string golden_grid, golden_out;
    unsigned golden_jobs = 1;
    gbuild->add_option("--grid", golden_grid, "Grid JSON (default: contrast-curve grid)");
    gbuild->add_option("--out", golden_out, "Output CSV")->required();
    gbuild->add_option("--jobs", golden_jobs, "Worker count")->check(CLI::Range(1u, 1024u));
    auto* gcheck = golden->add_subcommand("check", "Compare the library against a golden table");
    std::string golden_in;
    double tolerance = 1e-9;
    gcheck->add_option("file", golden_in, "Golden CSV")->required();
    gcheck->add_option("--tol", tolerance, "Relative tolerance")->capture_default_str();
    gcheck->add_option("--jobs", golden_jobs, "Worker count")->check(CLI::Range(1u, 1024u));

    auto* point = app.add_subcommand("point", "Contrast for one protocol and channel");
    std::string channel = "spin";
    double mass = 1e-14, delta_x = 1e-4, delta_t = 1.0, ff = 0.0, temperature = 300.0, eta_e = 0.0;
    std::size_t modes = 0;
    bool unit_gamma = false;
    point->add_option("--channel", channel)->capture_default_str();
    point->add_option("--mass", mass, "kg")->capture_default_str();
    point->add_option("--delta-x", delta_x, "Maximum splitting, m")->capture_default_str();
    point->add_option("--delta-t", delta_t, "Total time, s")->capture_default_str();
    point->add_option("--flight-fraction", ff)->capture_default_str();
    point->add_option("--temperature", temperature, "K")->capture_default_str();
    point->add_option("--eta-e", eta_e, "Electric field gradient, V/m^2")->capture_default_str();
    point->add_option("--modes", modes, "Fixed mode count (0 = adaptive)")->capture_default_str();
    point->add_flag("--unit-gamma", unit_gamma, "Replace Gamma^2 by 1");

    CLI11_PARSE(app, argc, argv);
    const char* mat = material.empty() ? nullptr : material.c_str();

    if (*run) {
        char* summary = nullptr;
        return print_owned(sgp_run_scenario_file(config.c_str(), mat, run_jobs, &summary), summary);
    }
    if (*sweep) {
        char* summary = nullptr;
        return print_owned(sgp_sweep_file(grid.c_str(), channels.c_str(), out_dir.c_str(), jobs, mat, &summary),
                           summary);
    }
    if (*gbuild) {
        const sgp_status s =
            sgp_golden_build(golden_grid.empty() ? nullptr : golden_grid.c_str(), golden_out.c_str(), mat, golden_jobs);
        if (s == SGP_OK) std::cout << "wrote " << golden_out << "\n";
        return report(s);
    }
    if (*gcheck) {
        int ok = 0;
        char* text = nullptr;
        const sgp_status s = sgp_golden_check(golden_in.c_str(), tolerance, mat, golden_jobs, &ok, &text);
        if (s == SGP_OK && text) std::cout << text << "\n";
        sgp_string_free(text);
        if (s != SGP_OK) return report(s);
        return ok ? 0 : 1;
    }
    if (*point) {
        sgp_channel ch;
        try {
            ch = channel_of(channel);
        } catch (const CLI::Error& e) {
            return app.exit(e);
        }
        sgp_material* m = nullptr;
        sgp_protocol* p = nullptr;
        sgp_report* r = nullptr;
        sgp_status s = sgp_material_load(mat ? mat : "diamond", &m);
        if (s == SGP_OK) s = sgp_protocol_from_target(mass, delta_x, delta_t, ff, &p);
        if (s == SGP_OK) {
            sgp_contrast_options o;
            sgp_contrast_options_default(&o);
            o.fixed_modes = modes;
            o.gamma = unit_gamma ? SGP_GAMMA_UNIT : SGP_GAMMA_EXACT;
            o.keep_per_mode = 0;
            o.eta_e = eta_e;
            s = sgp_ln_contrast(ch, p, m, temperature, &o, &r);
        }
        char* text = nullptr;
        if (s == SGP_OK) s = sgp_report_to_json(r, &text);
        sgp_report_free(r);
        sgp_protocol_free(p);
        sgp_material_free(m);
        return print_owned(s, text);
    }
    return 0;
}

// g4v: command-line front end for the group-IV vacancy linewidth toolkit.
//
// Exit codes: 0 success, 2 usage or input error, 3 model-domain error
// (threshold never reached), 4 fit did not converge.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "g4v/g4v.hpp"

namespace fs = std::filesystem;
using namespace g4v;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_domain = 3;
constexpr int exit_not_converged = 4;

// Carries an exit code out of a subcommand.
struct ExitError : std::runtime_error {
    int code;
    ExitError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

std::string g(double v, int digits = 6) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

EmitterParams resolve(const std::string& name) {
    const EmitterRegistry reg;
    try {
        return io::resolve_emitter(reg, name);
    } catch (const std::out_of_range& e) {
        throw ExitError(exit_input, e.what());
    }
}

fs::path default_output_dir() {
    if (const char* env = std::getenv("G4V_OUTPUT_DIR"); env && *env) return env;
    return {};
}

// ---------------------------------------------------------------------------
// svg

std::string svg_plot(const std::vector<double>& x, const std::vector<double>& y, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel) {
    constexpr double w = 640, h = 400, m = 50;
    double x0 = x.front(), x1 = x.back();
    double y0 = *std::min_element(y.begin(), y.end()), y1 = *std::max_element(y.begin(), y.end());
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
      << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
      << "</text>\n"
      << "<text x=\"14\" y=\"" << h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << h / 2 << ")\">"
      << ylabel << "</text>\n"
      << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
      << "\" fill=\"none\" stroke=\"black\"/>\n<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double px = m + (x[i] - x0) / (x1 - x0) * (w - 2 * m);
        const double py = h - m - (y[i] - y0) / (y1 - y0) * (h - 2 * m);
        s << g(px, 6) << ',' << g(py, 6) << ' ';
    }
    s << "\"/>\n</svg>\n";
    return s.str();
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string emitter;
    double temp = 0.0;
    std::string sweep;
    std::string transition = "c";
    std::string format = "table";
};

int run_predict(const PredictArgs& a) {
    const auto p = resolve(a.emitter);
    const auto t = a.transition == "c" ? Transition::c : Transition::d;

    std::vector<double> temps;
    if (!a.sweep.empty()) {
        double lo = 0, hi = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(a.sweep);
        if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0) || hi < lo)
            throw ExitError(exit_input, "--sweep expects start:stop:step with step > 0");
        for (std::size_t i = 0;; ++i) {
            const double v = lo + static_cast<double>(i) * step;
            if (v > hi + 1e-9 * step) break;
            temps.push_back(v);
        }
    } else {
        temps.push_back(a.temp);
    }
    for (double T : temps)
        if (!(T >= 0.0)) throw ExitError(exit_input, "temperature must be >= 0");

    if (a.format == "csv") {
        std::cout << "emitter,temperature_k,transition,gamma0_mhz,gamma_others_mhz,gs_phonon_mhz,es_phonon_mhz,"
                     "total_mhz,beyond_single_phonon\n";
        for (double T : temps) {
            const auto w = linewidth(p, T, t);
            std::cout << p.name << ',' << format_g17(T) << ',' << (t == Transition::c ? "C" : "D") << ','
                      << format_g17(w.gamma0) << ',' << format_g17(w.gamma_others) << ',' << format_g17(w.gs_term)
                      << ',' << format_g17(w.es_term) << ',' << format_g17(w.total) << ','
                      << (w.beyond_single_phonon ? 1 : 0) << '\n';
        }
        return exit_ok;
    }

    for (double T : temps) {
        const auto w = linewidth(p, T, t);
        std::printf("emitter            %s\n", p.name.c_str());
        std::printf("temperature_k      %s\n", g(T).c_str());
        std::printf("transition         %s\n", t == Transition::c ? "C" : "D");
        std::printf("gamma0_mhz         %s\n", g(w.gamma0).c_str());
        std::printf("gamma_others_mhz   %s%s\n", g(w.gamma_others).c_str(),
                    p.gamma_others_assumed ? "  (not measured; 0 assumed)" : "");
        std::printf("gs_phonon_mhz      %s  (%s)\n", g(w.gs_term).c_str(),
                    t == Transition::c ? "absorption" : "emission");
        std::printf("es_phonon_mhz      %s  (absorption)\n", g(w.es_term).c_str());
        std::printf("total_mhz          %s\n", g(w.total, 8).c_str());
        std::printf("validity           %s\n",
                    w.beyond_single_phonon ? "beyond single-phonon validity (T > 20 K)" : "single-phonon regime");
        if (w.negative) std::printf("warning            total linewidth is negative\n");
        if (temps.size() > 1) std::printf("\n");
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// threshold

int run_threshold(const std::string& emitter, double ratio, const std::string& format) {
    const auto p = resolve(emitter);
    if (!(ratio > 1.0)) throw ExitError(exit_input, "--ratio must be > 1");
    const auto th = temperature_threshold(p, ratio);
    if (!th.bounded()) {
        std::cerr << "criterion never violated: " << p.name << " stays below " << g(ratio) << " x transform limit\n";
        return exit_domain;
    }
    if (format == "csv") {
        std::cout << "emitter,ratio,threshold_k\n" << p.name << ',' << format_g17(ratio) << ','
                  << format_g17(th.temperature) << '\n';
    } else {
        std::printf("%s: C-line reaches %s x transform limit (%s MHz) at T* = %s K\n", p.name.c_str(),
                    g(ratio).c_str(), g(ratio * p.gamma0).c_str(), g(th.temperature, 5).c_str());
        if (th.status == Threshold::Status::exceeded_at_zero)
            std::printf("note: criterion already exceeded at 0 K\n");
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::string in;
    std::string out;
    std::string model = "exp1";
    std::optional<double> window_start;
    std::string weighting = "inverse_square";
    std::string emitter;
    std::string free = "gamma_others";
    bool exclude_above_20k = false;
    int max_iterations = LmOptions{}.max_iterations;
};

fs::path report_path(const FitArgs& a) {
    if (!a.out.empty()) return a.out;
    const auto dir = default_output_dir();
    if (dir.empty()) throw ExitError(exit_input, "--out is required (or set G4V_OUTPUT_DIR)");
    fs::create_directories(dir);
    return dir / (fs::path(a.in).stem().string() + "_report.json");
}

int finish_fit(const FitReport& r, const FitArgs& a) {
    const auto path = report_path(a);
    io::emit_fit_report(r, path);
    std::printf("model        %s\n", std::string(to_string(r.model)).c_str());
    for (const auto* list : {&r.params, &r.derived}) {
        for (const auto& p : *list) {
            std::printf("%-24s %s", p.name.c_str(), g(p.value, 8).c_str());
            if (p.std_error) std::printf(" +/- %s", g(*p.std_error, 3).c_str());
            std::printf(" %s\n", p.unit.c_str());
        }
    }
    std::printf("reduced_chi2 %s\nconverged    %s (%d iterations)\n", g(r.reduced_chi2).c_str(),
                r.converged ? "yes" : "no", r.n_iterations);
    for (const auto& w : r.warnings) std::printf("warning      %s\n", w.c_str());
    std::printf("report       %s\n", path.string().c_str());
    return r.converged ? exit_ok : exit_not_converged;
}

int run_fit(const std::string& kind, const FitArgs& a) {
    LmOptions lm;
    lm.max_iterations = a.max_iterations;
    if (kind == "ple") return finish_fit(fit_lorentzian(io::load_spectrum(a.in), lm), a);
    if (kind == "lifetime") {
        DecayFitOptions opt;
        opt.lm = lm;
        opt.window_start_ns = a.window_start;
        const auto model = a.model == "exp2" ? DecayModel::exp2 : DecayModel::exp1;
        return finish_fit(fit_decay(io::load_decay_trace(a.in), model, opt), a);
    }
    if (kind == "alpha") {
        AlphaWeighting w = AlphaWeighting::inverse_square;
        if (a.weighting == "uniform") w = AlphaWeighting::uniform;
        else if (a.weighting == "explicit") w = AlphaWeighting::explicit_weights;
        return finish_fit(fit_cubic_alpha(io::load_alpha_points(a.in), w), a);
    }
    if (a.emitter.empty()) throw ExitError(exit_input, "fit tempseries requires --emitter");
    TemperatureSeriesOptions opt;
    opt.free = a.free == "gamma_others,alpha_gs" ? TemperatureFreeParams::gamma_others_and_alpha_gs
                                                 : TemperatureFreeParams::gamma_others;
    opt.exclude_beyond_validity = a.exclude_above_20k;
    opt.lm = lm;
    return finish_fit(fit_temperature_series(io::load_temperature_points(a.in), resolve(a.emitter), opt), a);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool svg = false;
};

int run_simulate(const std::string& kind, const SimulateArgs& a) {
    auto cfg_json = io::parse_config(io::read_text(a.config));
    if (a.seed) cfg_json["seed"] = *a.seed;

    fs::path dir = a.out.empty() ? default_output_dir() : fs::path(a.out);
    if (dir.empty()) throw ExitError(exit_input, "--out is required (or set G4V_OUTPUT_DIR)");
    fs::create_directories(dir);

    io::Json manifest;
    manifest["kind"] = kind;
    manifest["toolkit_version"] = toolkit_version;
    manifest["seed"] = cfg_json.value("seed", std::uint64_t{0});
    manifest["config"] = cfg_json;
    std::vector<std::string> outputs;
    io::Json results = io::Json::object();

    auto write = [&](const std::string& name, const std::string& text) {
        io::write_text(dir / name, text);
        outputs.push_back(name);
    };

    if (kind == "ple" || kind == "series") {
        const EmitterRegistry reg;
        auto cfg = io::scan_config_from_json(cfg_json, reg);
        if (kind == "ple") {
            const auto s = simulate_ple_scan(cfg);
            write("spectrum.csv", io::format_spectrum(s));
            results["linewidth_mhz"] = linewidth_c(cfg.emitter, cfg.temperature).total;
            if (a.svg) write("spectrum.svg", svg_plot(s.detunings, s.counts, "PLE scan", "detuning (MHz)", "counts"));
        } else {
            const auto series = simulate_scan_series(cfg);
            for (std::size_t k = 0; k < series.scans.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "scan_%03zu.csv", k);
                write(name, io::format_spectrum(series.scans[k]));
            }
            const auto stacked = stack_spectra(series.scans);
            write("stacked.csv", io::format_spectrum(stacked));
            write("events.csv", io::format_events(series.events));
            results["linewidth_mhz"] = series.linewidth;
            results["bright_fraction"] = series.bright_fraction;
            results["centers_mhz"] = series.centers;
            if (a.svg)
                write("stacked.svg",
                      svg_plot(stacked.detunings, stacked.counts, "stacked PLE scans", "detuning (MHz)", "counts"));
        }
    } else if (kind == "trpl") {
        const auto cfg = io::trpl_config_from_json(cfg_json);
        const auto res = simulate_trpl(cfg);
        write("trace.csv", io::format_decay_trace(res.trace));
        results["warnings"] = res.warnings;
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
        if (a.svg) write("trace.svg", svg_plot(res.trace.bin_centers, res.trace.counts, "TRPL", "time (ns)", "counts"));
    } else {
        const auto cfg = io::hbt_config_from_json(cfg_json);
        const auto res = simulate_hbt(cfg);
        write("g2.csv", io::format_correlation(res.histogram));
        results["correlation_time_ns"] = res.correlation_time;
        results["excitation_rate_per_ns"] = res.excitation_rate;
        results["collection_efficiency"] = res.collection_efficiency;
        results["background_rate_cps"] = res.background_rate;
        results["g2_zero"] = res.histogram.g2[res.histogram.zero_bin()];
        if (a.svg) write("g2.svg", svg_plot(res.histogram.tau, res.histogram.g2, "g2(tau)", "tau (ns)", "g2"));
    }

    manifest["results"] = results;
    manifest["outputs"] = outputs;
    io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::printf("wrote %zu files to %s\n", outputs.size() + 1, dir.string().c_str());
    return exit_ok;
}

// ---------------------------------------------------------------------------
// emitters

void print_emitter(const EmitterParams& p) {
    std::printf("name               %s\n", p.name.c_str());
    std::printf("f_gs_ghz           %s\n", g(p.f_gs).c_str());
    std::printf("f_es_ghz           %s\n", g(p.f_es).c_str());
    std::printf("gamma0_mhz         %s\n", g(p.gamma0).c_str());
    if (p.lifetime) std::printf("lifetime_ns        %s\n", g(*p.lifetime, 4).c_str());
    std::printf("alpha_gs_per_ghz2  %s\n", g(p.alpha_gs).c_str());
    std::printf("alpha_es_per_ghz2  %s\n", g(p.alpha_es).c_str());
    std::printf("gamma_others_mhz   %s%s\n", g(p.gamma_others).c_str(),
                p.gamma_others_assumed ? "  (not measured; 0 assumed)" : "");
    if (p.dw_fraction) std::printf("dw_fraction        %s\n", g(*p.dw_fraction).c_str());
    std::printf("delta_gamma_mhz    %s\n", g(linewidth_difference(p)).c_str());
}

int run_emitters(const std::string& action, const std::string& name, const std::string& format) {
    const EmitterRegistry reg;
    if (action == "list") {
        if (format == "csv") {
            std::cout << "name,f_gs_ghz,f_es_ghz,gamma0_mhz,alpha_gs_per_ghz2,alpha_es_per_ghz2,gamma_others_mhz\n";
            for (const auto* p : reg.all())
                std::cout << p->name << ',' << format_g17(p->f_gs) << ',' << format_g17(p->f_es) << ','
                          << format_g17(p->gamma0) << ',' << format_g17(p->alpha_gs) << ',' << format_g17(p->alpha_es)
                          << ',' << format_g17(p->gamma_others) << '\n';
            return exit_ok;
        }
        std::printf("%-6s %10s %10s %12s %12s %12s %14s\n", "name", "f_gs_GHz", "f_es_GHz", "gamma0_MHz",
                    "alpha_gs", "alpha_es", "gamma_oth_MHz");
        for (const auto* p : reg.all())
            std::printf("%-6s %10s %10s %12s %12s %12s %14s\n", p->name.c_str(), g(p->f_gs).c_str(),
                        g(p->f_es).c_str(), g(p->gamma0).c_str(), g(p->alpha_gs).c_str(), g(p->alpha_es).c_str(),
                        g(p->gamma_others).c_str());
        return exit_ok;
    }
    if (name.empty()) throw ExitError(exit_input, "emitters show requires a name");
    const auto* p = reg.find(name);
    if (!p) throw ExitError(exit_input, "unknown emitter '" + name + "'");
    if (format == "json") std::cout << io::to_json(*p).dump(2) << '\n';
    else print_emitter(*p);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linewidth model, simulation and fitting toolkit for group-IV vacancy centers in diamond"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(toolkit_version));

    int code = exit_ok;

    PredictArgs pa;
    auto* predict = app.add_subcommand("predict", "C/D linewidth decomposition at a temperature");
    predict->add_option("--emitter", pa.emitter, "preset name or emitter JSON file")->required();
    auto* temp_opt = predict->add_option("--temp", pa.temp, "temperature in K");
    predict->add_option("--sweep", pa.sweep, "temperature sweep start:stop:step in K")->excludes(temp_opt);
    predict->add_option("--transition", pa.transition)->check(CLI::IsMember({"c", "d"}, CLI::ignore_case));
    predict->add_option("--format", pa.format)->check(CLI::IsMember({"table", "csv"}));
    predict->callback([&] {
        if (!predict->count("--temp") && pa.sweep.empty()) throw CLI::RequiredError("--temp or --sweep");
        code = run_predict(pa);
    });

    std::string th_emitter, th_format = "table";
    double th_ratio = 1.2;
    auto* threshold = app.add_subcommand("threshold", "temperature where the C-line reaches ratio x transform limit");
    threshold->add_option("--emitter", th_emitter, "preset name or emitter JSON file")->required();
    threshold->add_option("--ratio", th_ratio, "linewidth ratio to the transform limit");
    threshold->add_option("--format", th_format)->check(CLI::IsMember({"table", "csv"}));
    threshold->callback([&] { code = run_threshold(th_emitter, th_ratio, th_format); });

    FitArgs fa;
    std::string fit_kind;
    auto* fit = app.add_subcommand("fit", "fit measured or simulated data");
    fit->add_option("kind", fit_kind, "ple | lifetime | alpha | tempseries")
        ->required()
        ->check(CLI::IsMember({"ple", "lifetime", "alpha", "tempseries"}));
    fit->add_option("--in", fa.in, "input CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", fa.out, "fit report JSON path");
    fit->add_option("--model", fa.model, "lifetime model")->check(CLI::IsMember({"exp1", "exp2"}));
    fit->add_option("--window-start", fa.window_start, "lifetime fit window start in ns");
    fit->add_option("--weighting", fa.weighting, "alpha weighting")
        ->check(CLI::IsMember({"inverse_square", "uniform", "explicit"}));
    fit->add_option("--emitter", fa.emitter, "tempseries base emitter");
    fit->add_option("--free", fa.free, "tempseries free parameters")
        ->check(CLI::IsMember({"gamma_others", "gamma_others,alpha_gs"}));
    fit->add_option("--max-iterations", fa.max_iterations, "optimizer step limit")->check(CLI::PositiveNumber);
    fit->add_flag("--exclude-above-20k", fa.exclude_above_20k, "drop tempseries points above 20 K");
    fit->callback([&] { code = run_fit(fit_kind, fa); });

    SimulateArgs sa;
    std::string sim_kind;
    auto* sim = app.add_subcommand("simulate", "generate synthetic data sets");
    sim->add_option("kind", sim_kind, "ple | series | trpl | hbt")
        ->required()
        ->check(CLI::IsMember({"ple", "series", "trpl", "hbt"}));
    sim->add_option("--config", sa.config, "simulation config JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", sa.out, "output directory (default: $G4V_OUTPUT_DIR)");
    sim->add_option("--seed", sa.seed, "override the config seed");
    sim->add_flag("--svg", sa.svg, "also write SVG line plots");
    sim->callback([&] { code = run_simulate(sim_kind, sa); });

    std::string em_action, em_name, em_format = "table";
    auto* em = app.add_subcommand("emitters", "list or show built-in emitter presets");
    em->add_option("action", em_action)->required()->check(CLI::IsMember({"list", "show"}));
    em->add_option("name", em_name);
    em->add_option("--format", em_format)->check(CLI::IsMember({"table", "csv", "json"}));
    em->callback([&] { code = run_emitters(em_action, em_name, em_format); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_input;
    } catch (const ExitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const ConfigError& e) {
        std::cerr << "error: invalid config: " << e.what() << '\n';
        return exit_input;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    }
    return code;
}

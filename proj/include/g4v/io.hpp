#pragma once

// File formats.
//
// Array data are CSV: optional leading "# key=value" comment lines, one
// header line, then numeric rows written with 17 significant digits.
//   spectrum      detuning_mhz,counts       keys: temperature_k power_nw scan_index emitter
//   decay trace   time_ns,counts            keys: bin_width_ns excitation_wavelength_nm
//   alpha points  f_gs_ghz,delta_gamma_mhz[,weight]
//   temp series   temperature_k,linewidth_mhz
// Records (fit reports, emitter definitions, simulation configs) are JSON.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "g4v/data.hpp"
#include "g4v/digest.hpp"
#include "g4v/error.hpp"
#include "g4v/fitting.hpp"
#include "g4v/physics.hpp"
#include "g4v/registry.hpp"
#include "g4v/simulate.hpp"

namespace g4v::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Low-level helpers

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s, std::size_t line, std::string_view what) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
        throw ParseError("invalid " + std::string(what) + " '" + std::string(s) + "'", line);
    return v;
}

struct CsvTable {
    std::vector<std::pair<std::string, std::string>> meta;  // in file order
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> row_lines;
};

// Parses a numeric CSV whose header must equal one of `headers`.
inline CsvTable parse_csv(std::string_view text, std::span<const std::vector<std::string>> headers) {
    CsvTable t;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }
        if (line.front() == '#') {
            if (have_header) throw ParseError("comment after header", line_no);
            const auto body = trim(line.substr(1));
            const auto eq = body.find('=');
            if (eq != std::string_view::npos)
                t.meta.emplace_back(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!have_header) {
            for (const auto& h : headers) {
                if (h.size() == fields.size() && std::equal(h.begin(), h.end(), fields.begin())) {
                    t.header = h;
                    have_header = true;
                    break;
                }
            }
            if (!have_header) {
                std::string expected;
                for (const auto& h : headers) {
                    if (!expected.empty()) expected += "' or '";
                    for (std::size_t i = 0; i < h.size(); ++i) expected += (i ? "," : "") + h[i];
                }
                throw ParseError("unexpected header '" + std::string(line) + "', expected '" + expected + "'", line_no);
            }
            continue;
        }
        if (fields.size() != t.header.size())
            throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(fields.size()), line_no);
        std::vector<double> row;
        for (std::size_t i = 0; i < fields.size(); ++i) row.push_back(parse_double(fields[i], line_no, t.header[i]));
        t.rows.push_back(std::move(row));
        t.row_lines.push_back(line_no);
    }
    if (!have_header) throw ParseError("missing header line");
    return t;
}

inline std::string csv_rows(std::span<const double> a, std::span<const double> b) { return canonical_block(a, b); }

// ---------------------------------------------------------------------------
// Spectra

inline Spectrum parse_spectrum(std::string_view text) {
    static const std::vector<std::vector<std::string>> headers = {{"detuning_mhz", "counts"}};
    const auto t = parse_csv(text, headers);
    Spectrum s;
    for (const auto& [key, value] : t.meta) {
        if (key == "temperature_k") s.meta.temperature_k = parse_double(value, 0, key);
        else if (key == "power_nw") s.meta.power_nw = parse_double(value, 0, key);
        else if (key == "scan_index") {
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || ptr != value.data() + value.size()) throw ParseError("invalid scan_index '" + value + "'");
            s.meta.scan_index = v;
        } else if (key == "emitter") s.meta.emitter = value;
        else s.meta.extra[key] = value;
    }
    if (t.rows.empty()) throw ParseError("empty spectrum: no data rows");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double x = t.rows[i][0];
        const double c = t.rows[i][1];
        if (c < 0.0) throw ParseError("negative counts", t.row_lines[i]);
        if (i > 0 && !(x > s.detunings.back()))
            throw ParseError("non-monotonic detuning " + format_g17(x), t.row_lines[i]);
        s.detunings.push_back(x);
        s.counts.push_back(c);
    }
    return s;
}

inline std::string format_spectrum(const Spectrum& s) {
    s.validate();
    std::string out;
    if (s.meta.emitter) out += "# emitter=" + *s.meta.emitter + "\n";
    if (s.meta.temperature_k) out += "# temperature_k=" + format_g17(*s.meta.temperature_k) + "\n";
    if (s.meta.power_nw) out += "# power_nw=" + format_g17(*s.meta.power_nw) + "\n";
    if (s.meta.scan_index) out += "# scan_index=" + std::to_string(*s.meta.scan_index) + "\n";
    for (const auto& [k, v] : s.meta.extra) out += "# " + k + "=" + v + "\n";
    out += "detuning_mhz,counts\n";
    out += csv_rows(s.detunings, s.counts);
    return out;
}

inline Spectrum load_spectrum(const std::filesystem::path& path) { return parse_spectrum(read_text(path)); }
inline void save_spectrum(const Spectrum& s, const std::filesystem::path& path) { write_text(path, format_spectrum(s)); }

// ---------------------------------------------------------------------------
// Decay traces

inline DecayTrace parse_decay_trace(std::string_view text) {
    static const std::vector<std::vector<std::string>> headers = {{"time_ns", "counts"}};
    const auto t = parse_csv(text, headers);
    DecayTrace d;
    for (const auto& [key, value] : t.meta) {
        if (key == "bin_width_ns") d.meta.bin_width_ns = parse_double(value, 0, key);
        else if (key == "excitation_wavelength_nm") d.meta.excitation_wavelength_nm = parse_double(value, 0, key);
        else d.meta.extra[key] = value;
    }
    if (t.rows.empty()) throw ParseError("empty decay trace: no data rows");
    if (d.meta.bin_width_ns && !(*d.meta.bin_width_ns > 0.0)) throw ParseError("bin_width_ns must be > 0");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double x = t.rows[i][0];
        const double c = t.rows[i][1];
        if (c < 0.0) throw ParseError("negative counts", t.row_lines[i]);
        if (i > 0 && !(x > d.bin_centers.back())) throw ParseError("non-monotonic time " + format_g17(x), t.row_lines[i]);
        if (i > 1) {
            const double w = d.bin_centers[1] - d.bin_centers[0];
            const double wi = x - d.bin_centers.back();
            if (std::abs(wi - w) > 1e-9 * w + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(x))
                throw ParseError("non-uniform bin spacing", t.row_lines[i]);
        }
        d.bin_centers.push_back(x);
        d.counts.push_back(c);
    }
    if (d.size() == 1 && !d.meta.bin_width_ns) throw ParseError("single-bin trace needs a bin_width_ns comment");
    return d;
}

inline std::string format_decay_trace(const DecayTrace& d) {
    d.validate();
    std::string out;
    if (d.meta.bin_width_ns) out += "# bin_width_ns=" + format_g17(*d.meta.bin_width_ns) + "\n";
    if (d.meta.excitation_wavelength_nm)
        out += "# excitation_wavelength_nm=" + format_g17(*d.meta.excitation_wavelength_nm) + "\n";
    for (const auto& [k, v] : d.meta.extra) out += "# " + k + "=" + v + "\n";
    out += "time_ns,counts\n";
    out += csv_rows(d.bin_centers, d.counts);
    return out;
}

inline DecayTrace load_decay_trace(const std::filesystem::path& path) { return parse_decay_trace(read_text(path)); }
inline void save_decay_trace(const DecayTrace& d, const std::filesystem::path& path) {
    write_text(path, format_decay_trace(d));
}

// ---------------------------------------------------------------------------
// Point lists for the alpha and temperature-series fits

inline std::vector<AlphaPoint> parse_alpha_points(std::string_view text) {
    static const std::vector<std::vector<std::string>> headers = {{"f_gs_ghz", "delta_gamma_mhz"},
                                                                  {"f_gs_ghz", "delta_gamma_mhz", "weight"}};
    const auto t = parse_csv(text, headers);
    if (t.rows.empty()) throw ParseError("no alpha points");
    std::vector<AlphaPoint> pts;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        if (!(r[0] > 0.0)) throw ParseError("f_gs_ghz must be > 0", t.row_lines[i]);
        if (!(r[1] > 0.0)) throw ParseError("delta_gamma_mhz must be > 0", t.row_lines[i]);
        AlphaPoint p{r[0], r[1], std::nullopt};
        if (r.size() == 3) {
            if (!(r[2] > 0.0)) throw ParseError("weight must be > 0", t.row_lines[i]);
            p.weight = r[2];
        }
        pts.push_back(p);
    }
    return pts;
}

inline std::vector<TemperaturePoint> parse_temperature_points(std::string_view text) {
    static const std::vector<std::vector<std::string>> headers = {{"temperature_k", "linewidth_mhz"}};
    const auto t = parse_csv(text, headers);
    if (t.rows.empty()) throw ParseError("no temperature points");
    std::vector<TemperaturePoint> pts;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (!(t.rows[i][0] >= 0.0)) throw ParseError("temperature_k must be >= 0", t.row_lines[i]);
        pts.push_back({t.rows[i][0], t.rows[i][1]});
    }
    return pts;
}

inline std::vector<AlphaPoint> load_alpha_points(const std::filesystem::path& p) { return parse_alpha_points(read_text(p)); }
inline std::vector<TemperaturePoint> load_temperature_points(const std::filesystem::path& p) {
    return parse_temperature_points(read_text(p));
}

// ---------------------------------------------------------------------------
// Fit reports

inline Json to_json(const FitReport& r) {
    Json j;
    j["model"] = std::string(to_string(r.model));
    Json params = Json::object(), errors = Json::object(), units = Json::object();
    for (const auto& p : r.params) {
        params[p.name] = p.value;
        units[p.name] = p.unit;
        if (p.std_error) errors[p.name] = *p.std_error;
    }
    j["params"] = params;
    j["std_errors"] = errors;
    j["units"] = units;
    Json derived = Json::object();
    for (const auto& d : r.derived) {
        Json e;
        e["value"] = d.value;
        e["unit"] = d.unit;
        if (d.std_error) e["std_error"] = *d.std_error;
        derived[d.name] = e;
    }
    j["derived"] = derived;
    j["reduced_chi2"] = r.reduced_chi2;
    j["n_iterations"] = r.n_iterations;
    j["converged"] = r.converged;
    j["gradient_norm"] = r.gradient_norm;
    j["warnings"] = r.warnings;
    j["toolkit_version"] = r.toolkit_version;
    j["input_digest"] = r.input_digest;
    return j;
}

inline FitReport fit_report_from_json(const Json& j) {
    try {
        FitReport r;
        r.model = fit_model_from_string(j.at("model").get<std::string>());
        const auto& errors = j.at("std_errors");
        const auto& units = j.at("units");
        for (const auto& [name, value] : j.at("params").items()) {
            FitParameter p{name, value.get<double>(), units.value(name, std::string{}), std::nullopt};
            if (errors.contains(name)) p.std_error = errors.at(name).get<double>();
            r.params.push_back(std::move(p));
        }
        if (j.contains("derived")) {
            for (const auto& [name, e] : j.at("derived").items()) {
                FitParameter p{name, e.at("value").get<double>(), e.value("unit", std::string{}), std::nullopt};
                if (e.contains("std_error")) p.std_error = e.at("std_error").get<double>();
                r.derived.push_back(std::move(p));
            }
        }
        r.reduced_chi2 = j.at("reduced_chi2").get<double>();
        r.n_iterations = j.value("n_iterations", 0);
        r.converged = j.at("converged").get<bool>();
        r.gradient_norm = j.value("gradient_norm", 0.0);
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        r.toolkit_version = j.at("toolkit_version").get<std::string>();
        r.input_digest = j.at("input_digest").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fit report: ") + e.what());
    }
}

inline std::string format_fit_report(const FitReport& r) { return to_json(r).dump(2) + "\n"; }

inline FitReport parse_fit_report(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("fit report: ") + e.what());
    }
    return fit_report_from_json(j);
}

inline void emit_fit_report(const FitReport& r, const std::filesystem::path& path) {
    write_text(path, format_fit_report(r));
}
inline FitReport load_fit_report(const std::filesystem::path& path) { return parse_fit_report(read_text(path)); }

// ---------------------------------------------------------------------------
// Structured-object helpers for emitter and simulation files

namespace detail {

inline Json parse_json(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

// Rejects keys outside `allowed` so that typos fail at load time.
inline void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view prefix = "") {
    if (!j.is_object()) throw ConfigError(std::string(prefix.empty() ? "<root>" : prefix), "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "comment") continue;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(std::string(prefix) + key, "unknown field");
    }
}

inline double number(const Json& j, const char* key, std::optional<double> fallback = std::nullopt,
                     std::string_view prefix = "") {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(std::string(prefix) + key, "missing required field");
    }
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string(prefix) + key, "expected a number");
    return v.get<double>();
}

inline std::uint64_t seed_value(const Json& j, const char* key) {
    if (!j.contains(key)) return 0;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Emitter definitions

inline EmitterParams emitter_from_json(const Json& j) {
    detail::check_keys(j, {"name", "f_gs_ghz", "f_es_ghz", "lifetime_ns", "gamma0_mhz", "alpha_gs_per_ghz2",
                           "alpha_es_per_ghz2", "gamma_others_mhz", "dw_fraction"});
    EmitterParams p;
    if (!j.contains("name") || !j.at("name").is_string()) throw ConfigError("name", "missing required field");
    p.name = j.at("name").get<std::string>();
    p.f_gs = detail::number(j, "f_gs_ghz");
    p.f_es = detail::number(j, "f_es_ghz");
    p.alpha_gs = detail::number(j, "alpha_gs_per_ghz2");
    p.alpha_es = detail::number(j, "alpha_es_per_ghz2");
    if (j.contains("lifetime_ns")) p.lifetime = detail::number(j, "lifetime_ns");
    if (j.contains("gamma0_mhz")) p.gamma0 = detail::number(j, "gamma0_mhz");
    else if (p.lifetime && *p.lifetime > 0.0) p.gamma0 = transform_limit(*p.lifetime);
    else throw ConfigError("gamma0_mhz", "one of gamma0_mhz or lifetime_ns is required");
    if (j.contains("gamma_others_mhz")) p.gamma_others = detail::number(j, "gamma_others_mhz");
    else p.gamma_others_assumed = true;
    if (j.contains("dw_fraction")) p.dw_fraction = detail::number(j, "dw_fraction");
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(p.name, e.what());
    }
    return p;
}

inline Json to_json(const EmitterParams& p) {
    Json j;
    j["name"] = p.name;
    j["f_gs_ghz"] = p.f_gs;
    j["f_es_ghz"] = p.f_es;
    if (p.lifetime) j["lifetime_ns"] = *p.lifetime;
    j["gamma0_mhz"] = p.gamma0;
    j["alpha_gs_per_ghz2"] = p.alpha_gs;
    j["alpha_es_per_ghz2"] = p.alpha_es;
    if (!p.gamma_others_assumed) j["gamma_others_mhz"] = p.gamma_others;
    if (p.dw_fraction) j["dw_fraction"] = *p.dw_fraction;
    return j;
}

inline EmitterParams parse_emitter(std::string_view text) { return emitter_from_json(detail::parse_json(text, "emitter file")); }
inline EmitterParams load_emitter_file(const std::filesystem::path& path) { return parse_emitter(read_text(path)); }
inline void save_emitter_file(const EmitterParams& p, const std::filesystem::path& path) {
    write_text(path, to_json(p).dump(2) + "\n");
}

// A registry name, or a path to an emitter file when no such name exists.
inline EmitterParams resolve_emitter(const EmitterRegistry& reg, const std::string& name_or_path) {
    if (const auto* p = reg.find(name_or_path)) return *p;
    if (std::filesystem::is_regular_file(name_or_path)) return load_emitter_file(name_or_path);
    throw std::out_of_range("unknown emitter '" + name_or_path + "'");
}

// ---------------------------------------------------------------------------
// Simulation configs

inline ScanSeriesConfig scan_config_from_json(const Json& j, const EmitterRegistry& reg) {
    detail::check_keys(j, {"emitter", "temperature_k", "grid", "dwell_s", "peak_rate_cps", "background_rate_cps",
                           "n_scans", "center_mhz", "diffusion_sigma_mhz", "jump_prob", "jump_sigma_mhz",
                           "ionization_coeff", "repump", "seed", "noiseless"});
    ScanSeriesConfig c;
    if (!j.contains("emitter")) throw ConfigError("emitter", "missing required field");
    const auto& e = j.at("emitter");
    if (e.is_string()) {
        try {
            c.emitter = resolve_emitter(reg, e.get<std::string>());
        } catch (const std::out_of_range& ex) {
            throw ConfigError("emitter", ex.what());
        }
    } else {
        c.emitter = emitter_from_json(e);
    }
    c.temperature = detail::number(j, "temperature_k");
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        detail::check_keys(g, {"start_mhz", "stop_mhz", "step_mhz"}, "grid.");
        c.grid.start = detail::number(g, "start_mhz", std::nullopt, "grid.");
        c.grid.stop = detail::number(g, "stop_mhz", std::nullopt, "grid.");
        c.grid.step = detail::number(g, "step_mhz", std::nullopt, "grid.");
    }
    c.dwell = detail::number(j, "dwell_s", c.dwell);
    c.peak_rate = detail::number(j, "peak_rate_cps", c.peak_rate);
    c.background_rate = detail::number(j, "background_rate_cps", c.background_rate);
    if (j.contains("n_scans")) {
        if (!j.at("n_scans").is_number_integer()) throw ConfigError("n_scans", "expected an integer");
        c.n_scans = j.at("n_scans").get<int>();
    }
    c.center = detail::number(j, "center_mhz", c.center);
    c.diffusion_sigma = detail::number(j, "diffusion_sigma_mhz", c.diffusion_sigma);
    c.jump_prob = detail::number(j, "jump_prob", c.jump_prob);
    c.jump_sigma = detail::number(j, "jump_sigma_mhz", c.jump_sigma);
    c.ionization_coeff = detail::number(j, "ionization_coeff", c.ionization_coeff);
    if (j.contains("repump")) {
        const auto& r = j.at("repump");
        std::string policy;
        if (r.is_string()) {
            policy = r.get<std::string>();
        } else {
            detail::check_keys(r, {"policy", "rate"}, "repump.");
            if (!r.contains("policy") || !r.at("policy").is_string())
                throw ConfigError("repump.policy", "missing required field");
            policy = r.at("policy").get<std::string>();
            c.repump.rate = detail::number(r, "rate", 0.0, "repump.");
        }
        if (policy == "none") c.repump.policy = RepumpPolicy::none;
        else if (policy == "between_scans") c.repump.policy = RepumpPolicy::between_scans;
        else if (policy == "resonant") c.repump.policy = RepumpPolicy::resonant;
        else throw ConfigError("repump.policy", "expected none, between_scans or resonant");
    }
    c.seed = detail::seed_value(j, "seed");
    if (j.contains("noiseless")) {
        if (!j.at("noiseless").is_boolean()) throw ConfigError("noiseless", "expected true or false");
        c.noiseless = j.at("noiseless").get<bool>();
    }
    c.validate();
    return c;
}

inline TrplConfig trpl_config_from_json(const Json& j) {
    detail::check_keys(j, {"lifetime_ns", "counts_total", "fast", "background_per_bin", "bin_width_ns", "t_max_ns", "seed"});
    TrplConfig c;
    c.lifetime = detail::number(j, "lifetime_ns");
    if (!j.contains("counts_total") || !j.at("counts_total").is_number_integer())
        throw ConfigError("counts_total", "expected an integer");
    c.counts_total = j.at("counts_total").get<std::int64_t>();
    if (j.contains("fast")) {
        const auto& f = j.at("fast");
        detail::check_keys(f, {"fraction", "lifetime_ns"}, "fast.");
        c.fast = FastComponent{detail::number(f, "fraction", std::nullopt, "fast."),
                               detail::number(f, "lifetime_ns", std::nullopt, "fast.")};
    }
    c.background_per_bin = detail::number(j, "background_per_bin", c.background_per_bin);
    c.bin_width = detail::number(j, "bin_width_ns", c.bin_width);
    c.t_max = detail::number(j, "t_max_ns", c.t_max);
    c.seed = detail::seed_value(j, "seed");
    c.validate();
    return c;
}

inline HbtConfig hbt_config_from_json(const Json& j) {
    detail::check_keys(j, {"detected_rate_cps", "lifetime_ns", "purity_rho", "duration_s", "bin_width_ns",
                           "tau_max_ns", "seed", "collection_efficiency", "excitation_rate_per_ns"});
    HbtConfig c;
    c.detected_rate = detail::number(j, "detected_rate_cps");
    c.lifetime = detail::number(j, "lifetime_ns");
    c.purity = detail::number(j, "purity_rho");
    c.duration = detail::number(j, "duration_s");
    c.bin_width = detail::number(j, "bin_width_ns", c.bin_width);
    c.tau_max = detail::number(j, "tau_max_ns", c.tau_max);
    c.collection_efficiency = detail::number(j, "collection_efficiency", c.collection_efficiency);
    if (j.contains("excitation_rate_per_ns")) c.excitation_rate = detail::number(j, "excitation_rate_per_ns");
    c.seed = detail::seed_value(j, "seed");
    c.validate();
    return c;
}

inline Json parse_config(std::string_view text) { return detail::parse_json(text, "config"); }

// ---------------------------------------------------------------------------
// Simulation outputs

inline std::string format_correlation(const CorrelationHistogram& h) {
    std::string out = "# duration_ns=" + format_g17(h.duration) + "\n";
    out += "tau_ns,g2,coincidences,normalization\n";
    for (std::size_t i = 0; i < h.size(); ++i) {
        out += format_g17(h.tau[i]) + "," + format_g17(h.g2[i]) + "," + std::to_string(h.coincidences[i]) + "," +
               format_g17(h.normalization[i]) + "\n";
    }
    return out;
}

inline std::string format_events(std::span<const ScanEvent> events) {
    std::string out = "scan_index,event,time_s,center_mhz,detuning_mhz\n";
    for (const auto& e : events) {
        out += std::to_string(e.scan_index) + "," + to_string(e.type) + "," + format_g17(e.time) + "," +
               format_g17(e.center) + "," + format_g17(e.detuning) + "\n";
    }
    return out;
}

}  // namespace g4v::io

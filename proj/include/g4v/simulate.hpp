#pragma once

// Synthetic experiments: PLE scans with spectral diffusion and charge-state
// blinking, TRPL histograms, and HBT photon streams with a coincidence
// correlator.
//
// Random numbers: every stream is a std::mt19937_64 seeded from
// substream_seed(seed, stream_index), a SplitMix64 mix of the user seed and a
// stream index. PLE scan k draws from stream k; TRPL uses stream 0; HBT uses
// streams 0 (emitter), 1 (detection), 2 (background) and 3 (beamsplitter).
// Sampling uses the standard library distributions, so outputs are
// bit-identical for a given seed and standard library build.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "g4v/data.hpp"
#include "g4v/error.hpp"
#include "g4v/physics.hpp"

namespace g4v {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(substream_seed(seed, index));
}

// ---------------------------------------------------------------------------
// PLE scans

enum class RepumpPolicy { none, between_scans, resonant };

struct Repump {
    RepumpPolicy policy = RepumpPolicy::between_scans;
    double rate = 0.0;  // resonant: recovery probability per expected absorbed count
};

struct ScanGrid {
    double start = -200.0;  // MHz
    double stop = 200.0;
    double step = 4.0;

    std::vector<double> points() const {
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = start + static_cast<double>(i) * step;
        return x;
    }
};

struct ScanSeriesConfig {
    EmitterParams emitter;
    double temperature = 6.2;        // K
    ScanGrid grid;
    double dwell = 0.01;             // s per grid point
    double peak_rate = 1e5;          // counts/s at resonance
    double background_rate = 0.0;    // counts/s
    int n_scans = 1;
    double center = 0.0;             // MHz, initial line center
    double diffusion_sigma = 0.0;    // MHz per scan
    double jump_prob = 0.0;          // per scan
    double jump_sigma = 0.0;         // MHz
    double ionization_coeff = 0.0;   // ionization probability per detected signal count
    Repump repump;
    std::uint64_t seed = 0;
    bool noiseless = false;          // emit expected counts instead of Poisson draws

    void validate() const {
        try {
            emitter.validate();
        } catch (const DomainError& e) {
            throw ConfigError("emitter", e.what());
        }
        if (!(temperature >= 0.0)) throw ConfigError("temperature_k", "must be >= 0");
        if (!(grid.step > 0.0)) throw ConfigError("grid.step_mhz", "must be > 0");
        if (!(grid.stop >= grid.start)) throw ConfigError("grid.stop_mhz", "must be >= grid.start_mhz");
        if (!(dwell > 0.0)) throw ConfigError("dwell_s", "must be > 0");
        if (!(peak_rate >= 0.0)) throw ConfigError("peak_rate_cps", "must be >= 0");
        if (!(background_rate >= 0.0)) throw ConfigError("background_rate_cps", "must be >= 0");
        if (n_scans < 1) throw ConfigError("n_scans", "must be >= 1");
        if (!std::isfinite(center)) throw ConfigError("center_mhz", "must be finite");
        if (!(diffusion_sigma >= 0.0)) throw ConfigError("diffusion_sigma_mhz", "must be >= 0");
        if (!(jump_prob >= 0.0 && jump_prob <= 1.0)) throw ConfigError("jump_prob", "must lie in [0, 1]");
        if (!(jump_sigma >= 0.0)) throw ConfigError("jump_sigma_mhz", "must be >= 0");
        if (!(ionization_coeff >= 0.0 && ionization_coeff <= 1.0))
            throw ConfigError("ionization_coeff", "must lie in [0, 1]");
        if (!(repump.rate >= 0.0 && repump.rate <= 1.0)) throw ConfigError("repump.rate", "must lie in [0, 1]");
    }
};

struct ScanEvent {
    enum class Type { scan_start, jump, ionization, repump };
    int scan_index = 0;
    Type type = Type::scan_start;
    double time = 0.0;      // s since the start of the series
    double center = 0.0;    // MHz, line center at the event
    double detuning = 0.0;  // MHz, laser detuning at the event

    bool operator==(const ScanEvent&) const = default;
};

inline const char* to_string(ScanEvent::Type t) {
    switch (t) {
        case ScanEvent::Type::scan_start: return "scan_start";
        case ScanEvent::Type::jump: return "jump";
        case ScanEvent::Type::ionization: return "ionization";
        case ScanEvent::Type::repump: return "repump";
    }
    return "unknown";
}

struct ScanSeries {
    std::vector<Spectrum> scans;
    std::vector<ScanEvent> events;
    std::vector<double> centers;  // MHz, line center during each scan
    double linewidth = 0.0;       // MHz, homogeneous FWHM used for every scan
    double bright_fraction = 1.0; // fraction of grid points spent in the bright charge state
};

inline ScanSeries simulate_scan_series(const ScanSeriesConfig& cfg) {
    cfg.validate();
    const auto lw = linewidth_c(cfg.emitter, cfg.temperature);
    if (!(lw.total > 0.0)) throw ConfigError("emitter", "C-linewidth is not positive at this temperature");

    ScanSeries out;
    out.linewidth = lw.total;
    const auto grid = cfg.grid.points();
    const double hw = 0.5 * lw.total;
    const double bg_mean = cfg.dwell * cfg.background_rate;

    double center = cfg.center;
    bool bright = true;
    std::size_t bright_points = 0;
    std::size_t total_points = 0;

    for (int s = 0; s < cfg.n_scans; ++s) {
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(s));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double scan_t0 = static_cast<double>(s) * static_cast<double>(grid.size()) * cfg.dwell;

        if (s > 0) {
            center += cfg.diffusion_sigma * gauss(rng);
            if (cfg.jump_prob > 0.0 && unif(rng) < cfg.jump_prob) {
                center += cfg.jump_sigma * gauss(rng);
                out.events.push_back({s, ScanEvent::Type::jump, scan_t0, center, grid.front()});
            }
            if (!bright && cfg.repump.policy == RepumpPolicy::between_scans) {
                bright = true;
                out.events.push_back({s, ScanEvent::Type::repump, scan_t0, center, grid.front()});
            }
        }
        out.centers.push_back(center);
        out.events.push_back({s, ScanEvent::Type::scan_start, scan_t0, center, grid.front()});

        Spectrum sp;
        sp.detunings = grid;
        sp.counts.resize(grid.size());
        sp.meta.temperature_k = cfg.temperature;
        sp.meta.scan_index = s;
        sp.meta.emitter = cfg.emitter.name;

        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = grid[i] - center;
            const double signal_mean = cfg.dwell * cfg.peak_rate * hw * hw / (d * d + hw * hw);
            const double t = scan_t0 + static_cast<double>(i + 1) * cfg.dwell;
            ++total_points;
            if (bright) ++bright_points;

            double signal = 0.0;
            double background = 0.0;
            if (cfg.noiseless) {
                signal = bright ? signal_mean : 0.0;
                background = bg_mean;
            } else {
                if (bright && signal_mean > 0.0)
                    signal = static_cast<double>(std::poisson_distribution<std::int64_t>(signal_mean)(rng));
                if (bg_mean > 0.0)
                    background = static_cast<double>(std::poisson_distribution<std::int64_t>(bg_mean)(rng));
            }
            sp.counts[i] = signal + background;

            if (bright) {
                if (cfg.ionization_coeff > 0.0 && signal > 0.0) {
                    const double p_ion = 1.0 - std::pow(1.0 - cfg.ionization_coeff, signal);
                    if (unif(rng) < p_ion) {
                        bright = false;
                        out.events.push_back({s, ScanEvent::Type::ionization, t, center, grid[i]});
                    }
                }
            } else if (cfg.repump.policy == RepumpPolicy::resonant && cfg.repump.rate > 0.0) {
                const double p_rec = 1.0 - std::pow(1.0 - cfg.repump.rate, signal_mean);
                if (unif(rng) < p_rec) {
                    bright = true;
                    out.events.push_back({s, ScanEvent::Type::repump, t, center, grid[i]});
                }
            }
        }
        out.scans.push_back(std::move(sp));
    }
    out.bright_fraction = static_cast<double>(bright_points) / static_cast<double>(total_points);
    return out;
}

// One scan of the configured series (n_scans is ignored).
inline Spectrum simulate_ple_scan(const ScanSeriesConfig& cfg) {
    auto one = cfg;
    one.n_scans = 1;
    return std::move(simulate_scan_series(one).scans.front());
}

// ---------------------------------------------------------------------------
// TRPL

struct FastComponent {
    double fraction = 0.0;  // share of photons from the fast component, [0, 1]
    double lifetime = 0.5;  // ns
};

struct TrplConfig {
    double lifetime = 4.4;           // ns
    std::int64_t counts_total = 0;   // photons drawn (those beyond t_max are lost)
    std::optional<FastComponent> fast;
    double background_per_bin = 0.0; // mean flat Poisson counts per bin
    double bin_width = 0.1;          // ns
    double t_max = 50.0;             // ns
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lifetime > 0.0)) throw ConfigError("lifetime_ns", "must be > 0");
        if (counts_total < 0) throw ConfigError("counts_total", "must be >= 0");
        if (!(bin_width > 0.0)) throw ConfigError("bin_width_ns", "must be > 0");
        if (!(t_max > bin_width)) throw ConfigError("t_max_ns", "must exceed bin_width_ns");
        if (!(background_per_bin >= 0.0)) throw ConfigError("background_per_bin", "must be >= 0");
        if (fast) {
            if (!(fast->fraction >= 0.0 && fast->fraction <= 1.0))
                throw ConfigError("fast.fraction", "must lie in [0, 1]");
            if (!(fast->lifetime > 0.0)) throw ConfigError("fast.lifetime_ns", "must be > 0");
        }
    }
};

struct TrplResult {
    DecayTrace trace;
    std::vector<std::string> warnings;
};

inline TrplResult simulate_trpl(const TrplConfig& cfg) {
    cfg.validate();
    TrplResult out;
    if (cfg.t_max < 10.0 * cfg.lifetime) out.warnings.push_back("t_max shorter than 10 lifetimes; tail truncated");

    const auto n_bins = static_cast<std::size_t>(std::floor(cfg.t_max / cfg.bin_width + 1e-9));
    auto& tr = out.trace;
    tr.bin_centers.resize(n_bins);
    tr.counts.assign(n_bins, 0.0);
    tr.meta.bin_width_ns = cfg.bin_width;
    for (std::size_t i = 0; i < n_bins; ++i) tr.bin_centers[i] = (static_cast<double>(i) + 0.5) * cfg.bin_width;

    auto rng = make_rng(cfg.seed, 0);
    std::exponential_distribution<double> slow(1.0 / cfg.lifetime);
    std::exponential_distribution<double> fast(cfg.fast ? 1.0 / cfg.fast->lifetime : 1.0);
    std::bernoulli_distribution pick_fast(cfg.fast ? cfg.fast->fraction : 0.0);
    for (std::int64_t k = 0; k < cfg.counts_total; ++k) {
        const double t = (cfg.fast && pick_fast(rng)) ? fast(rng) : slow(rng);
        const auto bin = static_cast<std::size_t>(t / cfg.bin_width);
        if (bin < n_bins) tr.counts[bin] += 1.0;
    }
    if (cfg.background_per_bin > 0.0) {
        std::poisson_distribution<std::int64_t> bg(cfg.background_per_bin);
        for (auto& c : tr.counts) c += static_cast<double>(bg(rng));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coincidence correlation

struct CorrelationHistogram {
    std::vector<double> tau;                    // ns, bin centers, symmetric about 0
    std::vector<double> g2;
    std::vector<std::int64_t> coincidences;
    std::vector<double> normalization;          // expected uncorrelated coincidences per bin
    double duration = 0.0;                      // ns

    std::size_t size() const { return tau.size(); }
    std::size_t zero_bin() const { return tau.size() / 2; }
};

namespace detail {

inline void validate_bins(double bin_width, double tau_max) {
    if (!(bin_width > 0.0)) throw ConfigError("bin_width_ns", "must be > 0");
    if (!(tau_max >= bin_width)) throw ConfigError("tau_max_ns", "must be >= bin_width_ns");
}

struct BinLayout {
    double width;
    long half;  // bins run from -half to +half

    BinLayout(double bin_width, double tau_max) : width(bin_width), half(0) {
        validate_bins(bin_width, tau_max);
        half = std::lround(tau_max / bin_width);
    }
    double window() const { return (static_cast<double>(half) + 0.5) * width; }
    std::size_t n_bins() const { return static_cast<std::size_t>(2 * half + 1); }
    // Index for a delay already known to be within window().
    std::optional<std::size_t> index(double delay) const {
        const long k = std::lround(delay / width);
        if (k < -half || k > half) return std::nullopt;
        return static_cast<std::size_t>(k + half);
    }
};

inline CorrelationHistogram finish_histogram(const BinLayout& bins, std::vector<std::int64_t> counts,
                                             double rate_product, double duration) {
    CorrelationHistogram h;
    h.duration = duration;
    h.coincidences = std::move(counts);
    const std::size_t n = bins.n_bins();
    h.tau.resize(n);
    h.g2.resize(n);
    h.normalization.resize(n);
    const double norm = rate_product * duration * bins.width;
    for (std::size_t i = 0; i < n; ++i) {
        h.tau[i] = static_cast<double>(static_cast<long>(i) - bins.half) * bins.width;
        h.normalization[i] = norm;
        h.g2[i] = norm > 0.0 ? static_cast<double>(h.coincidences[i]) / norm : 0.0;
    }
    return h;
}

}  // namespace detail

// Two-channel start-stop-free coincidence counter over a time-ordered event
// stream. Delays are t_B - t_A.
class CrossCorrelator {
public:
    CrossCorrelator(double bin_width, double tau_max)
        : bins_(bin_width, tau_max), counts_(bins_.n_bins(), 0) {}

    // Events must arrive in nondecreasing time order.
    void add(double t, int channel) {
        auto& own = recent_[channel];
        auto& other = recent_[1 - channel];
        const double window = bins_.window();
        while (!other.empty() && t - other.front() > window) other.pop_front();
        while (!own.empty() && t - own.front() > window) own.pop_front();
        for (double p : other) {
            const double delay = channel == 1 ? t - p : p - t;
            if (auto idx = bins_.index(delay)) ++counts_[*idx];
        }
        own.push_back(t);
        ++n_[channel];
    }

    std::int64_t events(int channel) const { return n_[channel]; }

    CorrelationHistogram histogram(double duration) const {
        const double ra = static_cast<double>(n_[0]) / duration;
        const double rb = static_cast<double>(n_[1]) / duration;
        return detail::finish_histogram(bins_, counts_, ra * rb, duration);
    }

private:
    detail::BinLayout bins_;
    std::vector<std::int64_t> counts_;
    std::deque<double> recent_[2];
    std::int64_t n_[2] = {0, 0};
};

// Full autocorrelation of a single sorted stream: every ordered pair i != j
// with |t_j - t_i| inside the window. Normalization per bin is
// rate^2 * duration * bin_width with rate = N / duration; duration defaults to
// the span of the stream.
inline CorrelationHistogram correlate_stream(std::span<const double> arrival_times, double bin_width,
                                             double tau_max, std::optional<double> duration = std::nullopt) {
    const detail::BinLayout bins(bin_width, tau_max);
    for (std::size_t i = 0; i < arrival_times.size(); ++i) {
        if (!(arrival_times[i] >= 0.0)) throw DomainError("correlate_stream: negative or non-finite time");
        if (i > 0 && arrival_times[i] < arrival_times[i - 1])
            throw DomainError("correlate_stream: arrival times not sorted at index " + std::to_string(i));
    }
    std::vector<std::int64_t> counts(bins.n_bins(), 0);
    const double window = bins.window();
    for (std::size_t i = 0; i < arrival_times.size(); ++i) {
        for (std::size_t j = i + 1; j < arrival_times.size(); ++j) {
            const double d = arrival_times[j] - arrival_times[i];
            if (d > window) break;
            if (auto idx = bins.index(d)) ++counts[*idx];
            if (auto idx = bins.index(-d)) ++counts[*idx];
        }
    }
    double span = duration.value_or(arrival_times.empty() ? 0.0 : arrival_times.back() - arrival_times.front());
    if (!(span > 0.0)) throw DomainError("correlate_stream: stream duration must be > 0");
    const double rate = static_cast<double>(arrival_times.size()) / span;
    return detail::finish_histogram(bins, std::move(counts), rate * rate, span);
}

// ---------------------------------------------------------------------------
// HBT

struct HbtConfig {
    double detected_rate = 1e6;        // counts/s, emitter + background, both detectors
    double lifetime = 4.4;             // ns
    double purity = 1.0;               // emitter share of detected counts, [0, 1]
    double duration = 1.0;             // s
    double bin_width = 0.1;            // ns
    double tau_max = 30.0;             // ns
    std::uint64_t seed = 0;
    double collection_efficiency = 0.1;
    std::optional<double> excitation_rate;  // 1/ns; default solved from rate and efficiency

    void validate() const {
        if (!(detected_rate > 0.0)) throw ConfigError("detected_rate_cps", "must be > 0");
        if (!(lifetime > 0.0)) throw ConfigError("lifetime_ns", "must be > 0");
        if (!(purity >= 0.0 && purity <= 1.0)) throw ConfigError("purity_rho", "must lie in [0, 1]");
        if (!(duration > 0.0)) throw ConfigError("duration_s", "must be > 0");
        detail::validate_bins(bin_width, tau_max);
        if (!(collection_efficiency > 0.0 && collection_efficiency <= 1.0))
            throw ConfigError("collection_efficiency", "must lie in (0, 1]");
        if (excitation_rate && !(*excitation_rate > 0.0)) throw ConfigError("excitation_rate_per_ns", "must be > 0");
    }
};

struct HbtResult {
    CorrelationHistogram histogram;
    double correlation_time = 0.0;   // ns, emitter g2 recovery time
    double excitation_rate = 0.0;    // 1/ns
    double collection_efficiency = 0.0;
    double background_rate = 0.0;    // counts/s
};

// Emitter: two-level rate model (excitation r, decay 1/lifetime) started in its
// stationary state; its photon stream is a renewal process with
// g2(tau) = 1 - exp(-|tau| (r + 1/lifetime)). Detection thins it, Poisson
// background is merged in, and a 50:50 splitter feeds the two detectors.
inline HbtResult simulate_hbt(const HbtConfig& cfg) {
    cfg.validate();
    HbtResult out;
    const double gamma = 1.0 / cfg.lifetime;                       // 1/ns
    const double signal_rate = cfg.purity * cfg.detected_rate * 1e-9;  // detected emitter photons per ns
    const double bg_rate = (1.0 - cfg.purity) * cfg.detected_rate * 1e-9;
    out.background_rate = bg_rate * 1e9;

    double r = 0.0;
    double eta = cfg.collection_efficiency;
    if (signal_rate > 0.0) {
        if (cfg.excitation_rate) {
            r = *cfg.excitation_rate;
            const double emitted = r * gamma / (r + gamma);
            eta = signal_rate / emitted;
            if (eta > 1.0) throw ConfigError("excitation_rate_per_ns", "too low to supply the detected emitter rate");
        } else {
            const double emitted = signal_rate / eta;
            if (!(emitted < gamma))
                throw ConfigError("detected_rate_cps", "emitter rate exceeds 1/lifetime at this collection efficiency");
            r = emitted * gamma / (gamma - emitted);
        }
    }
    out.excitation_rate = r;
    out.collection_efficiency = eta;
    out.correlation_time = 1.0 / (r + gamma);

    const double t_end = cfg.duration * 1e9;
    auto rng_emit = make_rng(cfg.seed, 0);
    auto rng_detect = make_rng(cfg.seed, 1);
    auto rng_bg = make_rng(cfg.seed, 2);
    auto rng_split = make_rng(cfg.seed, 3);
    std::bernoulli_distribution split(0.5);
    std::bernoulli_distribution detect(std::min(eta, 1.0));

    constexpr double never = INFINITY;
    double next_emit = never;
    std::exponential_distribution<double> excite_wait(r > 0.0 ? r : 1.0);
    std::exponential_distribution<double> decay_wait(gamma);
    if (signal_rate > 0.0) {
        std::bernoulli_distribution starts_excited(r / (r + gamma));
        next_emit = starts_excited(rng_emit) ? decay_wait(rng_emit) : excite_wait(rng_emit) + decay_wait(rng_emit);
    }
    double next_bg = never;
    std::exponential_distribution<double> bg_wait(bg_rate > 0.0 ? bg_rate : 1.0);
    if (bg_rate > 0.0) next_bg = bg_wait(rng_bg);

    CrossCorrelator corr(cfg.bin_width, cfg.tau_max);
    while (true) {
        double t;
        if (next_emit <= next_bg) {
            t = next_emit;
            if (t >= t_end) break;
            next_emit = t + excite_wait(rng_emit) + decay_wait(rng_emit);
            if (!detect(rng_detect)) continue;
        } else {
            t = next_bg;
            if (t >= t_end) break;
            next_bg = t + bg_wait(rng_bg);
        }
        corr.add(t, split(rng_split) ? 1 : 0);
    }
    out.histogram = corr.histogram(t_end);
    return out;
}

}  // namespace g4v

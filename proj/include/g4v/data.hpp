#pragma once

// Measured/simulated data containers shared by fitting, simulation and I/O.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "g4v/error.hpp"

namespace g4v {

struct SpectrumMeta {
    std::optional<double> temperature_k;
    std::optional<double> power_nw;
    std::optional<std::int64_t> scan_index;
    std::optional<std::string> emitter;
    std::map<std::string, std::string> extra;  // unrecognised key=value comments, kept for round-trips

    bool operator==(const SpectrumMeta&) const = default;
};

// PLE scan: counts versus laser detuning.
struct Spectrum {
    std::vector<double> detunings;  // MHz, strictly increasing
    std::vector<double> counts;     // >= 0
    SpectrumMeta meta;

    std::size_t size() const { return detunings.size(); }
    bool operator==(const Spectrum&) const = default;

    void validate() const {
        if (detunings.size() != counts.size()) throw DomainError("spectrum: detunings/counts length mismatch");
        for (std::size_t i = 0; i < size(); ++i) {
            if (!std::isfinite(detunings[i]) || !std::isfinite(counts[i]))
                throw DomainError("spectrum: non-finite value at index " + std::to_string(i));
            if (counts[i] < 0.0) throw DomainError("spectrum: negative counts at index " + std::to_string(i));
            if (i > 0 && !(detunings[i] > detunings[i - 1]))
                throw DomainError("spectrum: detunings not strictly increasing at index " + std::to_string(i));
        }
    }
};

struct DecayMeta {
    std::optional<double> bin_width_ns;
    std::optional<double> excitation_wavelength_nm;
    std::map<std::string, std::string> extra;

    bool operator==(const DecayMeta&) const = default;
};

// Time-binned photon arrival histogram after pulsed excitation. Counts are
// stored as reals so that noiseless model traces can be represented; simulated
// and measured traces carry integer values.
struct DecayTrace {
    std::vector<double> bin_centers;  // ns, uniform spacing
    std::vector<double> counts;       // >= 0
    DecayMeta meta;

    std::size_t size() const { return bin_centers.size(); }
    bool operator==(const DecayTrace&) const = default;

    double bin_width() const {
        if (meta.bin_width_ns) return *meta.bin_width_ns;
        if (size() >= 2) return bin_centers[1] - bin_centers[0];
        throw DomainError("decay trace: bin width unknown");
    }

    void validate() const {
        if (bin_centers.size() != counts.size()) throw DomainError("decay trace: times/counts length mismatch");
        for (std::size_t i = 0; i < size(); ++i) {
            if (!std::isfinite(bin_centers[i]) || !std::isfinite(counts[i]))
                throw DomainError("decay trace: non-finite value at index " + std::to_string(i));
            if (counts[i] < 0.0) throw DomainError("decay trace: negative counts at index " + std::to_string(i));
        }
        if (size() >= 2) {
            const double w = bin_centers[1] - bin_centers[0];
            if (!(w > 0.0)) throw DomainError("decay trace: bin times must increase");
            for (std::size_t i = 2; i < size(); ++i) {
                const double wi = bin_centers[i] - bin_centers[i - 1];
                if (std::abs(wi - w) > 1e-9 * w + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(bin_centers[i]))
                    throw DomainError("decay trace: non-uniform bin spacing at index " + std::to_string(i));
            }
        }
    }
};

}  // namespace g4v

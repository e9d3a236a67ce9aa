#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "g4v/physics.hpp"

namespace g4v {

// Coupling fitted to the GeV/PbV linewidth differences.
inline constexpr double reference_alpha = 7.51e-9;
// SiV excited-state coupling, roughly twice the ground-state value.
inline constexpr double siv_alpha_es = 1.75e-8;

namespace detail {
inline EmitterParams make_preset(std::string name, double f_gs, double f_es, double gamma0, double alpha_es,
                                 double gamma_others, bool others_assumed) {
    EmitterParams p;
    p.name = std::move(name);
    p.f_gs = f_gs;
    p.f_es = f_es;
    p.gamma0 = gamma0;
    p.lifetime = lifetime_from_linewidth(gamma0);
    p.alpha_gs = reference_alpha;
    p.alpha_es = alpha_es;
    p.gamma_others = gamma_others;
    p.gamma_others_assumed = others_assumed;
    return p;
}

inline std::string fold_case(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}
}  // namespace detail

// Built-in SiV, GeV, SnV, PbV in order of increasing ground-state splitting.
inline const std::vector<EmitterParams>& builtin_emitters() {
    static const std::vector<EmitterParams> presets = [] {
        std::vector<EmitterParams> v;
        v.push_back(detail::make_preset("SiV", 50.0, 260.0, 92.5, siv_alpha_es, 0.0, true));
        v.push_back(detail::make_preset("GeV", 200.0, 1120.0, 28.9, reference_alpha, 0.0, true));
        v.push_back(detail::make_preset("SnV", 821.0, 3000.0, 30.6, reference_alpha, -1.8, false));
        auto pbv = detail::make_preset("PbV", 3870.0, 6920.0, 36.2, reference_alpha, 2.7, false);
        pbv.dw_fraction = 0.30;
        v.push_back(std::move(pbv));
        return v;
    }();
    return presets;
}

class EmitterRegistry {
public:
    EmitterRegistry() {
        for (const auto& p : builtin_emitters()) index_.emplace(detail::fold_case(p.name), Entry{p, true});
    }

    // Case-insensitive lookup; nullptr when absent.
    const EmitterParams* find(std::string_view name) const {
        auto it = index_.find(detail::fold_case(name));
        return it == index_.end() ? nullptr : &it->second.params;
    }

    const EmitterParams& at(std::string_view name) const {
        if (const auto* p = find(name)) return *p;
        throw std::out_of_range("unknown emitter '" + std::string(name) + "'");
    }

    bool is_builtin(std::string_view name) const {
        auto it = index_.find(detail::fold_case(name));
        return it != index_.end() && it->second.builtin;
    }

    // Adds a user-defined emitter. Names collide case-insensitively with every
    // existing entry, builtin or not.
    void add(EmitterParams p) {
        p.validate();
        auto key = detail::fold_case(p.name);
        if (key.empty()) throw std::invalid_argument("emitter name must not be empty");
        if (index_.count(key)) throw std::invalid_argument("emitter '" + p.name + "' already registered");
        index_.emplace(std::move(key), Entry{std::move(p), false});
    }

    std::vector<const EmitterParams*> all() const {
        std::vector<const EmitterParams*> out;
        for (const auto& p : builtin_emitters()) out.push_back(find(p.name));
        for (const auto& [key, e] : index_)
            if (!e.builtin) out.push_back(&e.params);
        return out;
    }

private:
    struct Entry {
        EmitterParams params;
        bool builtin;
    };
    std::map<std::string, Entry> index_;
};

}  // namespace g4v

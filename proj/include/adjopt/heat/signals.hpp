#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/core/grid.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <string>

namespace adjopt::heat {

/// Named closed-form function with numeric parameters, e.g.
/// `sine_decay(amp=18, omega=1.5707963267948966, rate=4)`.
struct Generator {
    std::string name = "zero";
    std::map<std::string, double> params;

    double param(const std::string& key) const
    {
        auto it = params.find(key);
        if (it == params.end()) throw InvalidInput("generator '" + name + "' needs parameter '" + key + "'");
        return it->second;
    }
    double param(const std::string& key, double fallback) const
    {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    /// zero:        0
    /// constant:    value
    /// sine_decay:  amp sin(omega t) exp(-rate t)
    /// ramp_cosine: exp(gain_exp) t (c0 - c1 cos(omega t))
    /// ramp_exp:    amp t exp(rate t)
    /// cosine:      amp cos(k pi (x - lo) / (hi - lo)), needs lo/hi from the grid
    double operator()(double t, double lo = 0.0, double hi = 1.0) const
    {
        if (name == "zero") return 0.0;
        if (name == "constant") return param("value");
        if (name == "sine_decay") return param("amp") * std::sin(param("omega") * t) * std::exp(-param("rate") * t);
        if (name == "ramp_cosine")
            return std::exp(param("gain_exp")) * t * (param("c0") - param("c1") * std::cos(param("omega") * t));
        if (name == "ramp_exp") return param("amp") * t * std::exp(param("rate") * t);
        if (name == "cosine")
            return param("amp") * std::cos(param("k", 1.0) * std::numbers::pi * (t - lo) / (hi - lo));
        throw InvalidInput("unknown generator '" + name + "'");
    }

    GridFunction sample(const UniformGrid1D& g) const
    {
        return GridFunction::sample(g, [&](double t) { return (*this)(t, g.lo, g.hi); });
    }

    std::string to_string() const;
};

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string Generator::to_string() const
{
    std::string s = name + "(";
    bool first = true;
    for (const auto& [k, v] : params) {
        if (!first) s += ", ";
        s += k + "=" + format_double(v);
        first = false;
    }
    return s + ")";
}

/// Reference flux used to generate the target temperature.
inline Generator true_flux()
{
    return {"ramp_cosine", {{"gain_exp", -4.0}, {"c0", 18.0}, {"c1", 1000.0}, {"omega", 7.5 * std::numbers::pi}}};
}

/// Initial guess and kappa-test base point.
inline Generator initial_flux()
{
    return {"sine_decay", {{"amp", 18.0}, {"omega", 0.5 * std::numbers::pi}, {"rate", 4.0}}};
}

/// Kappa-test direction.
inline Generator perturbation_flux()
{
    return {"ramp_exp", {{"amp", 4.0}, {"rate", std::numbers::pi - 4.0}}};
}

inline Generator initial_temperature_problem2() { return {"cosine", {{"amp", 10.0}, {"k", 1.0}}}; }

} // namespace adjopt::heat

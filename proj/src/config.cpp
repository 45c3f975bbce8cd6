#include "srmem/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace srmem {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// Leading number and the remaining (trimmed) suffix.
std::pair<double, std::string> split_number(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc()) {
        throw Error("config: " + key + ": expected a number, got '" + text + "'");
    }
    return {v, trim(std::string(ptr, t.data() + t.size()))};
}

bool parse_auto(const std::string& text)
{
    const std::string t = lower(trim(text));
    return t == "nan" || t == "auto" || t == "optimize" || t == "optimal";
}

double parse_plain(const std::string& key, const std::string& text)
{
    if (parse_auto(text)) {
        return nan;
    }
    const auto [v, rest] = split_number(key, text);
    require(rest.empty(), "config: " + key + ": unexpected suffix '" + rest + "'");
    return v;
}

double parse_time(const RunConfig& c, const std::string& key, const std::string& text)
{
    if (parse_auto(text)) {
        return nan;
    }
    const auto [v, unit] = split_number(key, text);
    static const std::map<std::string, double> si{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
    if (unit.empty() || unit == "/gamma") {
        return v;
    }
    const auto it = si.find(unit);
    require(it != si.end(), "config: " + key + ": unknown time unit '" + unit + "'");
    return c.units().to_dimensionless_time(v * it->second);
}

double parse_rate(const RunConfig& c, const std::string& key, const std::string& text)
{
    if (parse_auto(text)) {
        return nan;
    }
    const auto [v, unit] = split_number(key, text);
    static const std::map<std::string, double> hz{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    if (unit.empty() || unit == "gamma") {
        return v;
    }
    if (unit == "Gamma") {
        return 2.0 * v;
    }
    if (unit == "rad/s") {
        return c.units().to_dimensionless_rate(v);
    }
    const auto it = hz.find(unit);
    require(it != hz.end(), "config: " + key + ": unknown rate unit '" + unit + "'");
    return c.units().to_dimensionless_rate(2.0 * pi * v * it->second);
}

// Bandwidth in cycles per unit of tau.
double parse_bandwidth(const RunConfig& c, const std::string& key, const std::string& text)
{
    const auto [v, unit] = split_number(key, text);
    static const std::map<std::string, double> hz{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    if (unit.empty() || unit == "Gamma/2pi") {
        return v / pi;
    }
    if (unit == "gamma") {
        return v;
    }
    const auto it = hz.find(unit);
    require(it != hz.end(), "config: " + key + ": unknown bandwidth unit '" + unit + "'");
    return v * it->second / c.units().gamma();
}

double parse_area(const std::string& key, const std::string& text)
{
    std::string t = lower(trim(text));
    if (t == "nan" || t == "auto" || t == "optimize") {
        return nan;
    }
    if (t == "pi") {
        return pi;
    }
    if (t.size() > 2 && t.ends_with("pi")) {
        t = trim(t.substr(0, t.size() - 2));
        if (t.ends_with("*")) {
            t.pop_back();
        }
        return pi * parse_plain(key, t);
    }
    return parse_plain(key, t);
}

bool parse_bool(const std::string& key, const std::string& text)
{
    const std::string t = lower(trim(text));
    if (t == "true" || t == "yes" || t == "1" || t == "on") {
        return true;
    }
    if (t == "false" || t == "no" || t == "0" || t == "off") {
        return false;
    }
    throw Error("config: " + key + ": expected a boolean, got '" + text + "'");
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
    std::string key;
    Setter set;
    Getter get;
};

Field number(std::string key, double RunConfig::*m, double (*parse)(const RunConfig&, const std::string&, const std::string&))
{
    return {key, [m, parse](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse(c, k, v); },
            [m](const RunConfig& c) { return fmt(c.*m); }};
}

double plain_in(const RunConfig&, const std::string& k, const std::string& v) { return parse_plain(k, v); }
double area_in(const RunConfig&, const std::string& k, const std::string& v) { return parse_area(k, v); }

const std::vector<Field>& fields()
{
    static const std::vector<Field> f = {
        {"protocol", [](RunConfig& c, const std::string&, const std::string& v) { c.protocol = protocol_from_string(trim(v)); },
         [](const RunConfig& c) { return std::string(to_string(c.protocol)); }},
        {"direction",
         [](RunConfig& c, const std::string&, const std::string& v) { c.direction = retrieval_from_string(trim(v)); },
         [](const RunConfig& c) { return std::string(to_string(c.direction)); }},
        {"units.gamma",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const auto [x, unit] = split_number(k, v);
             static const std::map<std::string, double> hz{{"", 1.0}, {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
             const auto it = hz.find(unit);
             require(it != hz.end(), "config: units.gamma takes gamma/2pi in Hz, kHz, MHz or GHz");
             require(x > 0.0, "config: units.gamma must be > 0");
             c.gamma_hz = x * it->second;
         },
         [](const RunConfig& c) { return fmt(c.gamma_hz); }},
        number("medium.d", &RunConfig::d, plain_in),
        number("medium.gamma_s", &RunConfig::gamma_s, parse_rate),
        {"medium.memory_lifetime",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const double t = parse_time(c, k, v);
             require(t > 0.0, "config: medium.memory_lifetime must be > 0");
             c.gamma_s = 1.0 / (2.0 * t);
         },
         nullptr},
        {"probe.shape",
         [](RunConfig& c, const std::string&, const std::string& v) {
             const std::string s = lower(trim(v));
             require(s == "exponential" || s == "gaussian" || s == "square",
                     "config: probe.shape must be exponential, gaussian or square");
             c.probe_shape = s;
         },
         [](const RunConfig& c) { return c.probe_shape; }},
        number("probe.T_P", &RunConfig::probe_T_P, parse_time),
        number("probe.fall_ratio", &RunConfig::probe_fall_ratio, plain_in),
        {"probe.B",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.probe_T_P = probe_duration_for_bandwidth(c, parse_bandwidth(c, k, v));
         },
         nullptr},
        {"control.shape",
         [](RunConfig& c, const std::string&, const std::string& v) { c.control_shape = control_shape_from_string(trim(v)); },
         [](const RunConfig& c) { return std::string(c.control_shape == ControlShape::square ? "square" : "gaussian"); }},
        number("control.rabi", &RunConfig::control_rabi, parse_rate),
        number("control.area", &RunConfig::control_area, area_in),
        number("control.duration", &RunConfig::control_duration, parse_time),
        number("control.write_delay", &RunConfig::control_write_delay, parse_time),
        {"control.optimize",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.control_optimize = parse_bool(k, v); },
         [](const RunConfig& c) { return std::string(c.control_optimize ? "true" : "false"); }},
        number("ats.area", &RunConfig::ats_area, area_in),
        number("ats.window_energy", &RunConfig::ats_window_energy, plain_in),
        number("eit.rabi", &RunConfig::eit_rabi, parse_rate),
        number("eit.ramp", &RunConfig::eit_ramp, parse_time),
        number("storage_time", &RunConfig::storage_time, parse_time),
        {"grid.nz",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const double x = parse_plain(k, v);
             require(std::isnan(x) || (x >= 0.0 && x == std::floor(x) && x < 1e7), "config: grid.nz must be an integer");
             c.grid_nz = std::isnan(x) ? 0 : static_cast<int>(x);
         },
         [](const RunConfig& c) { return std::to_string(c.grid_nz); }},
        number("grid.dt", &RunConfig::grid_dt, parse_time),
        number("grid.dt_refine", &RunConfig::dt_refine, plain_in),
        number("grid.nz_refine", &RunConfig::nz_refine, plain_in),
        number("grid.search_coarsening", &RunConfig::search_coarsening, plain_in),
    };
    return f;
}

}  // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) {
            k.push_back(f.key);
        }
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value)
{
    const std::string k = trim(key);
    for (const auto& f : fields()) {
        if (f.key == k) {
            f.set(config, k, value);
            return;
        }
    }
    throw Error("config: unknown key '" + k + "'");
}

RunConfig parse_config(std::istream& in, RunConfig base)
{
    std::string line;
    std::string section;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            require(line.back() == ']', "config line " + std::to_string(n) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos, "config line " + std::to_string(n) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) {
            key = section + "." + key;
        }
        set_config_value(base, key, line.substr(eq + 1));
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), "config: cannot open " + path);
    return parse_config(in, std::move(base));
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides)
{
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        require(eq != std::string::npos, "override '" + o + "' is not key=value");
        set_config_value(config, o.substr(0, eq), o.substr(eq + 1));
    }
}

std::string canonical_text(const RunConfig& config)
{
    std::string out;
    for (const auto& f : fields()) {
        if (f.get) {
            out += f.key + " = " + f.get(config) + "\n";
        }
    }
    return out;
}

std::string hash_text(const std::string& text)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const RunConfig& config) { return hash_text(canonical_text(config)); }

MediumParams make_medium(const RunConfig& config)
{
    MediumParams m{config.d, 1.0, config.gamma_s, 0.0};
    m.validate();
    return m;
}

PulseSpec make_probe(const RunConfig& config)
{
    double tp = config.probe_T_P;
    if (std::isnan(tp)) {
        tp = optimal_probe_duration(config.d, 2.0);
    }
    require(tp > 0.0 && std::isfinite(tp), "config: probe.T_P must be > 0");
    if (config.probe_shape == "exponential") {
        return exponential_probe(tp, config.probe_fall_ratio);
    }
    if (config.probe_shape == "gaussian") {
        const double fwhm = tp * std::sqrt(2.0);
        return Gaussian{fwhm, 0.0, 1.0};
    }
    return Square{-tp, 0.0, 1.0};
}

double probe_duration_for_bandwidth(const RunConfig& config, double B_gamma)
{
    require(B_gamma > 0.0 && std::isfinite(B_gamma), "probe.B must be > 0");
    RunConfig unit = config;
    unit.probe_T_P = 1.0;
    return bandwidth_fwhm(make_probe(unit)) / B_gamma;
}

RunOptions make_run_options(const RunConfig& config)
{
    RunOptions o;
    o.dt_refine = config.dt_refine;
    o.nz_refine = config.nz_refine;
    o.search_coarsening = config.search_coarsening;
    if (config.grid_nz > 0 || !std::isnan(config.grid_dt)) {
        require(config.protocol == Protocol::sr && !config.control_optimize,
                "config: explicit grid.nz/grid.dt only apply to fixed-control SR runs");
        const MediumParams m = make_medium(config);
        const PulseSpec probe = make_probe(config);
        GridSpec g = default_grid(m, probe);
        if (config.grid_nz > 0) {
            g.nz = config.grid_nz;
        }
        if (!std::isnan(config.grid_dt)) {
            g.dt = config.grid_dt;
        }
        o.grid = g;
    }
    return o;
}

ProtocolReport run_protocol(const RunConfig& config, bool keep_series)
{
    const MediumParams medium = make_medium(config);
    const PulseSpec probe = make_probe(config);
    RunOptions options = make_run_options(config);
    options.keep_series = keep_series;
    switch (config.protocol) {
    case Protocol::sr: {
        SrControl c;
        c.shape = config.control_shape;
        c.rabi = config.control_rabi;
        c.area = config.control_area;
        c.write_delay = config.control_write_delay;
        if (!std::isnan(config.control_duration)) {
            require(config.control_duration > 0.0, "config: control.duration must be > 0");
            const double shape_factor = config.control_shape == ControlShape::square ? 1.0 : gaussian_area_factor();
            // A duration fixes the area given the Rabi frequency, or the
            // Rabi frequency given the area.
            if (std::isnan(c.rabi)) {
                c.rabi = c.area / (config.control_duration * shape_factor);
            } else {
                c.area = c.rabi * config.control_duration * shape_factor;
            }
        }
        if (config.control_optimize) {
            return run_sr_best_rabi(medium, probe, c, config.direction, config.storage_time, options);
        }
        return run_sr(medium, probe, sr_schedule(medium, probe, c, config.storage_time), config.direction, options);
    }
    case Protocol::ats: {
        AtsSettings s;
        s.area = config.ats_area;
        s.window_energy = config.ats_window_energy;
        s.storage_time = config.storage_time;
        return run_ats(medium, probe, config.direction, s, options);
    }
    case Protocol::eit: {
        EitSettings s;
        s.rabi = config.eit_rabi;
        s.ramp = config.eit_ramp;
        s.storage_time = config.storage_time;
        return run_eit(medium, probe, config.direction, s, options);
    }
    }
    throw Error("run_protocol: unknown protocol");
}

}  // namespace srmem

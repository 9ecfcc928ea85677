#include "mal/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mal::cli {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
        throw ConfigError(field, "expected a finite number, got '" + t + "'");
    }
    return v;
}

long long parse_integer(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(field, "expected an integer, got '" + t + "'");
    }
    return v;
}

int parse_int(const std::string& text, const std::string& field) {
    const long long v = parse_integer(text, field);
    if (v < -1000000000LL || v > 1000000000LL) throw ConfigError(field, "integer out of range");
    return static_cast<int>(v);
}

std::vector<double> parse_doubles(const std::string& text, const std::string& field) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split_list(text, field)) out.push_back(parse_double(item, field));
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += fmt(items[i]);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"grid.N", [](auto& c, auto& v, auto& f) { c.grid.n = parse_int(v, f); }},
        {"grid.scheme",
         [](auto& c, auto& v, auto& f) {
             try {
                 c.grid.scheme = parse_scheme(trim(v));
             } catch (const std::exception& e) {
                 throw ConfigError(f, e.what());
             }
         }},
        {"fixture.kind", [](auto& c, auto& v, auto&) { c.fixture.kind = trim(v); }},
        {"fixture.constant_a", [](auto& c, auto& v, auto& f) { c.fixture.a.constant = parse_double(v, f); }},
        {"fixture.constant_b", [](auto& c, auto& v, auto& f) { c.fixture.b.constant = parse_double(v, f); }},
        {"fixture.amplitudes_a", [](auto& c, auto& v, auto& f) { c.fixture.a.amplitudes = parse_doubles(v, f); }},
        {"fixture.amplitudes_b", [](auto& c, auto& v, auto& f) { c.fixture.b.amplitudes = parse_doubles(v, f); }},
        {"fixture.constant_c",
         [](auto& c, auto& v, auto& f) {
             c.fixture.has_second_pair = true;
             c.fixture.c.constant = parse_double(v, f);
         }},
        {"fixture.constant_d",
         [](auto& c, auto& v, auto& f) {
             c.fixture.has_second_pair = true;
             c.fixture.d.constant = parse_double(v, f);
         }},
        {"fixture.amplitudes_c",
         [](auto& c, auto& v, auto& f) {
             c.fixture.has_second_pair = true;
             c.fixture.c.amplitudes = parse_doubles(v, f);
         }},
        {"fixture.amplitudes_d",
         [](auto& c, auto& v, auto& f) {
             c.fixture.has_second_pair = true;
             c.fixture.d.amplitudes = parse_doubles(v, f);
         }},
        {"lagrangian.spec", [](auto& c, auto& v, auto& f) { c.lagrangian.specs = split_list(v, f); }},
        {"geodesic.T", [](auto& c, auto& v, auto& f) { c.geodesic.T = parse_double(v, f); }},
        {"geodesic.time_steps", [](auto& c, auto& v, auto& f) { c.geodesic.time_steps = parse_int(v, f); }},
        {"geodesic.mode", [](auto& c, auto& v, auto&) { c.geodesic.mode = trim(v); }},
        {"geodesic.epsilon_schedule",
         [](auto& c, auto& v, auto& f) { c.geodesic.epsilon_schedule = parse_doubles(v, f); }},
        {"geodesic.weak_tol", [](auto& c, auto& v, auto& f) { c.geodesic.weak_tol = parse_double(v, f); }},
        {"geodesic.max_final_epsilon",
         [](auto& c, auto& v, auto& f) { c.geodesic.max_final_epsilon = parse_double(v, f); }},
        {"geodesic.solver_tol", [](auto& c, auto& v, auto& f) { c.geodesic.solver_tol = parse_double(v, f); }},
        {"geodesic.max_iter", [](auto& c, auto& v, auto& f) { c.geodesic.max_iter = parse_int(v, f); }},
        {"verification.suites", [](auto& c, auto& v, auto& f) { c.verification.suites = split_list(v, f); }},
        {"verification.seed",
         [](auto& c, auto& v, auto& f) {
             const long long s = parse_integer(v, f);
             if (s < 0) throw ConfigError(f, "seed must be non-negative");
             c.verification.seed = static_cast<std::uint64_t>(s);
         }},
        {"verification.count", [](auto& c, auto& v, auto& f) { c.verification.count = parse_int(v, f); }},
        {"verification.tolerance", [](auto& c, auto& v, auto& f) { c.verification.tolerance = parse_double(v, f); }},
        {"verification.knot_budget", [](auto& c, auto& v, auto& f) { c.verification.knot_budget = parse_int(v, f); }},
        {"verification.competitor_amplitude",
         [](auto& c, auto& v, auto& f) { c.verification.competitor_amplitude = parse_double(v, f); }},
        {"verification.jacobi_delta",
         [](auto& c, auto& v, auto& f) { c.verification.jacobi_delta = parse_double(v, f); }},
        {"verification.jacobi_tolerance",
         [](auto& c, auto& v, auto& f) { c.verification.jacobi_tolerance = parse_double(v, f); }},
        {"verification.jacobi_epsilon",
         [](auto& c, auto& v, auto& f) { c.verification.jacobi_epsilon = parse_double(v, f); }},
        {"verification.triangle_epsilon",
         [](auto& c, auto& v, auto& f) { c.verification.triangle_epsilon = parse_double(v, f); }},
        {"verification.S", [](auto& c, auto& v, auto& f) { c.verification.S = parse_double(v, f); }},
        {"verification.convexity_spacing",
         [](auto& c, auto& v, auto& f) { c.verification.convexity_spacing = parse_int(v, f); }},
        {"verification.convexity_centers",
         [](auto& c, auto& v, auto& f) {
             c.verification.convexity_centers.clear();
             if (trim(v).empty()) return;
             for (const auto& item : split_list(v, f)) c.verification.convexity_centers.push_back(parse_int(item, f));
         }},
        {"verification.sequence_length",
         [](auto& c, auto& v, auto& f) { c.verification.sequence_length = parse_int(v, f); }},
        {"output.directory", [](auto& c, auto& v, auto&) { c.output.directory = trim(v); }},
        {"output.formats", [](auto& c, auto& v, auto& f) { c.output.formats = split_list(v, f); }},
    };
    return table;
}

ExperimentConfig from_tree(const boost::property_tree::ptree& tree) {
    ExperimentConfig config;
    bool amplitudes_a_set = false;
    bool amplitudes_b_set = false;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of any section");
        for (const auto& [key, value] : body) {
            const std::string field = section + "." + key;
            const auto it = setters().find(field);
            if (it == setters().end()) throw ConfigError(field, "unknown key");
            it->second(config, value.data(), field);
            amplitudes_a_set = amplitudes_a_set || field == "fixture.amplitudes_a";
            amplitudes_b_set = amplitudes_b_set || field == "fixture.amplitudes_b";
        }
    }
    // The default endpoints are trigonometric; a constants fixture keeps only
    // the constants unless amplitudes were given explicitly.
    if (config.fixture.kind == "constants") {
        if (!amplitudes_a_set) config.fixture.a.amplitudes.clear();
        if (!amplitudes_b_set) config.fixture.b.amplitudes.clear();
    }
    config.validate();
    return config;
}

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw ConfigError(field, message);
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, const std::string& field) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(field, "empty list item in '" + text + "'");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError(field, "empty list");
    return out;
}

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> names = {"least_action",     "comparison",
                                                   "noether",          "jacobi_convexity",
                                                   "action_convexity", "least_action_continuity",
                                                   "monotone_limit"};
    return names;
}

void ExperimentConfig::validate() const {
    require(grid.n >= 4 && grid.n % 2 == 0, "grid.N", "must be an even integer >= 4");
    require(fixture.kind == "constants" || fixture.kind == "trig", "fixture.kind", "must be 'constants' or 'trig'");
    const auto check_endpoint = [&](const EndpointConfig& e, const std::string& name) {
        require(e.amplitudes.size() <= 8, "fixture.amplitudes_" + name, "at most 8 amplitudes");
        require(fixture.kind == "trig" || e.amplitudes.empty(), "fixture.amplitudes_" + name,
                "constants fixtures take no amplitudes");
    };
    check_endpoint(fixture.a, "a");
    check_endpoint(fixture.b, "b");
    check_endpoint(fixture.c, "c");
    check_endpoint(fixture.d, "d");
    require(!lagrangian.specs.empty(), "lagrangian.spec", "at least one spec");
    require(geodesic.T > 0.0, "geodesic.T", "must be positive");
    require(geodesic.time_steps >= 2, "geodesic.time_steps", "must be >= 2");
    require(geodesic.mode == "fixed" || geodesic.mode == "weak", "geodesic.mode", "must be 'fixed' or 'weak'");
    require(!geodesic.epsilon_schedule.empty(), "geodesic.epsilon_schedule", "at least one epsilon");
    for (double e : geodesic.epsilon_schedule) require(e >= 0.0, "geodesic.epsilon_schedule", "epsilons must be >= 0");
    require(geodesic.mode == "fixed" || geodesic.epsilon_schedule.front() > 0.0, "geodesic.epsilon_schedule",
            "weak mode starts from a positive epsilon");
    require(geodesic.weak_tol > 0.0, "geodesic.weak_tol", "must be positive");
    require(geodesic.max_final_epsilon > 0.0, "geodesic.max_final_epsilon", "must be positive");
    require(geodesic.solver_tol > 0.0, "geodesic.solver_tol", "must be positive");
    require(geodesic.max_iter >= 1, "geodesic.max_iter", "must be >= 1");
    for (const auto& s : verification.suites) {
        require(std::find(known_suites().begin(), known_suites().end(), s) != known_suites().end(),
                "verification.suites", "unknown suite '" + s + "'");
    }
    require(verification.count >= 1, "verification.count", "must be >= 1");
    require(verification.tolerance > 0.0, "verification.tolerance", "must be positive");
    require(verification.knot_budget >= 0, "verification.knot_budget", "must be >= 0");
    require(verification.competitor_amplitude >= 0.0, "verification.competitor_amplitude", "must be >= 0");
    require(verification.jacobi_delta > 0.0, "verification.jacobi_delta", "must be positive");
    require(verification.jacobi_tolerance > 0.0, "verification.jacobi_tolerance", "must be positive");
    require(verification.jacobi_epsilon >= 0.0, "verification.jacobi_epsilon", "must be >= 0");
    require(verification.triangle_epsilon >= 0.0, "verification.triangle_epsilon", "must be >= 0");
    require(verification.S > 0.0, "verification.S", "must be positive");
    require(verification.convexity_spacing >= 0, "verification.convexity_spacing", "must be >= 0");
    require(verification.sequence_length >= 1, "verification.sequence_length", "must be >= 1");
    for (const auto& f : output.formats) require(f == "csv" || f == "json", "output.formats", "csv and json only");
    require(!output.directory.empty(), "output.directory", "must not be empty");
}

ExperimentConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()), e.message());
    }
    return from_tree(tree);
}

ExperimentConfig parse_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("", "cannot open config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string canonical_text(const ExperimentConfig& c) {
    const auto d = [](double v) { return format_double(v); };
    const auto s = [](const std::string& v) { return v; };
    const auto i = [](int v) { return std::to_string(v); };
    std::map<std::string, std::string> kv;
    kv["grid.N"] = i(c.grid.n);
    kv["grid.scheme"] = std::string(to_string(c.grid.scheme));
    kv["fixture.kind"] = c.fixture.kind;
    kv["fixture.constant_a"] = d(c.fixture.a.constant);
    kv["fixture.constant_b"] = d(c.fixture.b.constant);
    kv["fixture.amplitudes_a"] = join(c.fixture.a.amplitudes, d);
    kv["fixture.amplitudes_b"] = join(c.fixture.b.amplitudes, d);
    if (c.fixture.has_second_pair) {
        kv["fixture.constant_c"] = d(c.fixture.c.constant);
        kv["fixture.constant_d"] = d(c.fixture.d.constant);
        kv["fixture.amplitudes_c"] = join(c.fixture.c.amplitudes, d);
        kv["fixture.amplitudes_d"] = join(c.fixture.d.amplitudes, d);
    }
    kv["lagrangian.spec"] = join(c.lagrangian.specs, s);
    kv["geodesic.T"] = d(c.geodesic.T);
    kv["geodesic.time_steps"] = i(c.geodesic.time_steps);
    kv["geodesic.mode"] = c.geodesic.mode;
    kv["geodesic.epsilon_schedule"] = join(c.geodesic.epsilon_schedule, d);
    kv["geodesic.weak_tol"] = d(c.geodesic.weak_tol);
    kv["geodesic.max_final_epsilon"] = d(c.geodesic.max_final_epsilon);
    kv["geodesic.solver_tol"] = d(c.geodesic.solver_tol);
    kv["geodesic.max_iter"] = i(c.geodesic.max_iter);
    kv["verification.suites"] = join(c.verification.suites, s);
    kv["verification.seed"] = std::to_string(c.verification.seed);
    kv["verification.count"] = i(c.verification.count);
    kv["verification.tolerance"] = d(c.verification.tolerance);
    kv["verification.knot_budget"] = i(c.verification.knot_budget);
    kv["verification.competitor_amplitude"] = d(c.verification.competitor_amplitude);
    kv["verification.jacobi_delta"] = d(c.verification.jacobi_delta);
    kv["verification.jacobi_tolerance"] = d(c.verification.jacobi_tolerance);
    kv["verification.jacobi_epsilon"] = d(c.verification.jacobi_epsilon);
    kv["verification.triangle_epsilon"] = d(c.verification.triangle_epsilon);
    kv["verification.S"] = d(c.verification.S);
    kv["verification.convexity_spacing"] = i(c.verification.convexity_spacing);
    kv["verification.convexity_centers"] = join(c.verification.convexity_centers, i);
    kv["verification.sequence_length"] = i(c.verification.sequence_length);
    kv["output.directory"] = c.output.directory;
    kv["output.formats"] = join(c.output.formats, s);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = canonical_text(config);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 0xF];
    }
    return out;
}

}  // namespace mal::cli

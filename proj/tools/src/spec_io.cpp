#include "mal/cli/spec_io.hpp"

#include "mal/cli/config.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>

namespace mal::cli {
namespace {

double parameter(const std::string& text, std::size_t prefix, const std::string& field) {
    const char* begin = text.data() + prefix;
    const char* end = text.data() + text.size();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || begin == end || !std::isfinite(v)) {
        throw ConfigError(field, "malformed spec parameter in '" + text + "'");
    }
    return v;
}

}  // namespace

LagrangianSpec load_sup_family(const std::filesystem::path& file) {
    const std::string field = "supfam:" + file.string();
    std::ifstream in(file);
    if (!in) throw ConfigError(field, "cannot open file");
    try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        std::vector<SupFamily::Member> members;
        for (const auto& m : doc.at("members")) {
            members.push_back({m.at("a").get<double>(), StepFunction(m.at("breakpoints").get<std::vector<double>>(),
                                                                     m.at("levels").get<std::vector<double>>())});
        }
        return LagrangianSpec::sup_family(std::move(members), file.filename().string());
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

LagrangianSpec parse_spec(const std::string& text, const std::filesystem::path& base_dir) {
    const std::string field = "lagrangian.spec";
    try {
        if (text.rfind("orlicz:p", 0) == 0) return LagrangianSpec::orlicz_power(parameter(text, 8, field));
        if (text.rfind("lorentz:a", 0) == 0) return LagrangianSpec::lorentz_weak(parameter(text, 9, field));
        if (text.rfind("power:p", 0) == 0) return LagrangianSpec::power(parameter(text, 7, field));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field, e.what());
    }
    if (text.rfind("supfam:", 0) == 0) {
        std::filesystem::path file = text.substr(7);
        if (file.empty()) throw ConfigError(field, "supfam needs a file name");
        if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
        return load_sup_family(file);
    }
    throw ConfigError(field, "unknown spec '" + text + "'");
}

}  // namespace mal::cli

#include "scenario.hpp"

#include "longrun/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace longrun::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kKeys{"family", "b",       "k",      "sigma",   "mu",      "r",      "omega",
                                  "xi",     "nu",      "rho_bar", "rho_sq", "T",       "T_list", "n_paths",
                                  "n_steps", "seed",   "output",  "format", "nu_grid", "mu_grid"};

double number(const json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (!v.is_number()) throw InvalidInput("scenario key '" + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t count(const json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (!v.is_number_unsigned()) throw InvalidInput("scenario key '" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::vector<double> numbers(const json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (!v.is_array()) throw InvalidInput("scenario key '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw InvalidInput("scenario key '" + key + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

void set_if(const json& doc, const std::string& key, double& dst) {
    if (doc.contains(key)) dst = number(doc, key);
}

}  // namespace

McConfig Scenario::mc() const {
    McConfig cfg;
    cfg.n_paths = n_paths;
    cfg.steps_per_unit = n_steps;
    cfg.rng.seed = seed;
    return cfg;
}

std::optional<Format> parse_format(const std::string& name) {
    if (name == "csv") return Format::Csv;
    if (name == "json") return Format::Json;
    return std::nullopt;
}

Scenario parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidInput("scenario must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (!kKeys.contains(key)) throw InvalidInput("unknown scenario key '" + key + "'");
    }

    Scenario sc;
    if (!doc.contains("family") || !doc["family"].is_string()) {
        throw InvalidInput("scenario needs a string 'family'");
    }
    const auto fam = parse_family(doc["family"].get<std::string>());
    if (!fam) throw InvalidInput("unknown family '" + doc["family"].get<std::string>() + "'");
    sc.spec.family = *fam;

    set_if(doc, "b", sc.spec.b);
    set_if(doc, "k", sc.spec.k);
    set_if(doc, "sigma", sc.spec.sigma);
    set_if(doc, "mu", sc.spec.mu);
    set_if(doc, "r", sc.market.r);
    set_if(doc, "omega", sc.market.omega);
    set_if(doc, "xi", sc.market.xi);
    set_if(doc, "nu", sc.market.nu);
    set_if(doc, "rho_bar", sc.market.rho_bar);
    set_if(doc, "rho_sq", sc.market.rho_sq);

    if (doc.contains("T") && doc.contains("T_list")) throw InvalidInput("give either 'T' or 'T_list', not both");
    if (doc.contains("T")) sc.T_list = {number(doc, "T")};
    if (doc.contains("T_list")) sc.T_list = numbers(doc, "T_list");
    if (sc.T_list.empty()) throw InvalidInput("'T_list' is empty");
    for (double T : sc.T_list) {
        if (!(T > 0.0) || !std::isfinite(T)) throw InvalidInput("horizons must be positive and finite");
    }

    if (doc.contains("n_paths")) sc.n_paths = count(doc, "n_paths");
    if (doc.contains("n_steps")) sc.n_steps = number(doc, "n_steps");
    if (doc.contains("seed")) sc.seed = count(doc, "seed");
    if (sc.n_paths < 2) throw InvalidInput("'n_paths' must be at least 2");
    if (!(sc.n_steps > 0.0)) throw InvalidInput("'n_steps' must be positive");

    if (doc.contains("output")) {
        if (!doc["output"].is_string()) throw InvalidInput("'output' must be a string");
        sc.output = doc["output"].get<std::string>();
    }
    if (doc.contains("format")) {
        const auto f = doc["format"].is_string() ? parse_format(doc["format"].get<std::string>()) : std::nullopt;
        if (!f) throw InvalidInput("'format' must be \"csv\" or \"json\"");
        sc.format = *f;
    }
    if (doc.contains("nu_grid")) sc.nu_grid = numbers(doc, "nu_grid");
    if (doc.contains("mu_grid")) sc.mu_grid = numbers(doc, "mu_grid");
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace longrun::cli

#include "treebec/config.hpp"

#include <cstdio>

#include "json.hpp"
#include "treebec/error.hpp"

namespace treebec {

using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

const char* allowed_keys[] = {"model",      "mode",   "nRange",     "beta",
                              "schedule",   "tolerances", "transienceProbes", "normLevels",
                              "output",     "denseLimit", "probes",     "gridPoints",
                              "kMax",       "divergenceFactor"};

}  // namespace

std::vector<int> parse_n_range(const std::string& text) {
    std::vector<int> out;
    try {
        const auto dots = text.find("..");
        if (dots != std::string::npos) {
            const int lo = std::stoi(text.substr(0, dots)), hi = std::stoi(text.substr(dots + 2));
            for (int n = lo; n <= hi; ++n) out.push_back(n);
            return out;
        }
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto comma = text.find(',', pos);
            out.push_back(std::stoi(text.substr(pos, comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    } catch (const std::exception&) {
        throw ConfigError("nRange must look like 4..12 or 6,8,10: '" + text + "'");
    }
    return out;
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : allowed_keys) known = known || key == k;
        if (!known) throw ConfigError("unknown config field '" + key + "'");
    }
    RunConfig c;
    if (j.contains("model")) {
        const auto& m = j["model"];
        std::string kind = "HQ";
        int Q = 3, q = 2;
        read(m, "kind", kind);
        read(m, "Q", Q);
        read(m, "q", q);
        if (kind == "GQq") kind += ":" + std::to_string(q);
        c.model = graph::parse_kind(kind, Q, c.model.mode);
    }
    if (j.contains("mode")) {
        std::string mode;
        read(j, "mode", mode);
        c.model.mode = graph::parse_mode(mode);
    }
    if (j.contains("nRange")) {
        const auto& r = j["nRange"];
        if (r.is_string()) c.n_range = parse_n_range(r.get<std::string>());
        else read(j, "nRange", c.n_range);
    }
    if (j.contains("beta")) {
        if (j["beta"].is_number()) c.beta = {j["beta"].get<double>()};
        else read(j, "beta", c.beta);
    }
    if (j.contains("schedule")) {
        std::string s;
        read(j, "schedule", s);
        c.schedule = thermo::parse_rule(s);
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        read(t, "eig", c.tol.eig);
        read(t, "solve", c.tol.solve);
        read(t, "secular", c.tol.secular);
        read(t, "transienceGap", c.tol.transience_gap);
    }
    read(j, "transienceProbes", c.transience_probes);
    read(j, "normLevels", c.norm_levels);
    read(j, "output", c.output_dir);
    read(j, "denseLimit", c.dense_limit);
    read(j, "probes", c.probes);
    read(j, "gridPoints", c.grid_points);
    read(j, "kMax", c.k_max);
    read(j, "divergenceFactor", c.divergence_factor);
    validate(c);
    return c;
}

void validate(const RunConfig& c) {
    if (c.model.Q < 2) throw ConfigError("Q must be at least 2");
    if (c.model.kind == graph::Kind::GQq && (c.model.q < 2 || c.model.q >= c.model.Q))
        throw ConfigError("GQq needs 2 <= q < Q");
    if (c.n_range.empty()) throw ConfigError("nRange must be nonempty");
    for (std::size_t i = 0; i < c.n_range.size(); ++i) {
        if (c.n_range[i] < 0) throw ConfigError("nRange entries must be nonnegative");
        if (i && c.n_range[i] <= c.n_range[i - 1]) throw ConfigError("nRange must be ascending");
    }
    if (c.beta.empty()) throw ConfigError("beta list must be nonempty");
    for (double b : c.beta)
        if (!(b > 0)) throw ConfigError("beta must be positive");
    for (double t : {c.tol.eig, c.tol.solve, c.tol.secular, c.tol.transience_gap})
        if (!(t > 0)) throw ConfigError("tolerances must be strictly positive");
    if (c.transience_probes < 3) throw ConfigError("transienceProbes must be at least 3");
    if (c.dense_limit < 1) throw ConfigError("denseLimit must be positive");
    if (c.grid_points < 2) throw ConfigError("gridPoints must be at least 2");
    if (c.k_max < 1) throw ConfigError("kMax must be positive");
    if (!(c.divergence_factor > 1)) throw ConfigError("divergenceFactor must exceed 1");
    if (c.output_dir.empty()) throw ConfigError("output directory must be set");
    for (auto p : c.probes)
        if (p < 0) throw ConfigError("probe vertices must be nonnegative");
}

std::string canonical_json(const RunConfig& c) {
    json j;
    j["model"] = {{"kind", c.model.kind == graph::Kind::GQq ? std::string("GQq")
                                                               : graph::kind_token(c.model)},
                  {"Q", c.model.Q},
                  {"q", c.model.q}};
    j["mode"] = graph::mode_token(c.model.mode);
    j["nRange"] = c.n_range;
    j["beta"] = c.beta;
    j["schedule"] = thermo::rule_token(c.schedule);
    j["tolerances"] = {{"eig", c.tol.eig},
                       {"solve", c.tol.solve},
                       {"secular", c.tol.secular},
                       {"transienceGap", c.tol.transience_gap}};
    j["transienceProbes"] = c.transience_probes;
    j["normLevels"] = c.norm_levels;
    j["output"] = c.output_dir;
    j["denseLimit"] = c.dense_limit;
    j["probes"] = c.probes;
    j["gridPoints"] = c.grid_points;
    j["kMax"] = c.k_max;
    j["divergenceFactor"] = c.divergence_factor;
    return j.dump();
}

std::string config_hash(const RunConfig& c) {
    RunConfig key = c;
    key.output_dir.clear();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical_json(key)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace treebec

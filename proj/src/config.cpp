#include "vesselkit/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "vesselkit/errors.hpp"

namespace vesselkit {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed,
                  const std::set<std::string>& required = {})
{
    if (!obj.is_object()) throw ValidationError(where + " must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
    for (const auto& key : required)
        if (!obj.contains(key)) throw ValidationError(where + " is missing '" + key + "'");
}

double number(const json& j, const std::string& where)
{
    if (!j.is_number()) throw ValidationError(where + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(where + " must be finite");
    return v;
}

int integer(const json& j, const std::string& where)
{
    if (!j.is_number_integer()) throw ValidationError(where + " must be an integer");
    return j.get<int>();
}

std::string string(const json& j, const std::string& where)
{
    if (!j.is_string()) throw ValidationError(where + " must be a string");
    return j.get<std::string>();
}

ComplexMatrix real_block(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2) throw ValidationError(where + " must be a 2x2 array");
    ComplexMatrix m(2, 2);
    for (int r = 0; r < 2; ++r) {
        if (!j[r].is_array() || j[r].size() != 2) throw ValidationError(where + " must be a 2x2 array");
        for (int c = 0; c < 2; ++c) m(r, c) = number(j[r][c], where);
    }
    return m;
}

EvolutionSpec parse_evolution(const json& j)
{
    if (!j.is_object() || !j.contains("type")) throw ValidationError("evolution needs a 'type'");
    const std::string type = string(j["type"], "evolution.type");
    if (type == "hierarchy") {
        require_keys(j, "evolution", {"type", "n"}, {"n"});
        return {HierarchyEvolution{integer(j["n"], "evolution.n")}};
    }
    if (type == "type0") {
        require_keys(j, "evolution", {"type", "m", "m12"}, {"m"});
        Type0Evolution z{number(j["m"], "evolution.m"), 0.0};
        if (j.contains("m12")) z.m12 = number(j["m12"], "evolution.m12");
        return {z};
    }
    if (type == "general") {
        require_keys(j, "evolution", {"type", "coefficients"}, {"coefficients"});
        const json& list = j["coefficients"];
        if (!list.is_array() || list.empty()) throw ValidationError("evolution.coefficients must be a non-empty array");
        GeneralEvolution g;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "evolution.coefficients[" + std::to_string(i) + "]";
            require_keys(list[i], where, {"re", "im"}, {"re"});
            ComplexMatrix m = real_block(list[i]["re"], where + ".re");
            if (list[i].contains("im")) m += cplx(0.0, 1.0) * real_block(list[i]["im"], where + ".im");
            g.m.push_back(std::move(m));
        }
        return {std::move(g)};
    }
    throw ValidationError("unknown evolution type '" + type + "'");
}

GridSpec parse_grid(const json& j)
{
    if (j.is_string()) return GridSpec::parse(j.get<std::string>());
    require_keys(j, "grid", {"x0", "x1", "nx", "t0", "t1", "nt"});
    GridSpec g;
    if (j.contains("x0")) g.x0 = number(j["x0"], "grid.x0");
    if (j.contains("x1")) g.x1 = number(j["x1"], "grid.x1");
    if (j.contains("nx")) g.nx = integer(j["nx"], "grid.nx");
    if (j.contains("t0")) g.t0 = number(j["t0"], "grid.t0");
    if (j.contains("t1")) g.t1 = number(j["t1"], "grid.t1");
    if (j.contains("nt")) g.nt = integer(j["nt"], "grid.nt");
    g.validate();
    return g;
}

} // namespace

RunConfig RunConfig::from_json(const json& doc)
{
    require_keys(doc, "config", {"mode", "evolution", "modes", "grid", "outputs", "x_perturbation"},
                 {"mode", "evolution", "modes"});
    RunConfig cfg;
    const std::string mode = string(doc["mode"], "mode");
    if (mode == "soliton")
        cfg.mode = RunMode::soliton;
    else if (mode == "general")
        cfg.mode = RunMode::general;
    else
        throw ValidationError("mode must be 'soliton' or 'general'");

    cfg.evolution = parse_evolution(doc["evolution"]);

    if (!doc["modes"].is_array()) throw ValidationError("modes must be an array");
    for (std::size_t i = 0; i < doc["modes"].size(); ++i) {
        const std::string where = "modes[" + std::to_string(i) + "]";
        const json& m = doc["modes"][i];
        require_keys(m, where, {"k", "b_re", "b_im"}, {"k", "b_re"});
        SolitonMode md;
        md.k = number(m["k"], where + ".k");
        md.b = {number(m["b_re"], where + ".b_re"), m.contains("b_im") ? number(m["b_im"], where + ".b_im") : 0.0};
        cfg.modes.push_back(md);
    }

    if (doc.contains("grid")) cfg.grid = parse_grid(doc["grid"]);
    if (doc.contains("outputs")) {
        const json& o = doc["outputs"];
        require_keys(o, "outputs", {"fields", "path"});
        if (o.contains("fields")) {
            if (!o["fields"].is_array() || o["fields"].empty())
                throw ValidationError("outputs.fields must be a non-empty array");
            cfg.outputs.fields.clear();
            for (const auto& f : o["fields"]) cfg.outputs.fields.push_back(string(f, "outputs.fields[]"));
        }
        if (o.contains("path")) cfg.outputs.path = string(o["path"], "outputs.path");
    }
    if (doc.contains("x_perturbation")) cfg.x_perturbation = number(doc["x_perturbation"], "x_perturbation");
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

void RunConfig::validate() const
{
    evolution.validate();
    if (mode == RunMode::soliton && !evolution.hierarchy_type())
        throw ValidationError("soliton mode needs a hierarchy evolution");
    if (!modes.empty()) {
        try {
            soliton_spec().validate();
        } catch (const ConditioningError& e) {
            throw ValidationError(e.what());
        }
    }
    grid.validate();
    static const std::set<std::string> known{"q", "beta", "tau"};
    std::set<std::string> seen;
    for (const auto& f : outputs.fields) {
        if (!known.count(f)) throw ValidationError("unknown output field '" + f + "'");
        if (!seen.insert(f).second) throw ValidationError("output field '" + f + "' listed twice");
    }
}

SolitonSpec RunConfig::soliton_spec() const
{
    SolitonSpec spec;
    spec.n = mode == RunMode::soliton ? *evolution.hierarchy_type() : 1;
    spec.modes = modes;
    return spec;
}

std::shared_ptr<const VesselSource> RunConfig::make_source() const
{
    std::shared_ptr<const VesselSource> src;
    if (mode == RunMode::soliton) {
        if (modes.empty())
            src = std::make_shared<EvolvedSource>([](double x) { return zero_vessel(x, 0.0); }, 0.0, evolution);
        else
            src = std::make_shared<SolitonSource>(soliton_spec());
    } else if (modes.empty()) {
        src = std::make_shared<EvolvedSource>([](double x) { return zero_vessel(x, 0.0); }, 0.0, evolution);
    } else {
        src = std::make_shared<EvolvedSource>(soliton_spec(), 0.0, evolution);
    }
    if (x_perturbation != 0.0) src = std::make_shared<PerturbedSource>(src, x_perturbation);
    return src;
}

} // namespace vesselkit

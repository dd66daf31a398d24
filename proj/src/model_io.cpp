#include "dtoda/model_io.hpp"

#include <cmath>
#include <fstream>

namespace dtoda {

namespace {

cplx complex_from_json(const nlohmann::json& j, const std::string& where) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && (j.size() == 1 || j.size() == 2)) {
        const double re = j[0].get<double>();
        const double im = j.size() == 2 ? j[1].get<double>() : 0.0;
        return cplx(re, im);
    }
    throw ValidationError(where + ": expected a number or [re, im]");
}

nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace

LGPotential model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("model: expected a JSON object");
    for (const std::string key : {"case", "N", "kappa", "b"})
        if (!j.contains(key)) throw ValidationError("model: missing field '" + key + "'");
    const std::string cs = j.at("case").get<std::string>();
    PotentialCase pcase;
    if (cs == "I") pcase = PotentialCase::I;
    else if (cs == "II") pcase = PotentialCase::II;
    else throw ValidationError("model: 'case' must be \"I\" or \"II\"");
    const int N = j.at("N").get<int>();
    std::vector<double> kappa;
    for (const auto& k : j.at("kappa")) kappa.push_back(k.get<double>());
    cvector b;
    for (std::size_t i = 0; i < j.at("b").size(); ++i)
        b.push_back(complex_from_json(j.at("b")[i], "model: b[" + std::to_string(i) + "]"));
    cvector c;
    if (j.contains("c"))
        for (std::size_t i = 0; i < j.at("c").size(); ++i)
            c.push_back(complex_from_json(j.at("c")[i], "model: c[" + std::to_string(i) + "]"));
    return validate_potential(pcase, N, std::move(kappa), std::move(b), std::move(c));
}

nlohmann::json model_to_json(const LGPotential& P) {
    nlohmann::json j;
    j["case"] = P.pcase == PotentialCase::I ? "I" : "II";
    j["N"] = P.N;
    j["kappa"] = P.kappa;
    j["b"] = nlohmann::json::array();
    for (const cplx& z : P.b) j["b"].push_back(complex_to_json(z));
    if (P.pcase == PotentialCase::II) {
        j["c"] = nlohmann::json::array();
        for (const cplx& z : P.c) j["c"].push_back(complex_to_json(z));
    }
    return j;
}

LGPotential load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

HodographData hodograph_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("hodograph data: expected a JSON object");
    HodographData d;
    if (j.contains("a0")) d.a0 = complex_from_json(j.at("a0"), "hodograph: a0");
    auto read_map = [&](const char* key, std::map<int, cplx>& dst) {
        if (!j.contains(key)) return;
        for (const auto& [k, v] : j.at(key).items()) {
            int idx;
            try {
                idx = std::stoi(k);
            } catch (const std::exception&) {
                throw ValidationError(std::string("hodograph: non-integer flow index '") + k + "'");
            }
            if (idx < 1) throw ValidationError("hodograph: flow indices must be >= 1");
            dst[idx] = complex_from_json(v, std::string("hodograph: ") + key + "[" + k + "]");
        }
    };
    read_map("a", d.a);
    read_map("abar", d.abar);
    return d;
}

HodographData load_hodograph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open hodograph file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("hodograph file '" + path + "': " + e.what());
    }
    return hodograph_from_json(j);
}

Grid parse_grid_spec(const std::string& spec) {
    Grid g;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        const std::string item = spec.substr(pos, comma - pos);
        pos = comma + 1;
        if (item.empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw ValidationError("grid spec: expected axis=value in '" + item + "'");
        GridAxis axis;
        axis.name = item.substr(0, eq);
        {
            SpaceTimePoint probe;  // validates the axis name
            apply_axis(probe, axis.name, 0.0);
        }
        const std::string rhs = item.substr(eq + 1);
        const std::size_t c1 = rhs.find(':');
        try {
            if (c1 == std::string::npos) {
                axis.values.push_back(std::stod(rhs));
            } else {
                const std::size_t c2 = rhs.find(':', c1 + 1);
                if (c2 == std::string::npos)
                    throw ValidationError("grid spec: range must be start:stop:step in '" + item + "'");
                const double start = std::stod(rhs.substr(0, c1));
                const double stop = std::stod(rhs.substr(c1 + 1, c2 - c1 - 1));
                const double step = std::stod(rhs.substr(c2 + 1));
                if (step == 0.0) throw ValidationError("grid spec: zero step in '" + item + "'");
                const long count = std::lround((stop - start) / step);
                if (count < 0) throw ValidationError("grid spec: empty range in '" + item + "'");
                for (long i = 0; i <= count; ++i)
                    axis.values.push_back(start + static_cast<double>(i) * step);
            }
        } catch (const std::invalid_argument&) {
            throw ValidationError("grid spec: malformed number in '" + item + "'");
        }
        g.axes.push_back(std::move(axis));
    }
    if (g.axes.empty()) throw ValidationError("grid spec: no axes given");
    return g;
}

}  // namespace dtoda

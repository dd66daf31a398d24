#ifndef DTODA_MODEL_IO_HPP
#define DTODA_MODEL_IO_HPP

#include <string>

#include <json.hpp>

#include "dtoda/hydro.hpp"
#include "dtoda/potential.hpp"

namespace dtoda {

// {"case":"I"|"II","N":int,"kappa":[real],"b":[[re,im]],"c":[[re,im]]}
LGPotential model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const LGPotential& P);
LGPotential load_model(const std::string& path);

// {"a0":[re,im],"a":{"1":[re,im],...},"abar":{...}}
HodographData hodograph_from_json(const nlohmann::json& j);
HodographData load_hodograph(const std::string& path);

// "s=1.5:2.5:0.1,t1=1" -> axes; ranges are inclusive of both endpoints.
Grid parse_grid_spec(const std::string& spec);

}  // namespace dtoda

#endif

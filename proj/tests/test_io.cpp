#include <doctest.h>

#include <fstream>

#include "dtoda/model_io.hpp"
#include "support/fixtures.hpp"

using namespace dtoda;
namespace fx = dtoda::fixtures;

TEST_CASE("model JSON round trip") {
    const LGPotential P = fx::case2_k3();
    const nlohmann::json j = model_to_json(P);
    const LGPotential Q = model_from_json(j);
    CHECK(Q.pcase == P.pcase);
    CHECK(Q.N == P.N);
    CHECK(Q.kappa == P.kappa);
    CHECK(Q.b == P.b);
    CHECK(Q.c == P.c);
}

TEST_CASE("model parsing accepts bare reals for complex entries") {
    const auto j = nlohmann::json::parse(R"({"case":"I","N":1,"kappa":[1,1],"b":[3,1]})");
    const LGPotential P = model_from_json(j);
    CHECK(P.b[0] == cplx(3.0));
}

TEST_CASE("model parsing diagnostics") {
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"N":1})")), ValidationError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(
                        R"({"case":"III","N":1,"kappa":[1],"b":[1]})")),
                    ValidationError);
    // duplicate zeros surface as the validation message
    CHECK_THROWS_WITH_AS(model_from_json(nlohmann::json::parse(
                             R"({"case":"I","N":1,"kappa":[1,1],"b":[2,2]})")),
                         "b entries must be pairwise distinct", ValidationError);
    CHECK_THROWS_AS(load_model("/nonexistent/path.json"), ValidationError);
}

TEST_CASE("hodograph data JSON") {
    const auto j = nlohmann::json::parse(R"({"a0":[1,0],"a":{"2":[0.5,0]},"abar":{"1":[0,1]}})");
    const HodographData d = hodograph_from_json(j);
    CHECK(d.a0 == cplx(1.0));
    CHECK(d.a.at(2) == cplx(0.5));
    CHECK(d.abar.at(1) == cplx(0.0, 1.0));
    CHECK_THROWS_AS(hodograph_from_json(nlohmann::json::parse(R"({"a":{"zero":[1,0]}})")),
                    ValidationError);
    CHECK_THROWS_AS(hodograph_from_json(nlohmann::json::parse(R"({"a":{"0":[1,0]}})")),
                    ValidationError);
}

TEST_CASE("fixture model files parse to the fixtures") {
    const LGPotential P = load_model(std::string(DTODA_SOURCE_DIR) + "/models/toda.json");
    CHECK(P.pcase == PotentialCase::I);
    CHECK(P.b == fx::toda().b);
    const LGPotential Q = load_model(std::string(DTODA_SOURCE_DIR) + "/models/case2_k3.json");
    CHECK(Q.pcase == PotentialCase::II);
    CHECK(Q.c == fx::case2_k3().c);
}

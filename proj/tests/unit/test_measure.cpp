#include <doctest.h>

#include "lambdacoal/errors.hpp"
#include "lambdacoal/measure.hpp"

using namespace lambdacoal;

TEST_CASE("named presets") {
    const LambdaMeasure kingman = parse_measure("kingman");
    REQUIRE(kingman.atoms().size() == 1);
    CHECK(kingman.atoms()[0].location == 0.0);
    CHECK(kingman.atoms()[0].mass == 1.0);
    CHECK(kingman.densities().empty());

    const LambdaMeasure bs = parse_measure("bolthausen-sznitman");
    REQUIRE(bs.densities().size() == 1);
    CHECK(bs.atoms().empty());
    const auto* u = std::get_if<UniformDensity>(&bs.densities()[0].kind);
    REQUIRE(u != nullptr);
    CHECK(u->lo == 0.0);
    CHECK(u->hi == 1.0);
    CHECK(bs.densities()[0].weight == 1.0);
}

TEST_CASE("atom at 1 is rejected") {
    CHECK_THROWS_AS(parse_measure("beta:0.5,1.5 + atom:1.0,1"), ValidationError);
    CHECK_THROWS_AS(parse_measure("atom:1.0,0.3"), ValidationError);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(parse_measure("atom:0.5,-1"), ValidationError);
    CHECK_THROWS_AS(parse_measure("atom:1.5,1"), ValidationError);
    CHECK_THROWS_AS(parse_measure("beta:0,1"), ValidationError);
    CHECK_THROWS_AS(parse_measure("beta:1,-2"), ValidationError);
    CHECK_THROWS_AS(parse_measure("power:-1"), ValidationError);
    CHECK_THROWS_AS(parse_measure("uniform:0.5,0.5"), ValidationError);
    CHECK_THROWS_AS(parse_measure("uniform:0.5,1.5"), ValidationError);
    CHECK_THROWS_AS(parse_measure("0*kingman"), ValidationError);
}

TEST_CASE("malformed specs are parse errors") {
    CHECK_THROWS_AS(parse_measure(""), ParseError);
    CHECK_THROWS_AS(parse_measure("gaussian:1,2"), ParseError);
    CHECK_THROWS_AS(parse_measure("beta:1"), ParseError);
    CHECK_THROWS_AS(parse_measure("beta:a,b"), ParseError);
    CHECK_THROWS_AS(parse_measure("kingman + "), ParseError);
    CHECK_THROWS_AS(parse_measure("kingman:1"), ParseError);
}

TEST_CASE("total mass is additive") {
    CHECK(total_mass(parse_measure("kingman")) == doctest::Approx(1.0));
    CHECK(total_mass(parse_measure("uniform")) == doctest::Approx(1.0));
    CHECK(total_mass(parse_measure("0.5*atom:0,1 + 0.25*uniform")) == doctest::Approx(0.75));
    CHECK(total_mass(parse_measure("2*beta:2,2 + atom:0.5,0.125")) == doctest::Approx(2.125));
}

TEST_CASE("weight prefix scales atoms and densities") {
    const LambdaMeasure m = parse_measure("0.5*atom:0.25,2 + 3*power:0.5");
    CHECK(m.atoms()[0].mass == doctest::Approx(1.0));
    CHECK(m.densities()[0].weight == doctest::Approx(3.0));
}

TEST_CASE("canonical spec string round-trips") {
    const char* specs[] = {"kingman", "bolthausen-sznitman", "beta:0.5,1.5",
                           "0.5*atom:0,1 + 0.25*uniform:0.25,1 + power:1"};
    for (const char* spec : specs) {
        const LambdaMeasure m = parse_measure(spec);
        const LambdaMeasure again = parse_measure(m.to_spec_string());
        CHECK(again.to_spec_string() == m.to_spec_string());
        CHECK(total_mass(again) == doctest::Approx(total_mass(m)).epsilon(1e-14));
    }
}

TEST_CASE("mass_below") {
    const LambdaMeasure m = parse_measure("atom:0,0.5 + 0.5*uniform:0.2,0.6");
    CHECK(m.mass_below(0.1) == doctest::Approx(0.0));          // atom at 0 excluded
    CHECK(m.mass_below(0.4) == doctest::Approx(0.25));         // half the uniform part
    CHECK(m.mass_below(1.0) == doctest::Approx(0.5));
    CHECK(m.atom_mass_at_zero() == doctest::Approx(0.5));

    const LambdaMeasure p = parse_measure("power:1"); // density 2x
    CHECK(p.mass_below(0.5) == doctest::Approx(0.25));

    const LambdaMeasure b = parse_measure("beta:2,2");
    // Beta(2,2) cdf at 1/2 is 1/2 by symmetry
    CHECK(b.mass_below(0.5) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("positive support infimum") {
    CHECK(parse_measure("kingman").positive_support_infimum() == doctest::Approx(1.0));
    CHECK(parse_measure("uniform:0.25,1").positive_support_infimum() == doctest::Approx(0.25));
    CHECK(parse_measure("bolthausen-sznitman").positive_support_infimum() == doctest::Approx(0.0));
    CHECK(parse_measure("atom:0.5,1 + atom:0.125,1").positive_support_infimum() ==
          doctest::Approx(0.125));
}

TEST_CASE("scaling") {
    const LambdaMeasure m = parse_measure("0.5*kingman + 0.5*uniform");
    const LambdaMeasure s = m.scaled(3.0);
    CHECK(total_mass(s) == doctest::Approx(3.0 * total_mass(m)).epsilon(1e-15));
    CHECK_THROWS_AS(m.scaled(0.0), ValidationError);
}

#include "fingering/error.hpp"
#include "fingering/model.hpp"

#include <doctest.h>

using namespace fingering;

TEST_CASE("constitutive laws") {
    PhysicalParams p;
    CHECK(viscosity(1.0, p) == doctest::Approx(2.718281828459045).epsilon(1e-15));
    CHECK(density(2.0, p) == 3.0);
    CHECK(mobility(2.0, p) == doctest::Approx(0.1353352832366127).epsilon(1e-15));

    p.R = 0.0;
    CHECK(viscosity(1.7, p) == 1.0);
    p.alpha = 0.0;
    CHECK(density(1.7, p) == 1.0);
    p.K = 3.0;
    CHECK(mobility(5.0, p) == 3.0);
}

TEST_CASE("default parameters are valid and retardation is 1 + k") {
    PhysicalParams p;
    CHECK(p.violations().empty());
    CHECK_NOTHROW(p.validate());
    CHECK(p.retardation() == 2.0);
    CHECK(p.D == 0.005);
    CHECK(p.g[0] == 0.0);
    CHECK(p.g[1] == -1.0);
}

TEST_CASE("every violated constraint is reported") {
    PhysicalParams p;
    p.K = 0.0;
    p.alpha = -1.0;
    p.kappa = -0.5;
    p.D = -1.0;
    const auto v = p.violations();
    CHECK(v.size() == 4);
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("config error lists all problems") {
    const ConfigError e({"first", "second"});
    CHECK(e.problems().size() == 2);
    const std::string what = e.what();
    CHECK(what.find("first") != std::string::npos);
    CHECK(what.find("second") != std::string::npos);
}

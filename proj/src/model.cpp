#include "fingering/model.hpp"

#include "fingering/error.hpp"

#include <sstream>

namespace fingering {

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
          std::ostringstream os;
          os << "invalid configuration (" << problems.size() << " problem"
             << (problems.size() == 1 ? "" : "s") << ")";
          for (const auto& p : problems) os << "\n  - " << p;
          return os.str();
      }()),
      problems_(std::move(problems)) {}

std::vector<std::string> PhysicalParams::violations() const {
    std::vector<std::string> out;
    auto check = [&](bool ok, const char* msg) {
        if (!ok) out.emplace_back(msg);
    };
    check(std::isfinite(K) && K > 0.0, "K must be > 0");
    check(std::isfinite(D) && D > 0.0, "D must be > 0");
    check(std::isfinite(R) && R >= 0.0, "R must be >= 0");
    check(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
    check(std::isfinite(k) && k >= 0.0, "k must be >= 0");
    check(std::isfinite(kappa) && kappa >= 0.0, "kappa must be >= 0");
    check(std::isfinite(g[0]) && std::isfinite(g[1]), "gravity must be finite");
    return out;
}

void PhysicalParams::validate() const {
    auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid physical parameters:";
    for (const auto& s : v) msg += " " + s + ";";
    throw InvalidArgument(msg);
}

}  // namespace fingering

#include "richards/constitutive.hpp"

namespace richards {

namespace {

void require(bool ok, const char* field, const char* rule) {
  if (!ok)
    throw std::invalid_argument(std::string("van genuchten: ") + field + " " + rule);
}

}  // namespace

void VanGenuchtenParams::validate() const {
  require(alpha > 0.0, "alpha", "must be > 0");
  require(a > 0.0, "a", "must be > 0");
  require(beta > 1.0, "beta", "must be > 1");
  require(gamma > 1.0, "gamma", "must be > 1");
  require(k_s > 0.0, "k_s", "must be > 0");
  require(s_r >= 0.0, "s_r", "must be >= 0");
  require(s_r < s_s, "s_r", "must be < s_s");
  require(s_s <= 1.0, "s_s", "must be <= 1");
  require(rho > 0.0, "rho", "must be > 0");
  require(phi > 0.0, "phi", "must be > 0");
}

}  // namespace richards

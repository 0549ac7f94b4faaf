#include "spex/maxid/chi.hpp"

#include <algorithm>
#include <cmath>

#include "spex/common/error.hpp"

namespace spex::maxid {

double model_chi(double distance, double t, const MaxIdParams& p, double q, int angular_nodes) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("model_chi: q must lie in (0, 1)");
  p.validate();
  const auto kernel = kernel_for(p.beta(t), angular_nodes);
  const double z = kernel->quantile(q);
  const double v = kernel->exponent(z, z, rho(distance, p.lambda(t), p.nu));
  // q - C(q, q) = q (1 - exp(-(V - V1site))), with V1site(z) = -ln q.
  const double gap = -q * std::expm1(-(v + std::log(q)));
  const double chi = (1.0 - q - gap) / (1.0 - q);
  return std::clamp(chi, 0.0, 1.0);
}

}  // namespace spex::maxid

// Force between plates filled with a single Lorentz oscillator, with and
// without a second-order nonlinear correction, over a separation sweep at
// room temperature. Prints SI values.

#include <cstdio>
#include <memory>
#include <vector>

#include "casimir/force.hpp"
#include "casimir/nonlinear.hpp"
#include "casimir/units.hpp"

int main() {
  using namespace casimir;
  const LorentzMedium medium({{units::ev_to_natural(1.2) * units::ev_to_natural(1.2), units::ev_to_natural(1.5),
                               units::ev_to_natural(0.1)}});
  const std::vector<NonlinearKernel> kernels{NonlinearKernel::separable(
      std::vector<AxisFactor>(2, AxisFactor(PowerExponential{1.0, 1.0})), 2.0, true)};
  const auto delta = std::make_shared<const DeltaTable>(build_delta_table(kernels, DeltaOptions{}));

  std::printf("%8s %16s %16s %10s\n", "h_um", "F_linear_Pa", "F_nonlinear_Pa", "ratio");
  for (double h : {0.2, 0.5, 1.0, 2.0, 5.0}) {
    PlateSystem s;
    s.separation = h;
    s.temperature = units::temperature_to_natural(300.0);
    s.medium = medium;
    const double lin = casimir_force(s).force_per_area;
    s.delta = delta;
    const double nl = casimir_force(s).force_per_area;
    std::printf("%8.3f %16.6e %16.6e %10.6f\n", h, units::pressure_to_pascal(lin), units::pressure_to_pascal(nl),
                nl / lin);
  }
}

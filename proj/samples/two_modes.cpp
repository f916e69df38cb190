// Bounds for two modes with real overlap k: channel SDP next to the closed form,
// then the source scenario and a lossy estimate.

#include <cstdio>

#include "modebound/analytic.hpp"
#include "modebound/bounds.hpp"
#include "modebound/losses.hpp"

using namespace modebound;

int main() {
  const double k = 0.5;
  const ModeFamily f = make_two_mode(k);
  std::printf("%5s %12s %12s %12s %12s\n", "nbar", "channel", "closed form", "source", "closed form");
  for (double nbar : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    const EnergyConstraint ec(nbar, kDefaultNmax);
    const BoundResult ch = channel_bound(f, ec, Task::probabilistic);
    const BoundResult src = source_bound(f, ec, Task::probabilistic);
    std::printf("%5.2f %12.8f %12.8f %12.8f %12.8f\n", nbar, ch.bound, helstrom(chi_two_mode(k, nbar)), src.bound,
                two_mode_source_bound(k, nbar, Task::probabilistic));
  }

  const LossChannel half(0.5);
  const HeuristicResult h = heuristic_channel_lossy(0.4, 1.0, half);
  std::printf("\nk=0.4, nbar=1, t^2=0.5: estimate %.6f (coherent %.6f, Fock %.6f)\n", h.best.p_correct,
              coherent_bound(0.4, 1.0, half), fock_bound_lossy(0.4, 1, half));
  std::printf("input weights:");
  for (double w : h.best.weights) std::printf(" %.4f", w);
  std::printf("\n");
}

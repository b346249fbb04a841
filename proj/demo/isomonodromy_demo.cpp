// Follows one Sigma point along the Garnier flow and prints the even-word traces
// before and after; then lifts a quadratic differential to a genus-2 system.
#include <iomanip>
#include <iostream>

#include "isomono/garnier.hpp"
#include "isomono/genus2.hpp"
#include "isomono/monodromy.hpp"

using namespace isomono;

int main()
{
  const PoleConfig t0(complex(2, 0.3), complex(-1.5, 1), complex(0.4, -2));
  const SigmaPoint s{complex(0.2, 0.1), {complex(0.3, -0.1), complex(-0.2, 0.25), complex(-0.1, -0.15)}};
  const DarbouxPoint d0 = sigma_to_sigma_darb(t0, s).full();

  PoleConfig t1 = t0;
  t1.t[0] += complex(0.1, 0.05);
  t1.t[2] += complex(-0.05, 0.1);
  const auto traj = isomonodromic_flow(TPath::segment(t0, t1), d0, 1e-12);

  const complex b = default_basepoint(t0);
  const auto before = even_word_traces(fuchsian_monodromy(psi(t0, d0).system(t0), standard_loops(t0, b)), default_words());
  const auto after = even_word_traces(
      fuchsian_monodromy(psi(t1, traj.end_point()).system(t1), standard_loops(t1, b)), default_words());

  std::cout << std::setprecision(12);
  std::cout << "flow: " << traj.stats.accepted << " steps, q at the end:";
  for (const auto& q : traj.end_point().q) std::cout << ' ' << q;
  std::cout << "\n\nword traces (before | after):\n";
  for (std::size_t k = 0; k < before.size(); ++k) std::cout << "  " << before[k] << " | " << after[k] << '\n';

  const QuadraticDifferential nu{complex(0.1, 0.05), complex(-0.2, 0.1), complex(0.15, -0.05)};
  const Genus2System g = phi_lift(t0, section_phi(t0, nu));
  const auto si = self_intersection(g);
  std::cout << "\nlift of nu: beta = " << g.beta1 << " x + " << g.beta0 << ", gamma = " << g.gamma1 << " x + " << g.gamma0 << '\n';
  std::cout << "special fibers: " << total_multiplicity(twelve_special_fibers(g)) << ", self-intersection " << si.value << '\n';
  return 0;
}

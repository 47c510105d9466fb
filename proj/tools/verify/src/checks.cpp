#include "verify/checks.hpp"

#include <stdexcept>

namespace cyllevy::verify {

const std::vector<CheckSpec>& registry() {
  static const std::vector<CheckSpec> checks{
      {"limit-characteristics",
       "Theorem 2.2: b and the S-operator trace are limits of partition sums over d_{i,n}=L(p_{i,n})-L(p_{i-1,n})",
       limit_characteristics},
      {"pushforward-consistency",
       "Lemma 3.2: there exists an H-valued Levy process with characteristics (b_Phi, Phi Q Phi*, lambda o Phi^{-1})",
       pushforward_consistency},
      {"contraction-composition", "Lemma 3.8: b^theta_{O Phi} = O b_Phi^theta + int (theta(Oh) - O theta(h))",
       contraction_composition},
      {"modular-growth", "Lemma 3.14: m_L(psi1+psi2) <= 4(m_L(psi1)+m_L(psi2))", modular_growth},
      {"metrization-sandwich", "Proposition 3.20: d_L(psi1,psi2) <= m_L(psi1-psi2)^p <= 2 d_L(psi1,psi2)",
       metrization_sandwich},
      {"stable-equivalence", "Section 3, Example: M^HS_det,L = L^alpha_Leb([0,T], L_2(G,H)) for canonical alpha-stable L",
       stable_equivalence},
      {"integration-equivalence",
       "Lemma 4.3: m_L(psi_n) -> 0 iff sup_gamma E[|int gamma psi_n dL| ^ 1] -> 0", integration_equivalence},
      {"supremum-equivalency",
       "Lemma 4.8: int sup_O |b^theta_{O psi(t)}| dt = sup_gamma |int b^theta_{gamma psi(t)} dt|",
       supremum_equivalency},
      {"predictable-equivalence", "Corollary 7.3: lim |||Psi_n|||_L = 0 iff the integrals converge",
       predictable_equivalence},
      {"tangent-laws", "Proposition 6.3: (L~(t)g)(omega,omega') = (L(t)g)(omega') yields a decoupled tangent sequence",
       tangent_laws},
      {"decoupling-ratio", "Remark after Definition 6.2: decoupling inequalities between sum X_n and sum Y_n",
       decoupling_ratio_check},
      {"semimartingale-bound", "Theorem 7.4: the integral process I(Psi) is a semimartingale", semimartingale_bound},
      {"dominated-convergence", "Theorem 7.5: dominated convergence by a process Upsilon", dominated_convergence},
      {"enumeration-oracle",
       "Section 5: I(Psi) = sum_i sum_k 1_{A_{i,k}} Phi_{i,k}(L(t_{i+1})-L(t_i)) against exact enumeration",
       enumeration_oracle},
  };
  return checks;
}

const CheckSpec& find_check(std::string_view id) {
  for (const auto& c : registry())
    if (c.id == id) return c;
  throw std::invalid_argument("unknown check '" + std::string(id) + "'");
}

CheckResult run_check(const CheckSpec& spec, const ExperimentConfig& config, std::uint64_t seed) {
  const auto& all = registry();
  std::uint64_t index = 0;
  while (index < all.size() && all[index].id != spec.id) ++index;
  CheckResult r = spec.run(config, Stream(seed, StreamModule::kCli, index));
  r.check = spec.id;
  r.anchor = spec.anchor;
  return r;
}

}  // namespace cyllevy::verify

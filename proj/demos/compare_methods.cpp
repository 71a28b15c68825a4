// Solves one structured instance with the orthogonal pair steps and with the
// baseline, then prints the robustness metrics side by side.

#include <cstdio>

#include "polecraft/polecraft.hpp"

int main() {
  const polecraft::BenchCase bc = polecraft::gen_example41(4, 1e3, 42);

  polecraft::SolveConfig cfg;
  polecraft::FeedbackSolution robust = polecraft::assign(bc.sys, bc.poles, cfg);
  polecraft::RobustnessReport rob_rep = polecraft::validate(bc.sys, bc.poles, robust);

  cfg.baseline_mode = true;
  polecraft::FeedbackSolution base = polecraft::assign(bc.sys, bc.poles, cfg);
  polecraft::RobustnessReport base_rep = polecraft::validate(bc.sys, bc.poles, base);

  cfg.baseline_mode = false;
  cfg.multistart_count = 10;
  cfg.rng_seed = 7;
  polecraft::FeedbackSolution multi = polecraft::assign_multistart(bc.sys, bc.poles, cfg);
  polecraft::RobustnessReport multi_rep = polecraft::validate(bc.sys, bc.poles, multi);

  std::printf("case %s\n", bc.name.c_str());
  std::printf("%-12s dep=%.3e cond_x=%.3e precs=%d\n", "schur-rob", rob_rep.dep, rob_rep.cond_x,
              rob_rep.precs);
  std::printf("%-12s dep=%.3e cond_x=%.3e precs=%d\n", "o-schur-rob", multi_rep.dep,
              multi_rep.cond_x, multi_rep.precs);
  std::printf("%-12s dep=%.3e cond_x=%.3e precs=%d\n", "baseline", base_rep.dep, base_rep.cond_x,
              base_rep.precs);
  return 0;
}

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "afemcr/verify.hpp"

using namespace afemcr;

namespace {

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

Triangulation prepared_mesh(const ProblemSpec& prob, int refine_uniform) {
  Triangulation t = prob.base_mesh();
  for (int i = 0; i < refine_uniform; ++i) t = uniform_refine(t);
  return t;
}

int run_solve(const std::string& problem, int refine_uniform, const std::string& out) {
  const ProblemSpec& prob = find_problem(problem);
  const Triangulation t = prepared_mesh(prob, refine_uniform);
  const Solution sol = solve_problem(prob, prob.kind == ProblemKind::stokes
                                               ? t
                                               : t);
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os.precision(17);
  os << "side,node_a,node_b,mid_x,mid_y";
  for (int c = 0; c < sol.u.components; ++c) os << ",u" << c;
  os << "\n";
  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    os << s << "," << sd.key.a << "," << sd.key.b << "," << sd.midpoint.x << ","
       << sd.midpoint.y;
    for (int c = 0; c < sol.u.components; ++c) os << "," << sol.u.at(s, c);
    os << "\n";
  }
  if (sol.has_pressure) {
    os << "elem,pressure\n";
    for (int e = 0; e < t.num_elems(); ++e) os << e << "," << sol.p.value[e] << "\n";
  }
  return 0;
}

int run_afem(const std::string& problem, double mu, double gamma, int max_elems,
             int max_iters, double tol, int refine_uniform, const std::string& out) {
  const ProblemSpec& prob = find_problem(problem);
  AfemConfig cfg;
  cfg.kind = prob.kind;
  cfg.f = prob.f;
  cfg.mu = mu;
  cfg.gamma = gamma;
  cfg.max_elems = max_elems;
  cfg.max_iters = max_iters;
  cfg.tol_eta_sq = tol;
  const AfemTrace trace = afem_run(cfg, prepared_mesh(prob, refine_uniform));
  std::ofstream file;
  trace.write_csv(open_out(file, out));
  for (std::size_t k = 0; k < trace.markings.size(); ++k)
    if (!replay_mark(trace.meshes[k], trace.tables[k], trace.markings[k])) {
      std::cerr << "marking replay mismatch at iteration " << k << "\n";
      return 1;
    }
  return 0;
}

int run_verify(const std::string& suite, std::uint64_t seed, const std::string& out) {
  VerifyOptions opt;
  opt.seed = seed;
  nlohmann::json j = nlohmann::json::array();
  bool pass = true;
  auto push = [&](RatioReport rep) {
    pass = pass && rep.pass;
    j.push_back(rep.to_json());
  };
  if (suite == "all" || suite == "exact") {
    push(check_exact_identities(opt));
    push(check_stability(opt));
  }
  if (suite == "all" || suite == "energy") {
    push(check_energy_bracket(opt));
    push(check_estimator_equivalence(opt));
  }
  if (suite == "all" || suite == "diamond") push(check_lower_diamond(opt));
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os << j.dump(2) << "\n";
  return pass ? 0 : 1;
}

int run_enumerate(const std::string& problem, int budget, const std::string& out) {
  const ProblemSpec& prob = find_problem(problem);
  const auto all = brute_force_enumerate(prob.base_mesh(), budget);
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os << "index,n_elems,n_new_elems,n_new_nodes\n";
  const int base_nodes = static_cast<int>(prob.base_mesh().nodes().size());
  for (std::size_t i = 0; i < all.size(); ++i)
    os << i << "," << all[i].num_elems() << "," << count_new_elements(all[i]) << ","
       << static_cast<int>(all[i].nodes().size()) - base_nodes << "\n";
  return 0;
}

int run_compare(const std::string& problem, double mu, int max_elems, int max_iters,
                const std::string& out) {
  const ProblemSpec& prob = find_problem(problem);
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os.precision(17);
  os << "strategy,iter,n_elems,n_marked,eta_total_sq,energy\n";
  const std::pair<const char*, MarkStrategy> strategies[] = {
      {"modified_maximum", MarkStrategy::modified_maximum},
      {"plain_maximum", MarkStrategy::plain_maximum},
      {"doerfler", MarkStrategy::doerfler},
  };
  for (const auto& [name, strat] : strategies) {
    AfemConfig cfg;
    cfg.kind = prob.kind;
    cfg.f = prob.f;
    cfg.mu = mu;
    cfg.max_elems = max_elems;
    cfg.max_iters = max_iters;
    cfg.strategy = strat;
    const AfemTrace trace = afem_run(cfg, prob.base_mesh());
    for (const AfemIterate& r : trace.rows)
      os << name << "," << r.iter << "," << r.n_elems << "," << r.n_marked << ","
         << r.eta_total_sq << "," << r.energy << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive Crouzeix-Raviart finite element toolkit"};
  app.require_subcommand(1);

  std::string problem = "square-poisson-f1";
  std::string out;
  std::string format = "csv";
  std::string suite = "all";
  double mu = 0.5;
  double gamma = SpaceConstants::default_gamma;
  double tol = 1e-8;
  int max_elems = 100000;
  int max_iters = 1000;
  int refine_uniform = 0;
  int kref = 2;
  int budget = 4;
  std::uint64_t seed = 42;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--problem", problem, "catalog problem name");
    cmd->add_option("--out", out, "output file (default stdout)");
    cmd->add_option("--format", format, "csv|json");
  };
  CLI::App* solve = app.add_subcommand("solve", "solve once and dump the solution");
  add_common(solve);
  solve->add_option("--refine-uniform", refine_uniform, "uniform refinement rounds");

  CLI::App* afem = app.add_subcommand("afem", "adaptive loop, trace as CSV");
  add_common(afem);
  afem->add_option("--mu", mu, "marking parameter in (0,1]");
  afem->add_option("--gamma", gamma, "energy data weight");
  afem->add_option("--max-elems", max_elems, "element budget");
  afem->add_option("--max-iters", max_iters, "iteration budget");
  afem->add_option("--tol", tol, "stop when total eta^2 <= tol");
  afem->add_option("--refine-uniform", refine_uniform, "initial uniform rounds");
  afem->add_option("--kref", kref, "reference refinement depth");

  CLI::App* verify = app.add_subcommand("verify", "run the check suite");
  add_common(verify);
  verify->add_option("--suite", suite, "all|exact|energy|diamond");
  verify->add_option("--seed", seed, "corpus seed");

  CLI::App* enumerate = app.add_subcommand("enumerate", "brute-force lattice census");
  add_common(enumerate);
  enumerate->add_option("--budget", budget, "edge-bisection budget");

  CLI::App* compare =
      app.add_subcommand("compare-marking", "compare marking strategies");
  add_common(compare);
  compare->add_option("--mu", mu, "marking parameter");
  compare->add_option("--max-elems", max_elems, "element budget");
  compare->add_option("--max-iters", max_iters, "iteration budget");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(problem, refine_uniform, out);
    if (afem->parsed())
      return run_afem(problem, mu, gamma, max_elems, max_iters, tol, refine_uniform,
                      out);
    if (verify->parsed()) return run_verify(suite, seed, out);
    if (enumerate->parsed()) return run_enumerate(problem, budget, out);
    if (compare->parsed()) return run_compare(problem, mu, max_elems, max_iters, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

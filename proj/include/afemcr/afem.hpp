#pragma once

#include <string>

#include "afemcr/estimator.hpp"

namespace afemcr {

struct MarkDecision {
  int side = -1;        // side index of the selected side
  double tested = 0.0;  // eta^2 over its closure minus already-collected sides
  bool marked = false;
};

struct MarkResult {
  std::vector<int> marked;          // M: side indices
  std::vector<int> closure;         // M-tilde: side indices (sorted)
  std::vector<MarkDecision> log;    // one entry per loop pass
  double eta_bar_sq = 0.0;
  double mu = 0.0;
};

/// Modified maximum marking. Selection order: descending initial closure
/// sum, ties by descending own indicator, then by side index. Returns an
/// empty marking when eta_bar is zero.
MarkResult mark(const Triangulation& t, const IndicatorTable& table,
                const EtaBarResult& bar, double mu);

/// Re-executes the recorded decisions against the table; true iff every
/// tested value and outcome matches and the resulting set equals M.
bool replay_mark(const Triangulation& t, const IndicatorTable& table,
                 const MarkResult& result);

enum class MarkStrategy { modified_maximum, plain_maximum, doerfler };

/// Side set for the alternative strategies used in marking comparisons:
/// plain maximum marks all sides with eta^2(S) >= mu * max eta^2; Doerfler
/// takes a minimal descending-sorted set with eta^2 sum >= mu * total.
std::vector<int> mark_alternative(const IndicatorTable& table, MarkStrategy strategy,
                                  double mu);

struct AfemConfig {
  ProblemKind kind = ProblemKind::poisson;
  RhsField f;
  double mu = 0.5;
  double gamma = SpaceConstants::default_gamma;
  int max_iters = 1000;
  int max_elems = 100000;
  double tol_eta_sq = 1e-8;
  MarkStrategy strategy = MarkStrategy::modified_maximum;
};

struct AfemIterate {
  int iter = 0;
  int n_elems = 0;
  int n_sides = 0;
  int n_marked = 0;
  int n_closure = 0;
  double eta_bar_sq = 0.0;
  double eta_total_sq = 0.0;
  double energy = 0.0;
  double err_ref = -1.0;  // squared energy distance to exact solution, if known
  double seconds = 0.0;
};

struct AfemState {
  Triangulation tria;
  CRFunction u;
  P0Function p;  // Stokes only
  IndicatorTable table;
  EtaBarResult bar;
  MarkResult marking;
  bool converged = false;
};

struct AfemTrace {
  std::vector<AfemIterate> rows;
  std::vector<MarkResult> markings;    // per iteration, for replay checks
  std::vector<Triangulation> meshes;   // T_0 .. T_K
  std::vector<IndicatorTable> tables;

  void write_csv(std::ostream& out) const;
  static const char* csv_header();
};

/// SOLVE + ESTIMATE + MARK on the given mesh (no refinement).
AfemState afem_step(const AfemConfig& cfg, const Triangulation& t);

AfemTrace afem_run(const AfemConfig& cfg, const Triangulation& t0,
                   const VectorField* exact_grad = nullptr);

/// max_k #(T_k \ T_bot) / sum_{j<k} #M_j over a trace (complexity statistic).
double bdd_ratio(const AfemTrace& trace);

}  // namespace afemcr

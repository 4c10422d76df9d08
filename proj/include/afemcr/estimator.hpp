#pragma once

#include <iosfwd>
#include <map>

#include "afemcr/assembly.hpp"

namespace afemcr {

/// Side-based indicators: eta^2(S) = ||h_T f||^2 over the adjacent elements
/// plus h_S ||[grad u . t]||^2 over S (tangential jump; trace on boundary
/// sides). Jumps of CR gradients are constant per side, so the side term is
/// h_S^2 |jump|^2 exactly.
struct IndicatorTable {
  Triangulation tria;
  std::vector<double> volume;  // per side index
  std::vector<double> jump;
  std::vector<double> total;
  double sum_total = 0.0;

  void write_csv(std::ostream& out) const;
};

IndicatorTable indicators(const Triangulation& t, const CRFunction& u,
                          const RhsField& f);

/// eta_bar^2 = max over sides S of sum of eta^2 over the conformity closure
/// of S, together with the per-side closure sums.
struct EtaBarResult {
  double value = 0.0;
  std::vector<double> refd_sum;               // per side index
  std::vector<std::vector<int>> refd_sides;  // closure as side indices
};

EtaBarResult eta_bar(const Triangulation& t, const IndicatorTable& table);

struct EnergyRecord {
  double gamma = 0.0;
  double dirichlet = 0.0;  // 1/2 ||grad_NC u||^2
  double load = 0.0;       // int f . u
  double data = 0.0;       // gamma ||h_T f||^2
  double total = 0.0;      // -(dirichlet - load) + data
};

/// Generalized energy; with include_data = false the data term is omitted
/// (used for the reference-solution stand-in).
EnergyRecord energy(const Triangulation& t, const CRFunction& u, const RhsField& f,
                    double gamma, bool include_data = true);

struct OscillationRecord {
  Triangulation tria;
  std::vector<double> per_elem;  // |T| int_T (f - mean_T f)^2 per component
  double total = 0.0;
};

OscillationRecord oscillation(const Triangulation& t, const RhsField& f);

enum class ProblemKind { poisson, stokes };

/// Energy gap vs quasi-error report for a solved nested pair t <= tstar.
struct EnergyGapReport {
  double energy_gap = 0.0;        // G(t) - G(tstar)
  double grad_diff_sq = 0.0;      // ||grad_NC(u_star - u)||^2
  double hf_refined_sq = 0.0;     // ||h_T f||^2 over elements of t refined away
  double quasi_error = 0.0;       // grad_diff_sq + hf_refined_sq
  double eta_removed_sq = 0.0;    // eta^2 over E(t) \ E(tstar)
  double ratio_quasi = 0.0;       // quasi_error / eta_removed_sq (0 if degenerate)
  double ratio_gap = 0.0;         // energy_gap / eta_removed_sq
  double bracket_lower = 0.0;     // 1/4 grad + (gamma/2 - Lambda^2) hf
  double bracket_upper = 0.0;     // 3/4 grad + (gamma + Lambda^2) hf
  bool bracket_ok = false;
};

EnergyGapReport energy_difference_vs_error(const Triangulation& t,
                                           const Triangulation& tstar,
                                           ProblemKind kind, const RhsField& f,
                                           double gamma = SpaceConstants::default_gamma);

}  // namespace afemcr

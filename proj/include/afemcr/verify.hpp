#pragma once

#include <cstdint>
#include <random>

#include <nlohmann/json.hpp>

#include "afemcr/problems.hpp"

namespace afemcr {

/// Statistics of a measured quantity over a sample corpus, optionally
/// gated against an explicit bracket.
struct RatioReport {
  std::string name;
  std::string label;  // which identity or bound the samples measure
  std::vector<double> samples;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  bool has_bracket = false;
  double lower = 0.0;
  double upper = 0.0;
  bool measured_only = false;
  bool pass = true;
  std::vector<std::string> witnesses;  // descriptions of failing samples

  void add(double v) { samples.push_back(v); }
  void finalize();  // computes stats, applies the bracket, flags empty corpora
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  int n_exact = 100;
  int n_stability = 100;
  int n_poisson_pairs = 50;
  int n_stokes_pairs = 20;
  int n_diamonds = 10;
};

/// `rounds` marking passes, each bisecting a random subset of sides.
Triangulation random_refinement(const Triangulation& t, std::mt19937_64& rng,
                                int rounds, double frac = 0.25);

/// Exact identities: gradient-mean projection of the interpolation, its
/// Pythagoras consequence, conservation of enrichment composed with
/// interpolation, and conservation plus fine-mesh membership of the
/// transfer operator. Residual tolerance 1e-10.
RatioReport check_exact_identities(const VerifyOptions& opt);

/// Interpolation error bounds on random quadratics:
/// ||h^-1 (v - I v)|| <= 0.4396 ||grad (v - I v)|| and
/// ||grad (v - I v)|| <= ||grad v||.
RatioReport check_stability(const VerifyOptions& opt);

/// Energy-gap bracket on random nested solved pairs, both problems.
RatioReport check_energy_bracket(const VerifyOptions& opt);

/// Measured-only quasi-error / removed-indicator and gap / removed-indicator
/// ratios on the same kind of corpus.
RatioReport check_estimator_equivalence(const VerifyOptions& opt);

/// Lower diamonds built from disjoint single-side refinements: exact
/// interpolation-error and data-term additivity across the diamond, plus
/// the measured energy-gap additivity ratio.
RatioReport check_lower_diamond(const VerifyOptions& opt);

/// All conforming refinements reachable from t0 with at most `budget` edge
/// bisections (new vertices). Breadth-first over single-side refinements
/// with conformity closure, deduplicated by leaf set.
std::vector<Triangulation> brute_force_enumerate(const Triangulation& t0, int budget,
                                                 int max_count = 500000);

struct OptimalityProbe {
  std::vector<AfemIterate> iterates;
  std::vector<int> iterate_cost;      // #(T_k \ T_bot)
  std::vector<double> iterate_energy; // G(T_k)
  int enumerated = 0;
  int budget = 0;
  double best_c = -1.0;  // smallest c in {1,2,4} with G(T_k) <= min-G at every k
  std::string note;
  nlohmann::json to_json() const;
};

OptimalityProbe probe_instance_optimality(const ProblemSpec& prob, double mu,
                                          int budget);

}  // namespace afemcr

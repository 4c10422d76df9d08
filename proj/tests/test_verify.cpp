#include <doctest.h>

#include <set>

#include "afemcr/verify.hpp"

using namespace afemcr;

namespace {

VerifyOptions small_options() {
  VerifyOptions opt;
  opt.seed = 42;
  opt.n_exact = 20;
  opt.n_stability = 20;
  opt.n_poisson_pairs = 8;
  opt.n_stokes_pairs = 4;
  opt.n_diamonds = 4;
  return opt;
}

}  // namespace

TEST_CASE("exact identities hold on a seeded corpus") {
  const RatioReport rep = check_exact_identities(small_options());
  CHECK(rep.pass);
  CHECK(rep.samples.size() == 20);
  CHECK(rep.max <= 1e-10);
  CHECK(rep.witnesses.empty());
}

TEST_CASE("a corrupted transfer result is caught by the conservation check") {
  const Triangulation t =
      uniform_refine(find_problem("square-poisson-f1").base_mesh());
  const Triangulation tstar = refine(t, {t.side(0).key});
  CRFunction v = CRFunction::zero(t, 1);
  for (int s = 0; s < t.num_sides(); ++s) v.at(s) = 0.1 * (s + 1);
  v.zero_boundary();
  TransferResult res = transfer(tstar, v);

  auto conservation_residual = [&] {
    double worst = 0.0;
    for (int e = 0; e < t.num_elems(); ++e) {
      if (!tstar.contains(t.elems()[e])) continue;
      for (int s : t.sides_of(e))
        worst = std::max(worst,
                         std::abs(res.on_fine.at(tstar.side_index(t.side(s).key)) -
                                  v.at(s)));
    }
    return worst;
  };
  CHECK(conservation_residual() <= 1e-12);

  // tamper with the coefficient on a kept element and re-check
  int tampered = -1;
  for (int e = 0; e < t.num_elems() && tampered < 0; ++e) {
    if (!tstar.contains(t.elems()[e])) continue;
    tampered = tstar.side_index(t.side(t.sides_of(e)[0]).key);
  }
  REQUIRE(tampered >= 0);
  res.on_fine.at(tampered) += 0.5;
  CHECK(conservation_residual() > 0.4);
}

TEST_CASE("empty corpus is a flagged vacuous pass") {
  VerifyOptions opt = small_options();
  opt.n_exact = 0;
  const RatioReport rep = check_exact_identities(opt);
  CHECK(rep.pass);
  CHECK(rep.samples.empty());
  REQUIRE(!rep.witnesses.empty());
  CHECK(rep.witnesses.front().find("vacuous") != std::string::npos);
}

TEST_CASE("stability corpus stays below the constant") {
  const RatioReport rep = check_stability(small_options());
  CHECK(rep.pass);
  CHECK(rep.max <= SpaceConstants::lambda + 1e-12);
  CHECK(rep.min >= 0.0);
}

TEST_CASE("energy bracket corpus passes") {
  const RatioReport rep = check_energy_bracket(small_options());
  CHECK(rep.pass);
  CHECK(rep.min >= -1e-10);  // monotone gaps
}

TEST_CASE("estimator equivalence ratios are pinned") {
  const RatioReport rep = check_estimator_equivalence(small_options());
  CHECK(rep.pass);
  CHECK(rep.measured_only);
  REQUIRE(!rep.samples.empty());
  // regression pins: alert on >2x drift from the measured baseline
  CHECK(rep.min > 0.05);
  CHECK(rep.max < 2.1);
}

TEST_CASE("lower diamond corpus passes with ratio near one") {
  const RatioReport rep = check_lower_diamond(small_options());
  CHECK(rep.pass);
  REQUIRE(!rep.samples.empty());
  CHECK(rep.min > 0.8);
  CHECK(rep.max < 1.25);
}

TEST_CASE("json serialization carries the verdict") {
  RatioReport rep;
  rep.name = "demo";
  rep.label = "demo label";
  rep.add(1.0);
  rep.add(3.0);
  rep.has_bracket = true;
  rep.lower = 0.0;
  rep.upper = 2.0;
  rep.finalize();
  CHECK(!rep.pass);  // 3.0 exceeds the bracket
  const nlohmann::json j = rep.to_json();
  CHECK(j["name"] == "demo");
  CHECK(j["n_samples"] == 2);
  CHECK(j["mean"] == doctest::Approx(2.0));
  CHECK(j["pass"] == false);
}

TEST_CASE("enumeration counts on the square are pinned") {
  const Triangulation t =
      Triangulation::bottom(MeshForest::load_string("vertices 4\n0 0\n1 0\n1 1\n0 1\n"
                                                    "triangles 2\n1 0 2\n3 0 2\n"));
  CHECK(brute_force_enumerate(t, 0).size() == 1);
  // only the diagonal is compatibly divisible with a single bisection
  const auto b1 = brute_force_enumerate(t, 1);
  REQUIRE(b1.size() == 2);
  CHECK(b1[1].num_elems() == 4);
  CHECK(brute_force_enumerate(t, 2).size() == 6);
  CHECK_THROWS(brute_force_enumerate(t, 4, 5));  // count cap
}

TEST_CASE("enumeration is duplicate free and conforming") {
  const Triangulation t =
      Triangulation::bottom(MeshForest::load_string("vertices 4\n0 0\n1 0\n1 1\n0 1\n"
                                                    "triangles 2\n1 0 2\n3 0 2\n"));
  const auto all = brute_force_enumerate(t, 3);
  std::set<std::vector<int>> seen;
  for (const Triangulation& m : all) {
    CHECK(seen.insert(m.elems()).second);
    CHECK(coarser_or_equal(t, m));
    double area = 0.0;
    for (int e = 0; e < m.num_elems(); ++e) area += m.area(e);
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("optimality probe reports a finite measured constant") {
  const OptimalityProbe probe =
      probe_instance_optimality(find_problem("square-poisson-f1"), 1.0, 4);
  CHECK(probe.enumerated > 2);
  CHECK(probe.best_c >= 1.0);
  REQUIRE(probe.iterate_energy.size() > 1);
  for (std::size_t k = 1; k < probe.iterate_energy.size(); ++k)
    CHECK(probe.iterate_energy[k] <= probe.iterate_energy[0] + 1e-12);
  const nlohmann::json j = probe.to_json();
  CHECK(j["note"].get<std::string>().find("not") != std::string::npos);
}

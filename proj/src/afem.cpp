#include "afemcr/afem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

namespace afemcr {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::vector<int> selection_order(const Triangulation& t, const IndicatorTable& table,
                                 const EtaBarResult& bar) {
  std::vector<int> order(t.num_sides());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (bar.refd_sum[a] != bar.refd_sum[b]) return bar.refd_sum[a] > bar.refd_sum[b];
    if (table.total[a] != table.total[b]) return table.total[a] > table.total[b];
    return a < b;
  });
  return order;
}

}  // namespace

MarkResult mark(const Triangulation& t, const IndicatorTable& table,
                const EtaBarResult& bar, double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) fail("mark: mu must lie in (0,1]");
  if (static_cast<int>(table.total.size()) != t.num_sides())
    fail("mark: indicator table incomplete");

  MarkResult res;
  res.eta_bar_sq = bar.value;
  res.mu = mu;
  if (bar.value <= 0.0) return res;

  std::vector<char> in_candidates(t.num_sides(), 1);
  std::vector<char> in_closure(t.num_sides(), 0);
  for (int s : selection_order(t, table, bar)) {
    if (!in_candidates[s]) continue;
    double tested = 0.0;
    for (int sp : bar.refd_sides[s])
      if (!in_closure[sp]) tested += table.total[sp];
    MarkDecision dec{s, tested, tested >= mu * bar.value};
    if (dec.marked) {
      res.marked.push_back(s);
      for (int sp : bar.refd_sides[s]) in_closure[sp] = 1;
    }
    for (int sp : bar.refd_sides[s]) in_candidates[sp] = 0;
    res.log.push_back(dec);
  }
  for (int s = 0; s < t.num_sides(); ++s)
    if (in_closure[s]) res.closure.push_back(s);
  return res;
}

bool replay_mark(const Triangulation& t, const IndicatorTable& table,
                 const MarkResult& result) {
  if (result.eta_bar_sq <= 0.0) return result.marked.empty() && result.log.empty();
  std::vector<char> in_candidates(t.num_sides(), 1);
  std::vector<char> in_closure(t.num_sides(), 0);
  std::vector<int> marked;
  for (const MarkDecision& dec : result.log) {
    if (!in_candidates[dec.side]) return false;
    std::vector<int> closure;
    for (const SideKey& k : refd(t, t.side(dec.side).key)) {
      const int sp = t.side_index(k);
      if (sp < 0) return false;
      closure.push_back(sp);
    }
    double tested = 0.0;
    for (int sp : closure)
      if (!in_closure[sp]) tested += table.total[sp];
    if (std::abs(tested - dec.tested) > 1e-12 * (1.0 + std::abs(dec.tested)))
      return false;
    const bool marks = tested >= result.mu * result.eta_bar_sq;
    if (marks != dec.marked) return false;
    if (marks) {
      marked.push_back(dec.side);
      for (int sp : closure) in_closure[sp] = 1;
    }
    for (int sp : closure) in_candidates[sp] = 0;
  }
  for (int s = 0; s < t.num_sides(); ++s)
    if (in_candidates[s]) return false;  // log must exhaust the candidate set
  return marked == result.marked;
}

std::vector<int> mark_alternative(const IndicatorTable& table, MarkStrategy strategy,
                                  double mu) {
  const int n = static_cast<int>(table.total.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (table.total[a] != table.total[b]) return table.total[a] > table.total[b];
    return a < b;
  });
  std::vector<int> marked;
  if (strategy == MarkStrategy::plain_maximum) {
    const double cutoff = mu * (n > 0 ? table.total[order[0]] : 0.0);
    if (cutoff <= 0.0) return marked;
    for (int s = 0; s < n; ++s)
      if (table.total[s] >= cutoff) marked.push_back(s);
  } else if (strategy == MarkStrategy::doerfler) {
    const double target = mu * table.sum_total;
    if (table.sum_total <= 0.0) return marked;
    double acc = 0.0;
    for (int s : order) {
      if (acc >= target) break;
      marked.push_back(s);
      acc += table.total[s];
    }
    std::sort(marked.begin(), marked.end());
  } else {
    fail("mark_alternative: use mark() for the modified maximum strategy");
  }
  return marked;
}

AfemState afem_step(const AfemConfig& cfg, const Triangulation& t) {
  AfemState st;
  st.tria = t;
  if (cfg.kind == ProblemKind::poisson) {
    st.u = solve_poisson(t, cfg.f);
  } else {
    StokesSolution sol = solve_stokes(t, cfg.f);
    st.u = std::move(sol.u);
    st.p = std::move(sol.p);
  }
  st.table = indicators(t, st.u, cfg.f);
  st.bar = eta_bar(t, st.table);
  if (cfg.strategy == MarkStrategy::modified_maximum) {
    st.marking = mark(t, st.table, st.bar, cfg.mu);
  } else {
    st.marking.eta_bar_sq = st.bar.value;
    st.marking.mu = cfg.mu;
    st.marking.marked = mark_alternative(st.table, cfg.strategy, cfg.mu);
  }
  st.converged = st.marking.marked.empty();
  return st;
}

const char* AfemTrace::csv_header() {
  return "iter,n_elems,n_sides,n_marked,eta_bar_sq,eta_total_sq,energy,err_ref,seconds";
}

void AfemTrace::write_csv(std::ostream& out) const {
  out << csv_header() << "\n";
  out.precision(17);
  for (const AfemIterate& r : rows)
    out << r.iter << "," << r.n_elems << "," << r.n_sides << "," << r.n_marked << ","
        << r.eta_bar_sq << "," << r.eta_total_sq << "," << r.energy << ","
        << r.err_ref << "," << r.seconds << "\n";
}

AfemTrace afem_run(const AfemConfig& cfg, const Triangulation& t0,
                   const VectorField* exact_grad) {
  AfemTrace trace;
  Triangulation t = t0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    const auto tic = std::chrono::steady_clock::now();
    AfemState st = afem_step(cfg, t);
    AfemIterate row;
    row.iter = k;
    row.n_elems = t.num_elems();
    row.n_sides = t.num_sides();
    row.n_marked = static_cast<int>(st.marking.marked.size());
    row.n_closure = static_cast<int>(st.marking.closure.size());
    row.eta_bar_sq = st.bar.value;
    row.eta_total_sq = st.table.sum_total;
    row.energy = energy(t, st.u, cfg.f, cfg.gamma).total;
    if (exact_grad) {
      double err = 0.0;
      for (int e = 0; e < t.num_elems(); ++e) {
        const Vec2 gu = st.u.grad(e, 0);
        err += integrate_d5(t.geom(e), [&](const Vec2& x) {
          return norm_sq((*exact_grad)(x) - gu);
        });
      }
      row.err_ref = err;
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    trace.rows.push_back(row);
    trace.markings.push_back(st.marking);
    trace.meshes.push_back(t);
    trace.tables.push_back(st.table);

    if (st.converged || st.table.sum_total <= cfg.tol_eta_sq) break;
    if (t.num_elems() >= cfg.max_elems) break;

    std::vector<SideKey> keys;
    keys.reserve(st.marking.marked.size());
    for (int s : st.marking.marked) keys.push_back(t.side(s).key);
    t = refine(t, keys);
  }
  return trace;
}

double bdd_ratio(const AfemTrace& trace) {
  double worst = 0.0;
  long long marked_sum = 0;
  for (std::size_t k = 1; k < trace.rows.size(); ++k) {
    marked_sum += trace.rows[k - 1].n_marked;
    const int grown = count_new_elements(trace.meshes[k]);
    if (marked_sum > 0)
      worst = std::max(worst, static_cast<double>(grown) / marked_sum);
  }
  return worst;
}

}  // namespace afemcr

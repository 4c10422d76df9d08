#include "afemcr/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace afemcr {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

// ---------------------------------------------------------------------------
// MeshForest
// ---------------------------------------------------------------------------

int MeshForest::midpoint_vertex(const SideKey& k) {
  auto it = edge_midpoint_.find(k);
  if (it != edge_midpoint_.end()) return it->second;
  const int m = static_cast<int>(verts_.size());
  verts_.push_back((verts_[k.a] + verts_[k.b]) * 0.5);
  edge_midpoint_.emplace(k, m);
  if (boundary_edges_.count(k)) {
    boundary_edges_.insert(SideKey(k.a, m));
    boundary_edges_.insert(SideKey(m, k.b));
  }
  return m;
}

std::array<int, 2> MeshForest::bisect(int id) {
  ForestElem& e = elems_[id];
  if (e.has_children()) return e.child;
  const SideKey re(e.v[1], e.v[2]);
  const int m = midpoint_vertex(re);
  const int c0 = static_cast<int>(elems_.size());
  ForestElem a, b;
  a.v = {m, e.v[1], e.v[0]};
  b.v = {m, e.v[0], e.v[2]};
  a.parent = b.parent = id;
  a.gen = b.gen = e.gen + 1;
  elems_.push_back(a);
  elems_.push_back(b);
  elems_[id].child = {c0, c0 + 1};
  return {c0, c0 + 1};
}

bool MeshForest::is_ancestor_or_self(int anc, int id) const {
  for (int e = id; e >= 0; e = elems_[e].parent)
    if (e == anc) return true;
  return false;
}

std::shared_ptr<MeshForest> MeshForest::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open mesh file: " + path);
  return load(in, path);
}

std::shared_ptr<MeshForest> MeshForest::load_string(const std::string& text) {
  std::istringstream in(text);
  return load(in, "<string>");
}

std::shared_ptr<MeshForest> MeshForest::load(std::istream& in, const std::string& origin) {
  auto next_line = [&](std::string& line) -> bool {
    while (std::getline(in, line)) {
      auto pos = line.find('#');
      if (pos != std::string::npos) line.erase(pos);
      // skip blank lines
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  };

  std::string line, word;
  if (!next_line(line)) fail(origin + ": empty mesh file");
  std::istringstream hs(line);
  std::size_t nv = 0;
  if (!(hs >> word >> nv) || word != "vertices")
    fail(origin + ": expected 'vertices N'");

  auto forest = std::shared_ptr<MeshForest>(new MeshForest());
  forest->verts_.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_line(line)) fail(origin + ": truncated vertex list");
    std::istringstream vs(line);
    double x, y;
    if (!(vs >> x >> y)) fail(origin + ": bad vertex line: " + line);
    forest->verts_.push_back({x, y});
  }

  if (!next_line(line)) fail(origin + ": expected 'triangles M'");
  std::istringstream ts(line);
  std::size_t nt = 0;
  if (!(ts >> word >> nt) || word != "triangles")
    fail(origin + ": expected 'triangles M'");

  for (std::size_t i = 0; i < nt; ++i) {
    if (!next_line(line)) fail(origin + ": truncated triangle list");
    std::istringstream es(line);
    int a, b, c;
    if (!(es >> a >> b >> c)) fail(origin + ": bad triangle line: " + line);
    for (int v : {a, b, c})
      if (v < 0 || v >= static_cast<int>(nv))
        fail(origin + ": vertex id out of range in triangle " + std::to_string(i));
    ForestElem e;
    e.v = {a, b, c};
    if (std::abs(signed_area(forest->verts_[a], forest->verts_[b], forest->verts_[c])) <
        1e-30)
      fail(origin + ": degenerate triangle " + std::to_string(i));
    forest->elems_.push_back(e);
  }
  forest->n_roots_ = static_cast<int>(nt);
  if (nt == 0) fail(origin + ": mesh has no triangles");

  // Conformity of the roots: every edge is shared by at most two triangles
  // and shared edges match as whole vertex pairs.
  std::unordered_map<SideKey, std::vector<int>, SideKeyHash> adj;
  for (int t = 0; t < forest->n_roots_; ++t) {
    const auto& v = forest->elems_[t].v;
    adj[SideKey(v[1], v[2])].push_back(t);
    adj[SideKey(v[2], v[0])].push_back(t);
    adj[SideKey(v[0], v[1])].push_back(t);
  }
  for (const auto& [key, ts2] : adj) {
    if (ts2.size() > 2)
      fail(origin + ": non-conforming roots, edge (" + std::to_string(key.a) + "," +
           std::to_string(key.b) + ") shared by " + std::to_string(ts2.size()) +
           " triangles");
    if (ts2.size() == 1) forest->boundary_edges_.insert(key);
  }
  // Matching assumption: a shared refinement edge is the refinement edge of
  // both neighbours.
  for (const auto& [key, ts2] : adj) {
    if (ts2.size() != 2) continue;
    const bool r0 = forest->refinement_edge(ts2[0]) == key;
    const bool r1 = forest->refinement_edge(ts2[1]) == key;
    if (r0 != r1)
      fail(origin + ": matching assumption violated on edge (" + std::to_string(key.a) +
           "," + std::to_string(key.b) + ") between triangles " +
           std::to_string(ts2[0]) + " and " + std::to_string(ts2[1]));
  }
  return forest;
}

// ---------------------------------------------------------------------------
// Triangulation
// ---------------------------------------------------------------------------

Triangulation Triangulation::bottom(std::shared_ptr<MeshForest> forest) {
  std::vector<int> leaves(forest->num_roots());
  for (int i = 0; i < forest->num_roots(); ++i) leaves[i] = i;
  return from_leaves(std::move(forest), std::move(leaves));
}

Triangulation Triangulation::from_leaves(std::shared_ptr<MeshForest> forest,
                                         std::vector<int> leaves) {
  auto d = std::make_shared<Data>();
  d->forest = std::move(forest);
  std::sort(leaves.begin(), leaves.end());
  d->leaves = std::move(leaves);
  d->leafset.reserve(d->leaves.size() * 2);
  d->leaf_index.reserve(d->leaves.size() * 2);
  for (int i = 0; i < static_cast<int>(d->leaves.size()); ++i) {
    d->leafset.insert(d->leaves[i]);
    d->leaf_index.emplace(d->leaves[i], i);
  }

  const MeshForest& f = *d->forest;
  std::map<SideKey, std::array<int, 2>> side_adj;  // ordered for determinism
  for (int id : d->leaves) {
    const auto& v = f.elem(id).v;
    for (const SideKey k : {SideKey(v[1], v[2]), SideKey(v[2], v[0]), SideKey(v[0], v[1])}) {
      auto [it, fresh] = side_adj.try_emplace(k, std::array<int, 2>{id, -1});
      if (!fresh) {
        if (it->second[1] != -1)
          fail("non-conforming cut: side shared by more than two elements");
        it->second[1] = id;
      }
    }
  }

  d->sides.reserve(side_adj.size());
  for (const auto& [key, el] : side_adj) {
    Side s;
    s.key = key;
    const Vec2 pa = f.vertices()[key.a];
    const Vec2 pb = f.vertices()[key.b];
    s.midpoint = (pa + pb) * 0.5;
    s.length = norm(pb - pa);
    s.elems = el;
    s.boundary = (el[1] == -1);
    if (s.boundary && !f.is_boundary_edge(key))
      fail("non-conforming cut: interior side (" + std::to_string(key.a) + "," +
           std::to_string(key.b) + ") has a single adjacent element");
    d->side_index.emplace(key, static_cast<int>(d->sides.size()));
    d->sides.push_back(s);
  }

  d->elem_sides.resize(d->leaves.size());
  d->geoms.resize(d->leaves.size());
  std::unordered_set<int> nodeset;
  for (int i = 0; i < static_cast<int>(d->leaves.size()); ++i) {
    const auto& v = f.elem(d->leaves[i]).v;
    d->elem_sides[i] = {d->side_index.at(SideKey(v[1], v[2])),
                        d->side_index.at(SideKey(v[2], v[0])),
                        d->side_index.at(SideKey(v[0], v[1]))};
    d->geoms[i] = TriGeom::make(f.vertices()[v[0]], f.vertices()[v[1]], f.vertices()[v[2]]);
    for (int k = 0; k < 3; ++k) nodeset.insert(v[k]);
  }
  d->nodes.assign(nodeset.begin(), nodeset.end());
  std::sort(d->nodes.begin(), d->nodes.end());
  for (const Side& s : d->sides)
    if (s.boundary) {
      d->boundary_nodes.insert(s.key.a);
      d->boundary_nodes.insert(s.key.b);
    }
  return Triangulation(std::move(d));
}

int Triangulation::ancestor_leaf(int elemId) const {
  return d_->forest->ancestor_where(elemId, [&](int e) { return contains(e); });
}

// ---------------------------------------------------------------------------
// REFINE
// ---------------------------------------------------------------------------

namespace {

/// Mutable working cut used inside refine(): leaf set plus side adjacency,
/// updated incrementally as elements are bisected.
struct WorkingCut {
  MeshForest& forest;
  std::unordered_set<int> cut;
  std::unordered_map<SideKey, std::array<int, 2>, SideKeyHash> adj;

  explicit WorkingCut(const Triangulation& t) : forest(*t.forest()) {
    cut.insert(t.elems().begin(), t.elems().end());
    for (int i = 0; i < t.num_sides(); ++i) adj.emplace(t.side(i).key, t.side(i).elems);
  }

  void attach(int id) {
    cut.insert(id);
    const auto& v = forest.elem(id).v;
    for (const SideKey k :
         {SideKey(v[1], v[2]), SideKey(v[2], v[0]), SideKey(v[0], v[1])}) {
      auto [it, fresh] = adj.try_emplace(k, std::array<int, 2>{id, -1});
      if (!fresh) {
        if (it->second[0] == -1)
          it->second[0] = id;
        else
          it->second[1] = id;
      }
    }
  }

  void detach(int id) {
    cut.erase(id);
    const auto& v = forest.elem(id).v;
    for (const SideKey k :
         {SideKey(v[1], v[2]), SideKey(v[2], v[0]), SideKey(v[0], v[1])}) {
      auto it = adj.find(k);
      if (it->second[0] == id) it->second[0] = it->second[1];
      it->second[1] = -1;
      if (it->second[0] == -1) adj.erase(it);
    }
  }

  int neighbor_across(const SideKey& k, int self) const {
    auto it = adj.find(k);
    if (it == adj.end()) return -1;
    if (it->second[0] == self) return it->second[1];
    return it->second[0];
  }

  bool has_side(const SideKey& k) const { return adj.count(k) > 0; }

  void split(int id) {
    auto children = forest.bisect(id);
    detach(id);
    attach(children[0]);
    attach(children[1]);
  }

  /// Bisect leaf `id` keeping the cut conforming: the neighbour across the
  /// refinement edge is first brought to a state where it shares that edge
  /// as its own refinement edge, then both are split together.
  void bisect_compat(int id) {
    const SideKey re = forest.refinement_edge(id);
    int nb = neighbor_across(re, id);
    if (nb >= 0 && forest.refinement_edge(nb) != re) {
      bisect_compat(nb);
      nb = neighbor_across(re, id);
      if (nb < 0 || forest.refinement_edge(nb) != re)
        fail("internal error: compatible bisection did not expose shared edge");
    }
    split(id);
    if (nb >= 0) split(nb);
  }
};

}  // namespace

Triangulation refine(const Triangulation& t, const std::vector<SideKey>& marked) {
  for (const SideKey& s : marked)
    if (t.side_index(s) < 0)
      fail("refine: side (" + std::to_string(s.a) + "," + std::to_string(s.b) +
           ") is not a side of the triangulation");
  if (marked.empty()) return t;

  WorkingCut w(t);
  for (const SideKey& s : marked) {
    while (w.has_side(s)) {
      auto it = w.adj.find(s);
      const int e = it->second[0];
      // Splitting e either bisects s (if s is the refinement edge) or moves
      // one generation closer to that state.
      w.bisect_compat(e);
    }
  }
  std::vector<int> leaves(w.cut.begin(), w.cut.end());
  return Triangulation::from_leaves(t.forest(), std::move(leaves));
}

std::vector<SideKey> refd(const Triangulation& t, const SideKey& s) {
  if (t.side_index(s) < 0)
    fail("refd: side (" + std::to_string(s.a) + "," + std::to_string(s.b) +
         ") is not a side of the triangulation");
  // Conformity closure on sides: bisecting s forces, for every adjacent
  // element whose refinement edge differs from s, that refinement edge to be
  // bisected as well, recursively.
  const MeshForest& f = *t.forest();
  std::vector<SideKey> out;
  SideKeySet seen;
  std::vector<SideKey> stack{s};
  seen.insert(s);
  while (!stack.empty()) {
    const SideKey cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const Side& side = t.side(t.side_index(cur));
    for (int e : side.elems) {
      if (e < 0) continue;
      const SideKey re = f.refinement_edge(e);
      if (re != cur && seen.insert(re).second) stack.push_back(re);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void collect_meet(const MeshForest& f, int e, const Triangulation& a,
                  const Triangulation& b, std::vector<int>& out) {
  if (a.contains(e) || b.contains(e)) {
    out.push_back(e);
    return;
  }
  const auto& el = f.elem(e);
  if (!el.has_children()) fail("meet: element below both cuts has no children");
  collect_meet(f, el.child[0], a, b, out);
  collect_meet(f, el.child[1], a, b, out);
}

void collect_join(const MeshForest& f, int e, const Triangulation& a,
                  const Triangulation& b, bool above_a, bool above_b,
                  std::vector<int>& out) {
  const bool in_a = above_a || a.contains(e);
  const bool in_b = above_b || b.contains(e);
  if (in_a && in_b) {
    out.push_back(e);
    return;
  }
  const auto& el = f.elem(e);
  if (!el.has_children()) fail("join: cut passes below an element with no children");
  collect_join(f, el.child[0], a, b, in_a, in_b, out);
  collect_join(f, el.child[1], a, b, in_a, in_b, out);
}

}  // namespace

Triangulation meet(const Triangulation& a, const Triangulation& b) {
  if (a.forest() != b.forest()) fail("meet: triangulations from different forests");
  const MeshForest& f = *a.forest();
  std::vector<int> leaves;
  for (int r = 0; r < f.num_roots(); ++r) collect_meet(f, r, a, b, leaves);
  return Triangulation::from_leaves(a.forest(), std::move(leaves));
}

Triangulation join(const Triangulation& a, const Triangulation& b) {
  if (a.forest() != b.forest()) fail("join: triangulations from different forests");
  const MeshForest& f = *a.forest();
  std::vector<int> leaves;
  for (int r = 0; r < f.num_roots(); ++r)
    collect_join(f, r, a, b, false, false, leaves);
  return Triangulation::from_leaves(a.forest(), std::move(leaves));
}

Triangulation uniform_refine(const Triangulation& t) {
  std::vector<SideKey> all;
  all.reserve(t.num_sides());
  for (int i = 0; i < t.num_sides(); ++i) all.push_back(t.side(i).key);
  return refine(t, all);
}

bool coarser_or_equal(const Triangulation& t, const Triangulation& tstar) {
  if (t.forest() != tstar.forest()) return false;
  for (int e : tstar.elems())
    if (t.ancestor_leaf(e) < 0) return false;
  return true;
}

std::vector<int> descendant_leaves(const Triangulation& fine, int elemId) {
  const MeshForest& f = *fine.forest();
  std::vector<int> out;
  std::vector<int> stack{elemId};
  while (!stack.empty()) {
    const int e = stack.back();
    stack.pop_back();
    if (fine.contains(e)) {
      out.push_back(e);
      continue;
    }
    const auto& el = f.elem(e);
    if (!el.has_children()) fail("descendant_leaves: element is not above the cut");
    stack.push_back(el.child[0]);
    stack.push_back(el.child[1]);
  }
  return out;
}

bool is_lower_diamond(const Triangulation& bottom_meet, const Triangulation& top_join,
                      const std::vector<Triangulation>& parts) {
  if (parts.empty()) return false;
  Triangulation m = parts[0];
  Triangulation j = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) {
    m = meet(m, parts[i]);
    j = join(j, parts[i]);
  }
  if (!(m == bottom_meet) || !(j == top_join)) return false;

  // Coarsening areas, expressed as the sets of top_join leaves they cover.
  std::unordered_set<int> covered;
  for (const Triangulation& part : parts) {
    for (int e : part.elems()) {
      if (top_join.contains(e)) continue;
      for (int leaf : descendant_leaves(top_join, e))
        if (!covered.insert(leaf).second) return false;  // overlap
    }
  }
  return true;
}

Triangulation intermediate_triangulation(const Triangulation& t,
                                         const Triangulation& tstar) {
  if (!coarser_or_equal(t, tstar))
    fail("intermediate_triangulation: first argument is not a coarsening of the second");
  const Triangulation that = uniform_refine(t);
  const Triangulation ti = meet(that, tstar);

  // Defining properties, checked here because downstream operators rely on
  // them heavily.
  for (int e : ti.elems()) {
    const int anc = t.ancestor_leaf(e);
    if (anc < 0) fail("intermediate_triangulation: leaf without coarse ancestor");
    const double ht = std::sqrt(t.area(t.elem_index(anc)));
    const double hi = std::sqrt(ti.area(ti.elem_index(e)));
    if (!(hi <= ht * (1.0 + 1e-12) && ht <= 4.0 * hi * (1.0 + 1e-12)))
      fail("intermediate_triangulation: mesh-size bracket violated");
  }
  for (int e : t.elems())
    if (tstar.contains(e) != ti.contains(e))
      fail("intermediate_triangulation: unrefined-element sets differ");
  for (int i = 0; i < t.num_sides(); ++i) {
    const SideKey k = t.side(i).key;
    if ((tstar.side_index(k) >= 0) != (ti.side_index(k) >= 0))
      fail("intermediate_triangulation: kept-side sets differ");
  }
  return ti;
}

int count_new_elements(const Triangulation& t) {
  int n = 0;
  const MeshForest& f = *t.forest();
  for (int e : t.elems())
    if (f.elem(e).gen > 0) ++n;
  return n;
}

}  // namespace afemcr

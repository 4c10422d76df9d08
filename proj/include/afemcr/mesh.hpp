#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "afemcr/geometry.hpp"

namespace afemcr {

/// Stable side identity: the ordered pair of endpoint vertex ids.
struct SideKey {
  int a = -1;
  int b = -1;

  SideKey() = default;
  SideKey(int u, int v) : a(u < v ? u : v), b(u < v ? v : u) {}
  auto operator<=>(const SideKey&) const = default;
};

struct SideKeyHash {
  std::size_t operator()(const SideKey& k) const {
    return std::hash<std::uint64_t>()((std::uint64_t(std::uint32_t(k.a)) << 32) |
                                      std::uint64_t(std::uint32_t(k.b)));
  }
};

using SideKeySet = std::unordered_set<SideKey, SideKeyHash>;

/// One node of the bisection forest. The newest vertex is v[0];
/// the refinement edge is (v[1], v[2]).
struct ForestElem {
  std::array<int, 3> v{-1, -1, -1};
  int parent = -1;
  std::array<int, 2> child{-1, -1};
  int gen = 0;

  bool has_children() const { return child[0] >= 0; }
};

/// Append-only newest-vertex-bisection forest over the initial triangulation.
/// Committed nodes are immutable; bisection appends children (reused if the
/// same element was bisected before), so triangulation snapshots taken at any
/// time stay valid.
class MeshForest {
 public:
  static std::shared_ptr<MeshForest> load_file(const std::string& path);
  static std::shared_ptr<MeshForest> load(std::istream& in,
                                          const std::string& origin = "<stream>");
  static std::shared_ptr<MeshForest> load_string(const std::string& text);

  const std::vector<Vec2>& vertices() const { return verts_; }
  int num_roots() const { return n_roots_; }
  int num_elems() const { return static_cast<int>(elems_.size()); }
  const ForestElem& elem(int id) const { return elems_[id]; }

  SideKey refinement_edge(int id) const {
    return SideKey(elems_[id].v[1], elems_[id].v[2]);
  }

  /// Edge of the initial boundary or produced by splitting a boundary edge.
  bool is_boundary_edge(const SideKey& k) const {
    return boundary_edges_.count(k) > 0;
  }

  /// Vertex at the midpoint of edge (a,b); -1 if that edge was never split.
  int find_midpoint(const SideKey& k) const {
    auto it = edge_midpoint_.find(k);
    return it == edge_midpoint_.end() ? -1 : it->second;
  }

  /// Bisect the refinement edge of element `id`. Idempotent: existing
  /// children are returned unchanged.
  std::array<int, 2> bisect(int id);

  bool is_ancestor_or_self(int anc, int id) const;

  /// Walk up until a predicate holds; -1 if it never does.
  template <class Pred>
  int ancestor_where(int id, Pred&& contains) const {
    for (int e = id; e >= 0; e = elems_[e].parent)
      if (contains(e)) return e;
    return -1;
  }

  std::array<Vec2, 3> coords(int id) const {
    const auto& e = elems_[id];
    return {verts_[e.v[0]], verts_[e.v[1]], verts_[e.v[2]]};
  }

 private:
  MeshForest() = default;

  int midpoint_vertex(const SideKey& k);

  std::vector<Vec2> verts_;
  std::vector<ForestElem> elems_;
  int n_roots_ = 0;
  std::unordered_map<SideKey, int, SideKeyHash> edge_midpoint_;
  SideKeySet boundary_edges_;
};

struct Side {
  SideKey key;
  Vec2 midpoint;
  double length = 0.0;
  std::array<int, 2> elems{-1, -1};  // adjacent leaf element ids
  bool boundary = false;
};

/// Immutable conforming leaf cut of a MeshForest. Copies are cheap; all
/// derived tables (sides, nodes, incidence) are built once at construction.
class Triangulation {
 public:
  Triangulation() = default;

  static Triangulation bottom(std::shared_ptr<MeshForest> forest);
  static Triangulation from_leaves(std::shared_ptr<MeshForest> forest,
                                   std::vector<int> leaves);

  bool valid() const { return d_ != nullptr; }
  const std::shared_ptr<MeshForest>& forest() const { return d_->forest; }

  const std::vector<int>& elems() const { return d_->leaves; }
  int num_elems() const { return static_cast<int>(d_->leaves.size()); }
  bool contains(int elemId) const { return d_->leafset.count(elemId) > 0; }
  int elem_index(int elemId) const {
    auto it = d_->leaf_index.find(elemId);
    return it == d_->leaf_index.end() ? -1 : it->second;
  }

  int num_sides() const { return static_cast<int>(d_->sides.size()); }
  const Side& side(int i) const { return d_->sides[i]; }
  int side_index(const SideKey& k) const {
    auto it = d_->side_index.find(k);
    return it == d_->side_index.end() ? -1 : it->second;
  }
  /// Local side i of an element is opposite local vertex i.
  const std::array<int, 3>& sides_of(int elemIndex) const {
    return d_->elem_sides[elemIndex];
  }

  const std::vector<int>& nodes() const { return d_->nodes; }
  bool node_on_boundary(int vertexId) const {
    return d_->boundary_nodes.count(vertexId) > 0;
  }

  const TriGeom& geom(int elemIndex) const { return d_->geoms[elemIndex]; }
  double area(int elemIndex) const { return d_->geoms[elemIndex].area; }
  /// h_T = |T|^{1/2}
  double h(int elemIndex) const { return std::sqrt(d_->geoms[elemIndex].area); }

  /// Leaf element id of this triangulation containing the (descendant)
  /// forest element `elemId`; -1 if `elemId` is not below this cut.
  int ancestor_leaf(int elemId) const;

  bool same_as(const Triangulation& o) const {
    return d_ == o.d_ || (d_->forest == o.d_->forest && d_->leaves == o.d_->leaves);
  }
  friend bool operator==(const Triangulation& a, const Triangulation& b) {
    return a.same_as(b);
  }

 private:
  struct Data {
    std::shared_ptr<MeshForest> forest;
    std::vector<int> leaves;  // sorted element ids
    std::unordered_set<int> leafset;
    std::unordered_map<int, int> leaf_index;
    std::vector<Side> sides;  // sorted by key
    std::unordered_map<SideKey, int, SideKeyHash> side_index;
    std::vector<std::array<int, 3>> elem_sides;
    std::vector<TriGeom> geoms;
    std::vector<int> nodes;
    std::unordered_set<int> boundary_nodes;
  };

  explicit Triangulation(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  std::shared_ptr<const Data> d_;
};

/// Coarsest conforming refinement of `t` in which every side of `marked`
/// is bisected.
Triangulation refine(const Triangulation& t, const std::vector<SideKey>& marked);

/// Sides of `t` that are bisected together with `s` in the smallest
/// conforming refinement bisecting `s`; always contains `s`.
std::vector<SideKey> refd(const Triangulation& t, const SideKey& s);

/// Finest common coarsening.
Triangulation meet(const Triangulation& a, const Triangulation& b);
/// Coarsest common refinement.
Triangulation join(const Triangulation& a, const Triangulation& b);

/// refine(t, all sides of t).
Triangulation uniform_refine(const Triangulation& t);

/// True iff `t` is a coarsening of (or equal to) `tstar`.
bool coarser_or_equal(const Triangulation& t, const Triangulation& tstar);

/// Meet/join configuration with pairwise disjoint coarsening areas.
bool is_lower_diamond(const Triangulation& bottom_meet, const Triangulation& top_join,
                      const std::vector<Triangulation>& parts);

/// uniform_refine(t) meet tstar, for t <= tstar.
Triangulation intermediate_triangulation(const Triangulation& t,
                                         const Triangulation& tstar);

/// #(t \ bottom): leaf elements created by bisection.
int count_new_elements(const Triangulation& t);

/// Leaf element ids of `fine` below forest element `elemId`.
std::vector<int> descendant_leaves(const Triangulation& fine, int elemId);

}  // namespace afemcr

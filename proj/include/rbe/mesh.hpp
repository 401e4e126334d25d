#ifndef RBE_MESH_HPP
#define RBE_MESH_HPP

#include <array>
#include <iosfwd>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace rbe {

enum class BlockKind { T1, T2, T3, B };

const char* to_string(BlockKind k);
BlockKind block_kind_from_string(const std::string& s);

/// Length/diameter aspect ratio of a tube block (1 for B's inlet stem).
double block_aspect(BlockKind k);

enum class FacetKind { Wall, Inlet, Outlet, Interface };

struct FacetTag {
  FacetKind kind = FacetKind::Wall;
  int index = 0;

  friend bool operator==(const FacetTag& a, const FacetTag& b) {
    return a.kind == b.kind && a.index == b.index;
  }
  friend bool operator<(const FacetTag& a, const FacetTag& b) {
    return a.kind != b.kind ? a.kind < b.kind : a.index < b.index;
  }
};

/// A boundary facet: sorted vertex tuple (edge in 2d, triangle in 3d).
using FacetKey = std::vector<int>;

struct SimplicialMesh {
  int dim = 2;
  Eigen::MatrixXd vertices;  // nv x dim
  Eigen::MatrixXi cells;     // nc x (dim+1), positively oriented
  std::map<FacetKey, FacetTag> facetTags;

  int numVertices() const { return static_cast<int>(vertices.rows()); }
  int numCells() const { return static_cast<int>(cells.rows()); }

  double cellVolume(int c) const;
  double totalVolume() const;

  /// Flips cells until all signed volumes are positive.
  void orientPositively();

  /// Unique edges (sorted vertex pairs, lexicographic order) and the per-cell
  /// edge index triples (edge e of a triangle is opposite to local vertex e).
  struct EdgeData {
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 3>> cellEdges;  // 2d only
  };
  EdgeData buildEdges() const;

  /// Facets of the topological boundary (each facet belongs to one cell).
  std::vector<FacetKey> boundaryFacets() const;

  /// All facets carrying the given tag. Throws if the tag is unknown.
  std::vector<FacetKey> taggedFacets(const FacetTag& tag) const;

  /// Owning cell of a boundary facet.
  int facetCell(const FacetKey& f) const;
};

/// Structured triangulation of a reference building block.
/// Tubes are [0,a] x [-1/2,1/2] with Inlet(0) on x=0 and Outlet(0) on x=a.
/// The bifurcation is a symmetric Y: inlet stem of width 1, two branches of
/// width 0.7 leaving at +-45 degrees, Outlet(0) on the upper branch.
SimplicialMesh generate_reference_block(BlockKind kind, int refinement);

/// Reference port endpoints (p0, p1) and outward normal, ordered so the port
/// parametrization runs p0 -> p1. Port 0 is the inlet-side port.
struct ReferencePort {
  Eigen::Vector2d p0, p1;
  Eigen::Vector2d outwardNormal;
  FacetTag tag;
};
std::vector<ReferencePort> reference_ports(BlockKind kind);

/// Corner loop of the reference block polygon (counterclockwise).
std::vector<Eigen::Vector2d> reference_outline(BlockKind kind);

void write_mesh_text(std::ostream& os, const SimplicialMesh& mesh);

}  // namespace rbe

#endif

#include "rbe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>

#include "rbe/errors.hpp"

namespace rbe {

namespace {

// Bifurcation outline constants. Crotch point at (1,0), branches of width 0.7
// leaving at +-45 degrees, inlet stem of width 1.
constexpr double kBranchWidth = 0.7;
constexpr double kBranchLen = 1.2;

struct BifGeometry {
  Eigen::Vector2d W;         // crotch (inner walls meet here)
  Eigen::Vector2d uTop;      // upper branch axis direction
  Eigen::Vector2d nTop;      // upper branch cross direction
  Eigen::Vector2d Ptop;      // outer wall corner on the stem, y = +1/2
  Eigen::Vector2d Pbot;      // mirror
  Eigen::Vector2d Ain, Aout; // upper outlet corners (inner, outer)
  Eigen::Vector2d Bin, Bout; // lower outlet corners
  double tP = 0;             // outer wall offset parameter at Ptop
  double stemX = 0;          // x of Ptop (= right edge of the stem rectangle)
};

BifGeometry bif_geometry() {
  const double c = std::sqrt(2.0) / 2.0;
  BifGeometry g;
  g.W = {1.0, 0.0};
  g.uTop = {c, c};
  g.nTop = {-c, c};
  g.tP = 0.5 * std::sqrt(2.0) - kBranchWidth;
  g.Ptop = g.W + kBranchWidth * g.nTop + g.tP * g.uTop;
  g.Pbot = {g.Ptop.x(), -g.Ptop.y()};
  g.Ain = g.W + kBranchLen * g.uTop;
  g.Aout = g.W + kBranchWidth * g.nTop + kBranchLen * g.uTop;
  g.Bin = {g.Ain.x(), -g.Ain.y()};
  g.Bout = {g.Aout.x(), -g.Aout.y()};
  g.stemX = g.Ptop.x();
  return g;
}

class NodePool {
 public:
  int add(const Eigen::Vector2d& p) {
    const Key k{llround(p.x()), llround(p.y())};
    auto it = index_.find(k);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(coords_.size());
    index_.emplace(k, id);
    coords_.push_back(p);
    return id;
  }
  const std::vector<Eigen::Vector2d>& coords() const { return coords_; }

 private:
  using Key = std::pair<std::int64_t, std::int64_t>;
  static std::int64_t llround(double x) {
    return static_cast<std::int64_t>(std::llround(x * 1e9));
  }
  std::map<Key, int> index_;
  std::vector<Eigen::Vector2d> coords_;
};

struct MeshBuilder {
  NodePool pool;
  std::vector<std::array<int, 3>> tris;
  // port edges recorded during construction, by tag
  std::map<FacetTag, std::vector<std::array<int, 2>>> portEdges;

  void addTri(int a, int b, int c) { tris.push_back({a, b, c}); }
  void addPortEdge(const FacetTag& t, int a, int b) {
    portEdges[t].push_back({a, b});
  }

  SimplicialMesh finish() const {
    SimplicialMesh m;
    m.dim = 2;
    m.vertices.resize(static_cast<int>(pool.coords().size()), 2);
    for (int i = 0; i < m.numVertices(); ++i)
      m.vertices.row(i) = pool.coords()[i].transpose();
    m.cells.resize(static_cast<int>(tris.size()), 3);
    for (int i = 0; i < m.numCells(); ++i)
      m.cells.row(i) << tris[i][0], tris[i][1], tris[i][2];
    m.orientPositively();

    std::map<FacetKey, FacetTag> explicitTags;
    for (const auto& [tag, edges] : portEdges)
      for (const auto& e : edges) {
        FacetKey k{e[0], e[1]};
        std::sort(k.begin(), k.end());
        explicitTags.emplace(std::move(k), tag);
      }
    for (const auto& f : m.boundaryFacets()) {
      auto it = explicitTags.find(f);
      m.facetTags[f] =
          it != explicitTags.end() ? it->second : FacetTag{FacetKind::Wall, 0};
    }
    return m;
  }
};

// Structured grid on a bilinear patch; returns node ids as (ns+1)x(nt+1).
std::vector<std::vector<int>> patch_nodes(MeshBuilder& b,
                                          const Eigen::Vector2d& q00,
                                          const Eigen::Vector2d& q10,
                                          const Eigen::Vector2d& q01,
                                          const Eigen::Vector2d& q11, int ns,
                                          int nt) {
  std::vector<std::vector<int>> ids(ns + 1, std::vector<int>(nt + 1));
  for (int i = 0; i <= ns; ++i)
    for (int j = 0; j <= nt; ++j) {
      const double s = static_cast<double>(i) / ns;
      const double t = static_cast<double>(j) / nt;
      const Eigen::Vector2d p = (1 - s) * (1 - t) * q00 + s * (1 - t) * q10 +
                                (1 - s) * t * q01 + s * t * q11;
      ids[i][j] = b.pool.add(p);
    }
  return ids;
}

void patch_triangulate(MeshBuilder& b, const std::vector<std::vector<int>>& n) {
  const int ns = static_cast<int>(n.size()) - 1;
  const int nt = static_cast<int>(n[0].size()) - 1;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) {
      b.addTri(n[i][j], n[i + 1][j], n[i + 1][j + 1]);
      b.addTri(n[i][j], n[i + 1][j + 1], n[i][j + 1]);
    }
}

SimplicialMesh make_tube(double aspect, int refinement) {
  const int ny = 4 * refinement;
  const int nx = static_cast<int>(std::lround(aspect * ny));
  MeshBuilder b;
  auto ids = patch_nodes(b, {0, -0.5}, {aspect, -0.5}, {0, 0.5},
                         {aspect, 0.5}, nx, ny);
  patch_triangulate(b, ids);
  for (int j = 0; j < ny; ++j) {
    b.addPortEdge({FacetKind::Inlet, 0}, ids[0][j], ids[0][j + 1]);
    b.addPortEdge({FacetKind::Outlet, 0}, ids[nx][j], ids[nx][j + 1]);
  }
  return b.finish();
}

SimplicialMesh make_bifurcation(int refinement) {
  const BifGeometry g = bif_geometry();
  const int n = 4 * refinement;
  const int ms = std::max(1, static_cast<int>(std::lround(n * g.stemX)));
  const int mb = std::max(
      1, static_cast<int>(std::lround(n * kBranchLen / kBranchWidth)));
  MeshBuilder b;

  // stem rectangle [0, stemX] x [-1/2, 1/2]
  auto stem = patch_nodes(b, {0, -0.5}, {g.stemX, -0.5}, {0, 0.5},
                          {g.stemX, 0.5}, ms, n);
  patch_triangulate(b, stem);
  for (int j = 0; j < n; ++j)
    b.addPortEdge({FacetKind::Inlet, 0}, stem[0][j], stem[0][j + 1]);

  // junction triangle (Pbot, W, Ptop), n subdivisions per edge
  std::vector<std::vector<int>> tri(n + 1);
  for (int i = 0; i <= n; ++i) {
    tri[i].resize(n + 1 - i);
    for (int j = 0; j <= n - i; ++j) {
      const double a = static_cast<double>(i) / n;
      const double c = static_cast<double>(j) / n;
      tri[i][j] = b.pool.add(g.Pbot + a * (g.W - g.Pbot) + c * (g.Ptop - g.Pbot));
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n - i; ++j) {
      b.addTri(tri[i][j], tri[i + 1][j], tri[i][j + 1]);
      if (j < n - i - 1)
        b.addTri(tri[i + 1][j], tri[i + 1][j + 1], tri[i][j + 1]);
    }

  // branches: s across (inner wall -> outer wall), t along the axis
  auto top = patch_nodes(b, g.W, g.Ptop, g.Ain, g.Aout, n, mb);
  patch_triangulate(b, top);
  for (int i = 0; i < n; ++i)
    b.addPortEdge({FacetKind::Outlet, 0}, top[i][mb], top[i + 1][mb]);

  auto bot = patch_nodes(b, g.W, g.Pbot, g.Bin, g.Bout, n, mb);
  patch_triangulate(b, bot);
  for (int i = 0; i < n; ++i)
    b.addPortEdge({FacetKind::Outlet, 1}, bot[i][mb], bot[i + 1][mb]);

  return b.finish();
}

}  // namespace

const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::T1: return "T1";
    case BlockKind::T2: return "T2";
    case BlockKind::T3: return "T3";
    case BlockKind::B: return "B";
  }
  return "?";
}

BlockKind block_kind_from_string(const std::string& s) {
  if (s == "T1") return BlockKind::T1;
  if (s == "T2") return BlockKind::T2;
  if (s == "T3") return BlockKind::T3;
  if (s == "B") return BlockKind::B;
  throw Error("unknown block kind: " + s);
}

double block_aspect(BlockKind k) {
  switch (k) {
    case BlockKind::T1: return 1.0;
    case BlockKind::T2: return 2.0;
    case BlockKind::T3: return 3.0;
    case BlockKind::B: return 1.0;
  }
  return 1.0;
}

double SimplicialMesh::cellVolume(int c) const {
  if (dim == 2) {
    const Eigen::Vector2d a = vertices.row(cells(c, 0)).head<2>();
    const Eigen::Vector2d b = vertices.row(cells(c, 1)).head<2>();
    const Eigen::Vector2d d = vertices.row(cells(c, 2)).head<2>();
    const Eigen::Vector2d e1 = b - a, e2 = d - a;
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
  }
  Eigen::Matrix3d J;
  const Eigen::Vector3d a = vertices.row(cells(c, 0)).head<3>();
  for (int i = 0; i < 3; ++i)
    J.col(i) = Eigen::Vector3d(vertices.row(cells(c, i + 1)).head<3>()) - a;
  return J.determinant() / 6.0;
}

double SimplicialMesh::totalVolume() const {
  double v = 0;
  for (int c = 0; c < numCells(); ++c) v += cellVolume(c);
  return v;
}

void SimplicialMesh::orientPositively() {
  for (int c = 0; c < numCells(); ++c)
    if (cellVolume(c) < 0) std::swap(cells(c, 1), cells(c, 2));
}

SimplicialMesh::EdgeData SimplicialMesh::buildEdges() const {
  EdgeData data;
  std::map<std::array<int, 2>, int> index;
  auto edgeId = [&](int a, int b) {
    std::array<int, 2> k{std::min(a, b), std::max(a, b)};
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(data.edges.size());
    index.emplace(k, id);
    data.edges.push_back(k);
    return id;
  };
  if (dim == 2) {
    data.cellEdges.resize(numCells());
    for (int c = 0; c < numCells(); ++c)
      for (int e = 0; e < 3; ++e)
        data.cellEdges[c][e] = edgeId(cells(c, (e + 1) % 3), cells(c, (e + 2) % 3));
  } else {
    for (int c = 0; c < numCells(); ++c)
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) edgeId(cells(c, i), cells(c, j));
  }
  return data;
}

std::vector<FacetKey> SimplicialMesh::boundaryFacets() const {
  std::map<FacetKey, int> count;
  for (int c = 0; c < numCells(); ++c)
    for (int v = 0; v <= dim; ++v) {
      FacetKey f;
      for (int w = 0; w <= dim; ++w)
        if (w != v) f.push_back(cells(c, w));
      std::sort(f.begin(), f.end());
      ++count[f];
    }
  std::vector<FacetKey> out;
  for (const auto& [f, n] : count)
    if (n == 1) out.push_back(f);
  return out;
}

std::vector<FacetKey> SimplicialMesh::taggedFacets(const FacetTag& tag) const {
  std::vector<FacetKey> out;
  bool known = false;
  for (const auto& [f, t] : facetTags) {
    if (t == tag) {
      out.push_back(f);
      known = true;
    } else if (t.kind == tag.kind) {
      known = true;  // the kind exists even if this index does not match
    }
  }
  if (out.empty() && !known)
    throw Error("taggedFacets: unknown tag kind for this mesh");
  if (out.empty()) throw Error("taggedFacets: tag has no facets in this mesh");
  return out;
}

int SimplicialMesh::facetCell(const FacetKey& f) const {
  for (int c = 0; c < numCells(); ++c) {
    int hit = 0;
    for (int v = 0; v <= dim; ++v)
      if (std::find(f.begin(), f.end(), cells(c, v)) != f.end()) ++hit;
    if (hit == dim) return c;
  }
  throw Error("facetCell: facet not found");
}

SimplicialMesh generate_reference_block(BlockKind kind, int refinement) {
  if (refinement < 1) throw Error("generate_reference_block: refinement must be >= 1");
  switch (kind) {
    case BlockKind::T1: return make_tube(1.0, refinement);
    case BlockKind::T2: return make_tube(2.0, refinement);
    case BlockKind::T3: return make_tube(3.0, refinement);
    case BlockKind::B: return make_bifurcation(refinement);
  }
  throw Error("generate_reference_block: unknown kind");
}

std::vector<ReferencePort> reference_ports(BlockKind kind) {
  if (kind != BlockKind::B) {
    const double a = block_aspect(kind);
    return {
        {{0, -0.5}, {0, 0.5}, {-1, 0}, {FacetKind::Inlet, 0}},
        {{a, -0.5}, {a, 0.5}, {1, 0}, {FacetKind::Outlet, 0}},
    };
  }
  const BifGeometry g = bif_geometry();
  return {
      {{0, -0.5}, {0, 0.5}, {-1, 0}, {FacetKind::Inlet, 0}},
      {g.Ain, g.Aout, g.uTop, {FacetKind::Outlet, 0}},
      {g.Bin, g.Bout, {g.uTop.x(), -g.uTop.y()}, {FacetKind::Outlet, 1}},
  };
}

std::vector<Eigen::Vector2d> reference_outline(BlockKind kind) {
  if (kind != BlockKind::B) {
    const double a = block_aspect(kind);
    return {{0, -0.5}, {a, -0.5}, {a, 0.5}, {0, 0.5}};
  }
  const BifGeometry g = bif_geometry();
  return {{0, -0.5}, g.Pbot, g.Bout, g.Bin, g.W,
          g.Ain,     g.Aout, g.Ptop, {0, 0.5}};
}

void write_mesh_text(std::ostream& os, const SimplicialMesh& mesh) {
  os << mesh.dim << ' ' << mesh.numVertices() << ' ' << mesh.numCells() << ' '
     << mesh.facetTags.size() << '\n';
  os.precision(17);
  for (int i = 0; i < mesh.numVertices(); ++i) {
    for (int d = 0; d < mesh.dim; ++d) os << (d ? " " : "") << mesh.vertices(i, d);
    os << '\n';
  }
  for (int c = 0; c < mesh.numCells(); ++c) {
    for (int v = 0; v <= mesh.dim; ++v) os << (v ? " " : "") << mesh.cells(c, v);
    os << '\n';
  }
  auto kindName = [](FacetKind k) {
    switch (k) {
      case FacetKind::Wall: return "wall";
      case FacetKind::Inlet: return "inlet";
      case FacetKind::Outlet: return "outlet";
      case FacetKind::Interface: return "interface";
    }
    return "?";
  };
  for (const auto& [f, t] : mesh.facetTags) {
    for (int v : f) os << v << ' ';
    os << kindName(t.kind) << ' ' << t.index << '\n';
  }
}

}  // namespace rbe

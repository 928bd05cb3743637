#pragma once

#include <array>
#include <string>
#include <vector>

#include "hlent/correlators.hpp"
#include "hlent/lattice.hpp"

namespace hlent {

enum class Shape { Square, IsoRightTriangle, RightTrapezoid, Parallelogram, Cube, IsoRightPrism };

int shape_dims(Shape s);
std::string to_string(Shape s);
Shape shape_from_string(const std::string& name);

// Placement target for a region's enclosing system: the bounding boxes are
// centered here, rounding toward the origin when parities disagree.
struct Anchor {
  std::array<double, 3> c{0.0, 0.0, 0.0};
};

/// A subsystem pair at one scale: the inner set `a2` (whose boundary carries
/// the corners being measured) strictly enclosed by the outer set `a`.
/// Three-dimensional shapes have no explicit partner (`a2` empty; the inner
/// set *is* `a` and its partner is the lattice complement).
struct RegionPair {
  Shape shape = Shape::Square;
  int scale = 0;
  Anchor anchor;
  std::vector<Site> a;   // lexicographic
  std::vector<Site> a2;  // lexicographic, subset of a (2D shapes only)
};

struct CornerGroup {
  double angle = 0.0;  // opening angle (2D) or solid-angle label (3D)
  int count = 0;
};

struct EdgeGroup {
  double dihedral = 0.0;
  double total_length = 0.0;
  int count = 0;
};

/// Boundary size and sharp-feature content of a shape at scale l.
struct BoundaryMetrics {
  double perimeter = 0.0;  // length in 2D, area in 3D
  std::vector<CornerGroup> corners;
  std::vector<EdgeGroup> edges;  // 3D only
};

// Bounding box of the enclosing system `a` at scale l, before anchoring:
// 3l x 3l for the square and triangle, 4l x 3l for the trapezoid and
// parallelogram (long axis along the base), l^3 for the solids.
std::array<int, 3> enclosure_extent(Shape s, int l);

// The box `a` occupies once centered on the anchor.
Box region_bbox(Shape s, int l, const Anchor& anchor, int dims);

RegionPair generate_region(Shape s, int l, const Anchor& anchor, const LatticeSpec& spec);

BoundaryMetrics boundary_metrics(Shape s, int l);

}  // namespace hlent

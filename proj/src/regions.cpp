#include "hlent/regions.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hlent/errors.hpp"

namespace hlent {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

// Shape site layout in local coordinates, origin at the bounding-box corner.
std::vector<Site> shape_sites(Shape s, int l) {
  std::vector<Site> v;
  switch (s) {
    case Shape::Square:
      for (int x = 0; x < l; ++x)
        for (int y = 0; y < l; ++y) v.push_back(Site{{x, y, 0}});
      break;
    case Shape::IsoRightTriangle:
      // legs along the axes, hypotenuse at 45 degrees
      for (int x = 0; x < l; ++x)
        for (int y = 0; y < l - x; ++y) v.push_back(Site{{x, y, 0}});
      break;
    case Shape::RightTrapezoid:
      // height l, long base 2l, vertical side at x=0, 45-degree slant
      for (int x = 0; x < 2 * l; ++x)
        for (int y = 0; y < l; ++y)
          if (x < 2 * l - y) v.push_back(Site{{x, y, 0}});
      break;
    case Shape::Parallelogram:
      // base l, 45-degree sides: row y spans [y, y+l)
      for (int x = 0; x < 2 * l - 1; ++x)
        for (int y = 0; y < l; ++y)
          if (x >= y && x < y + l) v.push_back(Site{{x, y, 0}});
      break;
    case Shape::Cube:
      for (int x = 0; x < l; ++x)
        for (int y = 0; y < l; ++y)
          for (int z = 0; z < l; ++z) v.push_back(Site{{x, y, z}});
      break;
    case Shape::IsoRightPrism:
      // triangular base in (x,y), extruded along z
      for (int x = 0; x < l; ++x)
        for (int y = 0; y < l - x; ++y)
          for (int z = 0; z < l; ++z) v.push_back(Site{{x, y, z}});
      break;
  }
  return v;
}

std::array<int, 3> shape_extent(Shape s, int l) {
  switch (s) {
    case Shape::Square:
    case Shape::IsoRightTriangle:
      return {l, l, 1};
    case Shape::RightTrapezoid:
      return {2 * l, l, 1};
    case Shape::Parallelogram:
      return {2 * l - 1, l, 1};
    case Shape::Cube:
    case Shape::IsoRightPrism:
      return {l, l, l};
  }
  return {l, l, 1};
}

// Round toward the origin; absorbs representation noise on half-integer anchors.
int floor_coord(double v) {
  return v >= 0.0 ? static_cast<int>(std::floor(v + 1e-9)) : -static_cast<int>(std::floor(-v + 1e-9));
}

}  // namespace

int shape_dims(Shape s) {
  return (s == Shape::Cube || s == Shape::IsoRightPrism) ? 3 : 2;
}

std::string to_string(Shape s) {
  switch (s) {
    case Shape::Square: return "square";
    case Shape::IsoRightTriangle: return "triangle";
    case Shape::RightTrapezoid: return "trapezoid";
    case Shape::Parallelogram: return "parallelogram";
    case Shape::Cube: return "cube";
    case Shape::IsoRightPrism: return "prism";
  }
  return "?";
}

Shape shape_from_string(const std::string& name) {
  if (name == "square") return Shape::Square;
  if (name == "triangle") return Shape::IsoRightTriangle;
  if (name == "trapezoid") return Shape::RightTrapezoid;
  if (name == "parallelogram") return Shape::Parallelogram;
  if (name == "cube") return Shape::Cube;
  if (name == "prism") return Shape::IsoRightPrism;
  throw ConfigError("unknown shape: " + name);
}

std::array<int, 3> enclosure_extent(Shape s, int l) {
  switch (s) {
    case Shape::Square:
    case Shape::IsoRightTriangle:
      return {3 * l, 3 * l, 1};
    case Shape::RightTrapezoid:
    case Shape::Parallelogram:
      return {4 * l, 3 * l, 1};
    case Shape::Cube:
    case Shape::IsoRightPrism:
      return {l, l, l};
  }
  return {3 * l, 3 * l, 1};
}

Box region_bbox(Shape s, int l, const Anchor& anchor, int dims) {
  const auto ext = enclosure_extent(s, l);
  Box b;
  for (int a = 0; a < dims; ++a) {
    b.lo[a] = floor_coord(anchor.c[a] - (ext[a] - 1) / 2.0);
    b.extent[a] = ext[a];
  }
  return b;
}

RegionPair generate_region(Shape s, int l, const Anchor& anchor, const LatticeSpec& spec) {
  if (l < 2) throw DomainError("region scale l must be >= 2");
  const int dims = shape_dims(s);
  if (dims != spec.dims) {
    throw DomainError(fmt::format("{} regions need a {}d lattice (spec has {}d)", to_string(s), dims, spec.dims));
  }
  const Box abox = region_bbox(s, l, anchor, dims);

  RegionPair rp;
  rp.shape = s;
  rp.scale = l;
  rp.anchor = anchor;

  if (dims == 2) {
    // The enclosure is the full box; the inner set is the shape centered in it.
    for (int x = 0; x < abox.extent[0]; ++x)
      for (int y = 0; y < abox.extent[1]; ++y)
        rp.a.push_back(Site{{abox.lo[0] + x, abox.lo[1] + y, 0}});
    const auto inner_ext = shape_extent(s, l);
    std::array<int, 3> off{};
    for (int a = 0; a < 2; ++a) off[a] = abox.lo[a] + (abox.extent[a] - inner_ext[a]) / 2;
    for (Site t : shape_sites(s, l)) {
      t.x[0] += off[0];
      t.x[1] += off[1];
      rp.a2.push_back(t);
    }
    std::sort(rp.a2.begin(), rp.a2.end());
  } else {
    for (Site t : shape_sites(s, l)) {
      t.x[0] += abox.lo[0];
      t.x[1] += abox.lo[1];
      t.x[2] += abox.lo[2];
      rp.a.push_back(t);
    }
    std::sort(rp.a.begin(), rp.a.end());
  }

  for (const Site& t : rp.a) {
    if (!spec.site_valid(t)) {
      throw PlacementError(fmt::format("{} at l={} anchored at ({},{}{}) escapes the lattice",
                                       to_string(s), l, anchor.c[0], anchor.c[1],
                                       dims > 2 ? fmt::format(",{}", anchor.c[2]) : std::string()));
    }
  }
  return rp;
}

BoundaryMetrics boundary_metrics(Shape s, int l) {
  if (l < 2) throw DomainError("region scale l must be >= 2");
  const double ld = l;
  BoundaryMetrics m;
  switch (s) {
    case Shape::Square:
      m.perimeter = 4.0 * ld;
      m.corners = {{kPi / 2, 4}};
      break;
    case Shape::IsoRightTriangle:
      m.perimeter = (2.0 + kSqrt2) * (ld + 0.5);
      m.corners = {{kPi / 2, 1}, {kPi / 4, 2}};
      break;
    case Shape::RightTrapezoid:
      m.perimeter = (4.0 + kSqrt2) * ld - 1.0;
      m.corners = {{kPi / 2, 2}, {kPi / 4, 1}, {3 * kPi / 4, 1}};
      break;
    case Shape::Parallelogram:
      m.perimeter = 2.0 * (1.0 + kSqrt2) * ld;
      m.corners = {{kPi / 4, 2}, {3 * kPi / 4, 2}};
      break;
    case Shape::Cube:
      m.perimeter = 6.0 * ld * ld;
      m.corners = {{kPi / 2, 8}};
      m.edges = {{kPi / 2, 12.0 * ld, 12}};
      break;
    case Shape::IsoRightPrism:
      m.perimeter = (3.0 + kSqrt2) * ld * ld;
      m.corners = {{kPi / 4, 4}, {kPi / 2, 2}};
      m.edges = {{kPi / 4, 2.0 * ld, 2}, {kPi / 2, (5.0 + 2.0 * kSqrt2) * ld, 7}};
      break;
  }
  return m;
}

}  // namespace hlent

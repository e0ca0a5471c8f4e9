#ifndef ITREE_SHIFT_MAP_HPP
#define ITREE_SHIFT_MAP_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace itree {

using Ord = std::int64_t;

// Elementarity grade attached to a map. Exact implies AlmostExact implies
// NearlyElementary.
enum class MapClass { Exact = 0, AlmostExact = 1, NearlyElementary = 2 };

const char* mapClassName(MapClass c);
MapClass weakerClass(MapClass a, MapClass b);

// Strictly monotone piecewise translation on ordinals. Stored as a sorted
// list of (from, offset) pairs; the value at x is x + offset of the last
// segment starting at or below x. Offsets are nondecreasing, which is
// equivalent to strict monotonicity for this family.
class ShiftMap {
public:
  struct Segment {
    Ord from;
    Ord offset;
    bool operator==(const Segment&) const = default;
  };

  ShiftMap() : segments_{{0, 0}} {}
  explicit ShiftMap(std::vector<Segment> segments, MapClass cls = MapClass::Exact);

  static ShiftMap identity() { return ShiftMap(); }
  // Identity below `from`, then translation by `offset`.
  static ShiftMap translation(Ord from, Ord offset, MapClass cls = MapClass::Exact);

  Ord operator()(Ord x) const;
  // Pointwise application to every entry of a vector.
  std::vector<Ord> mapAll(const std::vector<Ord>& xs) const;

  // Largest b such that the map is the identity on [0, b); returns nullopt
  // when the map is the identity everywhere.
  std::optional<Ord> identityBound() const;
  bool isIdentity() const;
  bool identityBelow(Ord bound) const;

  // x with (*this)(x) == y, if y is in the range.
  std::optional<Ord> preimage(Ord y) const;

  // g.after(f) is x -> g(f(x)).
  ShiftMap after(const ShiftMap& f) const;

  // Pointwise equality; representations are normalized so this is cheap.
  bool operator==(const ShiftMap& other) const;
  bool agreesWith(const ShiftMap& other, Ord bound) const;  // on [0, bound)

  MapClass mapClass() const { return class_; }
  void setMapClass(MapClass c) { class_ = c; }

  const std::vector<Segment>& segments() const { return segments_; }
  std::string str() const;

private:
  void normalize();
  std::vector<Segment> segments_;
  MapClass class_ = MapClass::Exact;
};

// Assembles a piecewise translation from a function and a superset of its
// breakpoints; sampled values near every candidate are verified against fn.
ShiftMap buildPiecewise(const std::function<Ord(Ord)>& fn, std::vector<Ord> candidates);

// A shift map together with an optional domain bound; the map of a tree
// branch that drops is defined only on the dropped-to segment.
struct PartialShiftMap {
  ShiftMap map;
  std::optional<Ord> domainBound;  // heights below this are in the domain

  bool total() const { return !domainBound.has_value(); }
  Ord operator()(Ord x) const;
  PartialShiftMap after(const PartialShiftMap& f) const;
  bool operator==(const PartialShiftMap& other) const;
  bool agreesWith(const PartialShiftMap& other, Ord bound) const;
  static PartialShiftMap identity() { return {ShiftMap::identity(), std::nullopt}; }
  std::string str() const;
};

}  // namespace itree

#endif

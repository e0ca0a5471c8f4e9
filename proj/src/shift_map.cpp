#include "itree/shift_map.hpp"

#include <algorithm>
#include <sstream>

namespace itree {

const char* mapClassName(MapClass c) {
  switch (c) {
    case MapClass::Exact: return "exact";
    case MapClass::AlmostExact: return "almost-exact";
    case MapClass::NearlyElementary: return "nearly-elementary";
  }
  return "?";
}

MapClass weakerClass(MapClass a, MapClass b) {
  return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

ShiftMap::ShiftMap(std::vector<Segment> segments, MapClass cls)
    : segments_(std::move(segments)), class_(cls) {
  if (segments_.empty() || segments_.front().from != 0)
    segments_.insert(segments_.begin(), Segment{0, 0});
  normalize();
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    if (segments_[i].from <= segments_[i - 1].from)
      throw std::invalid_argument("ShiftMap: breakpoints not increasing");
    if (segments_[i].offset < segments_[i - 1].offset)
      throw std::invalid_argument("ShiftMap: offsets decrease, map not monotone");
  }
}

ShiftMap ShiftMap::translation(Ord from, Ord offset, MapClass cls) {
  if (offset == 0) return ShiftMap({{0, 0}}, cls);
  return ShiftMap({{0, 0}, {from, offset}}, cls);
}

void ShiftMap::normalize() {
  std::vector<Segment> out;
  for (const auto& s : segments_) {
    if (!out.empty() && out.back().offset == s.offset) continue;
    if (!out.empty() && out.back().from == s.from) { out.back().offset = s.offset; continue; }
    out.push_back(s);
  }
  segments_ = std::move(out);
}

Ord ShiftMap::operator()(Ord x) const {
  if (x < 0) throw std::invalid_argument("ShiftMap applied to negative ordinal");
  auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                             [](Ord v, const Segment& s) { return v < s.from; });
  --it;
  return x + it->offset;
}

std::vector<Ord> ShiftMap::mapAll(const std::vector<Ord>& xs) const {
  std::vector<Ord> out;
  out.reserve(xs.size());
  for (Ord x : xs) out.push_back((*this)(x));
  return out;
}

std::optional<Ord> ShiftMap::identityBound() const {
  if (segments_.size() == 1 && segments_[0].offset == 0) return std::nullopt;
  if (segments_[0].offset != 0) return 0;
  return segments_[1].from;
}

bool ShiftMap::isIdentity() const {
  return segments_.size() == 1 && segments_[0].offset == 0;
}

bool ShiftMap::identityBelow(Ord bound) const {
  auto ib = identityBound();
  return !ib.has_value() || *ib >= bound;
}

std::optional<Ord> ShiftMap::preimage(Ord y) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    Ord lo = segments_[i].from + segments_[i].offset;
    bool last = i + 1 == segments_.size();
    Ord hi = last ? y + 1 : segments_[i + 1].from + segments_[i].offset;
    if (y >= lo && y < hi) return y - segments_[i].offset;
  }
  return std::nullopt;
}

ShiftMap ShiftMap::after(const ShiftMap& f) const {
  std::vector<Segment> out;
  std::vector<Ord> points;
  for (const auto& s : f.segments_) points.push_back(s.from);
  for (const auto& s : segments_) {
    // Pull each of our breakpoints back through f where possible.
    auto pre = f.preimage(s.from);
    if (pre.has_value()) points.push_back(*pre);
    // A breakpoint falling in a gap of f's range takes effect at the first
    // point of f's range above it.
    for (std::size_t i = 1; i < f.segments_.size(); ++i) {
      Ord gapLo = (f.segments_[i - 1].offset + f.segments_[i].from);
      Ord rangeLo = f.segments_[i].from + f.segments_[i].offset;
      if (s.from > gapLo && s.from <= rangeLo) points.push_back(f.segments_[i].from);
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  for (Ord p : points) {
    Ord val = (*this)(f(p));
    out.push_back(Segment{p, val - p});
  }
  return ShiftMap(std::move(out), weakerClass(class_, f.class_));
}

bool ShiftMap::operator==(const ShiftMap& other) const {
  return segments_ == other.segments_;
}

bool ShiftMap::agreesWith(const ShiftMap& other, Ord bound) const {
  for (Ord x = 0; x < bound; ++x)
    if ((*this)(x) != other(x)) return false;
  return true;
}

std::string ShiftMap::str() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (i) os << ", ";
    os << segments_[i].from << "+" << segments_[i].offset;
  }
  os << "}";
  return os.str();
}

ShiftMap buildPiecewise(const std::function<Ord(Ord)>& fn, std::vector<Ord> candidates) {
  candidates.push_back(0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                  [](Ord c) { return c < 0; }),
                   candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<ShiftMap::Segment> segs;
  for (Ord c : candidates) segs.push_back({c, fn(c) - c});
  ShiftMap out(segs);
  for (Ord c : candidates)
    for (Ord x : {c, c + 1, c + 2})
      if (out(x) != fn(x))
        throw std::runtime_error("buildPiecewise: map is not piecewise translation "
                                 "over the given breakpoints");
  return out;
}

Ord PartialShiftMap::operator()(Ord x) const {
  if (domainBound && x >= *domainBound)
    throw std::out_of_range("PartialShiftMap: ordinal outside domain");
  return map(x);
}

PartialShiftMap PartialShiftMap::after(const PartialShiftMap& f) const {
  PartialShiftMap out{map.after(f.map), std::nullopt};
  std::optional<Ord> bound = f.domainBound;
  if (domainBound) {
    // Pull our bound back through f.
    Ord pulled = 0;
    while (f.map(pulled) < *domainBound) ++pulled;
    bound = bound ? std::min(*bound, pulled) : pulled;
  }
  out.domainBound = bound;
  return out;
}

bool PartialShiftMap::operator==(const PartialShiftMap& other) const {
  return map == other.map && domainBound == other.domainBound;
}

bool PartialShiftMap::agreesWith(const PartialShiftMap& other, Ord bound) const {
  for (Ord x = 0; x < bound; ++x) {
    bool inA = !domainBound || x < *domainBound;
    bool inB = !other.domainBound || x < *other.domainBound;
    if (inA != inB) return false;
    if (inA && map(x) != other.map(x)) return false;
  }
  return true;
}

std::string PartialShiftMap::str() const {
  std::string s = map.str();
  if (domainBound) s += "|dom<" + std::to_string(*domainBound);
  return s;
}

}  // namespace itree

#ifndef ITREE_EXTENDER_HPP
#define ITREE_EXTENDER_HPP

#include <compare>
#include <string>
#include <vector>

#include "itree/shift_map.hpp"

namespace itree {

// Identity of an extender: critical point, lambda, plus flag. Together with
// the convention lh = lam + 1 this determines every ordinal attribute.
struct ExtKey {
  Ord crit = 0;
  Ord lam = 0;
  bool plus = false;

  Ord lh() const { return lam + 1; }
  auto operator<=>(const ExtKey&) const = default;
  std::string str() const;
};

// An abstract extender: attributes plus the coherence context (every
// extender sitting below it on the carrying model's sequence).
struct Extender {
  Ord crit = 0;
  Ord lam = 0;
  bool plus = false;
  std::vector<Extender> context;  // lh-increasing, each lh < this->lh()
  std::string provenance;         // where the descriptor came from; not part of equality

  Extender() = default;
  Extender(Ord c, Ord l, bool p = false) : crit(c), lam(l), plus(p) {}

  Ord lh() const { return lam + 1; }
  Ord lamHat() const { return lam; }
  // lambda of the full extender: the minus part's lambda, bumped by the
  // order-zero step for plus type.
  Ord lamEff() const { return plus ? lam + 1 : lam; }

  ExtKey key() const { return {crit, lam, plus}; }
  Extender minus() const;
  Extender plused() const;  // same attributes with the plus flag set

  bool wellFormed(std::string* why = nullptr) const;

  bool operator==(const Extender& other) const;
  std::string str() const;
};

// Translation semantics of applying E: identity below crit, then shift by
// lamEff - crit.
ShiftMap shiftOf(const Extender& e);
ShiftMap shiftOf(const ExtKey& e);

// Attribute image of an extender under a monotone map; the context is mapped
// pointwise (callers refresh it against a model when one is available).
Extender shiftImage(const ShiftMap& f, const Extender& e, const std::string& provenance = "");
ExtKey shiftImage(const ShiftMap& f, const ExtKey& e);

}  // namespace itree

#endif

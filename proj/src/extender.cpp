#include "itree/extender.hpp"

#include <sstream>

namespace itree {

std::string ExtKey::str() const {
  std::ostringstream os;
  os << "(" << crit << "," << lam << "," << lh() << (plus ? ")+" : ")");
  return os.str();
}

Extender Extender::minus() const {
  Extender e = *this;
  e.plus = false;
  return e;
}

Extender Extender::plused() const {
  Extender e = *this;
  e.plus = true;
  return e;
}

bool Extender::wellFormed(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (!(crit >= 0 && crit < lam)) return fail("requires 0 <= crit < lam");
  Ord prev = -1;
  for (const auto& c : context) {
    if (c.lh() >= lh()) return fail("context member at or above lh");
    if (c.lh() <= prev) return fail("context not lh-increasing");
    if (c.plus) return fail("plus-type descriptor inside a context");
    std::string sub;
    if (!c.wellFormed(&sub)) return fail("context member ill-formed: " + sub);
    prev = c.lh();
  }
  return true;
}

bool Extender::operator==(const Extender& other) const {
  return crit == other.crit && lam == other.lam && plus == other.plus &&
         context == other.context;
}

std::string Extender::str() const { return key().str(); }

ShiftMap shiftOf(const Extender& e) {
  return ShiftMap::translation(e.crit, e.lamEff() - e.crit);
}

ShiftMap shiftOf(const ExtKey& e) {
  Ord lamEff = e.plus ? e.lam + 1 : e.lam;
  return ShiftMap::translation(e.crit, lamEff - e.crit);
}

Extender shiftImage(const ShiftMap& f, const Extender& e, const std::string& provenance) {
  Extender out(f(e.crit), f(e.lam), e.plus);
  out.provenance = provenance.empty() ? e.provenance : provenance;
  for (const auto& c : e.context) out.context.push_back(shiftImage(f, c));
  return out;
}

ExtKey shiftImage(const ShiftMap& f, const ExtKey& e) {
  return ExtKey{f(e.crit), f(e.lam), e.plus};
}

}  // namespace itree

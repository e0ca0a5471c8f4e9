#include "itree/premouse.hpp"

#include <algorithm>
#include <sstream>

namespace itree {

std::string Level::str() const {
  std::ostringstream os;
  os << "(" << height << ",rho" << rho;
  if (degree) os << ",d" << degree;
  os << ")";
  return os.str();
}

bool sameShape(const std::vector<Level>& a, const std::vector<Level>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!a[i].sameShape(b[i])) return false;
  return true;
}

bool LevelProfile::wellFormed(std::string* why) const {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (levels.empty()) return fail("profile has no levels");
  Ord prev = -1;
  for (const auto& l : levels) {
    if (l.height <= prev) return fail("level heights not strictly increasing");
    if (l.rho > l.height || l.rho < 0) return fail("level rho out of range");
    prev = l.height;
  }
  return true;
}

const Level* LevelProfile::levelAt(Ord height) const {
  for (const auto& l : levels)
    if (l.height == height) return &l;
  return nullptr;
}

std::string LevelProfile::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) s += " ";
    s += levels[i].str();
  }
  return s + "]";
}

std::string History::str() const {
  std::ostringstream os;
  os << base;
  for (const auto& s : steps) {
    os << "*" << s.ext.str();
    if (s.cut) os << "@" << *s.cut;
    if (s.degreeZero) os << "!";
  }
  if (finalCut) {
    os << "|" << *finalCut->cut;
    if (finalCut->degreeZero) os << "!";
  }
  return os.str();
}

const Extender* Premouse::extenderAt(Ord lh) const {
  for (const auto& e : extenders)
    if (e.lh() == lh) return &e;
  return nullptr;
}

const Extender* Premouse::findMinus(const ExtKey& key) const {
  for (const auto& e : extenders)
    if (e.crit == key.crit && e.lam == key.lam) return &e;
  return nullptr;
}

std::vector<Extender> Premouse::extendersBelow(Ord bound) const {
  std::vector<Extender> out;
  for (const auto& e : extenders)
    if (e.lh() < bound) out.push_back(e);
  return out;
}

bool Premouse::wellFormed(std::string* why) const {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (!profile.wellFormed(why)) return false;
  Ord prev = -1;
  for (const auto& e : extenders) {
    std::string sub;
    if (!e.wellFormed(&sub)) return fail("extender " + e.str() + ": " + sub);
    if (e.plus) return fail("plus-type descriptor on a sequence");
    if (e.lh() <= prev) return fail("extender lh values not increasing");
    if (e.lh() > o()) return fail("extender above o(model)");
    if (e.context != extendersBelow(e.lh()))
      return fail("context of " + e.str() + " disagrees with the sequence below it");
    prev = e.lh();
  }
  return true;
}

bool Premouse::contentEquals(const Premouse& other) const {
  return sameShape(profile.levels, other.profile.levels) && extenders == other.extenders;
}

bool Premouse::initialSegmentOf(const Premouse& other) const {
  if (o() > other.o()) return false;
  if (o() == other.o()) return contentEquals(other);
  // proper levels of this below o() must be levels of other
  for (std::size_t i = 0; i + 1 < profile.levels.size(); ++i) {
    const Level* l = other.profile.levelAt(profile.levels[i].height);
    if (!l || !l->sameShape(profile.levels[i])) return false;
  }
  const Level* top = other.profile.levelAt(o());
  if (top) {
    if (top->rho != rhoMinus()) return false;
  } else {
    if (rhoMinus() != o()) return false;  // passive cut
  }
  return extenders == other.extendersBelow(o() + 1);
}

std::string Premouse::str() const {
  std::ostringstream os;
  os << history.str() << " " << profile.str() << " E{";
  for (std::size_t i = 0; i < extenders.size(); ++i) {
    if (i) os << ",";
    os << extenders[i].str();
  }
  os << "}";
  return os.str();
}

void rebuildContexts(std::vector<Extender>& extenders) {
  std::sort(extenders.begin(), extenders.end(),
            [](const Extender& a, const Extender& b) { return a.lh() < b.lh(); });
  for (std::size_t i = 0; i < extenders.size(); ++i) {
    extenders[i].context.assign(extenders.begin(), extenders.begin() + i);
    for (auto& c : extenders[i].context) c.context.clear();
  }
  // contexts of context members must themselves be filled in
  for (auto& e : extenders) {
    for (std::size_t i = 0; i < e.context.size(); ++i)
      e.context[i].context.assign(e.context.begin(), e.context.begin() + i);
  }
}

Premouse makeBase(const std::string& name, LevelProfile profile,
                  std::vector<Extender> extenders) {
  Premouse m;
  m.profile = std::move(profile);
  for (auto& l : m.profile.levels)
    l.degree = l.rho < l.height ? std::max(l.degree, 1) : 0;
  m.extenders = std::move(extenders);
  rebuildContexts(m.extenders);
  m.history.base = name;
  std::string why;
  if (!m.wellFormed(&why)) throw KernelError("IllFormedModel", name + ": " + why);
  return m;
}

// --- history normalization --------------------------------------------------

namespace {

// Insert one application step, restoring the branch normal form: each
// application sits over the earliest legal model, so consecutive entries
// satisfy crit(next) >= lambda-hat(prev). An application reaching below the
// previous entry's lambda-hat moves left: it commutes past it when its
// critical point is no bigger (the earlier extender is replaced by its
// image) and is absorbed into the image otherwise.
void insertStep(std::vector<HistStep>& steps, HistStep step) {
  if (steps.empty() || step.ext.crit >= steps.back().ext.lam) {
    steps.push_back(std::move(step));
    return;
  }
  HistStep g = steps.back();
  steps.pop_back();
  ShiftMap fe = shiftOf(step.ext);
  if (step.ext.crit <= g.ext.crit) {
    // commute
    HistStep gImage{shiftImage(fe, g.ext), g.cut, g.degreeZero};
    if (g.cut) gImage.cut = fe(*g.cut);
    if (step.cut) {
      auto pre = shiftOf(g.ext).preimage(*step.cut);
      if (!pre)
        throw KernelError("HistoryRewrite", "cut height not in the image of " + g.ext.str());
      step.cut = *pre;
    }
    insertStep(steps, std::move(step));
    steps.push_back(std::move(gImage));
  } else {
    // absorb
    if (step.cut)
      throw KernelError("HistoryRewrite", "absorbed application with a proper segment");
    steps.push_back(HistStep{shiftImage(fe, g.ext), g.cut, g.degreeZero});
  }
}

History cutHistory(History h, Ord height, bool degreeZero) {
  while (!h.steps.empty() && height <= h.steps.back().ext.crit) h.steps.pop_back();
  HistStep marker;
  marker.cut = height;
  marker.degreeZero = degreeZero;
  h.finalCut = marker;
  return h;
}

}  // namespace

Premouse segmentOf(const Premouse& m, Ord h, bool degreeZero) {
  if (h > m.o() || h <= 0) throw KernelError("NotAnInitialSegment", "height out of range");
  Premouse out;
  for (const auto& l : m.profile.levels)
    if (l.height < h) out.profile.levels.push_back(l);
  const Level* at = m.profile.levelAt(h);
  if (at)
    out.profile.levels.push_back(Level{h, at->rho, degreeZero ? 0 : at->degree});
  else
    out.profile.levels.push_back(Level{h, h, 0});
  out.extenders = m.extendersBelow(h + 1);
  rebuildContexts(out.extenders);
  if (h == m.o() && !degreeZero) {
    out.history = m.history;
    return out;
  }
  out.history = cutHistory(m.history, h, degreeZero);
  if (h == m.o() && m.history.finalCut &&
      m.history.finalCut->cut == h && !degreeZero)
    out.history = m.history;
  return out;
}

ApplySegment applicationSegment(const Premouse& m, const Extender& e) {
  for (const auto& l : m.profile.levels) {
    if (l.height <= e.crit) continue;  // dom(e) must fit inside
    if (l.appRho() <= e.crit) {
      Premouse seg = segmentOf(m, l.height, true);
      return {std::move(seg), true, l.height};
    }
  }
  return {m, false, m.o()};
}

Premouse ultrapower(const Premouse& p, const Extender& e) {
  std::string why;
  if (!e.wellFormed(&why)) throw KernelError("IllFormedExtender", e.str() + ": " + why);
  if (e.crit >= p.appRho())
    throw KernelError("DropRequired", "crit " + std::to_string(e.crit) +
                                          " >= projectum " + std::to_string(p.appRho()));
  // dom agreement: p and e's context carry the same descriptors through crit
  {
    std::vector<Extender> a = p.extendersBelow(e.crit + 1);
    std::vector<Extender> b;
    for (const auto& c : e.context)
      if (c.lh() < e.crit + 1) b.push_back(c);
    if (a != b)
      throw KernelError("DomainMismatch",
                        "sequences through crit(" + e.str() + ") disagree");
  }
  ShiftMap f = shiftOf(e);

  Premouse r;
  // everything below lh(e) is kept intact; on top of that sit the pointwise
  // images of p's levels
  for (const auto& l : p.profile.levels) {
    if (l.height < e.lh()) {
      Level kept = l;
      kept.degree = kept.rho < kept.height ? std::max(kept.degree, 1) : 0;
      r.profile.levels.push_back(kept);
    }
  }
  for (const auto& l : p.profile.levels) {
    Level img{f(l.height), f(l.rho), l.degree};
    const Level* at = nullptr;
    for (const auto& have : r.profile.levels)
      if (have.height == img.height) at = &have;
    if (at) {
      if (!at->sameShape(img))
        throw KernelError("IllFormedModel", "level collision in ultrapower");
      continue;
    }
    r.profile.levels.push_back(img);
  }
  std::sort(r.profile.levels.begin(), r.profile.levels.end(),
            [](const Level& a, const Level& b) { return a.height < b.height; });

  r.extenders = e.context;  // coherence below lh(e)
  for (const auto& g : p.extenders)
    if (g.lh() > e.crit) r.extenders.push_back(shiftImage(f, g));
  rebuildContexts(r.extenders);
  for (std::size_t i = 1; i < r.extenders.size(); ++i)
    if (r.extenders[i].lh() == r.extenders[i - 1].lh())
      throw KernelError("IllFormedModel", "lh collision in ultrapower");

  r.history = p.history;
  HistStep step;
  step.ext = e.key();
  if (r.history.finalCut) {
    step.cut = r.history.finalCut->cut;
    step.degreeZero = r.history.finalCut->degreeZero;
    r.history.finalCut.reset();
  }
  insertStep(r.history.steps, std::move(step));

  std::string rwhy;
  if (!r.wellFormed(&rwhy)) throw KernelError("IllFormedModel", "ultrapower: " + rwhy);
  return r;
}

// --- dropdown sequences -----------------------------------------------------

namespace {

// Generalized chain: A_0 is the cut of q at height h (level rho when h names
// a level, passive otherwise).
Dropdown dropdownFrom(const Premouse& q, Ord h) {
  Dropdown d;
  const Level* at = q.profile.levelAt(h);
  Ord rho0 = at ? at->rho : h;
  d.heights.push_back(h);
  d.kappas.push_back(rho0);
  for (;;) {
    Ord bestH = -1, bestRho = 0;
    for (const auto& l : q.profile.levels) {
      if (l.height <= d.heights.back()) continue;
      if (l.rho < d.kappas.back()) {
        bestH = l.height;
        bestRho = l.rho;
        break;  // levels are height-sorted, least qualifying wins
      }
    }
    if (bestH < 0) break;
    d.heights.push_back(bestH);
    d.kappas.push_back(bestRho);
  }
  return d;
}

}  // namespace

Dropdown dropdownSequence(const Premouse& q, Ord hN) {
  const Level* at = q.profile.levelAt(hN);
  if (!at || hN >= q.o())
    throw KernelError("NotAnInitialSegment",
                      "no proper level at height " + std::to_string(hN));
  return dropdownFrom(q, hN);
}

namespace {

Ord supImage(const ShiftMap& pi, Ord bound) {
  return bound <= 0 ? 0 : pi(bound - 1) + 1;
}

}  // namespace

CheckReport dropdownImageCheck(const ShiftMap& pi, const Premouse& q,
                               const Premouse& x, Ord hN) {
  // profile compatibility: proper levels of x are the pointwise images of
  // q's proper levels, and tops correspond
  if (x.o() != pi(q.o()))
    throw KernelError("IncompatibleProfiles", "o(x) is not the image of o(q)");
  {
    std::vector<Level> want;
    for (std::size_t i = 0; i + 1 < q.profile.levels.size(); ++i) {
      const Level& l = q.profile.levels[i];
      want.push_back(Level{pi(l.height), pi(l.rho), l.degree});
    }
    std::vector<Level> have(x.profile.levels.begin(), x.profile.levels.end() - 1);
    if (want != have)
      throw KernelError("IncompatibleProfiles",
                        "proper levels of x are not the images of q's");
  }

  Dropdown dq = dropdownSequence(q, hN);
  Dropdown dx = dropdownSequence(x, pi(hN));
  int n = dq.n(), m = dx.n();

  if (m != n - 1 && m != n && m != n + 1)
    return CheckReport::fail("a", "n moved from " + std::to_string(n) + " to " +
                                      std::to_string(m));
  for (int i = 0; i + 1 <= n && i <= m; ++i) {
    if (i <= n - 1 && i <= m) {
      if (dx.heights[i] != pi(dq.heights[i]))
        return CheckReport::fail("b", "A_" + std::to_string(i) + " not preserved");
      if (dx.kappas[i] != pi(dq.kappas[i]))
        return CheckReport::fail("b", "kappa_" + std::to_string(i) + " not preserved");
    }
  }
  if (m == n - 1) {
    if (dq.heights[n] != q.o())
      return CheckReport::fail("c", "n dropped although A_n is a proper level");
    if (!(pi(q.rhoMinus()) < x.rhoMinus()))
      return CheckReport::fail("c", "n dropped although the image projectum did not grow");
  }
  if (n <= m) {
    if (dx.heights[n] != pi(dq.heights[n]))
      return CheckReport::fail("d", "A_n not preserved");
  }
  if (m == n + 1) {
    if (dq.heights[n] >= q.o()) return CheckReport::fail("e", "A_n is not proper");
    if (dq.kappas[n] != q.rhoMinus())
      return CheckReport::fail("e", "kappa_n differs from rho-minus of the source");
    if (!(supImage(pi, q.rhoMinus()) <= x.rhoMinus() &&
          x.rhoMinus() < pi(q.rhoMinus())))
      return CheckReport::fail("e", "image projectum outside the allowed interval");
    if (dx.heights[n + 1] != x.o())
      return CheckReport::fail("e", "A_{n+1} of the image is not the whole model");
  }
  if (pi.mapClass() != MapClass::NearlyElementary) {  // almost exact or exact
    if (m == n - 1)
      return CheckReport::fail("almost-exact", "n decreased under an almost-exact map");
    for (int i = 0; i <= n && i <= m; ++i)
      if (dx.heights[i] != pi(dq.heights[i]))
        return CheckReport::fail("almost-exact", "A_i not preserved");
  }
  if (pi.mapClass() == MapClass::Exact) {
    if (m != n) return CheckReport::fail("exact", "n changed under an exact map");
  }
  return CheckReport::pass();
}

// --- resolutions ------------------------------------------------------------

ShiftMap Resolution::composite() const {
  ShiftMap out = ShiftMap::identity();
  for (int i = 0; i < n; ++i) out = stages[i].sigma.after(out);
  return out;
}

Resolution resolutionFromEtas(const Premouse& nModel, const std::vector<Ord>& etas) {
  if (etas.empty()) throw KernelError("BadEtaSequence", "empty eta sequence");
  Resolution r;
  r.etas = etas;
  r.n = static_cast<int>(etas.size()) - 1;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    Dropdown d = dropdownFrom(nModel, etas[i]);
    if (d.n() != r.n)
      throw KernelError("BadEtaSequence",
                        "dropdown length at eta_" + std::to_string(i + 1) +
                            " is " + std::to_string(d.n()) + ", expected " +
                            std::to_string(r.n));
    ResolutionStage st;
    for (int k = 1; k <= r.n; ++k) {
      const Level* l = nModel.profile.levelAt(d.heights[k]);
      Level data = l ? *l : Level{d.heights[k], d.kappas[k], 0};
      st.b.push_back(data);
    }
    if (i + 1 < etas.size()) {
      Ord gamma = d.kappas[i + 1];
      st.sigma = ShiftMap::translation(gamma, etas[i + 1] - etas[i],
                                       MapClass::NearlyElementary);
    } else {
      st.sigma = ShiftMap::identity();
    }
    r.stages.push_back(std::move(st));
  }
  return r;
}

CheckReport resolutionCheck(const ShiftMap& sigma, const Premouse& nModel,
                            Ord eta, Ord lam, const Resolution& r) {
  if (eta > lam || lam > nModel.o())
    return CheckReport::fail("endpoints", "eta/lam out of range");
  if (r.etas.empty() || r.etas.front() != eta)
    return CheckReport::fail("endpoints", "eta_1 differs from eta");
  if (r.etas.back() != lam)
    return CheckReport::fail("endpoints", "eta_{n+1} differs from lam");
  if (static_cast<int>(r.etas.size()) != r.n + 1 ||
      static_cast<int>(r.stages.size()) != r.n + 1)
    return CheckReport::fail("shape", "stage or eta count does not match n");
  for (std::size_t i = 1; i < r.etas.size(); ++i)
    if (r.etas[i] < r.etas[i - 1])
      return CheckReport::fail("shape", "eta sequence decreases");
  for (std::size_t i = 0; i < r.etas.size(); ++i) {
    if (dropdownFrom(nModel, r.etas[i]).n() != r.n)
      return CheckReport::fail("n-constant",
                               "n changes at eta_" + std::to_string(i + 1));
    if (static_cast<int>(r.stages[i].b.size()) != r.n)
      return CheckReport::fail("shape", "snapshot size differs from n");
  }
  if (!(r.composite() == sigma))
    return CheckReport::fail("composition", "stage maps do not compose to sigma");
  // snapshots must match the dropdown data determined by the etas
  for (std::size_t i = 0; i < r.etas.size(); ++i) {
    Dropdown d = dropdownFrom(nModel, r.etas[i]);
    for (int k = 1; k <= r.n; ++k) {
      const ResolutionStage& st = r.stages[i];
      if (st.b[k - 1].height != d.heights[k] || st.b[k - 1].rho != d.kappas[k])
        return CheckReport::fail("a", "snapshot B^" + std::to_string(i + 1) + "_" +
                                          std::to_string(k) +
                                          " disagrees with the dropdown data");
    }
  }
  for (int k = 1; k <= r.n; ++k) {
    int deg = r.stages[0].b[k - 1].degree;
    for (std::size_t i = 1; i < r.stages.size(); ++i)
      if (r.stages[i].b[k - 1].degree != deg)
        return CheckReport::fail("a", "degree of B^i_" + std::to_string(k) + " varies");
  }
  for (int k = 1; k <= r.n; ++k)
    for (int i = 1; i < k; ++i)
      if (!(r.stages[i - 1].b[k - 1] == r.stages[k - 1].b[k - 1]))
        return CheckReport::fail("c", "B^i_k differs from B^k_k below the diagonal");
  for (int i = 1; i <= r.n; ++i) {
    Ord gamma = r.stages[i - 1].b[i - 1].rho;
    const ShiftMap& s = r.stages[i - 1].sigma;
    if (!s.identityBelow(gamma))
      return CheckReport::fail("d", "sigma_" + std::to_string(i) +
                                        " moves a point below its gamma");
    if (s(r.etas[i - 1]) != r.etas[i])
      return CheckReport::fail("d", "sigma_" + std::to_string(i) +
                                        " does not send eta_i to eta_{i+1}");
    if (r.etas[i - 1] == r.etas[i]) {
      if (!s.isIdentity())
        return CheckReport::fail("e", "stationary stage with a non-identity map");
      if (!(r.stages[i - 1].b == r.stages[i].b))
        return CheckReport::fail("e", "stationary stage changes its snapshots");
    } else {
      if (!(r.stages[i - 1].b[i - 1].height < r.stages[i].b[i - 1].height))
        return CheckReport::fail("e", "strict stage without a proper segment step");
    }
  }
  for (int i = 1; i < r.n; ++i) {
    Ord gii = r.stages[i - 1].b[i - 1].rho;
    Ord gnext = r.stages[i].b[i].rho;
    if (!(gnext < gii))
      return CheckReport::fail("f", "gamma^{i+1}_{i+1} not below gamma^i_i");
    Ord gacross = r.stages[i].b[i - 1].rho;
    if (gii == gacross) {
      if (!r.stages[i - 1].sigma.identityBelow(gii + 1))
        return CheckReport::fail("f", "sigma_i moves gamma^i_i although it persists");
    }
  }
  return CheckReport::pass();
}

Resolution buildResolution(const Premouse& m, Ord etaBar, const Extender& f,
                           const std::optional<std::vector<Ord>>& declaredEtas) {
  const Extender* e = m.extenderAt(etaBar);
  if (!e) throw KernelError("NoExtenderAtEta",
                            "no extender indexed at " + std::to_string(etaBar));
  if (f.crit >= e->lamHat())
    throw KernelError("DropRequired", "crit(f) at or above lam-hat of the cut extender");
  Premouse big = ultrapower(m, f);
  if (declaredEtas) return resolutionFromEtas(big, *declaredEtas);
  Premouse small = ultrapower(segmentOf(m, etaBar), f);
  Ord eta = small.o();
  Ord lam = shiftOf(f)(etaBar);
  if (eta != lam)
    throw KernelError("BadEtaSequence", "concrete factor map is not the identity");
  Dropdown d = dropdownFrom(big, eta);
  std::vector<Ord> etas(static_cast<std::size_t>(d.n()) + 1, eta);
  return resolutionFromEtas(big, etas);
}

}  // namespace itree

#include "itree/normalize.hpp"

#include <algorithm>
#include <sstream>

namespace itree {

namespace {

// Shared construction for the W and V operators; `cut` is alpha or alpha0.
OneStepResult oneStepAt(const NormalTree& s, const NormalTree& t, const Extender& fIn,
                        std::size_t cut, Positions pos, bool weakTagged,
                        const std::string& provenanceTag) {
  const std::size_t beta = pos.beta;
  if (beta + 1 > s.size() || !(s.restrictedTo(beta + 1) == t.restrictedTo(beta + 1)))
    throw NormalizeError("AgreementHypothesisFailure",
                         "trees disagree through beta = " + std::to_string(beta));
  Extender f = exitDescriptor(t, t.size() - 1, fIn.key());
  if (beta + 1 < s.size() && !(f.crit < s.exit(beta).lamHat()))
    throw NormalizeError("AgreementHypothesisFailure",
                         "dom(F) reaches past lambda of S's exit at beta");

  ApplySegment seg = applicationSegment(s.model(beta), f);
  bool dropping;
  if (beta + 1 == s.size())
    dropping = seg.dropped;
  else
    dropping = seg.dropped && seg.targetHeight <= s.exit(beta).lh();

  NormalTree w = t.restrictedTo(cut + 1);
  Extender fTagged = f;
  fTagged.provenance = provenanceTag + ":" + f.key().str();
  w = extendTree(w, fTagged);
  if (w.pred(cut + 1) != beta)
    throw NormalizeError("AgreementHypothesisFailure",
                         "the new node applies at " + std::to_string(w.pred(cut + 1)) +
                             " instead of beta = " + std::to_string(beta));

  if (dropping) {
    // W = T|cut+1 ^ <F>, and the embedding covers S only through beta
    std::vector<std::size_t> uMap(beta + 1);
    for (std::size_t i = 0; i < beta; ++i) uMap[i] = i;
    uMap[beta] = cut + 1;
    TreeEmbedding phi = embeddingFromU(s, w, uMap);
    if (weakTagged) phi.weak.assign(phi.defined, WeakNode::tagged(CaseTag::X));
    OneStepResult out{w, std::move(phi), ShiftMap::identity(), true, pos};
    return out;
  }

  // non-dropping: blow up the remaining exits of S through the t-maps,
  // maintaining the copy recursion as the tree grows
  std::vector<std::size_t> vv(s.size()), uu(s.size());
  std::vector<PartialShiftMap> ss(s.size()), tt(s.size());
  for (std::size_t i = 0; i < beta; ++i) {
    vv[i] = uu[i] = i;
    ss[i] = tt[i] = PartialShiftMap::identity();
  }
  vv[beta] = beta;
  uu[beta] = cut + 1;
  ss[beta] = PartialShiftMap::identity();
  tt[beta] = w.branchEmbedding(beta, cut + 1);
  for (std::size_t xi = beta; xi + 1 < s.size(); ++xi) {
    Extender img = shiftImage(tt[xi].map, s.exit(xi),
                              provenanceTag + ":" + s.exit(xi).key().str());
    img.plus = s.exit(xi).plus;
    w = extendTree(w, img);
    std::size_t eta = s.pred(xi + 1);
    std::size_t etaStar = w.pred(uu[xi] + 1);
    PartialShiftMap pi = w.branchEmbedding(vv[eta], etaStar).after(ss[eta]);
    ShiftMap sm = copyMap(tt[xi].map, pi.map, s.exit(xi), w.exit(uu[xi]));
    vv[xi + 1] = uu[xi] + 1;
    uu[xi + 1] = vv[xi + 1];
    ss[xi + 1] = PartialShiftMap{sm, std::nullopt};
    tt[xi + 1] = ss[xi + 1];
  }
  TreeEmbedding phi(s, w);
  phi.defined = s.size();
  phi.v = std::move(vv);
  phi.u = std::move(uu);
  phi.s = std::move(ss);
  phi.t = std::move(tt);
  if (weakTagged) phi.weak.assign(phi.defined, WeakNode::tagged(CaseTag::X));

  // sigma: identity through lh(F), then determined by the last t-map
  ShiftMap tLast = phi.t.back().map;
  Ord cutF = f.lamEff();
  Ord amount = cutF - f.crit;
  std::vector<Ord> cands = {cutF};
  for (const auto& sg : tLast.segments())
    if (sg.from >= f.crit) cands.push_back(sg.from + amount);
  auto fn = [&](Ord x) -> Ord { return x < cutF ? x : tLast(x - amount); };
  ShiftMap sigma = buildPiecewise(fn, std::move(cands));
  OneStepResult out{w, std::move(phi), std::move(sigma), false, pos};
  return out;
}

}  // namespace

OneStepResult wOneStep(const NormalTree& s, const NormalTree& t, const Extender& f) {
  Positions pos = positions(f, t);
  return oneStepAt(s, t, f, pos.alpha, pos, false, "w");
}

OneStepResult vOneStep(const NormalTree& s, const NormalTree& t, const Extender& f) {
  Positions pos = positions(f, t);
  return oneStepAt(s, t, f, pos.alpha0, pos, false, "v");
}

XOneStepResult xOneStep(const NormalTree& s, const NormalTree& t, const Extender& f) {
  Positions pos = positions(f, t);
  OneStepResult w = wOneStep(s, t, f);

  // the X tree shares W's order; its exits arise inside the small-model
  // ultrapowers, which the concrete algebra makes numerically equal
  NormalTree x = t.restrictedTo(pos.alpha + 1);
  Extender fTagged = exitDescriptor(t, t.size() - 1, f.key());
  fTagged.provenance = "x:" + f.key().str();
  x = extendTree(x, fTagged);
  if (!w.dropping) {
    for (std::size_t xi = pos.beta; xi + 1 < s.size(); ++xi) {
      // image computed through the next t-map (the small ultrapower route)
      ShiftMap small = shiftOf(fTagged);  // rs = id: same translation
      PartialShiftMap tNext{small, std::nullopt};
      Extender img = shiftImage(tNext.map, s.exit(xi), "rs:" + s.exit(xi).key().str());
      img.plus = s.exit(xi).plus;
      x = extendTree(x, img);
    }
  }

  // Psi: same u-map as Phi^W, X-case tags, identity factor maps
  TreeEmbedding psi = embeddingFromU(s, x, std::vector<std::size_t>(
                                               w.phi.u.begin(), w.phi.u.end()));
  psi.weak.assign(psi.defined, WeakNode::tagged(CaseTag::X));

  // Gamma: identity u-map from X into W, W-case tags
  std::vector<std::size_t> idMap(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) idMap[i] = i;
  TreeEmbedding gamma = embeddingFromU(x, w.tree, idMap);
  gamma.weak.assign(gamma.defined, WeakNode::tagged(CaseTag::W));

  return XOneStepResult{std::move(x), std::move(psi), std::move(gamma), std::move(w)};
}

CopiedTree copyTree(const ShiftMap& pi, const NormalTree& t, const Premouse& base) {
  CopiedTree out{NormalTree(base), {pi}};
  for (std::size_t xi = 0; xi + 1 < t.size(); ++xi) {
    const Extender& e = t.exit(xi);
    Extender img = shiftImage(out.copyMaps[xi], e, "copy:" + e.key().str());
    img.plus = e.plus;
    out.tree = extendTree(out.tree, img);
    std::size_t eta = t.pred(xi + 1);
    if (out.tree.pred(xi + 1) != eta)
      throw NormalizeError("CopyBroken", "copied tree changes its predecessor pattern");
    const Extender& imgExit = out.tree.exit(xi);
    ShiftMap next = copyMap(out.copyMaps[xi], out.copyMaps[eta], e, imgExit);
    out.copyMaps.push_back(std::move(next));
  }
  return out;
}

TwoStackData twoStackStages(const NormalTree& t, const NormalTree& u, NormMode mode) {
  if (!(u.model(0) == t.lastModel()))
    throw NormalizeError("NotMaximal", "second tree does not sit on the first's last model");
  TwoStackData out;
  out.stages.push_back(t);
  out.sigmas.push_back(ShiftMap::identity());
  for (std::size_t xi = 0; xi + 1 < u.size(); ++xi) {
    std::size_t eta = u.pred(xi + 1);
    Extender fxi = shiftImage(out.sigmas[xi], u.exit(xi));
    fxi.plus = u.exit(xi).plus;
    const NormalTree& vEta = out.stages[eta];
    const NormalTree& vXi = out.stages[xi];
    OneStepResult step = mode == NormMode::W ? wOneStep(vEta, vXi, fxi)
                         : mode == NormMode::V
                             ? vOneStep(vEta, vXi, fxi)
                             : [&] {
                                 XOneStepResult xr = xOneStep(vEta, vXi, fxi);
                                 return OneStepResult{xr.tree, xr.psi,
                                                      ShiftMap::identity(), xr.w.dropping,
                                                      xr.w.pos};
                               }();
    out.stages.push_back(step.tree);
    if (mode == NormMode::X) {
      out.sigmas.push_back(ShiftMap::identity());
    } else {
      Extender fStage = fxi;
      fStage.provenance.clear();
      ShiftMap tau = copyMap(out.sigmas[xi], out.sigmas[eta], u.exit(xi), fStage);
      out.sigmas.push_back(step.sigma.after(tau));
    }
    out.stageExits.push_back(std::move(fxi));
    out.steps.push_back(std::move(step));
  }
  return out;
}

namespace {

// One round: normalize the two-tree stack <T, U> by the chosen operator.
StackResult normalizeTwo(const NormalTree& t, const NormalTree& u, NormMode mode) {
  TwoStackData data = twoStackStages(t, u, mode);
  std::map<std::pair<std::size_t, std::size_t>, TreeEmbedding> maps;
  for (std::size_t xi = 0; xi + 1 < u.size(); ++xi) {
    std::size_t eta = u.pred(xi + 1);
    maps.emplace(std::make_pair(eta, xi + 1), data.steps[xi].phi);
    for (std::size_t z = 0; z < eta; ++z) {
      if (!u.leq(z, eta)) continue;
      auto it = maps.find({z, eta});
      if (it != maps.end())
        maps.emplace(std::make_pair(z, xi + 1), compose(it->second, data.steps[xi].phi));
    }
  }
  return StackResult{data.stages.back(), std::move(maps), std::move(data.sigmas)};
}

}  // namespace

StackResult normalizeStack(const std::vector<NormalTree>& stack, NormMode mode) {
  if (stack.empty()) throw NormalizeError("NotMaximal", "empty stack");
  for (std::size_t i = 0; i + 1 < stack.size(); ++i)
    if (!(stack[i + 1].model(0) == stack[i].lastModel()))
      throw NormalizeError("NotMaximal",
                           "tree " + std::to_string(i + 1) + " does not sit on the last model");
  if (stack.size() == 1)
    return StackResult{stack[0], {}, {ShiftMap::identity()}};

  StackResult acc = normalizeStack({stack.begin(), stack.end() - 1}, mode);
  const NormalTree& last = stack.back();
  if (mode == NormMode::X) {
    // full normalization keeps every model on the nose; no copying needed
    return normalizeTwo(acc.tree, last, mode);
  }
  ShiftMap sig = acc.sigmas.empty() ? ShiftMap::identity() : acc.sigmas.back();
  CopiedTree copied = copyTree(sig, last, acc.tree.lastModel());
  StackResult round = normalizeTwo(acc.tree, copied.tree, mode);
  // factor the last copy map into the final sigma
  if (!round.sigmas.empty() && !copied.copyMaps.empty())
    round.sigmas.back() = round.sigmas.back().after(copied.copyMaps.back());
  return round;
}

bool exchangeCheck(const Premouse& p, const Extender& f, const Extender& g,
                   std::string* why) {
  if (f.crit > g.crit)
    throw NormalizeError("IllegalApplication", "crit(f) above crit(g): not applicable");
  if (!p.findMinus(f.key()) || !p.findMinus(g.key()))
    throw NormalizeError("IllegalApplication", "both extenders must sit on the model");
  if (f.lh() >= g.lh())
    throw NormalizeError("IllegalApplication", "f must sit strictly below g");

  Extender ff = *p.findMinus(f.key());
  Extender gg = *p.findMinus(g.key());

  ApplySegment segG = applicationSegment(p, gg);
  Premouse ug = ultrapower(segG.segment, gg);
  const Extender* fAfter = ug.findMinus(ff.key());
  if (!fAfter)
    throw NormalizeError("IllegalApplication", "f does not survive the g step");
  ApplySegment segF2 = applicationSegment(ug, *fAfter);
  Premouse left = ultrapower(segF2.segment, *fAfter);

  ApplySegment segF = applicationSegment(p, ff);
  Premouse uf = ultrapower(segF.segment, ff);
  Extender gImg = shiftImage(shiftOf(ff), gg);
  gImg.context = uf.extendersBelow(gImg.lh());
  ApplySegment segG2 = applicationSegment(uf, gImg);
  Premouse right = ultrapower(segG2.segment, gImg);

  if (!(left.history == right.history)) {
    if (why) *why = "histories differ: " + left.history.str() + " vs " + right.history.str();
    return false;
  }
  if (!left.contentEquals(right)) {
    if (why) *why = "contents differ";
    return false;
  }
  ShiftMap a = shiftOf(*fAfter).after(shiftOf(gg));
  ShiftMap b = shiftOf(gImg).after(shiftOf(ff));
  Ord bound = 2 * std::max(p.o(), std::max(ff.lh(), gg.lh())) + 1;
  for (Ord x = 0; x <= std::max<Ord>(bound, 32); ++x)
    if (a(x) != b(x)) {
      if (why) *why = "composite maps differ at " + std::to_string(x);
      return false;
    }
  return true;
}

}  // namespace itree

#include "itree/metatree.hpp"

#include <algorithm>
#include <set>

namespace itree {

namespace {

// least height where the two models' sequences disagree, if any
std::optional<Ord> leastDisagreement(const Premouse& a, const Premouse& b) {
  Ord top = std::max(a.o(), b.o());
  for (Ord nu = 0; nu <= top; ++nu) {
    const Extender* ea = a.extenderAt(nu);
    const Extender* eb = b.extenderAt(nu);
    if (nu > a.o() || nu > b.o()) {
      // past the shorter side only content on the longer side matters
      if (nu > a.o() && eb) return nu;
      if (nu > b.o() && ea) return nu;
      continue;
    }
    if ((ea == nullptr) != (eb == nullptr)) return nu;
    if (ea && eb && !(*ea == *eb)) return nu;
  }
  return std::nullopt;
}

}  // namespace

CompareResult compare(const std::vector<NormalTree>& trees, const MetaStrategy& strategy,
                      const std::vector<const MetaStrategy*>& policies) {
  if (trees.empty()) throw MetaError("NoCommonBase", "nothing to compare");
  for (std::size_t i = 1; i < trees.size(); ++i)
    if (!(trees[i].model(0) == trees[0].model(0)))
      throw MetaError("NoCommonBase", "trees sit on different base models");

  CompareResult out;
  for (const auto& t : trees) out.sides.emplace_back(t);
  std::set<Ord> lhSeen;
  for (const auto& side : out.sides)
    for (const auto& e : side.lastModel().extenders) lhSeen.insert(e.lh());

  const std::size_t hardCap = 512;
  std::size_t steps = 0;
  for (;; ++steps) {
    if (steps > hardCap) throw MetaError("ComparisonDiverged", "step cap exceeded");
    // find the least disagreement across all pairs
    std::optional<Ord> nu;
    for (std::size_t i = 0; i < out.sides.size(); ++i)
      for (std::size_t j = i + 1; j < out.sides.size(); ++j) {
        auto d = leastDisagreement(out.sides[i].lastModel(), out.sides[j].lastModel());
        if (d && (!nu || *d < *nu)) nu = d;
      }
    if (!nu) break;
    bool moved = false;
    for (std::size_t i = 0; i < out.sides.size(); ++i) {
      const Premouse& m = out.sides[i].lastModel();
      const Extender* e = m.extenderAt(*nu);
      if (!e) continue;
      // hit the plus version of the disagreement extender
      bool offending = false;
      for (std::size_t j = 0; j < out.sides.size(); ++j) {
        if (j == i) continue;
        const Premouse& other = out.sides[j].lastModel();
        const Extender* eo = other.extenderAt(*nu);
        if (*nu > other.o() || !eo || !(*eo == *e)) offending = true;
      }
      if (!offending) continue;
      Extender plus = e->plused();
      const MetaStrategy* pol = i < policies.size() ? policies[i] : nullptr;
      out.sides[i] = extendMetaTree(out.sides[i], plus, pol ? pol : nullptr);
      if (!strategy.accepts(out.sides[i]))
        throw MetaError("ComparisonDiverged", "strategy rejects a comparison stage");
      for (const auto& en : out.sides[i].lastModel().extenders) lhSeen.insert(en.lh());
      lhSeen.insert(*nu);
      moved = true;
    }
    if (!moved) break;  // disagreement without an extender to hit: segment verdict
  }

  out.verdict.steps = steps;
  out.verdict.lhBound = lhSeen.size();
  // the winner absorbs every other side as an initial segment
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.sides.size(); ++i)
    if (out.sides[i].lastModel().o() > out.sides[best].lastModel().o()) best = i;
  bool allSegments = true;
  bool tie = true;
  for (std::size_t i = 0; i < out.sides.size(); ++i) {
    if (!out.sides[i].lastModel().initialSegmentOf(out.sides[best].lastModel()))
      allSegments = false;
    if (!out.sides[i].lastModel().contentEquals(out.sides[best].lastModel())) tie = false;
  }
  if (!allSegments)
    throw MetaError("ComparisonDiverged", "no side absorbs the others");
  out.verdict.tie = tie;
  out.verdict.winner = best;
  const MetaTree& w = out.sides[best];
  out.verdict.winnerMainBranchDrops = w.size() > 1 && w.dropsAlong(0, w.size() - 1);
  return out;
}

MetaStrategy inducedStrategy(std::function<bool(const NormalTree&)> basePredicate) {
  MetaStrategy s = MetaStrategy::vacuous();
  s.acceptsStack = [pred = std::move(basePredicate)](const std::vector<MetaTree>& stack) {
    for (const auto& m : stack)
      for (std::size_t i = 0; i < m.size(); ++i)
        if (!pred(m.stage(i))) return false;
    return true;
  };
  return s;
}

MetaStrategy pullbackStrategy(const TreeEmbedding& gamma, const MetaStrategy& base) {
  MetaStrategy s = MetaStrategy::vacuous();
  s.acceptsStack = [gamma, base](const std::vector<MetaTree>& stack) {
    std::vector<MetaTree> copied;
    for (const auto& m : stack) {
      try {
        copied.push_back(copyMetaTree(gamma, m).tree);
      } catch (const KernelError&) {
        return false;
      }
    }
    return base.acceptsStack(copied);
  };
  return s;
}

std::function<bool(const NormalTree&)> tailStrategy(const MetaTree& m,
                                                    std::optional<Ord> segmentHeight,
                                                    const MetaStrategy& base) {
  NormalTree lastTree = m.lastTree();
  return [m, lastTree, segmentHeight, base](const NormalTree& u) {
    Premouse want = segmentHeight ? segmentOf(lastTree.lastModel(), *segmentHeight)
                                  : lastTree.lastModel();
    if (!(u.model(0) == want)) return false;
    try {
      // copy from the segment up to the whole last model, then normalize
      NormalTree uFull = segmentHeight
                             ? copyTree(ShiftMap::identity(), u, lastTree.lastModel()).tree
                             : u;
      MetaTree round = veeOf(lastTree, uFull);
      return base.acceptsStack({m, round});
    } catch (const KernelError&) {
      return false;
    }
  };
}

StackToNormalResult stackToNormal(const std::vector<NormalTree>& stack,
                                  const MetaStrategy& base) {
  if (stack.empty()) throw MetaError("NotMaximal", "empty stack");
  for (std::size_t i = 0; i + 1 < stack.size(); ++i)
    if (!(stack[i + 1].model(0) == stack[i].lastModel()))
      throw MetaError("NotMaximal", "stack is not maximal");

  // round-by-round bookkeeping: fold each next tree in by the meta-level
  // normalization of its vee over the current result
  NormalTree current = stack[0];
  bool accepted = base.acceptsStack({metatreeFromNormalTree(current)});
  std::vector<ShiftMap> sigma = {ShiftMap::identity()};
  for (std::size_t i = 1; i < stack.size(); ++i) {
    CopiedTree copied = copyTree(sigma.back(), stack[i], current.lastModel());
    MetaTree round = veeOf(current, copied.tree);
    if (!base.acceptsStack({round})) accepted = false;
    StackResult norm = normalizeStack({current, copied.tree}, NormMode::V);
    current = norm.tree;
    sigma.push_back(norm.sigmas.back().after(copied.copyMaps.back()));
  }
  return StackToNormalResult{current, accepted};
}

}  // namespace itree

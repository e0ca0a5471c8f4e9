#include "itree/metatree.hpp"

#include <algorithm>

namespace itree {

namespace {

// restrict an embedding to a prefix of its target tree
TreeEmbedding truncateEmbedding(const TreeEmbedding& phi, std::size_t targetLen) {
  std::size_t n = 0;
  while (n < phi.defined && phi.u[n] < targetLen) ++n;
  if (n == 0) throw MetaError("BadTruncation", "embedding empty after the cut");
  TreeEmbedding out(phi.source, phi.target.restrictedTo(targetLen));
  out.defined = n;
  out.v.assign(phi.v.begin(), phi.v.begin() + n);
  out.u.assign(phi.u.begin(), phi.u.begin() + n);
  out.s.assign(phi.s.begin(), phi.s.begin() + n);
  out.t.assign(phi.t.begin(), phi.t.begin() + n);
  if (phi.isWeak()) out.weak.assign(phi.weak.begin(), phi.weak.begin() + n);
  return out;
}

std::size_t metaPredByRule(const std::vector<Extender>& exits, Ord crit, std::size_t limit) {
  for (std::size_t eta = 0; eta + 1 < limit; ++eta)
    if (crit < exits[eta].lamEff()) return eta;
  return limit - 1;
}

}  // namespace

MetaTree::MetaTree(NormalTree base) { stages_.push_back(std::move(base)); }

MetaTree MetaTree::fromParts(std::vector<NormalTree> stages, std::vector<Extender> exits,
                             std::vector<std::size_t> pred) {
  if (stages.empty() || exits.size() + 1 != stages.size() || pred.size() != exits.size())
    throw MetaError("BadParts", "component sizes disagree");
  MetaTree m(stages.front());
  m.stages_ = std::move(stages);
  m.exits_ = std::move(exits);
  m.pred_ = std::move(pred);
  m.deriveStepData(true);
  return m;
}

MetaTree MetaTree::fromRawParts(std::vector<NormalTree> stages, std::vector<Extender> exits,
                                std::vector<std::size_t> pred, std::vector<MetaDrop> drops) {
  MetaTree m(stages.front());
  m.stages_ = std::move(stages);
  m.exits_ = std::move(exits);
  m.pred_ = std::move(pred);
  m.drops_ = std::move(drops);
  for (std::size_t i = 0; i + 1 < m.stages_.size(); ++i) {
    // best-effort derivation so that validation pinpoints the broken clause
    try {
      OneStepResult step = vOneStep(m.stages_[m.pred_.at(i)], m.stages_[i], m.exits_[i]);
      m.stepPhi_.push_back(truncateEmbedding(step.phi, m.stages_[i + 1].size()));
      m.alphas_.push_back(step.pos.alpha0);
      m.betas_.push_back(step.pos.beta);
    } catch (const KernelError&) {
      m.stepPhi_.push_back(TreeEmbedding::identity(m.stages_[i]));
      m.alphas_.push_back(0);
      m.betas_.push_back(0);
    }
  }
  return m;
}

void MetaTree::deriveStepData(bool recompute) {
  drops_.clear();
  stepPhi_.clear();
  alphas_.clear();
  betas_.clear();
  for (std::size_t i = 0; i + 1 < stages_.size(); ++i) {
    std::size_t eta = pred_.at(i);
    OneStepResult step = vOneStep(stages_[eta], stages_[i], exits_[i]);
    const NormalTree& next = stages_[i + 1];
    if (recompute) {
      if (!next.isPrefixOf(step.tree))
        throw MetaError("BadStage", "stage " + std::to_string(i + 1) +
                                        " is not inside the recomputed normalization");
      if (next.size() < std::min(step.tree.size(), step.pos.alpha0 + 2))
        throw MetaError("BadStage", "stage " + std::to_string(i + 1) +
                                        " cut below alpha+2");
    }
    MetaDrop d;
    bool grat = next.size() < step.tree.size();
    if (step.dropping && grat)
      d.kind = MetaDrop::Both;
    else if (step.dropping)
      d.kind = MetaDrop::Necessary;
    else if (grat)
      d.kind = MetaDrop::Gratuitous;
    d.fullLength = step.tree.size();
    drops_.push_back(d);
    stepPhi_.push_back(truncateEmbedding(step.phi, next.size()));
    alphas_.push_back(step.pos.alpha0);
    betas_.push_back(step.pos.beta);
  }
}

std::size_t MetaTree::pred(std::size_t i) const {
  if (i == 0 || i >= size()) throw MetaError("NotTreeRelated", "node 0 has no predecessor");
  return pred_.at(i - 1);
}

bool MetaTree::leq(std::size_t a, std::size_t b) const {
  while (b > a) b = pred(b);
  return a == b;
}

std::vector<std::size_t> MetaTree::branch(std::size_t a, std::size_t b) const {
  std::vector<std::size_t> path;
  std::size_t cur = b;
  while (cur > a) {
    path.push_back(cur);
    cur = pred(cur);
  }
  if (cur != a) throw MetaError("NotTreeRelated", "nodes are not tree-related");
  path.push_back(a);
  std::reverse(path.begin(), path.end());
  return path;
}

bool MetaTree::dropsAlong(std::size_t a, std::size_t b) const {
  auto path = branch(a, b);
  for (std::size_t j = 1; j < path.size(); ++j)
    if (drop(path[j]).kind != MetaDrop::None) return true;
  return false;
}

bool MetaTree::simple() const {
  for (std::size_t i = 1; i < size(); ++i)
    if (drop(i).gratuitous()) return false;
  return true;
}

bool MetaTree::lambdaSeparated() const {
  for (const auto& e : exits_)
    if (!e.plus) return false;
  return true;
}

TreeEmbedding MetaTree::stageMap(std::size_t a, std::size_t b) const {
  auto path = branch(a, b);
  TreeEmbedding acc = TreeEmbedding::identity(stages_[a]);
  for (std::size_t j = 1; j < path.size(); ++j) acc = compose(acc, stepPhi(path[j]));
  return acc;
}

MetaTree MetaTree::restrictedTo(std::size_t len) const {
  if (len == 0 || len > size()) throw MetaError("BadRestriction", "length out of range");
  MetaTree m(stages_[0]);
  m.stages_.assign(stages_.begin(), stages_.begin() + len);
  m.exits_.assign(exits_.begin(), exits_.begin() + (len - 1));
  m.pred_.assign(pred_.begin(), pred_.begin() + (len - 1));
  m.drops_.assign(drops_.begin(), drops_.begin() + (len - 1));
  m.stepPhi_.assign(stepPhi_.begin(), stepPhi_.begin() + (len - 1));
  m.alphas_.assign(alphas_.begin(), alphas_.begin() + (len - 1));
  m.betas_.assign(betas_.begin(), betas_.begin() + (len - 1));
  return m;
}

bool MetaTree::isPrefixOf(const MetaTree& other) const {
  if (size() > other.size()) return false;
  return *this == other.restrictedTo(size());
}

bool MetaTree::operator==(const MetaTree& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (!(stages_[i] == other.stages_[i])) return false;
  for (std::size_t i = 0; i + 1 < size(); ++i) {
    if (!(exits_[i] == other.exits_[i]) || exits_[i].plus != other.exits_[i].plus)
      return false;
    if (pred_[i] != other.pred_[i]) return false;
  }
  return true;
}

MetaReport validateMetaTree(const MetaTree& m, MetaFlags flags) {
  auto fail = MetaReport::fail;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const Extender& f = m.exit(i);
    const Extender* seq = m.stage(i).lastModel().findMinus(f.key());
    if (!seq || !(seq->context == f.context))
      return fail("exit-on-stage", i, "meta-exit is not on the stage's last model");
    if (i > 0 && !(m.exit(i - 1).lh() < f.lh()))
      return fail("3a", i, "meta-exit lh not increasing");
    if (flags.requireLambdaSeparated && !f.plus)
      return fail("lambda-separated", i, "non-plus meta-exit");
  }
  for (std::size_t i = 1; i < m.size(); ++i) {
    const Extender& f = m.exit(i - 1);
    std::size_t eta = 0;
    {
      std::vector<Extender> exits;
      for (std::size_t j = 0; j + 1 < m.size(); ++j) exits.push_back(m.exit(j));
      eta = metaPredByRule(exits, f.crit, i);
    }
    if (m.pred(i) != eta)
      return fail("3b-i", i, "meta predecessor differs from the least-crit rule");

    OneStepResult step = vOneStep(m.stage(eta), m.stage(i - 1), f);
    if (!m.stage(i).isPrefixOf(step.tree))
      return fail("3b-ii", i, "stage is not a prefix of the one-step normalization");
    if (m.stage(i).size() < std::min(step.tree.size(), step.pos.alpha0 + 2))
      return fail("3b-ii", i, "stage cut below alpha+2");
    TreeEmbedding expect = truncateEmbedding(step.phi, m.stage(i).size());
    const TreeEmbedding& got = m.stepPhi(i);
    bool same = expect.defined == got.defined && expect.u == got.u && expect.v == got.v;
    if (same)
      for (std::size_t k = 0; k < expect.defined; ++k)
        if (!(expect.s[k] == got.s[k]) || !(expect.t[k] == got.t[k])) same = false;
    if (!same)
      return fail("3b-iii", i, "step embedding differs from the normalization's");

    MetaDrop expectDrop;
    bool grat = m.stage(i).size() < step.tree.size();
    expectDrop.kind = step.dropping && grat  ? MetaDrop::Both
                      : step.dropping        ? MetaDrop::Necessary
                      : grat                 ? MetaDrop::Gratuitous
                                             : MetaDrop::None;
    expectDrop.fullLength = step.tree.size();
    if (!(m.drop(i) == expectDrop))
      return fail("drop-record", i, "drop record differs from the recomputation");
    if (flags.requireSimple && expectDrop.gratuitous())
      return fail("simple", i, "gratuitous drop present");
  }
  return MetaReport{};
}

MetaStrategy MetaStrategy::vacuous() {
  MetaStrategy s;
  s.acceptsStack = [](const std::vector<MetaTree>&) { return true; };
  s.dropPolicy = [](const MetaTree&, const NormalTree&) {
    return std::optional<std::size_t>{};
  };
  return s;
}

MetaStrategy MetaStrategy::withTable(std::vector<std::pair<NormalTree, std::size_t>> table) {
  MetaStrategy s = vacuous();
  s.dropPolicy = [table = std::move(table)](
                     const MetaTree& m, const NormalTree& proposed) -> std::optional<std::size_t> {
    std::size_t floor = 0;
    for (std::size_t i = 0; i + 1 < m.size(); ++i)
      floor = std::max(floor, m.alpha(i) + 1);
    std::optional<std::size_t> gamma;
    for (const auto& [tree, g] : table) {
      if (!(tree == proposed)) continue;
      if (g + 1 >= proposed.size() || g < floor) continue;
      if (gamma) return std::nullopt;  // not unique
      gamma = g;
    }
    if (!gamma) return std::nullopt;
    return *gamma + 1;
  };
  return s;
}

MetaTree metatreeFromNormalTree(const NormalTree& t) {
  std::vector<NormalTree> stages;
  std::vector<Extender> exits;
  std::vector<std::size_t> pred;
  for (std::size_t i = 0; i < t.size(); ++i) stages.push_back(t.restrictedTo(i + 1));
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    exits.push_back(t.exit(i));
    pred.push_back(t.pred(i + 1));
  }
  MetaTree m = MetaTree::fromParts(std::move(stages), std::move(exits), std::move(pred));
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m.pred(i) != t.pred(i))
      throw MetaError("BadParts", "meta predecessor differs from the tree's");
  return m;
}

MetaTree extendMetaTree(const MetaTree& m, const Extender& f, const MetaStrategy* policy) {
  const Extender* onSeq = m.lastModel().findMinus(f.key());
  if (!onSeq) throw MetaError("NotOnSequence", f.str() + " is not on the last model");
  Extender exit = *onSeq;
  exit.plus = f.plus;
  if (m.exitCount() > 0 && exit.lh() <= m.exit(m.exitCount() - 1).lh())
    throw MetaError("LengthOrderViolation", "meta-exit lh not above the previous one");
  std::vector<Extender> exits;
  for (std::size_t j = 0; j + 1 < m.size(); ++j) exits.push_back(m.exit(j));
  exits.push_back(exit);
  std::size_t eta = metaPredByRule(exits, exit.crit, m.size());
  OneStepResult step = vOneStep(m.stage(eta), m.lastTree(), exit);
  NormalTree stage = step.tree;
  if (policy && policy->dropPolicy) {
    auto cut = policy->dropPolicy(m, step.tree);
    if (cut) {
      if (*cut < std::min(step.tree.size(), step.pos.alpha0 + 2) || *cut > step.tree.size())
        throw MetaError("PolicyCutIllegal", "cut below alpha+2");
      stage = step.tree.restrictedTo(*cut);
    }
  }
  // extend incrementally: earlier steps keep their derived data
  MetaTree out = m;
  MetaDrop d;
  bool grat = stage.size() < step.tree.size();
  if (step.dropping && grat)
    d.kind = MetaDrop::Both;
  else if (step.dropping)
    d.kind = MetaDrop::Necessary;
  else if (grat)
    d.kind = MetaDrop::Gratuitous;
  d.fullLength = step.tree.size();
  out.stepPhi_.push_back(truncateEmbedding(step.phi, stage.size()));
  out.alphas_.push_back(step.pos.alpha0);
  out.betas_.push_back(step.pos.beta);
  out.stages_.push_back(std::move(stage));
  out.exits_.push_back(std::move(exits.back()));
  out.pred_.push_back(eta);
  out.drops_.push_back(d);
  return out;
}

MetaTree veeOf(const NormalTree& t, const NormalTree& u) {
  TwoStackData data = twoStackStages(t, u, NormMode::V);
  std::vector<std::size_t> pred;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) pred.push_back(u.pred(i + 1));
  MetaTree m = MetaTree::fromParts(std::move(data.stages), std::move(data.stageExits),
                                   std::move(pred));
  return m;
}

CopiedMetaTree copyMetaTree(const TreeEmbedding& gamma, const MetaTree& m) {
  if (!gamma.nonDropping())
    throw MetaError("DroppingEmbedding", "the lifting embedding must be non-dropping");
  std::vector<NormalTree> stages = {gamma.target};
  std::vector<TreeEmbedding> copies = {gamma};
  std::vector<Extender> exits;
  std::vector<std::size_t> pred;
  CaseTag tag = gamma.isWeak() ? gamma.weak.front().tag : CaseTag::W;

  for (std::size_t xi = 0; xi + 1 < m.size(); ++xi) {
    const Extender& fxi = m.exit(xi);
    Extender gxi = shiftImage(copies[xi].lastT().map, fxi, "copy:" + fxi.key().str());
    gxi.plus = fxi.plus;
    std::size_t eta = m.pred(xi + 1);
    exits.push_back(exitDescriptor(stages[xi], stages[xi].size() - 1, gxi.key()));
    exits.back().plus = gxi.plus;
    pred.push_back(eta);

    OneStepResult stepS = vOneStep(m.stage(eta), m.stage(xi), fxi);
    OneStepResult stepT = vOneStep(stages[eta], stages[xi], exits.back());
    if (stepS.dropping != stepT.dropping)
      throw MetaError("CopyBroken", "drop pattern not mirrored");

    // copy embedding: the unique one matching the shift-lemma recipe
    std::size_t a0 = stepS.pos.alpha0;
    std::size_t a0star = stepT.pos.alpha0;
    std::vector<std::size_t> uMap(stepS.tree.size());
    for (std::size_t z = 0; z < stepS.tree.size(); ++z) {
      if (z < a0) {
        uMap[z] = copies[xi].u[z];
      } else if (z == a0) {
        uMap[z] = a0star;
      } else {
        bool found = false;
        for (std::size_t q = 0; q < stepS.phi.defined; ++q)
          if (stepS.phi.u[q] == z) {
            uMap[z] = stepT.phi.u[copies[eta].u[q]];
            found = true;
            break;
          }
        if (!found) throw MetaError("CopyBroken", "node outside ran(u) of the step");
      }
    }
    TreeEmbedding lifted = embeddingFromU(stepS.tree, stepT.tree, uMap);
    // mirror a gratuitous cut of the next stage
    std::size_t srcLen = m.stage(xi + 1).size();
    if (srcLen < stepS.tree.size()) {
      std::size_t tgtLen = lifted.v[srcLen - 1] + 1;
      NormalTree cutT = stepT.tree.restrictedTo(tgtLen);
      std::vector<std::size_t> uCut(uMap.begin(), uMap.begin() + srcLen);
      uCut[srcLen - 1] = lifted.v[srcLen - 1];
      TreeEmbedding cutEmb = embeddingFromU(m.stage(xi + 1), cutT, uCut);
      stages.push_back(std::move(cutT));
      copies.push_back(std::move(cutEmb));
    } else {
      stages.push_back(stepT.tree);
      copies.push_back(std::move(lifted));
    }
    if (gamma.isWeak())
      copies.back().weak.assign(copies.back().defined, WeakNode::tagged(tag));
  }
  MetaTree out = MetaTree::fromParts(std::move(stages), std::move(exits), std::move(pred));
  return CopiedMetaTree{std::move(out), std::move(copies)};
}

}  // namespace itree

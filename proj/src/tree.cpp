#include "itree/tree.hpp"

#include <algorithm>
#include <sstream>

namespace itree {

NormalTree::NormalTree(Premouse base) { models_.push_back(std::move(base)); degrees_.push_back(0); }

NormalTree NormalTree::fromParts(std::vector<Premouse> models, std::vector<Extender> exits,
                                 std::vector<std::size_t> pred, std::vector<DropRecord> drops,
                                 std::vector<int> degrees) {
  if (models.empty() || exits.size() + 1 != models.size() || pred.size() != exits.size() ||
      drops.size() != exits.size())
    throw TreeError("BadParts", "component sizes disagree");
  NormalTree t(models.front());
  t.models_ = std::move(models);
  t.exits_ = std::move(exits);
  t.pred_ = std::move(pred);
  t.drops_ = std::move(drops);
  t.degrees_ = degrees.empty() ? std::vector<int>(t.models_.size(), 0) : std::move(degrees);
  return t;
}

std::size_t NormalTree::pred(std::size_t i) const {
  if (i == 0 || i >= size()) throw TreeError("NotTreeRelated", "node 0 has no predecessor");
  return pred_.at(i - 1);
}

bool NormalTree::leq(std::size_t a, std::size_t b) const {
  while (b > a) b = pred(b);
  return a == b;
}

std::vector<std::size_t> NormalTree::branch(std::size_t a, std::size_t b) const {
  std::vector<std::size_t> path;
  std::size_t cur = b;
  while (cur > a) {
    path.push_back(cur);
    cur = pred(cur);
  }
  if (cur != a) throw TreeError("NotTreeRelated", "nodes are not tree-related");
  path.push_back(a);
  std::reverse(path.begin(), path.end());
  return path;
}

bool NormalTree::dropsAlong(std::size_t a, std::size_t b) const {
  auto path = branch(a, b);
  for (std::size_t j = 1; j < path.size(); ++j)
    if (drop(path[j]).dropped) return true;
  return false;
}

std::vector<Extender> NormalTree::branchExtenders(std::size_t a, std::size_t b) const {
  auto path = branch(a, b);
  std::vector<Extender> out;
  for (std::size_t j = 1; j < path.size(); ++j) out.push_back(exits_.at(path[j] - 1));
  return out;
}

PartialShiftMap NormalTree::branchEmbedding(std::size_t a, std::size_t b) const {
  auto path = branch(a, b);
  PartialShiftMap f = PartialShiftMap::identity();
  for (std::size_t j = 1; j < path.size(); ++j) {
    std::size_t node = path[j];
    const DropRecord& d = drop(node);
    if (d.dropped) {
      // restrict to the part of the domain landing in the dropped segment
      Ord bound = 0;
      while (f.map(bound) < d.targetHeight) ++bound;
      f.domainBound = f.domainBound ? std::min(*f.domainBound, bound) : bound;
    }
    f.map = shiftOf(exits_.at(node - 1)).after(f.map);
  }
  return f;
}

Ord NormalTree::lambdaSup(std::size_t a) const {
  Ord s = 0;
  for (std::size_t b = 0; b < a && b < exits_.size(); ++b)
    s = std::max(s, exits_[b].lamEff());
  return s;
}

Ord NormalTree::lambdaSupAlongBranch(std::size_t a) const {
  Ord s = 0;
  for (const auto& e : branchExtenders(0, a)) s = std::max(s, e.lamEff());
  return s;
}

NormalTree NormalTree::restrictedTo(std::size_t len) const {
  if (len == 0 || len > size()) throw TreeError("BadRestriction", "length out of range");
  NormalTree t(models_[0]);
  t.models_.assign(models_.begin(), models_.begin() + len);
  t.exits_.assign(exits_.begin(), exits_.begin() + (len - 1));
  t.pred_.assign(pred_.begin(), pred_.begin() + (len - 1));
  t.drops_.assign(drops_.begin(), drops_.begin() + (len - 1));
  t.degrees_.assign(degrees_.begin(), degrees_.begin() + len);
  return t;
}

bool NormalTree::isPrefixOf(const NormalTree& other) const {
  if (size() > other.size()) return false;
  return *this == other.restrictedTo(size());
}

bool NormalTree::operator==(const NormalTree& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (!(models_[i] == other.models_[i])) return false;
  for (std::size_t i = 0; i + 1 < size(); ++i)
    if (!(exits_[i] == other.exits_[i]) || exits_[i].plus != other.exits_[i].plus)
      return false;
  return pred_ == other.pred_ && drops_ == other.drops_;
}

std::string NormalTree::str() const {
  std::ostringstream os;
  os << "tree[" << size() << "]";
  for (std::size_t i = 0; i + 1 < size(); ++i) {
    os << " " << i << "-" << exits_[i].str() << "->" << (i + 1)
       << "(pred " << pred_[i] << (drops_[i].dropped ? ",drop" : "") << ")";
  }
  return os.str();
}

namespace {

// least eta with crit < lambda-hat of eta's exit; the last node otherwise
std::size_t predByRule(const NormalTree& t, Ord crit, std::size_t limit) {
  for (std::size_t eta = 0; eta + 1 < limit; ++eta)
    if (crit < t.exit(eta).lamHat()) return eta;
  return limit - 1;
}

}  // namespace

Extender exitDescriptor(const NormalTree& t, std::size_t node, const ExtKey& key) {
  const Premouse& m = t.model(node);
  const Extender* e = m.findMinus(key);
  if (!e) throw TreeError("NotOnSequence", key.str() + " is not on the model at node " +
                                               std::to_string(node));
  Extender out = *e;
  out.plus = key.plus;
  return out;
}

NormalTree extendTree(const NormalTree& t, const Extender& f) {
  const Extender* onSeq = t.lastModel().findMinus(f.key());
  if (!onSeq)
    throw TreeError("NotOnSequence", f.str() + " is not on the last model");
  Extender exit = *onSeq;
  exit.plus = f.plus;
  if (!f.provenance.empty()) exit.provenance = f.provenance;
  if (t.exitCount() > 0 && exit.lh() <= t.exit(t.exitCount() - 1).lh())
    throw TreeError("LengthOrderViolation",
                    "exit lh " + std::to_string(exit.lh()) + " not above " +
                        std::to_string(t.exit(t.exitCount() - 1).lh()));
  std::size_t eta = predByRule(t, exit.crit, t.size());
  ApplySegment seg = applicationSegment(t.model(eta), exit);
  NormalTree out = t;
  out.models_.push_back(ultrapower(seg.segment, exit));
  out.exits_.push_back(std::move(exit));
  out.pred_.push_back(eta);
  out.drops_.push_back(DropRecord{seg.dropped, seg.targetHeight});
  out.degrees_.push_back(seg.segment.profile.levels.back().degree);
  return out;
}

Positions positions(const Extender& f, const NormalTree& t) {
  const Extender* target = t.lastModel().findMinus(f.key());
  if (!target) throw TreeError("NotOnSequence", f.str() + " is not on the last model");
  Positions p;
  // alpha: least node carrying the minus part
  std::size_t alpha = t.size() - 1;
  for (std::size_t g = 0; g < t.size(); ++g) {
    const Extender* cand = t.model(g).findMinus(f.key());
    if (cand && *cand == *target) {
      alpha = g;
      break;
    }
  }
  p.alpha = alpha;
  // beta: least node whose exit reaches past crit(f), capped at alpha
  p.beta = alpha;
  for (std::size_t g = 0; g < alpha; ++g)
    if (f.crit < t.exit(g).lamHat()) {
      p.beta = g;
      break;
    }
  // alpha0: first node at or past alpha whose exit out-reaches lh(f)
  p.alpha0 = t.size() - 1;
  for (std::size_t g = alpha; g + 1 < t.size(); ++g) {
    if (f.lh() < t.exit(g).lamHat() || t.exit(g).plus) {
      p.alpha0 = g;
      break;
    }
  }
  return p;
}

TreeReport validateTree(const NormalTree& t, TreeMode mode) {
  auto fail = [](std::string rule, std::size_t node, std::string detail) {
    return TreeReport{false, std::move(rule), node, std::move(detail)};
  };
  std::string why;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!t.model(i).wellFormed(&why)) return fail("model", i, why);

  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const Extender& e = t.exit(i);
    const Extender* seq = t.model(i).findMinus(e.key());
    if (!seq || !(seq->context == e.context))
      return fail("exit-on-sequence", i, "exit is not on its model's sequence");
    if (mode == TreeMode::LambdaTight && e.plus)
      return fail("lambda-tight", i, "plus-type exit");
    if (mode == TreeMode::LambdaSeparated && !e.plus)
      return fail("lambda-separated", i, "non-plus exit");
    if (i > 0) {
      if (mode == TreeMode::QuasiNormal) {
        if (e.lamHat() < t.exit(i - 1).lamHat())
          return fail("lambda-hat-order", i, "lambda-hat decreases");
      } else {
        if (e.lh() <= t.exit(i - 1).lh())
          return fail("lh-order", i, "exit lh not increasing");
      }
    }
  }

  for (std::size_t i = 1; i < t.size(); ++i) {
    const Extender& e = t.exit(i - 1);
    std::size_t eta = predByRule(t, e.crit, i);
    if (t.pred(i) != eta)
      return fail("pred", i, "predecessor " + std::to_string(t.pred(i)) +
                                 " differs from the rule's " + std::to_string(eta));
    ApplySegment seg = applicationSegment(t.model(eta), e);
    if (!(t.drop(i) == DropRecord{seg.dropped, seg.targetHeight}))
      return fail("drop", i, "drop record differs from the longest-segment rule");
    Premouse expect = ultrapower(seg.segment, e);
    if (!(t.model(i) == expect))
      return fail("model-value", i, "model differs from the ultrapower of the segment");
  }

  // agreement: every later model matches below lh of each exit
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    Ord bound = t.exit(i).lh();
    for (std::size_t th = i + 1; th < t.size(); ++th) {
      if (!(t.model(th).extendersBelow(bound) == t.model(i).extendersBelow(bound)))
        return fail("agreement", th, "extender sets differ below lh of exit " +
                                         std::to_string(i));
      std::vector<Level> a, b;
      for (const auto& l : t.model(i).profile.levels)
        if (l.height < bound) a.push_back(l);
      for (const auto& l : t.model(th).profile.levels)
        if (l.height < bound) b.push_back(l);
      if (!sameShape(a, b))
        return fail("agreement", th, "profiles differ below lh of exit " +
                                         std::to_string(i));
    }
  }
  return TreeReport{};
}

}  // namespace itree

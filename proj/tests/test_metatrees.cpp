#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "itree/metatree.hpp"

using namespace itree;

namespace {

Premouse m0() {
  return makeBase("M0", LevelProfile{{Level{12, 12, 0}}},
                  {Extender(2, 4), Extender(3, 6), Extender(5, 8)});
}

NormalTree lin3() {
  NormalTree t(m0());
  t = extendTree(t, Extender(3, 6));   // lh 7
  t = extendTree(t, Extender(2, 7));   // lh 8
  return t;
}

// first extender on the model above the given lh
Extender pickExit(const Premouse& m, Ord minLh) {
  for (const auto& e : m.extenders)
    if (e.lh() > minLh) return e;
  throw std::runtime_error("no extender above the bound");
}

Ord lastExitLh(const MetaTree& m) {
  return m.exitCount() ? m.exit(m.exitCount() - 1).lh() : 0;
}

}  // namespace

TEST_CASE("a normal tree repackages as a simple meta-tree") {
  NormalTree t = lin3();
  MetaTree m = metatreeFromNormalTree(t);
  CHECK(m.size() == t.size());
  CHECK(m.simple());
  MetaReport r = validateMetaTree(m);
  INFO(r.clause, " node ", r.node, " ", r.detail);
  CHECK(r.ok);

  // stage xi+1 equals the one-step normalization of the prior stages
  for (std::size_t i = 1; i < m.size(); ++i) {
    OneStepResult v = vOneStep(m.stage(m.pred(i)), m.stage(i - 1), m.exit(i - 1));
    CHECK(m.stage(i) == v.tree);
  }
  // round trip: the last stage is the tree itself
  CHECK(m.lastTree() == t);
}

TEST_CASE("length-1 round trip") {
  NormalTree t(m0());
  MetaTree m = metatreeFromNormalTree(t);
  CHECK(m.size() == 1);
  CHECK(m.lastTree() == t);
}

TEST_CASE("sandwich violations are caught") {
  NormalTree t = lin3();
  MetaTree m = metatreeFromNormalTree(t);
  // cut a stage below alpha+2
  std::vector<NormalTree> stages;
  std::vector<Extender> exits;
  std::vector<std::size_t> pred;
  std::vector<MetaDrop> drops;
  for (std::size_t i = 0; i < m.size(); ++i) stages.push_back(m.stage(i));
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    exits.push_back(m.exit(i));
    pred.push_back(m.pred(i + 1));
    drops.push_back(m.drop(i + 1));
  }
  stages[2] = stages[2].restrictedTo(1);
  MetaTree bad = MetaTree::fromRawParts(stages, exits, pred, drops);
  MetaReport r = validateMetaTree(bad);
  CHECK(!r.ok);
  CHECK(r.clause == "3b-ii");

  // mutated exit order
  std::swap(exits[0], exits[1]);
  MetaTree bad2 = MetaTree::fromRawParts(stages, exits, pred, drops);
  CHECK(!validateMetaTree(bad2).ok);
}

TEST_CASE("extending a meta-tree with and without a policy") {
  NormalTree t(m0());
  MetaTree m(t);
  MetaTree m1 = extendMetaTree(m, Extender(3, 6));
  CHECK(m1.size() == 2);
  CHECK(m1.simple());
  CHECK(validateMetaTree(m1).ok);

  // a policy cutting at the sandwich floor produces a gratuitous drop when
  // the full stage is longer
  MetaTree m2 = extendMetaTree(m1, Extender(2, 7));
  CHECK(validateMetaTree(m2).ok);
  const NormalTree& full = m2.lastTree();
  if (full.size() >= 2) {
    MetaStrategy pol = MetaStrategy::withTable({{full, full.size() - 2}});
    // only legal when the cut point clears every alpha+1
    std::size_t floor = 0;
    for (std::size_t i = 0; i + 1 < m1.size(); ++i) floor = std::max(floor, m1.alpha(i) + 1);
    if (full.size() - 2 >= floor) {
      MetaTree m2cut = extendMetaTree(m1, Extender(2, 7), &pol);
      CHECK(m2cut.lastTree().size() == full.size() - 1);
      CHECK(!m2cut.simple());
      CHECK(validateMetaTree(m2cut).ok);
    }
  }

  CHECK_THROWS_WITH_AS(extendMetaTree(m1, Extender(2, 4)),
                       doctest::Contains("LengthOrderViolation"), MetaError);
}

TEST_CASE("vee of a two-tree stack is a valid meta-tree") {
  NormalTree t = extendTree(NormalTree(m0()), Extender(3, 6));
  NormalTree u(t.lastModel());
  u = extendTree(u, Extender(2, 7));
  u = extendTree(u, pickExit(u.lastModel(), 8));
  MetaTree vee = veeOf(t, u);
  CHECK(vee.size() == u.size());
  MetaReport r = validateMetaTree(vee);
  INFO(r.clause, " node ", r.node, " ", r.detail);
  CHECK(r.ok);
  CHECK(vee.lastTree() == normalizeStack({t, u}, NormMode::V).tree);
}

TEST_CASE("copying a meta-tree along the identity is the identity") {
  NormalTree t = lin3();
  MetaTree m = metatreeFromNormalTree(t);
  CopiedMetaTree c = copyMetaTree(TreeEmbedding::identity(t.restrictedTo(1)),
                                  metatreeFromNormalTree(t.restrictedTo(1)));
  CHECK(c.tree.size() == 1);

  MetaTree full = metatreeFromNormalTree(t);
  CopiedMetaTree cf = copyMetaTree(TreeEmbedding::identity(t.restrictedTo(1)), full);
  CHECK(cf.tree == full);
}

TEST_CASE("copying commutes with the stage maps") {
  // gamma: one-step embedding of the base tree; lift the vee meta-tree
  NormalTree s = extendTree(NormalTree(m0()), Extender(3, 6));
  NormalTree u(s.lastModel());
  u = extendTree(u, Extender(2, 7));
  MetaTree m = veeOf(s, u);

  OneStepResult inflate = vOneStep(s, s, Extender(2, 7));
  // the embedding must be non-dropping with total last t-map
  REQUIRE(inflate.phi.nonDropping());
  CopiedMetaTree c = copyMetaTree(inflate.phi, m);
  CHECK(c.tree.size() == m.size());
  MetaReport r = validateMetaTree(c.tree);
  INFO(r.clause, " node ", r.node, " ", r.detail);
  CHECK(r.ok);
  CHECK(c.tree.simple() == m.simple());
  // exits are the images under the last t-maps
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    ExtKey img = shiftImage(c.stageCopies[i].lastT().map, m.exit(i).key());
    CHECK(c.tree.exit(i).key() == img);
  }
  // commutation with the stage maps
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    std::size_t eta = m.pred(i + 1);
    TreeEmbedding lhs = compose(m.stepPhi(i + 1), c.stageCopies[i + 1]);
    TreeEmbedding rhs = compose(c.stageCopies[eta], c.tree.stepPhi(i + 1));
    CHECK(lhs.u == rhs.u);
    for (std::size_t k = 0; k < lhs.defined; ++k) {
      CHECK(lhs.s[k] == rhs.s[k]);
      CHECK(lhs.t[k] == rhs.t[k]);
    }
  }
}

TEST_CASE("mv one-step on trivial inputs") {
  NormalTree t = extendTree(NormalTree(m0()), Extender(3, 6));
  MetaTree triv(t);
  MetaTree m = extendMetaTree(triv, Extender(2, 7));
  // S trivial: the result is T|a+1 plus one step
  MvResult r = mvOneStep(triv, m, pickExit(m.lastModel(), lastExitLh(m)));
  CHECK(r.tree.size() >= 2);
  MetaReport rep = validateMetaTree(r.tree);
  INFO(rep.clause, " node ", rep.node, " ", rep.detail);
  CHECK(rep.ok);
  MetaReport er = validateMetaEmbedding(r.embedding);
  INFO(er.clause, " node ", er.node, " ", er.detail);
  CHECK(er.ok);
}

TEST_CASE("mv stack: trivial sides") {
  NormalTree t = extendTree(NormalTree(m0()), Extender(3, 6));
  MetaTree m = extendMetaTree(MetaTree(t), Extender(2, 7));

  // T trivial: U = S
  MetaTree mt(m.lastTree());
  CHECK(mvStack(m, mt) == m);

  // S trivial: U = T
  MetaTree ms(t);
  MetaTree u = mvStack(ms, m);
  CHECK(u == m);
}

TEST_CASE("mv stack composes the main maps") {
  NormalTree t = extendTree(NormalTree(m0()), Extender(3, 6));
  MetaTree s = extendMetaTree(MetaTree(t), Extender(2, 7));
  MetaTree u = extendMetaTree(MetaTree(s.lastTree()),
                              pickExit(s.lastModel(), lastExitLh(s)));
  MetaTree folded = mvStack(s, u);
  MetaReport r = validateMetaTree(folded);
  INFO(r.clause, " node ", r.node, " ", r.detail);
  CHECK(r.ok);
  CHECK(folded.lastTree() == u.lastTree());

  TreeEmbedding lhs = folded.mainMap();
  TreeEmbedding rhs = compose(s.mainMap(), u.mainMap());
  CHECK(lhs.u == rhs.u);
  for (std::size_t k = 0; k < lhs.defined; ++k) CHECK(lhs.t[k] == rhs.t[k]);

  // drop equivalence
  bool stackDrops = (s.size() > 1 && s.dropsAlong(0, s.size() - 1)) ||
                    (u.size() > 1 && u.dropsAlong(0, u.size() - 1));
  bool foldedDrops = folded.size() > 1 && folded.dropsAlong(0, folded.size() - 1);
  CHECK(stackDrops == foldedDrops);
}

TEST_CASE("meta factor of a one-step meta-normalization") {
  NormalTree t = extendTree(NormalTree(m0()), Extender(3, 6));
  MetaTree triv(t);
  MetaTree m = extendMetaTree(triv, Extender(2, 7));
  Extender h = pickExit(m.lastModel(), lastExitLh(m));
  MvResult one = mvOneStep(triv, m, h);
  MetaFactorStep fs = metaFactorOnce(one.embedding);
  CHECK(fs.factor.key() == h.key());
  CHECK(fs.remainder.isIdentity());

  CHECK_THROWS_WITH_AS(metaFactorOnce(MetaTreeEmbedding::identity(m)),
                       doctest::Contains("IdentityEmbedding"), MetaError);
}

TEST_CASE("comparison of equal trees is a zero-step tie") {
  NormalTree t = lin3();
  CompareResult r = compare({t, t}, MetaStrategy::vacuous());
  CHECK(r.verdict.tie);
  CHECK(r.verdict.steps == 0);
}

TEST_CASE("comparison resolves a one-extender disagreement") {
  NormalTree a(m0());
  NormalTree b = extendTree(NormalTree(m0()), Extender(3, 6));
  CompareResult r = compare({a, b}, MetaStrategy::vacuous());
  CHECK(r.verdict.steps <= r.verdict.lhBound);
  // the winning side swallows the other
  const MetaTree& w = r.sides[r.verdict.winner];
  for (const auto& side : r.sides)
    CHECK(side.lastModel().initialSegmentOf(w.lastModel()));
  CHECK(!r.verdict.winnerMainBranchDrops);
  // comparison steps use plus extenders
  for (const auto& side : r.sides)
    for (std::size_t i = 0; i < side.exitCount(); ++i) CHECK(side.exit(i).plus);
}

TEST_CASE("three-way comparison terminates with a non-dropping winner") {
  NormalTree a(m0());
  NormalTree b = extendTree(NormalTree(m0()), Extender(3, 6));
  NormalTree c = extendTree(NormalTree(m0()), Extender(2, 4));
  CompareResult r = compare({a, b, c}, MetaStrategy::vacuous());
  const MetaTree& w = r.sides[r.verdict.winner];
  for (const auto& side : r.sides)
    CHECK(side.lastModel().initialSegmentOf(w.lastModel()));
  CHECK(!r.verdict.winnerMainBranchDrops);
}

TEST_CASE("derived strategies") {
  NormalTree t = lin3();
  MetaTree m = metatreeFromNormalTree(t);

  MetaStrategy all = inducedStrategy([](const NormalTree&) { return true; });
  CHECK(all.accepts(m));
  MetaStrategy none = inducedStrategy(
      [](const NormalTree& tr) { return tr.size() < 2; });
  CHECK(!none.accepts(m));

  MetaStrategy viaId = pullbackStrategy(TreeEmbedding::identity(t.restrictedTo(1)),
                                        inducedStrategy([](const NormalTree&) { return true; }));
  CHECK(viaId.accepts(metatreeFromNormalTree(t.restrictedTo(1))));

  // tail of a meta-tree: accepts a normal tree over the last model when the
  // composed stack is accepted
  auto tail = tailStrategy(m, std::nullopt, MetaStrategy::vacuous());
  NormalTree u(m.lastModel());
  CHECK(tail(u));
  NormalTree wrong(m0());
  CHECK(!tail(wrong));
}

TEST_CASE("lifting a tree embedding between vees") {
  NormalTree s = extendTree(NormalTree(m0()), Extender(3, 6));
  NormalTree u(s.lastModel());
  u = extendTree(u, Extender(2, 7));
  // psi: one-step normalization of u into a longer tree over the same model
  OneStepResult step = vOneStep(u, u, pickExit(u.lastModel(), 8));
  REQUIRE(step.phi.total());
  MetaTreeEmbedding lift = liftTreeEmbedding(s, step.phi);
  MetaReport r = validateMetaEmbedding(lift);
  INFO(r.clause, " node ", r.node, " ", r.detail);
  CHECK(r.ok);

  // the quasi-normalization square per node
  TwoStackData src = twoStackStages(s, u, NormMode::V);
  TwoStackData dst = twoStackStages(s, step.tree, NormMode::V);
  for (std::size_t xi = 0; xi < u.size(); ++xi) {
    ShiftMap lhs = dst.sigmas[lift.u[xi]].after(step.phi.t[xi].map);
    ShiftMap rhs = lift.delta[xi].lastT().map.after(src.sigmas[xi]);
    for (Ord x = 0; x <= 32; ++x) CHECK(lhs(x) == rhs(x));
  }
}

TEST_CASE("stack to normal agrees with the v normalization") {
  NormalTree t = extendTree(NormalTree(m0()), Extender(3, 6));
  NormalTree u(t.lastModel());
  u = extendTree(u, Extender(2, 7));
  StackToNormalResult r = stackToNormal({t, u}, MetaStrategy::vacuous());
  CHECK(r.accepted);
  CHECK(r.tree == normalizeStack({t, u}, NormMode::V).tree);

  StackToNormalResult one = stackToNormal({t}, MetaStrategy::vacuous());
  CHECK(one.tree == t);
}

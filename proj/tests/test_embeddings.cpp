#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "itree/normalize.hpp"

using namespace itree;

namespace {

Premouse m0() {
  return makeBase("M0", LevelProfile{{Level{12, 12, 0}}},
                  {Extender(2, 4), Extender(3, 6), Extender(5, 8)});
}

NormalTree baseTree() { return NormalTree(m0()); }

}  // namespace

TEST_CASE("copy map: identity data") {
  Extender e(2, 4);
  ShiftMap sigma = copyMap(ShiftMap::identity(), ShiftMap::identity(), e, e);
  CHECK(sigma.isIdentity());
}

TEST_CASE("copy map: shifted pair agrees with the composition identity") {
  // phi = pi = shift of an extender with crit above lambda of e
  Extender h(6, 9);
  Extender e(2, 4);
  ShiftMap phi = shiftOf(h);
  Extender f = shiftImage(phi, e);
  ShiftMap sigma = copyMap(phi, phi, e, f);
  // pointwise: sigma o shift(e) = shift(f) o pi over 0..32
  ShiftMap lhs = sigma.after(shiftOf(e));
  ShiftMap rhs = shiftOf(f).after(phi);
  for (Ord x = 0; x <= 32; ++x) CHECK(lhs(x) == rhs(x));
  // below lambda(e) sigma copies phi; beyond it follows the images
  for (Ord x = 0; x < e.lam; ++x) CHECK(sigma(x) == phi(x));
}

TEST_CASE("copy map: plus-type target composes the extra step") {
  Extender e(2, 4);
  Extender f = e.plused();
  ShiftMap sigma = copyMap(ShiftMap::identity(), ShiftMap::identity(), e, f);
  ShiftMap lhs = sigma.after(shiftOf(e));
  ShiftMap rhs = shiftOf(f);
  for (Ord x = 0; x <= 32; ++x) CHECK(lhs(x) == rhs(x));
  CHECK(sigma(e.lam) == e.lam + 1);  // the order-zero bump
  CHECK(!copyMap(ShiftMap::identity(), ShiftMap::identity(), e, f).isIdentity());

  // plus-type e cannot be re-bumped
  CHECK_THROWS_WITH_AS(copyMap(ShiftMap::identity(), ShiftMap::identity(), f, Extender(2, 5, true)),
                       doctest::Contains("ShiftLemmaInapplicable"), EmbeddingError);
}

TEST_CASE("identity embedding validates") {
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  TreeEmbedding id = TreeEmbedding::identity(t);
  EmbeddingReport r = validateEmbedding(id);
  INFO(r.clause, " ", r.detail);
  CHECK(r.ok);
  CHECK(id.isIdentity());
  CHECK(id.nonDropping());
}

TEST_CASE("one-step normalization produces a valid embedding") {
  // S = T = M0 -E2-> M1, F = (2,7,8): the worked example
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  OneStepResult step = wOneStep(t, t, Extender(2, 7));
  CHECK(step.pos.alpha == 1);
  CHECK(step.pos.beta == 0);
  CHECK(!step.dropping);
  CHECK(step.tree.size() == 4);
  CHECK(step.phi.u == std::vector<std::size_t>{2, 3});
  CHECK(step.tree.exit(2).key() == ExtKey{8, 11, false});

  EmbeddingReport r = validateEmbedding(step.phi);
  INFO(r.clause, " node ", r.node, " ", r.detail);
  CHECK(r.ok);
  CHECK(validateTree(step.tree, TreeMode::Normal).ok);

  // sigma factors the last t-map through the new extender
  ShiftMap lhs = step.sigma.after(shiftOf(Extender(2, 7)));
  for (Ord x = 0; x <= 32; ++x) CHECK(lhs(x) == step.phi.lastT().map(x));
}

TEST_CASE("dropping case cuts the tree and the embedding") {
  Premouse m = makeBase("M", LevelProfile{{Level{6, 3, 0}, Level{12, 12, 0}}},
                        {Extender(1, 3), Extender(4, 9)});
  NormalTree t(m);
  // F with crit 4 must drop to the level at 6
  OneStepResult step = wOneStep(t, t, Extender(4, 9));
  CHECK(step.dropping);
  CHECK(step.tree.size() == 2);
  CHECK(step.phi.defined == 1);
  CHECK(step.phi.u[0] == 1);
  CHECK(step.sigma.isIdentity());
  CHECK(!step.phi.t[0].total());
}

TEST_CASE("mutating u off the branch breaks clause 3b or the shape") {
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  OneStepResult step = wOneStep(t, t, Extender(2, 7));
  TreeEmbedding bad = step.phi;
  bad.u[0] = 1;  // off the image branch
  EmbeddingReport r = validateEmbedding(bad);
  CHECK(!r.ok);
}

TEST_CASE("v one-step agrees with w when nothing is plus-typed") {
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  OneStepResult w = wOneStep(t, t, Extender(2, 7));
  OneStepResult v = vOneStep(t, t, Extender(2, 7));
  CHECK(w.pos.alpha0 == w.pos.alpha);
  CHECK(w.tree == v.tree);
  CHECK(w.phi.u == v.phi.u);
}

TEST_CASE("x one-step: tree matches w, tags and provenance differ") {
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  XOneStepResult x = xOneStep(t, t, Extender(2, 7));
  CHECK(x.tree == x.w.tree);
  CHECK(x.psi.isWeak());
  CHECK(x.psi.weak[0].tag == CaseTag::X);
  CHECK(x.gamma.isWeak());
  CHECK(x.gamma.weak[0].tag == CaseTag::W);
  // provenance distinguishes the two routes while the attributes agree
  CHECK(x.tree.exit(2).key() == x.w.tree.exit(2).key());
  CHECK(x.tree.exit(2).provenance != x.w.tree.exit(2).provenance);

  // Gamma o Psi = Phi^W componentwise
  TreeEmbedding comp = compose(x.psi, x.gamma);
  CHECK(comp.u == x.w.phi.u);
  CHECK(comp.v == x.w.phi.v);
  for (std::size_t i = 0; i < comp.defined; ++i) {
    CHECK(comp.s[i] == x.w.phi.s[i]);
    CHECK(comp.t[i] == x.w.phi.t[i]);
  }
  // sigma^W is the last t-map of Gamma
  CHECK(x.gamma.lastT().map == x.w.sigma);

  // last model of X equals the last model of the stack
  Premouse stackLast = ultrapower(t.lastModel(), *t.lastModel().extenderAt(8));
  CHECK(x.tree.lastModel() == stackLast);

  // the exchange identity at the first new node, spelled out
  Premouse viaStack = ultrapower(ultrapower(t.model(0), *t.model(0).extenderAt(7)),
                                 *t.lastModel().extenderAt(8));
  Extender img = shiftImage(shiftOf(*t.lastModel().extenderAt(8)), *t.model(0).extenderAt(7));
  Premouse uf = ultrapower(t.model(0), *t.lastModel().extenderAt(8));
  img.context = uf.extendersBelow(img.lh());
  Premouse viaX = ultrapower(uf, img);
  CHECK(viaStack == viaX);

  // the kernel oracle instance on the base model
  std::string why;
  CHECK(exchangeCheck(t.model(0), Extender(2, 4), Extender(5, 8), &why));
}

TEST_CASE("factor a one-step embedding back out") {
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  OneStepResult step = vOneStep(t, t, Extender(2, 7));
  FactorStep fs = factorOnce(step.phi);
  CHECK(fs.factor.key() == ExtKey{2, 7, false});
  CHECK(fs.remainder.isIdentity());

  CHECK_THROWS_WITH_AS(factorOnce(TreeEmbedding::identity(t)),
                       doctest::Contains("IdentityEmbedding"), EmbeddingError);
}

TEST_CASE("factorize round-trips and characterizes similarity") {
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  OneStepResult step = vOneStep(t, t, Extender(2, 7));
  CHECK(isInflationary(step.phi));
  Factorization f = factorize(step.phi);
  REQUIRE(f.factors.size() == 1);
  CHECK(f.factors[0].key() == ExtKey{2, 7, false});
  TreeEmbedding back = f.reassemble();
  CHECK(back.u == step.phi.u);
  for (std::size_t i = 0; i < back.defined; ++i) CHECK(back.t[i] == step.phi.t[i]);

  // identity factors into nothing
  Factorization idf = factorize(TreeEmbedding::identity(t));
  CHECK(idf.factors.empty());

  CHECK(similar(step.phi, step.phi));
}

TEST_CASE("similarity fails across diverging targets") {
  // one-step embeddings from a common source whose targets diverge are
  // dissimilar: the branch extender lists into the two targets differ.
  // (Unlike raw extenders, the descriptors here carry their coherence
  // contexts, so diverging targets cannot share a literal factor.)
  NormalTree s = baseTree();
  NormalTree t1 = extendTree(baseTree(), Extender(3, 6));  // lh 7
  NormalTree t2 = extendTree(baseTree(), Extender(5, 8));  // lh 9
  OneStepResult a = vOneStep(s, t1, Extender(2, 7));   // on t1's last model
  OneStepResult b = vOneStep(s, t2, Extender(3, 9));   // on t2's last model
  CHECK(!similar(a.phi, b.phi));
  CHECK(similar(a.phi, a.phi));
}

TEST_CASE("two-step stack normalization validates") {
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  // second tree on t's last model: two nodes
  NormalTree u(t.lastModel());
  u = extendTree(u, Extender(2, 7));
  StackResult r = normalizeStack({t, u}, NormMode::V);
  CHECK(validateTree(r.tree, TreeMode::Normal).ok);
  CHECK(r.tree.size() == 4);

  StackResult x = normalizeStack({t, u}, NormMode::X);
  CHECK(validateTree(x.tree, TreeMode::Normal).ok);
  CHECK(x.tree.lastModel() == u.lastModel());
}

TEST_CASE("trivial stacks normalize to themselves") {
  NormalTree t = extendTree(baseTree(), Extender(3, 6));
  NormalTree triv(t.lastModel());
  for (NormMode mode : {NormMode::W, NormMode::V, NormMode::X}) {
    StackResult r = normalizeStack({t, triv}, mode);
    CHECK(r.tree == t);
  }
}

TEST_CASE("direct limits of finite systems") {
  NormalTree t = baseTree();
  OneStepResult step = vOneStep(t, t, Extender(3, 6));

  DirectedTreeSystem d;
  d.trees = {t, step.tree};
  d.leq = {{true, true}, {false, true}};
  d.maps.emplace(std::make_pair(0, 0), TreeEmbedding::identity(t));
  d.maps.emplace(std::make_pair(1, 1), TreeEmbedding::identity(step.tree));
  d.maps.emplace(std::make_pair(0, 1), step.phi);
  DirectLimit lim = directLimit(d);
  CHECK(lim.tree == step.tree);
  CHECK(lim.topIndex == 1);
  CHECK(lim.limbs[0].u == step.phi.u);

  // singleton
  DirectedTreeSystem single;
  single.trees = {t};
  single.leq = {{true}};
  single.maps.emplace(std::make_pair(0, 0), TreeEmbedding::identity(t));
  DirectLimit lone = directLimit(single);
  CHECK(lone.tree == t);
}

TEST_CASE("three-element diamond has a unique mediator") {
  NormalTree t = baseTree();
  OneStepResult s1 = vOneStep(t, t, Extender(3, 6));
  OneStepResult s2 = vOneStep(s1.tree, s1.tree, Extender(2, 7));
  TreeEmbedding toTop = compose(s1.phi, s2.phi);

  DirectedTreeSystem d;
  d.trees = {t, s1.tree, s2.tree};
  d.leq = {{true, true, true}, {false, true, true}, {false, false, true}};
  d.maps.emplace(std::make_pair(0, 0), TreeEmbedding::identity(t));
  d.maps.emplace(std::make_pair(1, 1), TreeEmbedding::identity(s1.tree));
  d.maps.emplace(std::make_pair(2, 2), TreeEmbedding::identity(s2.tree));
  d.maps.emplace(std::make_pair(0, 1), s1.phi);
  d.maps.emplace(std::make_pair(1, 2), s2.phi);
  d.maps.emplace(std::make_pair(0, 2), toTop);
  DirectLimit lim = directLimit(d);
  CHECK(lim.tree == s2.tree);
  // mediating map into the top is the limb itself
  CHECK(lim.limbs[0].u == toTop.u);

  // breaking coherence is caught
  DirectedTreeSystem bad = d;
  bad.maps.erase({0, 2});
  bad.maps.emplace(std::make_pair(0, 2), compose(s1.phi, s2.phi));
  bad.maps.at({0, 2}).u[0] = 0;
  CHECK_THROWS_WITH_AS(directLimit(bad), doctest::Contains("IncoherentSystem"),
                       EmbeddingError);
}

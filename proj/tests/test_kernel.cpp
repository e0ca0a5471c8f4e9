#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "itree/premouse.hpp"

using namespace itree;

namespace {

Premouse m0() {
  return makeBase("M0", LevelProfile{{Level{12, 12, 0}}},
                  {Extender(2, 4), Extender(3, 6), Extender(5, 8)});
}

std::vector<ExtKey> keysOf(const Premouse& m) {
  std::vector<ExtKey> ks;
  for (const auto& e : m.extenders) ks.push_back(e.key());
  return ks;
}

}  // namespace

TEST_CASE("shift map basics") {
  ShiftMap f = ShiftMap::translation(2, 3);
  CHECK(f(0) == 0);
  CHECK(f(1) == 1);
  CHECK(f(2) == 5);
  CHECK(f(7) == 10);
  CHECK(f.identityBelow(2));
  CHECK(!f.identityBelow(3));
  CHECK(*f.preimage(5) == 2);
  CHECK(!f.preimage(3).has_value());  // gap [2,5)

  ShiftMap g = ShiftMap::translation(4, 2);
  ShiftMap gf = g.after(f);
  for (Ord x = 0; x < 40; ++x) CHECK(gf(x) == g(f(x)));

  // composing translations stays in the family and keeps monotonicity
  ShiftMap h = f.after(g);
  Ord prev = -1;
  for (Ord x = 0; x < 40; ++x) {
    CHECK(h(x) > prev);
    prev = h(x);
  }
}

TEST_CASE("shift of an extender") {
  Extender e(2, 4);
  ShiftMap f = shiftOf(e);
  CHECK(f(1) == 1);
  CHECK(f(3) == 5);

  Extender ep = e.plused();
  ShiftMap fp = shiftOf(ep);
  CHECK(fp(3) == 6);
  CHECK(fp(1) == 1);
}

TEST_CASE("ultrapower of the sample model") {
  Premouse m = m0();
  const Extender* e2 = m.extenderAt(7);
  REQUIRE(e2 != nullptr);
  Premouse r = ultrapower(m, *e2);
  CHECK(r.o() == 15);
  std::vector<ExtKey> expect = {
      {2, 4, false}, {2, 7, false}, {6, 9, false}, {8, 11, false}};
  CHECK(keysOf(r) == expect);
  std::string why;
  CHECK(r.wellFormed(&why));

  // coherence: everything below lh(e2) is the context of e2
  CHECK(r.extendersBelow(7) == e2->context);
}

TEST_CASE("extenders below crit survive verbatim") {
  Premouse m = m0();
  const Extender* e3 = m.extenderAt(9);  // crit 5
  REQUIRE(e3 != nullptr);
  Premouse r = ultrapower(m, *e3);
  CHECK(*r.extenderAt(5) == *m.extenderAt(5));
  CHECK(*r.extenderAt(7) == *m.extenderAt(7));
}

TEST_CASE("ultrapower preconditions") {
  Premouse m = m0();
  Extender bad(2, 4);
  bad.context.push_back(Extender(0, 1));  // claims (0,1,2) through crit; m disagrees
  rebuildContexts(bad.context);
  CHECK_THROWS_WITH_AS(ultrapower(m, bad), doctest::Contains("DomainMismatch"),
                       KernelError);

  Premouse proj = makeBase("P", LevelProfile{{Level{12, 3, 0}}}, {Extender(5, 8)});
  CHECK_THROWS_WITH_AS(ultrapower(proj, Extender(5, 8)),
                       doctest::Contains("DropRequired"), KernelError);
}

TEST_CASE("exchange law over all descriptor pairs") {
  // Both routes of the two-application pattern agree: as composite shift
  // maps, as model content, and as normalized history terms. Checked by
  // brute force over every pair of sequence extenders with attributes <= 12.
  for (Ord cF = 0; cF <= 12; ++cF)
    for (Ord lF = cF + 1; lF + 1 <= 12; ++lF)
      for (Ord cG = cF; cG <= 12; ++cG)
        for (Ord lG = cG + 1; lG + 1 <= 12; ++lG) {
          Extender f(cF, lF), g(cG, lG);
          ShiftMap sf = shiftOf(f), sg = shiftOf(g);
          Extender gImage = shiftImage(sf, g);
          ShiftMap left = sf.after(sg);               // g first, then f
          ShiftMap right = shiftOf(gImage).after(sf); // f first, then image of g
          for (Ord x = 0; x <= 32; ++x) CHECK(left(x) == right(x));
        }

  // model-level instance from the sample model
  Premouse m = m0();
  Extender f = *m.extenderAt(5);  // crit 2
  Extender g = *m.extenderAt(9);  // crit 5
  Premouse viaG = ultrapower(ultrapower(m, g), f);
  Extender gImg = shiftImage(shiftOf(f), g);
  Premouse uf = ultrapower(m, f);
  gImg.context = uf.extendersBelow(gImg.lh());
  Premouse viaF = ultrapower(uf, gImg);
  CHECK(viaG.history == viaF.history);
  CHECK(viaG.contentEquals(viaF));
}

TEST_CASE("exchange law across every legal pattern on the sample model") {
  Premouse m = m0();
  for (const Extender& f : m.extenders)
    for (const Extender& g : m.extenders) {
      if (f.crit > g.crit) continue;
      if (f.lh() >= g.lh()) continue;
      ApplySegment segG = applicationSegment(m, g);
      Premouse ug = ultrapower(segG.segment, g);
      const Extender* fInUg = ug.findMinus(f.key());
      if (!fInUg) continue;
      ApplySegment segF2 = applicationSegment(ug, *fInUg);
      Premouse left = ultrapower(segF2.segment, *fInUg);

      ApplySegment segF = applicationSegment(m, f);
      Premouse uf = ultrapower(segF.segment, f);
      Extender gImg = shiftImage(shiftOf(f), g);
      gImg.context = uf.extendersBelow(gImg.lh());
      ApplySegment segG2 = applicationSegment(uf, gImg);
      Premouse right = ultrapower(segG2.segment, gImg);

      CHECK(left.history == right.history);
      CHECK(left.contentEquals(right));
    }
}

TEST_CASE("dropdown sequence examples") {
  Premouse q = makeBase(
      "Q",
      LevelProfile{{Level{4, 4, 0}, Level{6, 3, 0}, Level{8, 5, 0}, Level{10, 2, 0}}},
      {});
  Dropdown d = dropdownSequence(q, 4);
  CHECK(d.heights == std::vector<Ord>{4, 6, 10});
  CHECK(d.kappas == std::vector<Ord>{4, 3, 2});
  CHECK(d.n() == 2);

  // no higher level projects strictly lower
  Premouse q2 = makeBase("Q2", LevelProfile{{Level{4, 2, 0}, Level{10, 7, 0}}}, {});
  Dropdown d2 = dropdownSequence(q2, 4);
  CHECK(d2.heights == std::vector<Ord>{4});
  CHECK(d2.n() == 0);

  // strictly decreasing projecta: every level joins the chain
  Premouse q3 = makeBase(
      "Q3", LevelProfile{{Level{4, 4, 0}, Level{6, 3, 0}, Level{8, 2, 0}, Level{10, 1, 0}}},
      {});
  Dropdown d3 = dropdownSequence(q3, 4);
  CHECK(d3.n() == 3);
  CHECK(d3.heights == std::vector<Ord>{4, 6, 8, 10});

  CHECK_THROWS_WITH_AS(dropdownSequence(q, 5), doctest::Contains("NotAnInitialSegment"),
                       KernelError);
  CHECK_THROWS_WITH_AS(dropdownSequence(q, 10), doctest::Contains("NotAnInitialSegment"),
                       KernelError);
}

TEST_CASE("dropdown image check: identity and exact maps") {
  Premouse q = makeBase(
      "Q",
      LevelProfile{{Level{4, 4, 0}, Level{6, 3, 0}, Level{8, 5, 0}, Level{10, 2, 0}}},
      {});
  ShiftMap id = ShiftMap::identity();
  id.setMapClass(MapClass::Exact);
  CheckReport r = dropdownImageCheck(id, q, q, 4);
  CHECK(r.ok);

  // exact translation: image profile is the pointwise image
  ShiftMap pi = ShiftMap::translation(5, 4, MapClass::Exact);
  Premouse x = makeBase(
      "X",
      LevelProfile{{Level{4, 4, 0}, Level{10, 3, 0}, Level{12, 9, 0}, Level{14, 2, 0}}},
      {});
  CheckReport r2 = dropdownImageCheck(pi, q, x, 4);
  CHECK(r2.ok);
  CHECK(dropdownSequence(x, 4).n() == dropdownSequence(q, 4).n());
}

TEST_CASE("dropdown image check: nearly elementary map can grow n by one") {
  // kappa_n equals the projectum of the whole model; a nearly elementary map
  // whose top projectum lands strictly inside the image interval adds a stage.
  Premouse q = makeBase("Q", LevelProfile{{Level{4, 4, 0}, Level{6, 3, 0}, Level{9, 3, 0}}}, {});
  Dropdown dq = dropdownSequence(q, 4);
  CHECK(dq.n() == 1);
  CHECK(dq.kappas.back() == q.rhoMinus());

  ShiftMap pi = ShiftMap::translation(3, 5, MapClass::NearlyElementary);
  // proper levels move exactly; the top projectum lands in [sup pi``3, pi(3))
  Premouse x = makeBase("X", LevelProfile{{Level{9, 9, 0}, Level{11, 8, 0}, Level{14, 4, 0}}}, {});
  CheckReport r = dropdownImageCheck(pi, q, x, 4);
  CHECK(r.ok);
  CHECK(dropdownSequence(x, pi(4)).n() == 2);

  // the same data declared exact must be rejected
  ShiftMap piExact = pi;
  piExact.setMapClass(MapClass::Exact);
  CheckReport r2 = dropdownImageCheck(piExact, q, x, 4);
  CHECK(!r2.ok);
  CHECK(r2.clause == "exact");
}

TEST_CASE("concrete resolutions are trivial") {
  Premouse m = m0();
  Extender f(2, 4);
  f.context = m.extendersBelow(5);
  Resolution r = buildResolution(m, 7, f);  // cut at the lh-7 extender
  CHECK(r.etas.size() == static_cast<std::size_t>(r.n) + 1);
  for (std::size_t i = 1; i < r.etas.size(); ++i) CHECK(r.etas[i] == r.etas[0]);
  for (const auto& st : r.stages) CHECK(st.sigma.isIdentity());

  Premouse big = ultrapower(m, f);
  CheckReport c = resolutionCheck(ShiftMap::identity(), big, r.etas.front(),
                                  r.etas.back(), r);
  CHECK(c.ok);
}

TEST_CASE("declared resolution with one strict stage") {
  // the first stage replaces its level by a longer one with a different
  // projectum; the second stage is stationary
  Premouse n = makeBase(
      "N",
      LevelProfile{{Level{5, 5, 0}, Level{6, 4, 0}, Level{9, 6, 0}, Level{12, 2, 0}}},
      {});
  std::vector<Ord> etas = {5, 7, 7};
  Resolution r = resolutionFromEtas(n, etas);
  CHECK(r.n == 2);
  CHECK(r.etas == etas);
  ShiftMap sigma = r.composite();
  CheckReport c = resolutionCheck(sigma, n, 5, 7, r);
  CHECK(c.ok);
  CHECK(sigma(5) == 7);

  // eta determinacy: rebuilding from the same eta list gives the same value
  Resolution r2 = resolutionFromEtas(n, etas);
  CHECK(r2.composite() == r.composite());
  for (int i = 0; i <= r.n; ++i) CHECK(r.stages[i].b == r2.stages[i].b);

  // exhaustive search: the eta list is the only one that fits sigma
  int hits = 0;
  for (Ord e2 = 5; e2 <= 7; ++e2)
    for (Ord e3 = e2; e3 <= 7; ++e3) {
      std::vector<Ord> cand = {5, e2, e3};
      if (cand.back() != 7) continue;
      try {
        Resolution rc = resolutionFromEtas(n, cand);
        if (resolutionCheck(sigma, n, 5, 7, rc).ok) ++hits;
      } catch (const KernelError&) {
      }
    }
  CHECK(hits == 1);
}

TEST_CASE("resolution mutations are caught") {
  Premouse n = makeBase(
      "N",
      LevelProfile{{Level{5, 5, 0}, Level{6, 4, 0}, Level{9, 6, 0}, Level{12, 2, 0}}},
      {});
  std::vector<Ord> etas = {5, 7, 7};
  Resolution r = resolutionFromEtas(n, etas);
  ShiftMap sigma = r.composite();

  Resolution bad = r;
  bad.stages[1].b[1].rho = bad.stages[0].b[0].rho + 1;  // gamma^{2}_{2} >= gamma^1_1
  CheckReport c = resolutionCheck(sigma, n, 5, 7, bad);
  CHECK(!c.ok);

  Resolution bad2 = r;
  bad2.stages[0].sigma = ShiftMap::translation(4, 1);
  CheckReport c2 = resolutionCheck(sigma, n, 5, 7, bad2);
  CHECK(!c2.ok);
  CHECK(c2.clause == "composition");
}

TEST_CASE("segments and application segments") {
  Premouse m = makeBase("M", LevelProfile{{Level{6, 3, 0}, Level{12, 12, 0}}},
                        {Extender(1, 3), Extender(4, 9)});
  // crit 4 sits at or above the projectum of the level at 6: necessary drop
  Extender f(4, 9);
  f.context = m.extendersBelow(10);
  ApplySegment seg = applicationSegment(m, f);
  CHECK(seg.dropped);
  CHECK(seg.targetHeight == 6);
  CHECK(seg.segment.o() == 6);
  CHECK(seg.segment.rhoMinus() == 3);  // the declared projectum survives
  CHECK(seg.segment.appRho() == 6);    // but the application sees the top

  // crit below every projectum: no drop
  Extender g(1, 3);
  g.context = m.extendersBelow(4);
  ApplySegment seg2 = applicationSegment(m, g);
  CHECK(!seg2.dropped);
  CHECK(seg2.segment == m);

  // cutting at a non-level height gives a passive top
  Premouse cut = segmentOf(m, 9);
  CHECK(cut.o() == 9);
  CHECK(cut.rhoMinus() == 9);
  CHECK(cut.extenders.size() == 1);  // lh 10 sits above the cut
}

TEST_CASE("history terms identify models") {
  Premouse m = m0();
  Extender e2 = *m.extenderAt(7);
  Premouse a = ultrapower(m, e2);
  Premouse b = ultrapower(m, e2);
  CHECK(a == b);
  CHECK(a.history.str() == b.history.str());
  Premouse c = ultrapower(m, *m.extenderAt(5));
  CHECK(!(a == c));
}

#include "itree/metatree.hpp"

#include <algorithm>

namespace itree {

namespace {

bool sameTreeEmbedding(const TreeEmbedding& a, const TreeEmbedding& b) {
  if (!(a.source == b.source) || !(a.target == b.target) || a.defined != b.defined)
    return false;
  for (std::size_t i = 0; i < a.defined; ++i)
    if (a.v[i] != b.v[i] || a.u[i] != b.u[i] || !(a.s[i] == b.s[i]) || !(a.t[i] == b.t[i]))
      return false;
  return true;
}

// least xi such that h's minus part is on the last model of stage xi, with
// the same descriptor that the last stage carries
std::size_t metaAlpha(const MetaTree& t, const Extender& h) {
  const Extender* target = t.lastModel().findMinus(h.key());
  if (!target) throw MetaError("NotOnSequence", h.str() + " is not on the last model");
  for (std::size_t xi = 0; xi < t.size(); ++xi) {
    const Extender* cand = t.stage(xi).lastModel().findMinus(h.key());
    if (cand && *cand == *target) return xi;
  }
  return t.size() - 1;
}

std::size_t metaBeta(const MetaTree& t, const Extender& h) {
  for (std::size_t xi = 0; xi + 1 < t.size(); ++xi)
    if (h.crit < t.exit(xi).lh()) return xi;
  return t.size() - 1;
}

}  // namespace

bool MetaTreeEmbedding::isIdentity() const {
  if (source.size() != target.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != i || u[i] != i) return false;
  return source == target;
}

MetaTreeEmbedding MetaTreeEmbedding::identity(const MetaTree& m) {
  MetaTreeEmbedding d(m, m);
  for (std::size_t i = 0; i < m.size(); ++i) {
    d.v.push_back(i);
    d.u.push_back(i);
    d.gamma.push_back(TreeEmbedding::identity(m.stage(i)));
    d.delta.push_back(TreeEmbedding::identity(m.stage(i)));
  }
  return d;
}

MetaReport validateMetaEmbedding(const MetaTreeEmbedding& d) {
  auto fail = MetaReport::fail;
  const MetaTree& S = d.source;
  const MetaTree& T = d.target;
  std::size_t n = S.size();
  if (d.v.size() != n || d.u.size() != n || d.gamma.size() != n || d.delta.size() != n)
    return fail("shape", 0, "component counts disagree");

  for (std::size_t xi = 0; xi < n; ++xi) {
    std::size_t vExpect = 0;
    for (std::size_t eta = 0; eta < xi; ++eta) vExpect = std::max(vExpect, d.u[eta] + 1);
    if (d.v[xi] != vExpect) return fail("1", xi, "v(xi) is not sup u(eta)+1");
    if (d.v[xi] >= T.size() || d.u[xi] >= T.size()) return fail("1", xi, "image out of range");
    if (!T.leq(d.v[xi], d.u[xi])) return fail("1", xi, "v(xi) not tree-below u(xi)");
    for (std::size_t eta = 0; eta < xi; ++eta)
      if (S.leq(eta, xi) && !T.leq(d.v[eta], d.v[xi]))
        return fail("1", xi, "v does not preserve the meta tree order");
  }
  if (!d.gamma[0].isIdentity()) return fail("2a", 0, "Gamma_0 is not the identity");
  for (std::size_t xi = 0; xi < n; ++xi) {
    if (!(d.gamma[xi].source == S.stage(xi)) ||
        !(d.gamma[xi].target == T.stage(d.v[xi])))
      return fail("2a", xi, "Gamma_xi endpoints are wrong");
    EmbeddingReport r = validateEmbedding(d.gamma[xi]);
    if (!r.ok) return fail("2a", xi, "Gamma_xi invalid: " + r.clause + " " + r.detail);
    for (std::size_t eta = 0; eta < xi; ++eta) {
      if (!S.leq(eta, xi)) continue;
      TreeEmbedding lhs = compose(d.gamma[eta], T.stageMap(d.v[eta], d.v[xi]));
      TreeEmbedding rhs = compose(S.stageMap(eta, xi), d.gamma[xi]);
      if (!sameTreeEmbedding(lhs, rhs))
        return fail("2b", xi, "Gamma does not commute with the stage maps");
    }
    TreeEmbedding expectDelta = compose(d.gamma[xi], T.stageMap(d.v[xi], d.u[xi]));
    if (!sameTreeEmbedding(expectDelta, d.delta[xi]))
      return fail("2c", xi, "Delta_xi differs from the stage-map composite");
  }
  for (std::size_t xi = 0; xi + 1 < n; ++xi) {
    const Extender& f = S.exit(xi);
    ExtKey img = shiftImage(d.delta[xi].lastT().map, f.key());
    if (d.u[xi] >= T.exitCount()) return fail("3a", xi, "no meta-exit at u(xi)");
    if (!(T.exit(d.u[xi]).key() == img))
      return fail("3a", xi, "meta-exit at u(xi) is not the Delta image");
    std::size_t eta = S.pred(xi + 1);
    std::size_t etaStar = T.pred(d.u[xi] + 1);
    if (!T.leq(d.v[eta], etaStar) || !T.leq(etaStar, d.u[eta]))
      return fail("3b", xi, "meta predecessor off [v(eta), u(eta)]");
    if (!d.gamma[xi + 1].agreesUpTo(d.delta[xi], S.alpha(xi) + 1))
      return fail("3c", xi, "Gamma_{xi+1} does not agree with Delta_xi through alpha+1");
    if (d.gamma[xi + 1].defined <= S.alpha(xi) ||
        d.gamma[xi + 1].u[S.alpha(xi)] != T.alpha(d.u[xi]))
      return fail("3d", xi, "u of Gamma_{xi+1} misses alpha* at alpha");
  }
  return MetaReport{};
}

MvResult mvOneStep(const MetaTree& s, const MetaTree& t, const Extender& hIn) {
  Extender h = exitDescriptor(t.lastTree(), t.lastTree().size() - 1, hIn.key());
  h.plus = hIn.plus;
  std::size_t a = metaAlpha(t, h);
  std::size_t b = metaBeta(t, h);
  if (b >= s.size() || !(s.restrictedTo(b + 1) == t.restrictedTo(b + 1)))
    throw MetaError("AgreementHypothesisFailure",
                    "meta-trees disagree through b = " + std::to_string(b));
  if (b + 1 < s.size() && !(h.crit < s.exit(b).lh()))
    throw MetaError("AgreementHypothesisFailure", "dom(H) reaches past lh of S's exit at b");

  std::vector<NormalTree> stages;
  std::vector<Extender> exits;
  std::vector<std::size_t> pred;
  for (std::size_t i = 0; i <= a; ++i) {
    stages.push_back(t.stage(i));
    if (i < a) {
      exits.push_back(t.exit(i));
      pred.push_back(t.pred(i + 1));
    }
  }
  exits.push_back(h);

  std::vector<TreeEmbedding> deltas;  // Delta_xi for xi >= b
  for (std::size_t xi = b; xi < s.size(); ++xi) {
    OneStepResult step = vOneStep(s.stage(xi), t.stage(a), h);
    stages.push_back(step.tree);
    deltas.push_back(step.phi);
    if (xi + 1 < s.size()) {
      Extender fs = s.exit(xi);
      Extender img = shiftImage(step.phi.lastT().map, fs, "mv:" + fs.key().str());
      img.plus = fs.plus;
      Extender onSeq = exitDescriptor(step.tree, step.tree.size() - 1, img.key());
      onSeq.plus = img.plus;
      exits.push_back(onSeq);
    }
  }
  auto uOf = [&](std::size_t xi) { return xi < b ? xi : a + 1 + (xi - b); };
  // predecessors of the new nodes by the meta rule
  for (std::size_t xi = b; xi < s.size(); ++xi) {
    std::size_t node = uOf(xi);
    if (node == 0) continue;
    std::size_t eta = 0;
    while (eta + 1 < node && !(exits[eta].lamEff() > exits[node - 1].crit)) ++eta;
    pred.push_back(eta);
  }
  MetaTree vee = MetaTree::fromParts(std::move(stages), std::move(exits), std::move(pred));

  MetaTreeEmbedding emb(s, vee);
  for (std::size_t xi = 0; xi < s.size(); ++xi) {
    emb.u.push_back(uOf(xi));
    emb.v.push_back(xi == 0 ? 0 : emb.u[xi - 1] + 1);
    if (xi < b) {
      emb.gamma.push_back(TreeEmbedding::identity(s.stage(xi)));
      emb.delta.push_back(TreeEmbedding::identity(s.stage(xi)));
    } else if (xi == b) {
      emb.gamma.push_back(TreeEmbedding::identity(s.stage(b)));
      emb.delta.push_back(deltas[0]);
    } else {
      emb.gamma.push_back(deltas[xi - b]);
      emb.delta.push_back(deltas[xi - b]);
    }
  }
  return MvResult{std::move(vee), std::move(emb)};
}

MetaTree mvStack(const MetaTree& s, const MetaTree& t) {
  if (!(t.stage(0) == s.lastTree()))
    throw MetaError("NotAStack", "second meta-tree does not sit on the first's last tree");
  std::vector<MetaTree> rounds = {s};
  for (std::size_t xi = 0; xi + 1 < t.size(); ++xi) {
    std::size_t eta = t.pred(xi + 1);
    MvResult r = mvOneStep(rounds[eta], rounds[xi], t.exit(xi));
    MetaTree next = r.tree;
    // mirror a gratuitous cut of t's next stage
    if (t.drop(xi + 1).gratuitous()) {
      if (!(t.stage(xi + 1).isPrefixOf(next.lastTree())))
        throw MetaError("NotAStack", "gratuitous cut cannot be mirrored");
      std::vector<NormalTree> stages;
      std::vector<Extender> exits;
      std::vector<std::size_t> pred;
      for (std::size_t i = 0; i < next.size(); ++i) stages.push_back(next.stage(i));
      for (std::size_t i = 0; i + 1 < next.size(); ++i) {
        exits.push_back(next.exit(i));
        pred.push_back(next.pred(i + 1));
      }
      stages.back() = t.stage(xi + 1);
      next = MetaTree::fromParts(std::move(stages), std::move(exits), std::move(pred));
    }
    if (!(next.lastTree() == t.stage(xi + 1)))
      throw MetaError("NotAStack", "round does not reproduce the stack's stage");
    rounds.push_back(std::move(next));
  }
  return rounds.back();
}

namespace {

MetaTreeEmbedding metaCompose(const MetaTreeEmbedding& phi, const MetaTreeEmbedding& psi) {
  MetaTreeEmbedding out(phi.source, psi.target);
  for (std::size_t i = 0; i < phi.v.size(); ++i) {
    out.v.push_back(psi.v[phi.v[i]]);
    out.u.push_back(psi.u[phi.u[i]]);
    out.gamma.push_back(compose(phi.gamma[i], psi.gamma[phi.v[i]]));
    out.delta.push_back(compose(phi.delta[i], psi.delta[phi.u[i]]));
  }
  return out;
}

bool sameMetaEmbedding(const MetaTreeEmbedding& a, const MetaTreeEmbedding& b) {
  if (!(a.source == b.source) || !(a.target == b.target)) return false;
  if (a.v != b.v || a.u != b.u) return false;
  for (std::size_t i = 0; i < a.gamma.size(); ++i) {
    if (!sameTreeEmbedding(a.gamma[i], b.gamma[i])) return false;
    if (!sameTreeEmbedding(a.delta[i], b.delta[i])) return false;
  }
  return true;
}

}  // namespace

MetaFactorStep metaFactorOnce(const MetaTreeEmbedding& psi) {
  if (psi.isIdentity()) throw MetaError("IdentityEmbedding", "nothing to factor");
  std::size_t b = psi.v.size();
  for (std::size_t i = 0; i < psi.v.size(); ++i)
    if (psi.u[i] != i) {
      b = i;
      break;
    }
  if (b == psi.v.size()) throw MetaError("IdentityEmbedding", "u-map is the identity");
  auto branchNodes = psi.target.branch(psi.v[b], psi.u[b]);
  if (branchNodes.size() < 2) throw MetaError("HypothesisFailure", "no successor in the branch");
  std::size_t a = branchNodes[1] - 1;
  const Extender& f = psi.target.exit(a);
  if (b + 1 < psi.source.size() && !(f.crit < psi.source.exit(b).lh()))
    throw MetaError("HypothesisFailure", "dom of the factor reaches past lh(F_b)");

  MvResult one = mvOneStep(psi.source, psi.target.restrictedTo(a + 1), f);

  MetaTreeEmbedding rem(one.tree, psi.target);
  for (std::size_t z = 0; z < one.tree.size(); ++z) {
    std::size_t uz;
    if (z <= a) {
      uz = z;
    } else {
      bool found = false;
      std::size_t q = 0;
      for (; q < one.embedding.u.size(); ++q)
        if (one.embedding.u[q] == z) {
          found = true;
          break;
        }
      if (!found) throw MetaError("HypothesisFailure", "node outside ran(u) of the step");
      uz = psi.u[q];
    }
    rem.u.push_back(uz);
    rem.v.push_back(z == 0 ? 0 : rem.u[z - 1] + 1);
  }
  for (std::size_t z = 0; z < one.tree.size(); ++z) {
    if (z <= a) {
      rem.gamma.push_back(TreeEmbedding::identity(one.tree.stage(z)));
    } else {
      std::size_t q = 0;
      while (one.embedding.u[q] != z) ++q;
      // tree-level factor: Lambda with Lambda o Delta_q = Gamma^psi_q; nodes
      // outside ran(u) of the step sit below the inflation point and are fixed
      const TreeEmbedding& deltaStep = one.embedding.delta[q];
      const TreeEmbedding& gPsi = psi.gamma[q];
      std::vector<std::size_t> uMap(one.tree.stage(z).size());
      for (std::size_t y = 0; y < uMap.size(); ++y) {
        uMap[y] = y;
        for (std::size_t p = 0; p < deltaStep.defined; ++p)
          if (deltaStep.u[p] == y) {
            uMap[y] = gPsi.u[p];
            break;
          }
      }
      rem.gamma.push_back(embeddingFromU(one.tree.stage(z), psi.target.stage(rem.v[z]), uMap));
    }
    rem.delta.push_back(compose(rem.gamma[z], psi.target.stageMap(rem.v[z], rem.u[z])));
  }
  MetaTreeEmbedding recomposed = metaCompose(one.embedding, rem);
  if (!sameMetaEmbedding(recomposed, psi))
    throw MetaError("HypothesisFailure", "meta factor step does not recompose");
  return MetaFactorStep{f, std::move(one), std::move(rem)};
}

MetaTreeEmbedding liftTreeEmbedding(const NormalTree& s, const TreeEmbedding& psi) {
  if (!psi.total())
    throw MetaError("InvalidInputs", "the lifted embedding must be total");
  MetaTree veeS = veeOf(s, psi.source);
  MetaTree veeT = veeOf(s, psi.target);
  MetaTreeEmbedding out(veeS, veeT);
  out.v = psi.v;
  out.u = psi.u;
  out.gamma.push_back(TreeEmbedding::identity(veeS.stage(0)));
  out.delta.push_back(compose(out.gamma[0], veeT.stageMap(out.v[0], out.u[0])));
  for (std::size_t xi = 0; xi + 1 < veeS.size(); ++xi) {
    std::size_t eta = veeS.pred(xi + 1);
    std::size_t newNode = out.u[xi] + 1;  // = v(xi+1)
    if (newNode != out.v[xi + 1])
      throw MetaError("InvalidInputs", "u-map of the lifted embedding is not continuous");
    std::size_t etaStar = veeT.pred(newNode);
    std::size_t aBar = veeS.alpha(xi);
    std::size_t aStar = veeT.alpha(out.u[xi]);
    TreeEmbedding deltaXi = out.delta[xi];
    const TreeEmbedding& phiStep = veeS.stepPhi(xi + 1);
    const TreeEmbedding& phiStarStep = veeT.stepPhi(newNode);
    TreeEmbedding pi = compose(out.gamma[eta], veeT.stageMap(out.v[eta], etaStar));

    std::vector<std::size_t> uMap(veeS.stage(xi + 1).size());
    for (std::size_t z = 0; z < uMap.size(); ++z) {
      if (z < aBar) {
        uMap[z] = deltaXi.u[z];
      } else if (z == aBar) {
        uMap[z] = aStar;
      } else {
        bool found = false;
        for (std::size_t q = 0; q < phiStep.defined; ++q)
          if (phiStep.u[q] == z) {
            uMap[z] = phiStarStep.u[pi.u[q]];
            found = true;
            break;
          }
        if (!found) throw MetaError("InvalidInputs", "stage node outside ran(u)");
      }
    }
    out.gamma.push_back(embeddingFromU(veeS.stage(xi + 1), veeT.stage(out.v[xi + 1]), uMap));
    out.delta.push_back(
        compose(out.gamma[xi + 1], veeT.stageMap(out.v[xi + 1], out.u[xi + 1])));
  }
  return out;
}

}  // namespace itree

#include "itree/normalize.hpp"

namespace itree {

namespace {

bool sameEmbedding(const TreeEmbedding& a, const TreeEmbedding& b) {
  if (!(a.source == b.source) || !(a.target == b.target) || a.defined != b.defined)
    return false;
  for (std::size_t i = 0; i < a.defined; ++i)
    if (a.v[i] != b.v[i] || a.u[i] != b.u[i] || !(a.s[i] == b.s[i]) || !(a.t[i] == b.t[i]))
      return false;
  return true;
}

}  // namespace

FactorStep factorOnce(const TreeEmbedding& psi) {
  if (psi.isIdentity()) throw EmbeddingError("IdentityEmbedding", "nothing to factor");
  std::size_t beta = psi.defined;
  for (std::size_t i = 0; i < psi.defined; ++i)
    if (psi.u[i] != i) {
      beta = i;
      break;
    }
  if (beta == psi.defined)
    throw EmbeddingError("IdentityEmbedding", "u-map is the identity");

  auto branchNodes = psi.target.branch(psi.v[beta], psi.u[beta]);
  if (branchNodes.size() < 2)
    throw EmbeddingError("HypothesisFailure", "no successor inside the image branch");
  std::size_t alpha0 = branchNodes[1] - 1;
  const Extender& f = psi.target.exit(alpha0);
  if (beta + 1 < psi.source.size() &&
      !(f.crit < psi.source.exit(beta).lamHat()))
    throw EmbeddingError("HypothesisFailure",
                         "dom of the factor extender reaches past S's exit at beta");

  OneStepResult step = vOneStep(psi.source, psi.target.restrictedTo(alpha0 + 1), f);

  std::vector<std::size_t> uRem(step.tree.size());
  for (std::size_t z = 0; z < step.tree.size(); ++z) {
    if (z <= alpha0) {
      uRem[z] = z;
    } else {
      bool found = false;
      for (std::size_t xi = 0; xi < step.phi.defined; ++xi)
        if (step.phi.u[xi] == z) {
          uRem[z] = psi.u[xi];
          found = true;
          break;
        }
      if (!found)
        throw EmbeddingError("HypothesisFailure", "stage node outside ran(u) of the step");
    }
  }
  TreeEmbedding remainder = embeddingFromU(step.tree, psi.target, uRem);
  TreeEmbedding recomposed = compose(step.phi, remainder);
  if (!sameEmbedding(recomposed, psi))
    throw EmbeddingError("HypothesisFailure", "factor step does not recompose");
  return FactorStep{f, step.tree, std::move(step.phi), std::move(remainder)};
}

Factorization factorize(const TreeEmbedding& psi) {
  std::string why;
  if (!isInflationary(psi, &why))
    throw EmbeddingError("NotInflationary", why);
  Factorization out;
  out.stages.push_back(psi.source);
  TreeEmbedding rest = psi;
  while (!rest.isIdentity()) {
    FactorStep step = factorOnce(rest);
    out.factors.push_back(step.factor);
    out.stages.push_back(step.stage);
    out.oneSteps.push_back(step.oneStep);
    rest = step.remainder;
    if (out.factors.size() > psi.target.size() + 1)
      throw EmbeddingError("HypothesisFailure", "factorization does not terminate");
  }
  return out;
}

TreeEmbedding Factorization::reassemble() const {
  if (oneSteps.empty()) {
    if (stages.empty()) throw EmbeddingError("BadFactorization", "no stages");
    return TreeEmbedding::identity(stages.back());
  }
  TreeEmbedding acc = oneSteps.front();
  for (std::size_t i = 1; i < oneSteps.size(); ++i) acc = compose(acc, oneSteps[i]);
  return acc;
}

}  // namespace itree

#ifndef ITREE_NORMALIZE_HPP
#define ITREE_NORMALIZE_HPP

#include <map>

#include "itree/embedding.hpp"

namespace itree {

enum class NormMode { W, V, X };

struct OneStepResult {
  NormalTree tree;
  TreeEmbedding phi;  // source into the result; partial in the dropping case
  ShiftMap sigma;     // Ult(P, F) into the last model
  bool dropping = false;
  Positions pos;
};

class NormalizeError : public KernelError {
public:
  using KernelError::KernelError;
};

// One-step embedding normalization: the result extends T cut at alpha by F
// and the blown-up images of S's exits past beta.
OneStepResult wOneStep(const NormalTree& s, const NormalTree& t, const Extender& f);

// Quasi-normalization: identical shape cut at alpha0 instead.
OneStepResult vOneStep(const NormalTree& s, const NormalTree& t, const Extender& f);

struct XOneStepResult {
  NormalTree tree;      // same order as the W result; exits via the small models
  TreeEmbedding psi;    // weak, X-case everywhere: S into X
  TreeEmbedding gamma;  // weak, W-case everywhere: X into W, identity u-map
  OneStepResult w;      // the embedding normalization alongside
};

XOneStepResult xOneStep(const NormalTree& s, const NormalTree& t, const Extender& f);

struct TwoStackData {
  std::vector<NormalTree> stages;  // stage xi normalizes <t, u|xi+1>
  std::vector<ShiftMap> sigmas;    // node xi of u into the last model of stage xi
  std::vector<OneStepResult> steps;
  std::vector<Extender> stageExits;  // sigma-image of u's exit, per step
};

// The stage-by-stage data of normalizing the two-tree stack <t, u>.
TwoStackData twoStackStages(const NormalTree& t, const NormalTree& u, NormMode mode);

struct StackResult {
  NormalTree tree;
  // partial embeddings between stages of the last round, keyed by
  // tree-related pairs of the driving tree
  std::map<std::pair<std::size_t, std::size_t>, TreeEmbedding> stageMaps;
  std::vector<ShiftMap> sigmas;  // per node of the driving tree
};

// Iterates the chosen one-step operator along each successive tree of the
// stack. The stack must be maximal: every tree sits on the previous last
// model.
StackResult normalizeStack(const std::vector<NormalTree>& stack, NormMode mode);

// Copy of a normal tree under a model map with the given target base.
struct CopiedTree {
  NormalTree tree;
  std::vector<ShiftMap> copyMaps;  // per node
};
CopiedTree copyTree(const ShiftMap& pi, const NormalTree& t, const Premouse& base);

// Both application orders of (f then the image of g) against (g then f)
// produce the same model and the same composite map. Returns false with a
// report when the routes disagree; throws IllegalApplication when the
// pattern is out of scope (crit(f) > crit(g) or g does not survive).
bool exchangeCheck(const Premouse& p, const Extender& f, const Extender& g,
                   std::string* why = nullptr);

}  // namespace itree

#endif

#ifndef ITREE_METATREE_HPP
#define ITREE_METATREE_HPP

#include "itree/normalize.hpp"

namespace itree {

struct MetaDrop {
  enum Kind { None, Necessary, Gratuitous, Both } kind = None;
  std::size_t fullLength = 0;  // length of the uncut stage
  bool operator==(const MetaDrop&) const = default;
  bool gratuitous() const { return kind == Gratuitous || kind == Both; }
  bool necessary() const { return kind == Necessary || kind == Both; }
};

// A tree of trees: stages joined by one-step quasi-normalizations at the
// meta-exits, with partial tree embeddings between related stages.
class MetaTree {
public:
  explicit MetaTree(NormalTree base);

  // Builds and checks the derived data (drop records, step embeddings);
  // stages must sit inside the recomputed one-step normalizations.
  static MetaTree fromParts(std::vector<NormalTree> stages, std::vector<Extender> exits,
                            std::vector<std::size_t> pred);
  // As fromParts but without recomputation; validateMetaTree is the gate.
  static MetaTree fromRawParts(std::vector<NormalTree> stages, std::vector<Extender> exits,
                               std::vector<std::size_t> pred, std::vector<MetaDrop> drops);

  std::size_t size() const { return stages_.size(); }
  const NormalTree& stage(std::size_t i) const { return stages_.at(i); }
  const NormalTree& lastTree() const { return stages_.back(); }
  const Premouse& lastModel() const { return stages_.back().lastModel(); }
  const Extender& exit(std::size_t i) const { return exits_.at(i); }
  std::size_t exitCount() const { return exits_.size(); }
  std::size_t pred(std::size_t i) const;
  const MetaDrop& drop(std::size_t i) const { return drops_.at(i - 1); }
  const TreeEmbedding& stepPhi(std::size_t i) const { return stepPhi_.at(i - 1); }

  std::size_t alpha(std::size_t i) const { return alphas_.at(i); }  // alpha0 of exit i
  std::size_t beta(std::size_t i) const { return betas_.at(i); }

  bool leq(std::size_t a, std::size_t b) const;
  std::vector<std::size_t> branch(std::size_t a, std::size_t b) const;
  bool dropsAlong(std::size_t a, std::size_t b) const;  // in (a, b]
  bool simple() const;
  bool lambdaSeparated() const;

  // composition of step embeddings along the branch from a to b
  TreeEmbedding stageMap(std::size_t a, std::size_t b) const;
  // the partial embedding from the base tree into the last tree
  TreeEmbedding mainMap() const { return stageMap(0, size() - 1); }

  MetaTree restrictedTo(std::size_t len) const;
  bool isPrefixOf(const MetaTree& other) const;
  bool operator==(const MetaTree& other) const;

private:
  std::vector<NormalTree> stages_;
  std::vector<Extender> exits_;
  std::vector<std::size_t> pred_;
  std::vector<MetaDrop> drops_;
  std::vector<TreeEmbedding> stepPhi_;
  std::vector<std::size_t> alphas_;
  std::vector<std::size_t> betas_;

  void deriveStepData(bool recompute);
  friend MetaTree extendMetaTree(const MetaTree&, const Extender&,
                                 const struct MetaStrategy*);
};

class MetaError : public KernelError {
public:
  using KernelError::KernelError;
};

struct MetaReport {
  bool ok = true;
  std::string clause;
  std::size_t node = 0;
  std::string detail;
  static MetaReport fail(std::string c, std::size_t n, std::string d) {
    return {false, std::move(c), n, std::move(d)};
  }
};

struct MetaFlags {
  bool requireSimple = false;
  bool requireLambdaSeparated = false;
};

MetaReport validateMetaTree(const MetaTree& m, MetaFlags flags = {});

// Acceptance predicate over finite stacks of meta-trees, with an optional
// forced-drop policy for newly created stages.
struct MetaStrategy {
  std::function<bool(const std::vector<MetaTree>&)> acceptsStack;
  // given the meta-tree so far and the uncut new stage, the cut length
  std::function<std::optional<std::size_t>(const MetaTree&, const NormalTree&)> dropPolicy;

  bool accepts(const MetaTree& m) const { return acceptsStack({m}); }
  static MetaStrategy vacuous();
  // forced gratuitous drops keyed by (uncut stage, cut node) pairs
  static MetaStrategy withTable(std::vector<std::pair<NormalTree, std::size_t>> table);
};

MetaTree metatreeFromNormalTree(const NormalTree& t);

// Appends one stage: the quasi-normalization of the last tree by f, cut as
// the policy directs.
MetaTree extendMetaTree(const MetaTree& m, const Extender& f,
                        const MetaStrategy* policy = nullptr);

// The meta-tree of stages V(t, u|xi+1) underlying the normalization of the
// stack <t, u>.
MetaTree veeOf(const NormalTree& t, const NormalTree& u);

struct CopiedMetaTree {
  MetaTree tree;
  std::vector<TreeEmbedding> stageCopies;  // Gamma^xi per stage
};

// Lifts m along a non-dropping (weak) embedding of its base tree.
CopiedMetaTree copyMetaTree(const TreeEmbedding& gamma, const MetaTree& m);

struct MetaTreeEmbedding {
  MetaTree source;
  MetaTree target;
  std::vector<std::size_t> v, u;
  std::vector<TreeEmbedding> gamma;  // S_xi -> T_v(xi)
  std::vector<TreeEmbedding> delta;  // S_xi -> T_u(xi)

  MetaTreeEmbedding(MetaTree s, MetaTree t) : source(std::move(s)), target(std::move(t)) {}
  bool isIdentity() const;
  static MetaTreeEmbedding identity(const MetaTree& m);
};

MetaReport validateMetaEmbedding(const MetaTreeEmbedding& d);

struct MvResult {
  MetaTree tree;
  MetaTreeEmbedding embedding;
};

// One-step normalization at the meta level: inflates every stage of s past
// b by the one-step normalization with h over t's stage at a.
MvResult mvOneStep(const MetaTree& s, const MetaTree& t, const Extender& h);

// Normalizes the stack <s, t> (t a meta-tree on s's last tree).
MetaTree mvStack(const MetaTree& s, const MetaTree& t);

struct MetaFactorStep {
  Extender factor;
  MvResult oneStep;
  MetaTreeEmbedding remainder;
};

MetaFactorStep metaFactorOnce(const MetaTreeEmbedding& psi);

// Lifts a tree embedding between normal trees on s's last model to the
// corresponding meta-trees over s.
MetaTreeEmbedding liftTreeEmbedding(const NormalTree& s, const TreeEmbedding& psi);

struct CompareVerdict {
  bool tie = false;
  std::size_t winner = 0;  // side whose last model is an initial segment of the others'
  std::size_t steps = 0;
  std::size_t lhBound = 0;  // distinct lh values seen; termination bound
  bool winnerMainBranchDrops = false;
};

struct CompareResult {
  std::vector<MetaTree> sides;
  CompareVerdict verdict;
};

// Least-disagreement comparison of trees over a common base model, hitting
// the plus version of each disagreement extender.
CompareResult compare(const std::vector<NormalTree>& trees, const MetaStrategy& strategy,
                      const std::vector<const MetaStrategy*>& policies = {});

enum class DerivedKind { Induced, Pullback, Tail };

// induced: every component tree satisfies the base tree predicate;
// pullback: the copy along gamma is accepted; tail: a normal tree over the
// last model (or a segment of it) is accepted when the stack through m
// followed by the tree's normalization is.
MetaStrategy inducedStrategy(std::function<bool(const NormalTree&)> basePredicate);
MetaStrategy pullbackStrategy(const TreeEmbedding& gamma, const MetaStrategy& base);
std::function<bool(const NormalTree&)> tailStrategy(const MetaTree& m,
                                                    std::optional<Ord> segmentHeight,
                                                    const MetaStrategy& base);

struct StackToNormalResult {
  NormalTree tree;
  bool accepted = true;
};

// Folds a finite maximal stack into one normal tree by iterated meta-level
// normalization, checking each round against the derived strategies.
StackToNormalResult stackToNormal(const std::vector<NormalTree>& stack,
                                  const MetaStrategy& base);

}  // namespace itree

#endif

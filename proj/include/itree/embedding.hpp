#ifndef ITREE_EMBEDDING_HPP
#define ITREE_EMBEDDING_HPP

#include <functional>
#include <map>
#include <optional>

#include "itree/tree.hpp"

namespace itree {

enum class CaseTag { X, W };

// Weak data at a node: the factor map between the exit images, its
// resolution witness (as an eta sequence) and which side it sits on.
struct WeakNode {
  ShiftMap sigma;
  std::vector<Ord> etas;
  CaseTag tag = CaseTag::W;
  bool operator==(const WeakNode&) const = default;
  static WeakNode tagged(CaseTag t) { return WeakNode{ShiftMap::identity(), {}, t}; }
};

// A (v, u, s, t) system between two trees. The embedding covers the source
// prefix of length `defined`; u and t are present on every covered node, so
// a total embedding of this shape is an extended tree embedding. A weak
// embedding carries sigma data per covered exit node.
struct TreeEmbedding {
  NormalTree source;
  NormalTree target;
  std::size_t defined = 0;  // source nodes covered
  std::vector<std::size_t> v;
  std::vector<std::size_t> u;
  std::vector<PartialShiftMap> s;
  std::vector<PartialShiftMap> t;
  std::vector<WeakNode> weak;  // empty for ordinary tree embeddings

  TreeEmbedding(NormalTree src, NormalTree tgt)
      : source(std::move(src)), target(std::move(tgt)) {}

  bool total() const { return defined == source.size(); }
  bool isWeak() const { return !weak.empty(); }
  bool isIdentity() const;
  bool nonDropping() const;
  const PartialShiftMap& lastT() const { return t.at(defined - 1); }

  static TreeEmbedding identity(const NormalTree& t);

  // restriction data used by the agreement relation on embeddings
  bool agreesUpTo(const TreeEmbedding& other, std::size_t xiPlus1) const;

  std::string str() const;
};

class EmbeddingError : public KernelError {
public:
  using KernelError::KernelError;
};

// The unique map sigma with sigma o shift(e) = shift(f) o pi on the image
// region and sigma = phi below lambda of e. Throws ShiftLemmaInapplicable
// with the failed clause.
ShiftMap copyMap(const ShiftMap& phi, const ShiftMap& pi, const Extender& e,
                 const Extender& f);

// Builds the unique embedding with the given u-map (v, s and t follow from
// the copying recursion). defined = uMap.size().
TreeEmbedding embeddingFromU(const NormalTree& source, const NormalTree& target,
                             const std::vector<std::size_t>& uMap);

struct EmbeddingReport {
  bool ok = true;
  std::string clause;
  std::size_t node = 0;
  std::string detail;
  static EmbeddingReport fail(std::string clause, std::size_t node, std::string detail) {
    return {false, std::move(clause), node, std::move(detail)};
  }
};

EmbeddingReport validateEmbedding(const TreeEmbedding& phi);

// psi after phi (phi first).
TreeEmbedding compose(const TreeEmbedding& phi, const TreeEmbedding& psi);

// equal branch-extender lists into both targets at every node
bool similar(const TreeEmbedding& phi, const TreeEmbedding& psi);

bool isInflationary(const TreeEmbedding& phi, std::string* why = nullptr);

struct FactorStep {
  Extender factor;
  NormalTree stage;       // the one-step quasi-normalization
  TreeEmbedding oneStep;  // source -> stage
  TreeEmbedding remainder;
};

// Peels one quasi-normalization step off a non-identity embedding.
FactorStep factorOnce(const TreeEmbedding& psi);

struct Factorization {
  std::vector<Extender> factors;
  std::vector<NormalTree> stages;         // stages[0] = source, last = target
  std::vector<TreeEmbedding> oneSteps;    // stage i -> stage i+1
  TreeEmbedding reassemble() const;
};

Factorization factorize(const TreeEmbedding& psi);

// A finite directed family of trees with coherent embeddings.
struct DirectedTreeSystem {
  std::vector<NormalTree> trees;
  // leq[a][b]: index a precedes b; must be a directed partial order
  std::vector<std::vector<bool>> leq;
  std::map<std::pair<std::size_t, std::size_t>, TreeEmbedding> maps;

  const TreeEmbedding& map(std::size_t a, std::size_t b) const;
};

struct DirectLimit {
  NormalTree tree;
  std::vector<TreeEmbedding> limbs;  // one per index
  std::size_t topIndex = 0;
};

DirectLimit directLimit(const DirectedTreeSystem& d);

}  // namespace itree

#endif

#ifndef ITREE_TREE_HPP
#define ITREE_TREE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "itree/premouse.hpp"

namespace itree {

enum class TreeMode { Normal, QuasiNormal, LambdaTight, LambdaSeparated };

struct DropRecord {
  bool dropped = false;
  Ord targetHeight = 0;
  bool operator==(const DropRecord&) const = default;
};

struct Positions {
  std::size_t alpha = 0;
  std::size_t beta = 0;
  std::size_t alpha0 = 0;
};

// A finite iteration tree: models, exit extenders, predecessor function and
// drop records. Exits are applied to the longest segment of the earliest
// model whose exit lambda-hat lies above the critical point.
class NormalTree {
public:
  explicit NormalTree(Premouse base);

  // Assembles a tree from raw parts without validation; validateTree is the
  // gate for values built this way (loaders, mutation fixtures).
  static NormalTree fromParts(std::vector<Premouse> models, std::vector<Extender> exits,
                              std::vector<std::size_t> pred, std::vector<DropRecord> drops,
                              std::vector<int> degrees);

  std::size_t size() const { return models_.size(); }
  const Premouse& model(std::size_t i) const { return models_.at(i); }
  const Premouse& lastModel() const { return models_.back(); }
  const Extender& exit(std::size_t i) const { return exits_.at(i); }
  std::size_t exitCount() const { return exits_.size(); }
  std::size_t pred(std::size_t i) const;  // predecessor of node i >= 1
  const DropRecord& drop(std::size_t i) const { return drops_.at(i - 1); }
  int degree(std::size_t i) const { return degrees_.at(i); }

  bool leq(std::size_t a, std::size_t b) const;  // tree order
  std::vector<std::size_t> branch(std::size_t a, std::size_t b) const;
  bool dropsAlong(std::size_t a, std::size_t b) const;  // in (a, b]
  bool mainBranchDrops() const { return dropsAlong(0, size() - 1); }

  // extenders used along (a, b] in branch order
  std::vector<Extender> branchExtenders(std::size_t a, std::size_t b) const;
  // composition of the ultrapower maps along (a, b]; partial after a drop
  PartialShiftMap branchEmbedding(std::size_t a, std::size_t b) const;

  // sup of the exit lambdas below a; the tree-order variant must agree
  Ord lambdaSup(std::size_t a) const;
  Ord lambdaSupAlongBranch(std::size_t a) const;

  NormalTree restrictedTo(std::size_t len) const;  // first len nodes
  bool isPrefixOf(const NormalTree& other) const;
  bool operator==(const NormalTree& other) const;

  std::string str() const;

  friend NormalTree extendTree(const NormalTree& t, const Extender& f);

private:
  std::vector<Premouse> models_;
  std::vector<Extender> exits_;
  std::vector<std::size_t> pred_;
  std::vector<DropRecord> drops_;
  std::vector<int> degrees_;
};

class TreeError : public KernelError {
public:
  using KernelError::KernelError;
};

// Appends one node: computes the predecessor by the least-crit rule, selects
// the application segment by the longest-segment rule and applies f.
NormalTree extendTree(const NormalTree& t, const Extender& f);

// alpha, beta, alpha0 of f against t; f's minus part must be on the last
// model's sequence.
Positions positions(const Extender& f, const NormalTree& t);

struct TreeReport {
  bool ok = true;
  std::string rule;
  std::size_t node = 0;
  std::string detail;
};

TreeReport validateTree(const NormalTree& t, TreeMode mode);

// The exit extender at node i of t, with the plus flag of `key` and the
// context refreshed from the model it sits on.
Extender exitDescriptor(const NormalTree& t, std::size_t node, const ExtKey& key);

}  // namespace itree

#endif

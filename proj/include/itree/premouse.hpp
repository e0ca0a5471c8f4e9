#ifndef ITREE_PREMOUSE_HPP
#define ITREE_PREMOUSE_HPP

#include <optional>
#include <string>
#include <vector>

#include "itree/extender.hpp"

namespace itree {

// Error carrying one of the documented failure codes (DomainMismatch,
// DropRequired, NotAnInitialSegment, ...).
class KernelError : public std::runtime_error {
public:
  KernelError(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

struct Level {
  Ord height = 0;
  Ord rho = 0;
  int degree = 0;  // 0 marks a passive or degree-dropped level
  auto operator<=>(const Level&) const = default;
  // projectum used by the application rules: a degree-0 level never projects
  Ord appRho() const { return degree == 0 ? height : rho; }
  bool sameShape(const Level& other) const {
    return height == other.height && rho == other.rho;
  }
  std::string str() const;
};

bool sameShape(const std::vector<Level>& a, const std::vector<Level>& b);

// Heights strictly increasing, rho <= height, last height = o(model).
struct LevelProfile {
  std::vector<Level> levels;

  Ord o() const { return levels.back().height; }
  Ord rhoMinus() const { return levels.back().rho; }
  bool wellFormed(std::string* why = nullptr) const;
  const Level* levelAt(Ord height) const;
  bool operator==(const LevelProfile&) const = default;
  std::string str() const;
};

// One application step in a history term: which extender was applied, and to
// which segment of the then-current model (nullopt = the whole model).
struct HistStep {
  ExtKey ext;
  std::optional<Ord> cut;
  bool degreeZero = false;
  auto operator<=>(const HistStep&) const = default;
};

// Canonical name of a model: a base atom, a normalized (lh-increasing) list
// of applications, and an optional trailing cut. Two models are the same
// value exactly when their history terms are equal.
struct History {
  std::string base;
  std::vector<HistStep> steps;
  std::optional<HistStep> finalCut;  // ext ignored; cut/degreeZero used

  auto operator<=>(const History&) const = default;
  std::string str() const;
};

struct Premouse {
  LevelProfile profile;
  std::vector<Extender> extenders;  // lh-increasing, non-plus, lh <= o
  History history;

  Ord o() const { return profile.o(); }
  Ord rhoMinus() const { return profile.rhoMinus(); }
  // projectum governing which extenders apply to the whole model
  Ord appRho() const { return profile.levels.back().appRho(); }

  const Extender* extenderAt(Ord lh) const;
  const Extender* findMinus(const ExtKey& key) const;  // key's minus on the sequence
  std::vector<Extender> extendersBelow(Ord bound) const;

  bool wellFormed(std::string* why = nullptr) const;

  // Value identity is history identity.
  bool operator==(const Premouse& other) const { return history == other.history; }
  // Structural content, ignoring names: profile and extender attributes.
  bool contentEquals(const Premouse& other) const;
  // this is an initial segment of other: profile and extenders agree up to o().
  bool initialSegmentOf(const Premouse& other) const;

  std::string str() const;
};

Premouse makeBase(const std::string& name, LevelProfile profile,
                  std::vector<Extender> extenders);

// Refresh every extender's context so it lists exactly the smaller-lh
// members of `extenders`.
void rebuildContexts(std::vector<Extender>& extenders);

// The cut of m at height h. When h names a proper level the level's declared
// rho is kept; otherwise the cut gets a passive top (rho = height). With
// degreeZero set, the top level's rho is reset to its height, which is how a
// dropped-to segment is prepared for an ultrapower.
Premouse segmentOf(const Premouse& m, Ord h, bool degreeZero = false);

struct ApplySegment {
  Premouse segment;
  bool dropped = false;
  Ord targetHeight = 0;
};

// The segment of m that e must be applied to: the least level containing
// dom(e) whose rho is at most crit(e), taken at its top projectum, when such
// a level exists; the whole model otherwise.
ApplySegment applicationSegment(const Premouse& m, const Extender& e);

// Ult(p, e). Requires crit(e) < rhoMinus(p) (else DropRequired) and context
// agreement below crit(e)+1 (else DomainMismatch).
Premouse ultrapower(const Premouse& p, const Extender& e);

// --- dropdown sequences ---------------------------------------------------

struct Dropdown {
  std::vector<Ord> heights;  // A_0 .. A_n as level heights (last may be o(q))
  std::vector<Ord> kappas;   // rho-minus of each A_i
  int n() const { return static_cast<int>(heights.size()) - 1; }
};

// The chain starting at the proper level of q at height hN, stepping to the
// least later level with strictly smaller projectum.
Dropdown dropdownSequence(const Premouse& q, Ord hN);

struct CheckReport {
  bool ok = true;
  std::string clause;  // first violated clause when !ok
  std::string detail;
  static CheckReport pass() { return {}; }
  static CheckReport fail(std::string clause, std::string detail) {
    return {false, std::move(clause), std::move(detail)};
  }
};

// Verifies how pi moves the dropdown sequence of q at hN into x: the
// n-shift case law, preservation of the A_i, and the stronger conclusions
// for almost-exact and exact maps.
CheckReport dropdownImageCheck(const ShiftMap& pi, const Premouse& q,
                               const Premouse& x, Ord hN);

// --- resolutions ------------------------------------------------------------

struct ResolutionStage {
  std::vector<Level> b;  // B^i_k data for k = 1..n
  ShiftMap sigma;        // stage map B^i_i -> B^{i+1}_i (identity stage allowed)
};

struct Resolution {
  std::vector<Ord> etas;              // eta_1 <= ... <= eta_{n+1}
  std::vector<ResolutionStage> stages;  // stage i holds B^i_* and sigma_i; one extra snapshot at the end
  int n = 0;

  ShiftMap composite() const;
};

// Rebuild the full resolution from its eta sequence; every snapshot and
// stage map is determined by the etas.
Resolution resolutionFromEtas(const Premouse& nModel, const std::vector<Ord>& etas);

// True iff r witnesses that sigma respects drops over (n, eta, lam);
// on failure the report carries the violated clause tag.
CheckReport resolutionCheck(const ShiftMap& sigma, const Premouse& nModel,
                            Ord eta, Ord lam, const Resolution& r);

// The resolution of the factor map from Ult(m|etaBar, f) into the image
// segment of Ult(m, f). The concrete algebra has identity factor maps, so
// without declared data this is the trivial resolution; a declared eta
// sequence (profile backend) is checked and expanded instead.
Resolution buildResolution(const Premouse& m, Ord etaBar, const Extender& f,
                           const std::optional<std::vector<Ord>>& declaredEtas = std::nullopt);

}  // namespace itree

#endif

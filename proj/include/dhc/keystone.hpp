#pragma once

#include <vector>

#include "dhc/content.hpp"
#include "dhc/cube.hpp"
#include "dhc/grid_set.hpp"

namespace dhc {

// Stratification of the thick dyadic cubes. strata[0] is the root itself when
// the root is thick, otherwise the maximal thick cubes below it; every later
// stratum collects the maximal thick cubes strictly inside the members of the
// previous one. Occupied leaf cells are thick at any lambda <= 1, so on a
// grid the chain bottoms out there and the strata list is finite.
struct CanonicalDecomposition {
  double d = 0.0;
  double lambda = 0.0;
  std::vector<CubeFamily> strata;
};

// Refining chain of coverings of the occupied cells. levels[0] is the unit
// root. A member of full content splits into its children, thick children
// kept whole and thin ones replaced by their maximal optimal coverings; a
// member of deficient content is replaced by its covering directly. Leaf
// cells persist unchanged, and the list ends at the first level consisting
// of leaves only.
//
// With eps = 0 every covering member has full content, so one covering round
// suffices. With eps > 0 a covering may retain thin members, which are
// re-covered until none remain; thin_decay[k] records the largest observed
// ratio (side^d sum of the k+1-st thin remainder) / (side of the covered
// cube)^d, and stays below (eps/(1-lambda))^{k+1}.
struct NiceSequence {
  double d = 0.0;
  double lambda = 0.0;
  double eps = 0.0;
  std::vector<CubeFamily> levels;
  std::vector<double> thin_decay;
};

struct PackingAudit {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
  int j0 = 0;  // index of the nice-sequence level the family was checked against
};

// All maximal thick dyadic cubes strictly inside q, found by walking down
// and stopping at the first thick cube on each branch. Occupied leaf cells
// are full, hence thick, so every occupied branch terminates. A leaf q has
// no strict sub-cubes on the grid and yields the empty family.
// lambda in (0, 1]; q with zero content is a domain error.
CubeFamily maximal_thick_children(const ContentTable& t, const CubeIndex& q, double lambda);
CubeFamily maximal_thick_children(const GridSet& s, const CubeIndex& q,
                                  const ThicknessQuery& tq);

// The full stratification for lambda in (0, 1), strictly exclusive: the
// strata partition the thick cubes of the grid, refine strictly, and any
// dyadic cube lying strictly between adjacent strata members is thin.
CanonicalDecomposition canonical_decomposition(const GridSet& s, double d, double lambda);

// Builds the refining chain and validates it (non-overlapping levels that
// cover the occupied cells, thick membership, strict refinement up to
// persisting leaves, and the per-parent packing inequality with the 2^(n-d)
// allowance for full-content parents). Validation failure is a bug, not an
// input error. lambda in (0, 1]; eps > 0 additionally needs eps < 1 - lambda.
NiceSequence nice_sequence(const GridSet& s, double d, double lambda, double eps = 0.0);

// Checks a non-overlapping family c of (d, lambda2)-thick cubes squeezed
// between {q} and the restriction to q of the first nice-sequence level (for
// lambda1) with no member containing q. lhs is the side^d sum of c; rhs is
// (side of q)^d / lambda2, doubled 2^(n-d)-fold when q has full content.
// A family that is not squeezed that way is a domain error naming the
// offending cube.
PackingAudit packing_bound_audit(const GridSet& s, double d, double lambda1, double lambda2,
                                 const CubeIndex& q, const CubeFamily& c);

}  // namespace dhc

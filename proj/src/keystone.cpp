#include "dhc/keystone.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace dhc {

namespace {

bool thick_value(double content, int level, double d, double lambda) {
  return geq_rel(content, lambda * side_pow(level, d));
}

// First thick cube on each branch below a mixed node. Full nodes carry
// content side^d and stop immediately; empty nodes carry nothing.
void collect_thick(const ContentTable& t, std::uint32_t idx, int level, const Corner& corner,
                   double lambda, std::vector<CubeIndex>& out) {
  const auto& nd = t.set->nodes()[idx];
  if (nd.kind == GridSet::Kind::empty) return;
  if (nd.kind == GridSet::Kind::full || thick_value(t.cost[idx], level, t.d, lambda)) {
    out.push_back(CubeIndex{t.dim, level, corner});
    return;
  }
  for (unsigned o = 0; o < (1u << t.dim); ++o) {
    Corner cc{};
    for (int i = 0; i < t.dim; ++i) cc[i] = 2 * corner[i] + ((o >> i) & 1);
    collect_thick(t, nd.child0 + o, level + 1, cc, lambda, out);
  }
}

// Exact ordered key for set membership and ancestor walks.
using CubeKey = std::pair<int, Corner>;

CubeKey key_of(const CubeIndex& q) { return {q.depth, q.corner}; }

}  // namespace

CubeFamily maximal_thick_children(const ContentTable& t, const CubeIndex& q, double lambda) {
  require(lambda > 0.0 && lambda <= 1.0,
          "maximal thick children: lambda must lie in (0, 1]");
  require(q.dim == t.dim, "maximal thick children: dimension mismatch");
  require(q.depth >= 0 && q.depth <= t.depth,
          "maximal thick children: cube deeper than the grid");
  const GridSet& s = *t.set;
  require(s.cube_state(q) != GridSet::Kind::empty,
          "maximal thick children: cube has zero content");
  if (q.depth == t.depth) return CubeFamily{t.dim, {}};

  std::uint32_t idx = 0;
  int level = 0;
  while (level < q.depth && s.nodes()[idx].kind == GridSet::Kind::mixed) {
    unsigned o = 0;
    int shift = q.depth - level - 1;
    for (int i = 0; i < t.dim; ++i) o |= unsigned((q.corner[i] >> shift) & 1) << i;
    idx = s.nodes()[idx].child0 + o;
    ++level;
  }
  std::vector<CubeIndex> out;
  if (s.nodes()[idx].kind == GridSet::Kind::full) {
    // the whole region is full, so the children of q are already thick
    for (unsigned o = 0; o < (1u << t.dim); ++o) out.push_back(q.child(o));
  } else {
    const auto& nd = s.nodes()[idx];
    for (unsigned o = 0; o < (1u << t.dim); ++o) {
      Corner cc{};
      for (int i = 0; i < t.dim; ++i) cc[i] = 2 * q.corner[i] + ((o >> i) & 1);
      collect_thick(t, nd.child0 + o, q.depth + 1, cc, lambda, out);
    }
  }
  return make_family(t.dim, std::move(out));
}

CubeFamily maximal_thick_children(const GridSet& s, const CubeIndex& q,
                                  const ThicknessQuery& tq) {
  ContentTable t = build_content_table(s, tq.d);
  return maximal_thick_children(t, q, tq.lambda);
}

CanonicalDecomposition canonical_decomposition(const GridSet& s, double d, double lambda) {
  require(lambda > 0.0 && lambda < 1.0,
          "canonical decomposition: lambda must lie strictly inside (0, 1)");
  require(!s.empty(), "canonical decomposition: set is empty");
  ContentTable t = build_content_table(s, d);

  CubeIndex root{s.dim(), 0, {}};
  CanonicalDecomposition out{d, lambda, {}};
  CubeFamily cur = thick_value(t.root_cost(), 0, d, lambda)
                       ? make_family(s.dim(), {root})
                       : maximal_thick_children(t, root, lambda);
  while (!cur.empty()) {
    out.strata.push_back(cur);
    std::vector<std::vector<CubeIndex>> parts(cur.size());
#ifdef DHC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(cur.size()); ++i) {
      const CubeIndex& m = cur.members[std::size_t(i)];
      if (m.depth < t.depth)
        parts[std::size_t(i)] = maximal_thick_children(t, m, lambda).members;
    }
    std::vector<CubeIndex> next;
    for (auto& p : parts) next.insert(next.end(), p.begin(), p.end());
    cur = make_family(s.dim(), std::move(next));
  }
  return out;
}

namespace {

// Maximal optimal covering of a cube of deficient content; with eps > 0 the
// covering may keep thin members, which are re-covered until exhausted.
// decay[k] tracks the largest (side^d sum of the k+1-st thin remainder)
// relative to the covered cube.
void lemma_cover(const ContentTable& t, const CubeIndex& bar, double lambda, double eps,
                 std::vector<CubeIndex>& out, std::vector<double>& decay) {
  auto cover = [&](const CubeIndex& k) {
    CubeFamily f = optimal_covering(t, k, eps);
    // an eps loose enough to reproduce the cube itself makes no progress;
    // tighten to the exact covering for this cube alone
    if (eps > 0.0 && f.size() == 1 && f.members[0] == k) f = optimal_covering(t, k, 0.0);
    return f;
  };
  double bar_pow = side_pow(bar.depth, t.d);
  std::vector<CubeIndex> thin{bar};
  std::size_t round = 0;
  while (!thin.empty()) {
    expect(round <= std::size_t(t.depth) + 1,
           "nice sequence: covering recursion failed to terminate");
    std::vector<CubeIndex> next_thin;
    for (const CubeIndex& k : thin) {
      CubeFamily f = cover(k);
      for (const CubeIndex& m : f.members) {
        if (thick_value(dyadic_content(t, m), m.depth, t.d, lambda))
          out.push_back(m);
        else
          next_thin.push_back(m);
      }
    }
    thin = std::move(next_thin);
    ++round;
    if (!thin.empty()) {
      expect(eps > 0.0, "nice sequence: exact covering left a thin remainder");
      double sum = 0.0;
      for (const CubeIndex& m : thin) sum += side_pow(m.depth, t.d);
      if (decay.size() < round) decay.resize(round, 0.0);
      decay[round - 1] = std::max(decay[round - 1], sum / bar_pow);
    }
  }
}

// One refinement of a single level member.
void refine_member(const ContentTable& t, const CubeIndex& bar, double lambda, double eps,
                   std::vector<CubeIndex>& out, std::vector<double>& decay) {
  if (bar.depth == t.depth) {
    out.push_back(bar);  // leaf cells persist
    return;
  }
  double c = dyadic_content(t, bar);
  if (geq_rel(c, side_pow(bar.depth, t.d))) {
    // full content: split into children, keep the thick ones whole
    for (unsigned o = 0; o < (1u << t.dim); ++o) {
      CubeIndex ch = bar.child(o);
      double cc = dyadic_content(t, ch);
      if (cc <= 0.0) continue;
      if (thick_value(cc, ch.depth, t.d, lambda))
        out.push_back(ch);
      else
        lemma_cover(t, ch, lambda, eps, out, decay);
    }
    return;
  }
  lemma_cover(t, bar, lambda, eps, out, decay);
}

void validate_nice(const ContentTable& t, const NiceSequence& ns) {
  const GridSet& s = *t.set;
  expect(!ns.levels.empty(), "nice sequence: no levels");
  if (s.empty()) return;
  expect(ns.levels[0].size() == 1 && ns.levels[0].members[0] == CubeIndex{t.dim, 0, {}},
         "nice sequence: level 0 is not the unit root");

  for (std::size_t j = 0; j < ns.levels.size(); ++j) {
    const CubeFamily& lvl = ns.levels[j];
    std::set<CubeKey> keys;
    std::uint64_t covered = 0;
    for (const CubeIndex& m : lvl.members) {
      expect(keys.insert(key_of(m)).second, "nice sequence: duplicate member");
      if (j > 0)
        expect(thick_value(dyadic_content(t, m), m.depth, t.d, ns.lambda),
               "nice sequence: thin member in a level");
      covered += s.count_in_box(cube_cell_box(s.depth(), m));
    }
    for (const CubeIndex& m : lvl.members)
      for (CubeIndex a = m; a.depth > 0;) {
        a = a.parent();
        expect(!keys.count(key_of(a)), "nice sequence: overlapping members");
      }
    expect(covered == s.cell_count(), "nice sequence: level does not cover the set");

    if (j + 1 == ns.levels.size()) break;
    // refinement and the per-parent packing sums, via the ancestor closure:
    // the sum of member costs under any dyadic cube equals the sum at the
    // deepest closure node it contains, so checking closure nodes suffices
    std::map<CubeKey, double> sums;
    for (const CubeIndex& m : ns.levels[j + 1].members) {
      double w = side_pow(m.depth, t.d);
      CubeIndex a = m;
      while (true) {
        sums[key_of(a)] += w;
        if (keys.count(key_of(a))) {
          expect(a.depth < m.depth || (m.depth == t.depth && a == m),
                 "nice sequence: refinement is not strict");
          break;
        }
        expect(a.depth > 0, "nice sequence: member outside the previous level");
        a = a.parent();
      }
    }
    for (const auto& [k, sum] : sums) {
      double bound = side_pow(k.first, t.d);
      if (keys.count(k)) {
        CubeIndex parent{t.dim, k.first, k.second};
        if (geq_rel(dyadic_content(t, parent), bound)) bound *= std::exp2(double(t.dim) - t.d);
      }
      expect(sum <= bound * (1.0 + kContentRelTol), "nice sequence: packing bound violated");
    }
  }

  if (ns.eps > 0.0) {
    double tau = ns.eps / (1.0 - ns.lambda);
    double cap = 1.0;
    for (double r : ns.thin_decay) {
      cap *= tau;
      expect(r <= cap * (1.0 + kContentRelTol), "nice sequence: thin remainder decays too slowly");
    }
  } else {
    expect(ns.thin_decay.empty(), "nice sequence: unexpected thin remainder");
  }
}

}  // namespace

NiceSequence nice_sequence(const GridSet& s, double d, double lambda, double eps) {
  require(lambda > 0.0 && lambda <= 1.0, "nice sequence: lambda must lie in (0, 1]");
  require(eps >= 0.0, "nice sequence: eps must be >= 0");
  if (eps > 0.0)
    require(lambda < 1.0 && eps < 1.0 - lambda,
            "nice sequence: eps must stay below 1 - lambda");

  ContentTable t = build_content_table(s, d);
  NiceSequence out{d, lambda, eps, {}, {}};
  if (s.empty()) {
    out.levels.push_back(CubeFamily{s.dim(), {}});
    return out;
  }

  CubeFamily cur = make_family(s.dim(), {CubeIndex{s.dim(), 0, {}}});
  out.levels.push_back(cur);
  while (true) {
    std::vector<CubeIndex> next;
    for (const CubeIndex& m : cur.members)
      refine_member(t, m, lambda, eps, next, out.thin_decay);
    CubeFamily nf = make_family(s.dim(), std::move(next));
    if (nf.members == cur.members) break;  // all leaves: the chain is done
    out.levels.push_back(nf);
    cur = std::move(nf);
    expect(out.levels.size() <= std::size_t(s.depth()) + 2,
           "nice sequence: level recursion failed to terminate");
  }
  validate_nice(t, out);
  return out;
}

PackingAudit packing_bound_audit(const GridSet& s, double d, double lambda1, double lambda2,
                                 const CubeIndex& q, const CubeFamily& c) {
  require(q.dim == s.dim() && c.dim == s.dim(), "packing audit: dimension mismatch");
  require(q.depth >= 0 && q.depth <= s.depth(), "packing audit: cube deeper than the grid");
  std::int64_t span = std::int64_t(1) << q.depth;
  for (int i = 0; i < q.dim; ++i)
    require(q.corner[i] >= 0 && q.corner[i] < span, "packing audit: cube outside the unit box");
  require(lambda2 > 0.0 && lambda2 <= 1.0, "packing audit: lambda2 must lie in (0, 1]");

  ContentTable t = build_content_table(s, d);
  NiceSequence ns = nice_sequence(s, d, lambda1);

  // first level with no member containing q; at the all-leaves fixpoint only
  // q itself can still contain q, and the restriction degenerates to {q}
  std::size_t j0 = 0;
  bool found = false;
  for (; j0 < ns.levels.size(); ++j0) {
    bool contains = false;
    for (CubeIndex a = q;; a = a.parent()) {
      if (std::binary_search(ns.levels[j0].members.begin(), ns.levels[j0].members.end(), a,
                             cube_less)) {
        contains = true;
        break;
      }
      if (a.depth == 0) break;
    }
    if (!contains) {
      found = true;
      break;
    }
  }
  std::vector<CubeIndex> restriction;
  if (found) {
    restriction = restrict_family(ns.levels[j0], q).members;
  } else {
    j0 = ns.levels.size() - 1;
    restriction = {q};
  }

  ThicknessQuery tq{d, lambda2};
  std::set<CubeKey> cset;
  for (const CubeIndex& m : c.members) {
    require(q.contains(m), "packing audit: member outside the cube: " + cube_to_string(m));
    require(is_thick(t, m, tq),
            "packing audit: member not thick for lambda2: " + cube_to_string(m));
    require(cset.insert(key_of(m)).second,
            "packing audit: members overlap: " + cube_to_string(m));
  }
  for (const CubeIndex& m : c.members)
    for (CubeIndex a = m; a.depth > q.depth;) {
      a = a.parent();
      require(!cset.count(key_of(a)),
              "packing audit: members overlap: " + cube_to_string(a));
    }
  for (const CubeIndex& r : restriction) {
    bool dominated = false;
    for (CubeIndex a = r;; a = a.parent()) {
      if (cset.count(key_of(a))) {
        dominated = true;
        break;
      }
      if (a.depth == q.depth) break;
    }
    require(dominated, "packing audit: family does not dominate the nice level at " +
                           cube_to_string(r));
  }

  double lhs = family_content_sum(c, d);
  bool q_full = geq_rel(dyadic_content(t, q), side_pow(q.depth, d));
  double rhs = (q_full ? std::exp2(double(s.dim()) - d) : 1.0) * side_pow(q.depth, d) / lambda2;
  return PackingAudit{lhs, rhs, lhs <= rhs * (1.0 + kContentRelTol), int(j0)};
}

}  // namespace dhc

"""Equivalence relations on curves carrying one extra marked point, class
keys built from chart cross-ratio tuples, and injectivity verification.

Quotient classes are handled through representatives: two curves are
related at a label rho when they are equal up to vertex relabeling, or
share the same stabilized base curve and both lie in the boundary locus
attached to rho.  The class key pairs the base curve's canonical
serialization with the exact chart values, including the extended
quadruple at a canonically chosen vertex; equal keys are expected to
characterize the closure classes inside the chart domain.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .charts import (ChartDomainError, a_gamma, extended_basis, gamma_basis,
                     v_gamma)
from .curves import (CurveError, StableCurve, _edge_slot, cross_ratio_q,
                     forget, in_D_tilde, in_divisor, moduli_key, sample_curve)
from .exactfield import PP_INF, PP_ZERO, GaussRat, ProjPoint
from .strata import build_a_ell, build_a_ell_real, is_admissible, order_key
from .trees import (MarkedTree, RealMarkedTree, bar_mark, canonical_form,
                    canonical_vertex_order, mark_key, sort_marks, split_marks,
                    subtree_split)


class QuotientError(Exception):
    pass


# ---------------------------------------------------------------------------
# bases and relations

def extra_marks(t: MarkedTree) -> List:
    """The last mark (or conjugate pair) of a curve with one extra point."""
    if t.is_real:
        return ["%d+" % t.l, "%d-" % t.l]
    return [t.l]


def base_of(c: StableCurve) -> StableCurve:
    """Forget the extra mark(s) and stabilize."""
    drop = set(extra_marks(c.tree))
    keep = [m for m in c.tree.mu if m not in drop]
    return forget(c, keep)


def equivalent(c1: StableCurve, c2: StableCurve, rho, real: bool = False) -> bool:
    """True iff the curves are identical (up to vertex relabeling), or their
    stabilized bases coincide and both curves lie in the boundary locus of
    rho (the plain divisor for complex labels, the double-primed pushed
    forward locus for conjugate-pair labels)."""
    if bool(c1.is_real) != bool(real) or bool(c2.is_real) != bool(real):
        raise QuotientError("real flag does not match the curves")
    l = c1.tree.l - 1
    if not is_admissible(rho, l, real):
        raise QuotientError("label %r is not in the index set" % (sort_marks(rho),))
    if moduli_key(c1) == moduli_key(c2):
        return True
    rho = frozenset(rho)
    if real:
        if not (in_D_tilde(c1, rho, '"') and in_D_tilde(c2, rho, '"')):
            return False
    else:
        if not (in_divisor(c1, rho) and in_divisor(c2, rho)):
            return False
    return moduli_key(base_of(c1)) == moduli_key(base_of(c2))


def relation_labels(l: int, rho_star=(), real: bool = False) -> List[FrozenSet]:
    """The labels rho > rho* whose relations are active in the quotient."""
    if real:
        labels = [s.rho_set for s in build_a_ell_real(l)[0]]
    else:
        labels = [s.rho_set for s in build_a_ell(l)]
    if rho_star:
        k0 = order_key(rho_star)
        labels = [r for r in labels if order_key(r) > k0]
    return labels


def relation_closure(samples: Sequence[StableCurve], rho_star=(),
                     real: bool = False) -> List[List[int]]:
    """Partition of sample indices under the union of the relations above
    rho*; the union of these relations is itself an equivalence relation,
    realized here by union-find."""
    n = len(samples)
    if n == 0:
        return []
    l = samples[0].tree.l - 1
    labels = relation_labels(l, rho_star, real)

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    by_key: Dict[str, int] = {}
    for i, c in enumerate(samples):
        k = moduli_key(c)
        if k in by_key:
            union(by_key[k], i)
        else:
            by_key[k] = i

    by_base: Dict[str, List[int]] = {}
    for i, c in enumerate(samples):
        by_base.setdefault(moduli_key(base_of(c)), []).append(i)

    member = []
    for c in samples:
        if real:
            member.append({r for r in labels if in_D_tilde(c, r, '"')})
        else:
            member.append({r for r in labels if in_divisor(c, r)})

    for group in by_base.values():
        for rho in labels:
            anchor = None
            for i in group:
                if rho in member[i]:
                    if anchor is None:
                        anchor = i
                    else:
                        union(anchor, i)

    classes: Dict[int, List[int]] = {}
    for i in range(n):
        classes.setdefault(find(i), []).append(i)
    return [sorted(v) for _k, v in sorted(classes.items())]


# ---------------------------------------------------------------------------
# chart domain and class keys

def excluded_labels(t: MarkedTree, v_plus: int, rho_star=()) -> List[FrozenSet]:
    """Splits seen from v_plus's side of any node, minus the admissible
    splits realized above rho*.  The boundary loci over these labels are
    removed from the chart domain of (t, v_plus)."""
    allowed = {rho for rho, _e in a_gamma(t, rho_star)}
    out, seen = [], set()
    for e in t.oriented_edges():
        near, _far = subtree_split(t, e)
        if v_plus not in near:
            continue
        rho = split_marks(t, e)
        if rho in allowed or rho in seen:
            continue
        seen.add(rho)
        out.append(rho)
    out.sort(key=order_key)
    return out


@dataclass(frozen=True)
class ClassKey:
    """Exact class invariant: base serialization + chart value tuple.

    The tree identifier and the canonical rank of the chosen vertex pin the
    chart; the chart tuple pairs each quadruple (as text) with the exact
    serialized value of its cross ratio.
    """

    base: str
    tree: str
    v_rank: int
    chart: Tuple[Tuple[str, str], ...]

    def to_json(self) -> dict:
        return {
            "v": 1,
            "base": self.base,
            "tree": self.tree,
            "v_rank": self.v_rank,
            "chart": [[q, val] for q, val in self.chart],
        }


def class_key(c: StableCurve, rho_star=(), real: bool = False,
              v_plus_rank: Optional[int] = None) -> ClassKey:
    """The chart tuple of the curve's class, over the tree of its base.

    The chart vertex is chosen by canonical rank so that equal bases yield
    the same choice regardless of vertex numbering.  Raises
    ChartDomainError when the curve lies on an excluded boundary locus.
    """
    if bool(c.is_real) != bool(real):
        raise QuotientError("real flag does not match the curve")
    b = base_of(c)
    t = b.tree
    order = canonical_vertex_order(t)
    cands = v_gamma(t, rho_star)
    if v_plus_rank is None:
        v_plus = min(cands, key=lambda v: order[v])
    else:
        match = [v for v in cands if order[v] == v_plus_rank]
        if not match:
            raise QuotientError(
                "no admissible chart vertex with rank %r" % (v_plus_rank,))
        v_plus = match[0]
    for rho in excluded_labels(t, v_plus, rho_star):
        hit = in_D_tilde(c, rho, '"') if real else in_divisor(c, rho)
        if hit:
            raise ChartDomainError(
                "curve lies on the excluded boundary locus of rho=%r"
                % (sort_marks(rho),))
    basis = extended_basis(t, None, v_plus, rho_star)
    quads = sorted(set(basis.all_quadruples),
                   key=lambda q: tuple(mark_key(m) for m in q))
    chart = tuple(
        (",".join(str(m) for m in q), cross_ratio_q(c, q).serialize())
        for q in quads
    )
    return ClassKey(moduli_key(b), canonical_form(t), order[v_plus], chart)


def y_membership(c: StableCurve, rho, bullet: str) -> bool:
    """Membership of a representative in the boundary pieces over rho.

    Complex curves know the plain piece (bullet "0", the divisor of rho)
    and the raised piece (bullet "+", the divisor of rho plus the extra
    mark); conjugate-pair curves delegate to the full bullet tables.
    """
    rho = frozenset(rho)
    if c.is_real:
        return in_D_tilde(c, rho, bullet)
    if bullet == "0":
        return in_divisor(c, rho)
    if bullet == "+":
        return in_divisor(c, rho | {c.tree.l})
    raise QuotientError("complex boundary pieces use bullets '+' and '0' only")


# ---------------------------------------------------------------------------
# engineered placements of the extra mark over a fixed base

def add_mark(c: StableCurve, v: int, point: ProjPoint) -> StableCurve:
    """Attach the next mark at `point` on component v (with its conjugate
    at phi(v) for real curves)."""
    t = c.tree
    coords = {u: dict(sl) for u, sl in c.coords.items()}
    mu = dict(t.mu)
    if t.is_real:
        mp, mm = "%d+" % (t.l + 1), "%d-" % (t.l + 1)
        mu[mp] = v
        mu[mm] = t.phi[v]
        coords[v][("m", mp)] = point
        coords[t.phi[v]][("m", mm)] = point.conj()
        nt = RealMarkedTree(t.vertex_count, t.edges, mu, t.phi)
    else:
        mu[t.l + 1] = v
        coords[v][("m", t.l + 1)] = point
        nt = MarkedTree(t.vertex_count, t.edges, mu)
    out = StableCurve(nt, coords)
    bad = out.validate()
    if bad:
        raise QuotientError("bad placement: %r" % (bad,))
    return out


def bubble_at_mark(c: StableCurve, m, point: ProjPoint) -> StableCurve:
    """Replace the marked point m by a bubble carrying m and the next mark.

    The bubble's node sits at the old position of m; on the bubble the node
    is at infinity, m at zero and the new mark at `point`.  Real curves get
    the conjugate bubble at the conjugate mark.
    """
    t = c.tree
    if m not in t.mu:
        raise QuotientError("no mark %r" % (m,))
    if point in (PP_ZERO, PP_INF):
        raise QuotientError("bubble position must avoid the node and m")
    v = t.mu[m]
    w = t.vertex_count
    mu = dict(t.mu)
    edges = list(t.edges) + [(v, w)]
    coords = {u: dict(sl) for u, sl in c.coords.items()}
    old = coords[v].pop(("m", m))
    coords[v][_edge_slot((v, w))] = old
    mu[m] = w
    coords[w] = {_edge_slot((v, w)): PP_INF, ("m", m): PP_ZERO}
    if t.is_real:
        mp, mm = "%d+" % (t.l + 1), "%d-" % (t.l + 1)
        mu[mp] = w
        coords[w][("m", mp)] = point
        mb = bar_mark(m)
        vb = t.mu[mb]
        wb = w + 1
        edges.append((vb, wb))
        oldb = coords[vb].pop(("m", mb))
        coords[vb][_edge_slot((vb, wb))] = oldb
        mu[mb] = wb
        mu[mm] = wb
        coords[wb] = {_edge_slot((vb, wb)): PP_INF, ("m", mb): PP_ZERO,
                      ("m", mm): point.conj()}
        phi = list(t.phi) + [wb, w]
        nt = RealMarkedTree(t.vertex_count + 2, edges, mu, phi)
    else:
        mu[t.l + 1] = w
        coords[w][("m", t.l + 1)] = point
        nt = MarkedTree(t.vertex_count + 1, edges, mu)
    out = StableCurve(nt, coords)
    bad = out.validate()
    if bad:
        raise QuotientError("bad bubble: %r" % (bad,))
    return out


def mark_at_node(c: StableCurve, e, point: ProjPoint) -> StableCurve:
    """Insert the next mark on a new component separating the two sides of
    the node e; `point` is its position on the middle component."""
    t = c.tree
    e = tuple(sorted(e))
    if e not in set(t.edges):
        raise QuotientError("no edge %r" % (e,))
    u, x = e
    coords = {q: dict(sl) for q, sl in c.coords.items()}
    mu = dict(t.mu)
    if not t.is_real:
        w = t.vertex_count
        edges = [y for y in t.edges if y != e] + [(u, w), (w, x)]
        coords[u][_edge_slot((u, w))] = coords[u].pop(_edge_slot(e))
        coords[x][_edge_slot((w, x))] = coords[x].pop(_edge_slot(e))
        mu[t.l + 1] = w
        coords[w] = {_edge_slot((u, w)): PP_INF, _edge_slot((w, x)): PP_ZERO,
                     ("m", t.l + 1): point}
        nt = MarkedTree(t.vertex_count + 1, edges, mu)
        out = StableCurve(nt, coords)
        bad = out.validate()
        if bad:
            raise QuotientError("bad node insertion: %r" % (bad,))
        return out
    mp, mm = "%d+" % (t.l + 1), "%d-" % (t.l + 1)
    eb = tuple(sorted((t.phi[u], t.phi[x])))
    if eb == e:
        # the node is preserved by conjugation: one fixed middle vertex
        w = t.vertex_count
        edges = [y for y in t.edges if y != e] + [(u, w), (w, x)]
        coords[u][_edge_slot((u, w))] = coords[u].pop(_edge_slot(e))
        coords[x][_edge_slot((w, x))] = coords[x].pop(_edge_slot(e))
        mu[mp] = w
        mu[mm] = w
        if t.phi[u] == u:
            # both sides fixed: real nodes, conjugate pair of marks
            cw = {_edge_slot((u, w)): PP_INF, _edge_slot((w, x)): PP_ZERO,
                  ("m", mp): point, ("m", mm): point.conj()}
        else:
            # conjugation swaps the two sides: conjugate node positions
            i_pt = ProjPoint(GaussRat(0, 1))
            cw = {_edge_slot((u, w)): i_pt, _edge_slot((w, x)): i_pt.conj(),
                  ("m", mp): point, ("m", mm): point.conj()}
        coords[w] = cw
        phi = list(t.phi) + [w]
        nt = RealMarkedTree(t.vertex_count + 1, edges, mu, phi)
    else:
        w, wb = t.vertex_count, t.vertex_count + 1
        edges = [y for y in t.edges if y not in (e, eb)]
        edges += [(u, w), (w, x), (eb[0], wb), (wb, eb[1])]
        coords[u][_edge_slot((u, w))] = coords[u].pop(_edge_slot(e))
        coords[x][_edge_slot((w, x))] = coords[x].pop(_edge_slot(e))
        ub, xb = t.phi[u], t.phi[x]
        coords[ub][_edge_slot((ub, wb))] = coords[ub].pop(_edge_slot(eb))
        coords[xb][_edge_slot((wb, xb))] = coords[xb].pop(_edge_slot(eb))
        mu[mp] = w
        mu[mm] = wb
        coords[w] = {_edge_slot((u, w)): PP_INF, _edge_slot((w, x)): PP_ZERO,
                     ("m", mp): point}
        coords[wb] = {_edge_slot((ub, wb)): PP_INF,
                      _edge_slot((wb, xb)): PP_ZERO,
                      ("m", mm): point.conj()}
        phi = list(t.phi) + [wb, w]
        nt = RealMarkedTree(t.vertex_count + 2, edges, mu, phi)
    out = StableCurve(nt, coords)
    bad = out.validate()
    if bad:
        raise QuotientError("bad node insertion: %r" % (bad,))
    return out


def _rand_pos(rng: random.Random, bound: int) -> ProjPoint:
    # nonzero imaginary part keeps the position legal in every real
    # configuration (conjugate-distinct) and is harmless for complex ones
    return ProjPoint(GaussRat(
        Fraction(rng.randint(-bound, bound), rng.randint(1, bound)),
        Fraction(rng.randint(1, bound), rng.randint(1, bound)),
    ))


def fiber_samples(base: StableCurve, rng: random.Random, per_site: int = 2,
                  bound: int = 40) -> List[StableCurve]:
    """Extra-mark placements over one fixed base: generic positions on each
    component, bubbles at each mark, and insertions at each node.  These
    exercise every boundary case of the injectivity arguments."""
    t = base.tree
    out: List[StableCurve] = []

    def attempt(build):
        for _try in range(40):
            try:
                out.append(build(_rand_pos(rng, bound)))
                return
            except QuotientError:
                continue

    for v in range(t.vertex_count):
        for _ in range(per_site):
            attempt(lambda p, v=v: add_mark(base, v, p))
    for m in sort_marks(t.mu.keys()):
        for _ in range(per_site):
            attempt(lambda p, m=m: bubble_at_mark(base, m, p))
    seen = set()
    for e in t.edges:
        if e in seen:
            continue
        if t.is_real:
            seen.add(tuple(sorted((t.phi[e[0]], t.phi[e[1]]))))
        for _ in range(per_site):
            attempt(lambda p, e=e: mark_at_node(base, e, p))
    return out


# ---------------------------------------------------------------------------
# injectivity verification

def verify_injectivity(t: MarkedTree, rho_star=(), v_plus: Optional[int] = None,
                       n_samples: int = 200, seed=0, real: bool = False,
                       bound: int = 40) -> dict:
    """Sample extra-mark curves over bases with dual tree t, close the
    relations above rho*, and compare closure classes against class keys.

    A closure class is compared only when every member passes the chart
    domain check; classes touching an excluded locus are counted and
    skipped, since the removed loci are saturated under the relations.
    """
    if bool(t.is_real) != bool(real):
        raise QuotientError("real flag does not match the tree")
    rng = random.Random("%r:quotient" % (seed,))
    order = canonical_vertex_order(t)
    v_rank = order[v_plus] if v_plus is not None else None

    samples: List[StableCurve] = []
    base_idx = 0
    while len(samples) < n_samples:
        base = sample_curve(t, bound, (str(seed), "base", base_idx))
        base_idx += 1
        samples.extend(fiber_samples(base, rng, per_site=2, bound=bound))
        if base_idx > 200:
            raise QuotientError("could not build enough samples")

    classes = relation_closure(samples, rho_star, real=real)

    keys: List[Optional[ClassKey]] = []
    for c in samples:
        try:
            keys.append(class_key(c, rho_star, real=real, v_plus_rank=v_rank))
        except ChartDomainError:
            keys.append(None)

    cases: List[dict] = []
    in_classes: List[List[int]] = []
    skipped = 0
    for cls in classes:
        if all(keys[i] is not None for i in cls):
            in_classes.append(cls)
        else:
            skipped += 1

    intra = 0
    collisions = 0
    key_to_class: Dict[ClassKey, int] = {}
    for ci, cls in enumerate(in_classes):
        ks = {keys[i] for i in cls}
        if len(ks) > 1:
            intra += 1
            cases.append({
                "type": "intra_class_key_split",
                "members": cls[:6],
                "distinct_keys": len(ks),
            })
        for k in ks:
            if k in key_to_class and key_to_class[k] != ci:
                collisions += 1
                cases.append({
                    "type": "key_collision_across_classes",
                    "classes": [key_to_class[k], ci],
                })
            key_to_class.setdefault(k, ci)

    return {
        "v": 1,
        "l": t.l,
        "real": bool(real),
        "rho_star": [str(m) for m in sort_marks(rho_star)],
        "tree": canonical_form(t),
        "v_plus_rank": v_rank,
        "samples": len(samples),
        "in_domain": sum(1 for k in keys if k is not None),
        "classes": len(in_classes),
        "classes_out_of_domain": skipped,
        "key_collisions_across_classes": collisions,
        "intra_class_key_splits": intra,
        "cases": cases,
    }

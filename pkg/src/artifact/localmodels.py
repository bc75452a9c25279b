"""Local models of real, complex and augmented blowups with exact charts.

The model space is R^c x R^m (or C^c x R^m), blown up along Y = 0 x R^m.
Three model families are provided:

* ``real``      -- the real blowup of R^c x R^m along 0 x R^m; charts
                   indexed by i in [c], chart i parametrized by the line
                   coordinates (r_j)_{j != i} (with r_i = 1 implicit) and
                   the fiber coordinate in slot i.
* ``complex``   -- the same chart combinatorics with Gaussian-rational
                   scalars in the first c slots.
* ``augmented`` -- the two-step model for a pair (c, c1): a first family
                   of charts (k=1, i in [c1]) that are the standard charts
                   restricted to the first block, and a second family
                   (k=2, i in {0} u [c1]) parametrizing a projective-space
                   bundle over RP^{c1}; the two families are glued where
                   the v-block is nonzero.

All scalars are exact :class:`~artifact.exactfield.GaussRat`; real models
enforce a zero imaginary part.  Every operation is exact -- equality of
points and of blowdown images is literal equality of rationals.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .exactfield import GaussRat, ZERO, ONE

Scalar = GaussRat
ChartId = Tuple[int, int]


class LocalModelError(Exception):
    """Base class for local-model errors."""


class TransitionDomainError(LocalModelError):
    """The point is outside the domain of the requested chart transition."""


@dataclass(frozen=True)
class Model:
    """A blowup model: kind in {"real", "complex", "augmented"}.

    ``c`` is the codimension of the center (number of blown-up slots),
    ``c1`` the size of the first block for augmented models (None
    otherwise) and ``m`` the number of untouched base slots.
    """

    kind: str
    c: int
    m: int
    c1: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("real", "complex", "augmented"):
            raise LocalModelError("unknown model kind %r" % (self.kind,))
        if self.c < 2 or self.m < 0:
            raise LocalModelError("need c >= 2 and m >= 0")
        if self.kind == "augmented":
            if self.c1 is None or not (1 <= self.c1 < self.c):
                raise LocalModelError("augmented model needs 1 <= c1 < c")
        elif self.c1 is not None:
            raise LocalModelError("c1 only applies to augmented models")

    @property
    def c2(self) -> int:
        return self.c - self.c1 if self.c1 is not None else 0

    @property
    def is_complex(self) -> bool:
        return self.kind == "complex"

    def charts(self) -> List[ChartId]:
        """All chart ids: (1, i) for first-family, (2, i) for second."""
        if self.kind == "augmented":
            first = [(1, i) for i in range(1, self.c1 + 1)]
            second = [(2, i) for i in range(0, self.c1 + 1)]
            return first + second
        return [(1, i) for i in range(1, self.c + 1)]


#: first-class model instances used by the verification suites
PRESETS: Dict[str, Model] = {
    "real3": Model("real", c=3, m=1),
    "complex2": Model("complex", c=2, m=1),
    "aug31": Model("augmented", c=3, m=1, c1=1),
}


@dataclass(frozen=True)
class BlowupPoint:
    """A point of the blown-up model, expressed in one chart.

    ``coords`` has length c + m: the first c entries are the chart
    coordinates of the blown-up factor, the last m the base coordinates.
    """

    model: Model
    chart: ChartId
    coords: Tuple[Scalar, ...]

    def __post_init__(self):
        if self.chart not in self.model.charts():
            raise LocalModelError("chart %r not in model" % (self.chart,))
        if len(self.coords) != self.model.c + self.model.m:
            raise LocalModelError(
                "expected %d coordinates, got %d"
                % (self.model.c + self.model.m, len(self.coords))
            )
        for k, z in enumerate(self.coords):
            if not isinstance(z, GaussRat):
                raise LocalModelError("coordinate %d is not exact" % (k,))
            if (k >= self.model.c or not self.model.is_complex) and not z.is_real():
                raise LocalModelError(
                    "coordinate %d must be real in this model" % (k,)
                )

    def u(self, j: int) -> Scalar:
        """1-based access to the blown-up chart coordinates."""
        return self.coords[j - 1]

    @property
    def base(self) -> Tuple[Scalar, ...]:
        return self.coords[self.model.c:]

    def serialize(self) -> str:
        return "%s;k%d;i%d;%s" % (
            self.model.kind,
            self.chart[0],
            self.chart[1],
            ",".join(z.serialize() for z in self.coords),
        )


# ---------------------------------------------------------------------------
# blowdown maps
# ---------------------------------------------------------------------------


def blowdown(p: BlowupPoint) -> Tuple[Scalar, ...]:
    """Image of ``p`` in the model space R^c x R^m (or C^c x R^m).

    Standard chart i: slot j maps to u_j * u_i for j != i <= c, to u_i
    for j = i, and base slots are untouched.  Second-family augmented
    chart i: the first block of slots carries r_0 * r_j * |lam|^2 and the
    second block r_0 * lam_{j-c1}, where the line coordinates r and the
    fiber direction lam are read off the chart coordinates.
    """
    m = p.model
    k, i = p.chart
    if m.kind != "augmented" or k == 1:
        t = p.u(i)
        out = [p.u(j) * t for j in range(1, m.c + 1)]
        out[i - 1] = t
        return tuple(out) + p.base
    r, lam = _second_family_lift(p)
    s2 = _sum_sq(lam)
    out = [r[0] * r[j] * s2 for j in range(1, m.c1 + 1)]
    out += [r[0] * lam[j] for j in range(m.c2)]
    return tuple(out) + p.base


def _sum_sq(vals: Sequence[Scalar]) -> Scalar:
    acc = ZERO
    for z in vals:
        acc = acc + z * z
    return acc


def _second_family_lift(p: BlowupPoint) -> Tuple[List[Scalar], List[Scalar]]:
    """Line coordinates r_0..r_{c1} (with r_i = 1) and the fiber vector.

    In second-family chart i the coordinates list r_0, .., r_{i-1},
    r_{i+1}, .., r_{c1} (the slot of r_i is dropped and everything below
    shifts up by one) followed by the v-row v_{i,1..c2} = r_i * lam.
    With r_i = 1 the v-row *is* lam.
    """
    m = p.model
    _, i = p.chart
    r: List[Scalar] = [ZERO] * (m.c1 + 1)
    r[i] = ONE
    for j in range(1, i + 1):
        r[j - 1] = p.u(j)
    for j in range(i + 1, m.c1 + 1):
        r[j] = p.u(j)
    lam = [p.u(m.c1 + jp) for jp in range(1, m.c2 + 1)]
    return r, lam


# ---------------------------------------------------------------------------
# chart transitions
# ---------------------------------------------------------------------------


def transition(p: BlowupPoint, target: ChartId) -> BlowupPoint:
    """Express ``p`` in another chart of the same model.

    Raises :class:`TransitionDomainError` when the point lies outside the
    target chart's domain (the relevant line coordinate vanishes, or a
    cross-family move needs a nonzero v-block / second-block direction).
    """
    m = p.model
    if target not in m.charts():
        raise LocalModelError("chart %r not in model" % (target,))
    if target == p.chart:
        return p
    k, _ = p.chart
    kt, it = target
    if m.kind != "augmented" or (k == 1 and kt == 1):
        return _standard_transition(p, target)
    if k == 2 and kt == 2:
        return _second_to_second(p, target)
    if k == 2 and kt == 1:
        return _second_to_first(p, target)
    return _first_to_second(p, target)


def _standard_transition(p: BlowupPoint, target: ChartId) -> BlowupPoint:
    m = p.model
    _, i = p.chart
    _, it = target
    # line coordinates with r_i = 1; fiber scale t = u_i
    r = list(p.coords[: m.c])
    r[i - 1] = ONE
    t = p.u(i)
    ri = r[it - 1]
    if ri.is_zero():
        raise TransitionDomainError(
            "line coordinate %d vanishes; chart %r unreachable" % (it, target)
        )
    out = [rj / ri for rj in r]
    out[it - 1] = t * ri
    return BlowupPoint(m, target, tuple(out) + p.base)


def _chart_from_line(
    m: Model, target: ChartId, r: List[Scalar], lam: List[Scalar], base: Tuple[Scalar, ...]
) -> BlowupPoint:
    """Second-family chart coordinates from line data (r, lam)."""
    _, it = target
    ri = r[it]
    if ri.is_zero():
        raise TransitionDomainError(
            "line coordinate %d vanishes; chart %r unreachable" % (it, target)
        )
    out: List[Scalar] = []
    for j in range(1, it + 1):
        out.append(r[j - 1] / ri)
    for j in range(it + 1, m.c1 + 1):
        out.append(r[j] / ri)
    for jp in range(m.c2):
        out.append(ri * lam[jp])
    return BlowupPoint(m, target, tuple(out) + base)


def _second_to_second(p: BlowupPoint, target: ChartId) -> BlowupPoint:
    r, lam = _second_family_lift(p)
    return _chart_from_line(p.model, target, r, lam, p.base)


def _second_to_first(p: BlowupPoint, target: ChartId) -> BlowupPoint:
    """Gluing map onto the first family, defined where the v-block is nonzero.

    The glued direction in RP^{c-1} is (r_j * |lam|^2)_{j in [c1]}
    followed by lam, and the fiber scale over it is r_0.
    """
    m = p.model
    _, it = target
    r, lam = _second_family_lift(p)
    s2 = _sum_sq(lam)
    if s2.is_zero():
        raise TransitionDomainError("v-block vanishes; point not glued to first family")
    direction = [r[j] * s2 for j in range(1, m.c1 + 1)] + lam
    di = direction[it - 1]
    if di.is_zero():
        raise TransitionDomainError(
            "line coordinate %d vanishes; chart %r unreachable" % (it, target)
        )
    out = [dj / di for dj in direction]
    out[it - 1] = r[0] * di
    return BlowupPoint(m, target, tuple(out) + p.base)


def _first_to_second(p: BlowupPoint, target: ChartId) -> BlowupPoint:
    """Inverse gluing: needs a nonzero second-block line direction."""
    m = p.model
    _, i = p.chart
    rho = list(p.coords[: m.c])
    rho[i - 1] = ONE
    t = p.u(i)  # fiber scale: model slot j carries t * rho_j
    lam = rho[m.c1:]
    s2 = _sum_sq(lam)
    if s2.is_zero():
        raise TransitionDomainError(
            "second-block direction vanishes; point not glued to second family"
        )
    r = [t] + [rho_j / s2 for rho_j in rho[: m.c1]]
    return _chart_from_line(m, target, r, lam, p.base)


def cocycle_check(p: BlowupPoint, a: ChartId, a1: ChartId, a2: ChartId) -> bool:
    """Exact cocycle identity: moving p -> a2 -> a1 -> a equals p -> a2 -> a.

    ``p`` must lie in the triple-overlap domain; an out-of-domain move
    counts as failure only if the direct route succeeds (and vice versa).
    """
    try:
        q2 = transition(p, a2)
        direct = transition(q2, a)
        via = transition(transition(q2, a1), a)
    except TransitionDomainError:
        raise
    return direct.coords == via.coords and direct.chart == via.chart


# ---------------------------------------------------------------------------
# exceptional locus
# ---------------------------------------------------------------------------

OFF = "off"
EXC = "E"
E_ZERO = "E0"
E_MINUS = "E-"
E_BOTH = "E0&E-"


def exceptional_classify(p: BlowupPoint) -> str:
    """Locus tag of ``p``.

    Standard models: "E" iff the fiber coordinate u_i vanishes, else
    "off".  Augmented models: first-family charts only meet the lower
    stratum ("E-" iff u_i = 0); second-family chart i has "E0" iff the
    v-block vanishes and "E-" iff i >= 1 and the zeroth line coordinate
    u_1 vanishes (chart 0 normalizes r_0 = 1 and misses E- entirely).
    """
    m = p.model
    k, i = p.chart
    if m.kind != "augmented":
        return EXC if p.u(i).is_zero() else OFF
    if k == 1:
        return E_MINUS if p.u(i).is_zero() else OFF
    e0 = all(p.u(m.c1 + jp).is_zero() for jp in range(1, m.c2 + 1))
    em = i >= 1 and p.u(1).is_zero()
    if e0 and em:
        return E_BOTH
    if e0:
        return E_ZERO
    if em:
        return E_MINUS
    return OFF


# ---------------------------------------------------------------------------
# blowup-recognition relations
# ---------------------------------------------------------------------------


def lemma_hypothesis_check(
    model: Model,
    p: BlowupPoint,
    base_chart: Optional[ChartId] = None,
    image: Optional[Tuple[Scalar, ...]] = None,
) -> Dict[str, object]:
    """Verify, exactly at ``p``, the relations that recognize a blowup.

    For a standard chart i the composite of the blowdown with the j-th
    model coordinate must equal u_j * u_i for j in [c]-{i} and u_j for
    j = i or j > c.  For a second-family augmented chart i the first
    block must carry the factor S = sum of squared v-block coordinates:

        slot j = S * u_j                 if i = 0, j <= c1
        slot j = S * u_1 * u_j           if 1 <= i < j <= c1
        slot j = S * u_1                 if i = j
        slot j = S * u_1 * u_{j+1}       if j < i
        slot j = u_j * (1 if i = 0 else u_1)   if c1 < j <= c

    ``image`` optionally supplies the claimed composite values (defaults
    to the honest blowdown of ``p``); passing the blowdown of a different
    chart presentation exposes a corrupted chart.  Returns a report dict
    with one boolean per relation and ``all_ok``.
    """
    if base_chart is not None and base_chart != p.chart:
        raise LocalModelError("point must be sampled in the base chart")
    m = p.model
    k, i = p.chart
    img = blowdown(p) if image is None else image
    checks: Dict[str, bool] = {}
    if m.kind != "augmented" or k == 1:
        t = p.u(i)
        for j in range(1, m.c + 1):
            expect = t if j == i else p.u(j) * t
            checks["slot%d" % j] = img[j - 1] == expect
    else:
        s2 = _sum_sq([p.u(m.c1 + jp) for jp in range(1, m.c2 + 1)])
        r0 = ONE if i == 0 else p.u(1)
        for j in range(1, m.c1 + 1):
            if i == 0:
                expect = s2 * p.u(j)
            elif j == i:
                expect = s2 * p.u(1)
            elif j > i:
                expect = s2 * p.u(1) * p.u(j)
            else:
                expect = s2 * p.u(1) * p.u(j + 1)
            checks["slot%d" % j] = img[j - 1] == expect
        for j in range(m.c1 + 1, m.c + 1):
            checks["slot%d" % j] = img[j - 1] == r0 * p.u(j)
    for j in range(m.c + 1, m.c + m.m + 1):
        checks["base%d" % (j - m.c)] = img[j - 1] == p.coords[j - 1]
    report = dict(checks)
    report["all_ok"] = all(checks.values())
    return report


def corrupted_chart_control(model: Model, p: BlowupPoint) -> bool:
    """Negative control: a chart with two swapped coordinates must fail.

    Swaps the first two chart coordinates of ``p`` (perturbing one of
    them if they happen to coincide) and checks that the corrupted chart
    no longer satisfies the blowup-recognition relations against the
    honest blowdown image.  Returns True iff the relations fail.
    """
    swapped = list(p.coords)
    swapped[0], swapped[1] = swapped[1], swapped[0]
    if tuple(swapped) == p.coords:
        swapped[0] = swapped[0] + ONE
    q = BlowupPoint(model, p.chart, tuple(swapped))
    rep = lemma_hypothesis_check(model, q, image=blowdown(p))
    return not rep["all_ok"]


# ---------------------------------------------------------------------------
# exact sampling
# ---------------------------------------------------------------------------


def sample_point(
    model: Model, chart: ChartId, rng: random.Random, bound: int = 20,
    avoid_zero: bool = False,
) -> BlowupPoint:
    """A random exact point of ``chart``; ``avoid_zero`` makes every
    coordinate nonzero (convenient for overlap sampling)."""

    def scalar(cplx: bool) -> Scalar:
        def frac() -> Fraction:
            n = rng.randint(-bound, bound)
            if avoid_zero and n == 0:
                n = rng.choice([-1, 1]) * rng.randint(1, bound)
            return Fraction(n, rng.randint(1, bound))
        return GaussRat(frac(), frac() if cplx else 0)

    coords = tuple(
        scalar(model.is_complex and j < model.c)
        for j in range(model.c + model.m)
    )
    return BlowupPoint(model, chart, coords)


def verify_model(
    preset: str, n_samples: int = 500, seed: int = 0, bound: int = 20
) -> Dict[str, object]:
    """Full exact verification run for one preset model.

    Checks, over ``n_samples`` random points: the blowup-recognition
    relations in every chart, blowdown invariance and the cocycle
    identity over all chart triples (on overlap points), and injectivity
    of the blowdown off the exceptional locus (by hashing images).
    Returns a JSON-ready report with per-relation pass counts.
    """
    model = PRESETS[preset]
    rng = random.Random("%s:%r" % (preset, seed))
    charts = model.charts()
    relation_pass: Dict[str, int] = {}
    relation_total: Dict[str, int] = {}
    cocycle_pass = cocycle_total = 0
    invariance_pass = invariance_total = 0
    control_pass = control_total = 0
    failures: List[str] = []
    image_index: Dict[Tuple[str, ...], str] = {}
    injective = True

    for n in range(n_samples):
        chart = charts[n % len(charts)]
        p = sample_point(model, chart, rng, bound=bound, avoid_zero=True)
        rep = lemma_hypothesis_check(model, p)
        for name, ok in rep.items():
            if name == "all_ok":
                continue
            key = "%s:k%d:%s" % (preset, chart[0], name)
            relation_total[key] = relation_total.get(key, 0) + 1
            relation_pass[key] = relation_pass.get(key, 0) + bool(ok)
            if not ok:
                failures.append("relation %s at %s" % (name, p.serialize()))
        control_total += 1
        if corrupted_chart_control(model, p):
            control_pass += 1
        else:
            failures.append("negative control passed at %s" % p.serialize())
        img = tuple(z.serialize() for z in blowdown(p))
        for target in charts:
            try:
                q = transition(p, target)
            except TransitionDomainError:
                continue
            invariance_total += 1
            if tuple(z.serialize() for z in blowdown(q)) == img:
                invariance_pass += 1
            else:
                failures.append(
                    "blowdown not invariant %r -> %r" % (p.chart, target)
                )
        for a, a1 in itertools.product(charts, repeat=2):
            if a == a1 == p.chart:
                continue
            try:
                ok = cocycle_check(p, a, a1, p.chart)
            except TransitionDomainError:
                continue
            cocycle_total += 1
            cocycle_pass += bool(ok)
            if not ok:
                failures.append(
                    "cocycle %r,%r,%r at %s" % (a, a1, p.chart, p.serialize())
                )
        if exceptional_classify(p) == OFF:
            key_pt = p.serialize()
            prev = image_index.get(img)
            if prev is None:
                image_index[img] = key_pt
            # distinct chart presentations of one point share the image;
            # that is not an injectivity failure, so compare as points
            elif not _same_point(model, prev, key_pt):
                injective = False
                failures.append("blowdown collision %s vs %s" % (prev, key_pt))

    return {
        "v": 1,
        "preset": preset,
        "samples": n_samples,
        "seed": seed,
        "relations": {
            k: {"pass": relation_pass[k], "total": relation_total[k]}
            for k in sorted(relation_total)
        },
        "cocycle": {"pass": cocycle_pass, "total": cocycle_total},
        "negative_control": {"pass": control_pass, "total": control_total},
        "blowdown_invariance": {"pass": invariance_pass, "total": invariance_total},
        "injective_off_exceptional": injective,
        "failures": failures[:20],
        "ok": not failures,
    }


def _parse_point(model: Model, s: str) -> BlowupPoint:
    _, k, i, coords = s.split(";")
    return BlowupPoint(
        model,
        (int(k[1:]), int(i[1:])),
        tuple(GaussRat.parse(t) for t in coords.split(",")),
    )


def _same_point(model: Model, s1: str, s2: str) -> bool:
    """Whether two serialized points coincide in the blown-up space."""
    p1 = _parse_point(model, s1)
    p2 = _parse_point(model, s2)
    if p1.chart == p2.chart:
        return p1.coords == p2.coords
    try:
        return transition(p1, p2.chart).coords == p2.coords
    except TransitionDomainError:
        return False

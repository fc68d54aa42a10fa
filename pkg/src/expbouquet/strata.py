"""Stratification of the escaping endpoints by shifted-potential thresholds.

A stratum is indexed by a strictly increasing tuple of naturals
``<N_0, ..., N_{k-1}>``: level i demands every shifted potential from N_i on
to exceed 3i + 2.  Level 0's threshold is 2 and the empty index denotes the
set of escaping endpoints itself.

``witness_sequence`` thins an address beyond a cut index m to
min(|s_n|, floor(F^(n-m)(3k))), which caps the potential at shift m by 3k
(certified exclusion from the closure of the child stratum) while keeping
every earlier shifted potential above 3k - 1; ``witness_family`` generates a
convergent family of these witnesses with verified margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from .intervals import DEFAULT_TOL, Interval, TriBool, growth_net
from .model import (
    BudgetExceededError,
    ModelPoint,
    UnsupportedTailError,
    endpoint_height_enclosure,
    is_escaping_endpoint_address,
    potential,
    potential_floor_from,
    potential_term,
)
from .sequences import (
    ConstTail,
    Entry,
    ExpTowerTail,
    FloorPow,
    IntEntry,
    LinExpTail,
    PeriodicTail,
    SymbolSeq,
)


EXTRA_CLAIM_SHIFTS = 6


class IncomparableTailsError(ValueError):
    """The thinning min could not be resolved by a certified comparison."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class AlphaIndex:
    """Strictly increasing tuple of naturals indexing a stratum."""

    entries: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(v) for v in self.entries))
        if any(v < 0 for v in self.entries):
            raise ValueError("stratum index entries must be naturals")
        if any(a >= b for a, b in zip(self.entries, self.entries[1:], strict=False)):
            raise ValueError("stratum index must be strictly increasing")

    @property
    def dom(self) -> int:
        return len(self.entries)

    def threshold(self, i: int) -> float:
        """Constraint level of the i-th entry: 3i + 2 (so 2 at depth zero)."""
        return 3.0 * i + 2.0

    def child(self, n: int) -> "AlphaIndex":
        if self.entries and n <= self.entries[-1]:
            raise ValueError("child entry must exceed the last index entry")
        return AlphaIndex(self.entries + (int(n),))

    def to_json(self) -> list[int]:
        return list(self.entries)

    @staticmethod
    def from_json(obj) -> "AlphaIndex":
        return AlphaIndex(tuple(int(v) for v in obj))


@dataclass(frozen=True)
class WitnessReport:
    """One verified thinning witness: margins for both claims plus its distance.

    ``horizon`` is the last shift whose potential was checked explicitly;
    beyond it the tail rule's certificate covers the remaining shifts.
    """

    m: int
    witness: SymbolSeq
    claim1_margin: Interval
    claim2_bound: Interval
    distance_to_base: float
    height: Interval
    horizon: int

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "witness": self.witness.to_json(),
            "claim1_margin": self.claim1_margin.to_json(),
            "claim2_bound": self.claim2_bound.to_json(),
            "distance": self.distance_to_base,
            "height": self.height.to_json(),
            "horizon": self.horizon,
        }


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


def _checked_tail(seq: SymbolSeq):
    tail = seq.tail
    if not isinstance(tail, (ConstTail, PeriodicTail, ExpTowerTail, LinExpTail)):
        raise UnsupportedTailError(f"unsupported tail {tail!r}")
    return tail


def _threshold_holds_from(seq: SymbolSeq, start: int, threshold: float,
                          budget: int) -> TriBool:
    """Certify potential(seq, n) > threshold for every n >= start."""
    kind, n1 = potential_floor_from(seq, threshold)
    if kind == "below" and n1 is not None:
        probe = potential(seq, max(start, n1))
        tri = probe.tri_gt(threshold)
        if tri.is_false:
            return TriBool.no(probe)
        return TriBool.unknown(probe)
    if kind != "above" or n1 is None:
        return TriBool.unknown(None)
    if n1 - start > budget:
        raise BudgetExceededError("explicit threshold window exceeds budget")
    for n in range(start, n1):
        tri = potential(seq, n).tri_gt(threshold)
        if not tri.is_true:
            return tri
    return TriBool.yes()


def in_stratum(alpha: AlphaIndex, x: ModelPoint, tol: float = DEFAULT_TOL,
               budget: int = 100000) -> TriBool:
    """Certified membership of a model point in the stratum indexed by alpha.

    Requires the escaping-endpoint certificate (the height sits in a
    below-tolerance enclosure of the endpoint height, and the address's
    shifted potentials diverge), then every threshold constraint of alpha,
    decided finitely: explicit shifts up to the rule's stabilization index,
    the rest by the rule's certified tail behavior.
    """
    _checked_tail(x.seq)

    escaping = is_escaping_endpoint_address(x.seq)
    if not escaping.is_true:
        return TriBool.no(escaping.evidence) if escaping.is_false else escaping

    enc = endpoint_height_enclosure(x.seq, tol)
    if enc.width > tol:
        return TriBool.unknown(enc)
    if x.t < enc.lo - tol or x.t > enc.hi + tol:
        return TriBool.no(enc)

    for i in range(alpha.dom):
        tri = _threshold_holds_from(x.seq, alpha.entries[i], alpha.threshold(i), budget)
        if not tri.is_true:
            return tri
    return TriBool.yes()


def extension_index(alpha: AlphaIndex, x: ModelPoint, n_floor: int = 0,
                    tol: float = DEFAULT_TOL, budget: int = 100000) -> int:
    """Least N extending alpha with certified membership of x in the child stratum.

    Terminates for certified members because their shifted potentials diverge.
    """
    member = in_stratum(alpha, x, tol, budget)
    if not member.is_true:
        raise ValueError("extension_index requires a certified stratum member")
    threshold = alpha.threshold(alpha.dom)
    # a nonempty index forces strict growth; n_floor itself stays admissible
    floor = max(alpha.entries[-1] + 1 if alpha.entries else 0, n_floor)

    kind, n1 = potential_floor_from(x.seq, threshold)
    if kind != "above" or n1 is None:
        raise BudgetExceededError("no certified divergence index for the child threshold")
    # potentials are certified above the threshold from n1 on; the least valid N
    # is just past the last certified-or-possible violation below n1
    candidate = n1
    n = n1 - 1
    while n >= floor:
        if not potential(x.seq, n).certainly_gt(threshold):
            break
        candidate = n
        n -= 1
    candidate = max(candidate, floor)
    check = _threshold_holds_from(x.seq, candidate, threshold, budget)
    if not check.is_true:
        raise BudgetExceededError("could not certify the extension membership")
    return candidate


# ---------------------------------------------------------------------------
# witness construction
# ---------------------------------------------------------------------------


def _entry_abs_vs_tower(entry: Entry, cap: FloorPow) -> str:
    """Compare |entry| against a floor tower: 'entry', 'cap', or 'unknown'.

    floor monotonicity: A <= B certifies floor(A) <= floor(B), so interval
    separation of the underlying reals decides the min.
    """
    ev = entry.as_int()
    cv = cap.as_int()
    if ev is not None and cv is not None:
        return "entry" if abs(ev) <= cv else "cap"
    a = entry.abs_interval()
    b = cap.tower()
    if ev is not None and b.lo >= abs(ev) + 1:
        return "entry"
    if a.hi <= b.lo - 1.0:
        return "entry"
    if b.hi <= a.lo - 1.0 or (cv is not None and a.lo >= cv + 1):
        return "cap"
    return "unknown"


def _strip_compare(base_c: int, base_exp: int, cap_c: int, cap_exp: int) -> str:
    """Compare F^base_exp(base_c) vs F^cap_exp(cap_c) by stripping matched growth steps.

    Returns 'base_smaller', 'cap_smaller', or 'unknown'; growth is strictly
    increasing, so stripping the shared exponent preserves the order.
    """
    common = min(base_exp, cap_exp)
    lhs = growth_net(base_c, base_exp - common)
    rhs = growth_net(cap_c, cap_exp - common)
    if lhs.hi < rhs.lo:
        return "base_smaller"
    if rhs.hi < lhs.lo:
        return "cap_smaller"
    return "unknown"


def witness_sequence(base: SymbolSeq, alpha: AlphaIndex, m: int) -> SymbolSeq:
    """The thinned address: base entries through m, then min(|s_n|, floor(F^(n-m)(3k))).

    The min is resolved entry-wise near the cut and rule-wise beyond it, by a
    single certified comparison with matched growth applications stripped.
    """
    tail = _checked_tail(base)
    if not isinstance(tail, (ExpTowerTail, LinExpTail)):
        raise IncomparableTailsError("witness thinning needs a diverging-tail base",
                                     {"tail": tail.kind})
    if alpha.dom < 1:
        raise ValueError("witness thinning needs an index of depth >= 1")
    if m < 0:
        raise ValueError("cut index must be a natural")
    cap_c = 3 * alpha.dom
    p = len(base.prefix)

    prefix: list[Entry] = [base.entry(n) for n in range(m + 1)]

    if isinstance(tail, ExpTowerTail):
        anchor = tail.resolved_anchor(p)
        # per-entry resolution while still inside the base prefix
        n = m + 1
        while n < p:
            cap = FloorPow(cap_c, n - m)
            pick = _entry_abs_vs_tower(base.entry(n), cap)
            if pick == "unknown":
                raise IncomparableTailsError(
                    "prefix entry incomparable with the thinning cap",
                    {"n": n, "entry": base.entry(n).to_json(), "cap": cap.to_json()})
            if pick == "entry":
                e = base.entry(n)
                v = e.as_int()
                prefix.append(IntEntry(abs(v)) if v is not None else e)
            else:
                prefix.append(cap)
            n += 1
        # beyond the prefix both sides are towers with exponents shifting in
        # lockstep, so one stripped comparison decides every remaining index
        verdict = _strip_compare(tail.c, m - anchor, cap_c, 0)
        if verdict == "unknown":
            raise IncomparableTailsError(
                "tower tails incomparable after stripping",
                {"base_c": tail.c, "base_exp": m - anchor, "cap_c": cap_c})
        if verdict == "cap_smaller":
            new_tail = ExpTowerTail(cap_c, anchor=m)
        else:
            new_tail = ExpTowerTail(tail.c, anchor=anchor)
        return SymbolSeq(tuple(prefix), new_tail)

    # ramp base: the cap tower eventually dominates the single exponential,
    # so a finite scan resolves the min entry-wise up to a certified crossover
    n = m + 1
    budget = 100000
    while True:
        if n - m > budget:
            raise IncomparableTailsError("no certified crossover within budget",
                                         {"m": m, "n": n})
        if n < p:
            cap = FloorPow(cap_c, n - m)
            pick = _entry_abs_vs_tower(base.entry(n), cap)
            if pick == "unknown":
                raise IncomparableTailsError(
                    "prefix entry incomparable with the thinning cap",
                    {"n": n, "entry": base.entry(n).to_json(), "cap": cap.to_json()})
            if pick == "entry":
                e = base.entry(n)
                v = e.as_int()
                prefix.append(IntEntry(abs(v)) if v is not None else e)
            else:
                prefix.append(cap)
            n += 1
            continue
        arg = tail.arg(n)
        # base entry ceil(F(arg)) stays below the cap for every n' >= n once
        # F^(n-m-1)(cap_c) >= arg + 1 and e^(arg+1) >= arg + rate + 2; both
        # persist as n grows (the tower at least squares, the ramp is linear)
        cap_below = growth_net(cap_c, n - m - 1)
        a = Interval.from_fraction(arg)
        rate_hi = Interval.from_fraction(tail.rate).hi
        if cap_below.lo >= a.hi + 1.0 and a.lo >= 1.0:
            step_ok = math.expm1(a.lo + 1.0) >= a.hi + rate_hi + 2.0 if a.lo < 700 else True
            if step_ok:
                return SymbolSeq(tuple(prefix), LinExpTail(tail.rate, tail.offset))
        cap = FloorPow(cap_c, n - m)
        entry = tail.entry_at(p, n)
        pick = _entry_abs_vs_tower(entry, cap)
        if pick == "entry":
            prefix.append(entry)
        elif pick == "cap":
            prefix.append(cap)
        else:
            raise IncomparableTailsError(
                "ramp entry incomparable with the thinning cap",
                {"n": n, "arg": str(arg)})
        n += 1


def least_witness_depth(seq: SymbolSeq, n: int, threshold: float,
                        budget: int = 512) -> int:
    """Least k >= 1 with a certified potential term F^-k |s_{n+k}| > threshold."""
    for k in range(1, budget + 1):
        if potential_term(seq, n + k, k).certainly_gt(threshold):
            return k
    raise BudgetExceededError(
        f"no certified witness depth at shift {n} for threshold {threshold}")


def _segment_depths(base: SymbolSeq, alpha: AlphaIndex, n_ext: int,
                    budget: int = 512) -> list[int]:
    """Witness depths below the extension index, each at its own segment threshold.

    Shifts below the first index entry carry no constraint; elsewhere the
    binding level is the deepest index entry at or below the shift.
    """
    depths = []
    for n in range(n_ext):
        i = sum(1 for e in alpha.entries if e <= n) - 1
        if i < 0:
            continue
        depths.append(least_witness_depth(base, n, alpha.threshold(i), budget))
    return depths


def witness_cut_index(base: SymbolSeq, alpha: AlphaIndex, n_ext: int, m_span: int,
                      budget: int = 10000) -> int:
    """The cut index m = max{n + k_n : n in [n_ext, m_span]}.

    k_n is the least depth certifying a potential term above 3*dom + 2 at
    shift n.  Enforces m_span >= n_ext + max{k_n : n < n_ext} (with the empty
    maximum read as zero), so thinning cannot clip the depths used below
    n_ext; m > m_span always holds since every k_n is at least 1.
    """
    if m_span < n_ext:
        raise ValueError("span must reach at least the extension index")
    threshold = alpha.threshold(alpha.dom)
    depths = _segment_depths(base, alpha, n_ext, budget)
    below = max(depths) if depths else 0
    if m_span < n_ext + below:
        raise ValueError(
            f"span {m_span} below the enforced minimum {n_ext + below}")
    m = 0
    for n in range(n_ext, m_span + 1):
        m = max(m, n + least_witness_depth(base, n, threshold, budget))
    return m


# ---------------------------------------------------------------------------
# distances and the witness family
# ---------------------------------------------------------------------------

_DIST_HORIZON = 60


def _entry_gap(a: Entry, b: Entry) -> float:
    """min(1, |a - b|) for the product metric, certified where it matters."""
    if a == b:
        return 0.0
    va, vb = a.as_int(), b.as_int()
    if va is not None and vb is not None:
        return min(1.0, float(abs(va - vb)))
    diff = a.abs_interval() - b.abs_interval()
    if diff.lo >= 1.0 or diff.hi <= -1.0:
        return 1.0
    if diff.contains_value(0.0):
        return 0.0 if diff.width == 0.0 else min(1.0, abs(diff.mid))
    return min(1.0, abs(diff.mid))


def address_distance(a: SymbolSeq, b: SymbolSeq, horizon: int = _DIST_HORIZON) -> float:
    """Product metric on addresses: sum of 2^-n min(1, |s_n - s'_n|)."""
    total = 0.0
    for n in range(horizon + 1):
        gap = _entry_gap(a.entry(n), b.entry(n))
        if gap:
            total += math.ldexp(gap, -n)
    return total


def point_distance(x: ModelPoint, y: ModelPoint) -> float:
    """Metric on model points: height gap plus the address product metric."""
    return abs(x.t - y.t) + address_distance(x.seq, y.seq)


def witness_family(base_point: ModelPoint, alpha: AlphaIndex, n_ext: int,
                   count: int, tol: float = DEFAULT_TOL,
                   budget: int = 100000) -> list[WitnessReport]:
    """A verified family of thinning witnesses for the child stratum at n_ext.

    Each witness is checked: every inspected shifted potential from its cut
    index on exceeds 3*dom - 1 and membership in the parent stratum is
    certified (claim one); the potential at the cut index is at most 3*dom,
    hence at least one below the closure bound 3*dom + 1 of the child stratum
    (claim two).  Cut indices strictly increase, distances to the base
    strictly decrease, and heights stay below the base height.
    """
    child = alpha.child(n_ext)
    member = in_stratum(child, base_point, tol, budget)
    if not member.is_true:
        raise ValueError("witness_family requires certified membership in the child stratum")
    if count <= 0:
        return []

    base = base_point.seq
    bound = 3.0 * alpha.dom

    depths = _segment_depths(base, alpha, n_ext)
    span = n_ext + (max(depths) if depths else 0)

    reports: list[WitnessReport] = []
    base_height = endpoint_height_enclosure(base, tol)
    last_distance = math.inf
    last_m = -1
    for _ in range(count):
        m = witness_cut_index(base, alpha, n_ext, span)
        if m <= last_m:
            m = last_m + 1
        witness = witness_sequence(base, alpha, m)

        # claim two first: the thinned potential at the cut is capped by 3*dom
        claim2 = potential(witness, m)
        if not claim2.certainly_le(bound):
            raise BudgetExceededError(f"claim-two bound not certified at m={m}")

        # claim one: inspected shifted potentials from m on exceed 3*dom - 1 ...
        claim1 = None
        for n in range(m, m + EXTRA_CLAIM_SHIFTS):
            pot_n = potential(witness, n)
            if not pot_n.certainly_gt(bound - 1.0):
                raise BudgetExceededError(f"claim-one margin not certified at shift {n}")
            if claim1 is None or pot_n.lo < claim1.lo:
                claim1 = pot_n
        tail_cert = _threshold_holds_from(witness, m + EXTRA_CLAIM_SHIFTS, bound - 1.0, budget)
        if not tail_cert.is_true:
            raise BudgetExceededError("claim-one tail certificate failed")

        height = endpoint_height_enclosure(witness, tol)
        w_point = ModelPoint(max(height.mid, 0.0), witness)
        # ... and membership in the parent stratum is certified
        parent = in_stratum(alpha, w_point, max(tol, height.width * 4.0 + 1e-15), budget)
        if not parent.is_true:
            raise BudgetExceededError(f"parent-stratum membership not certified at m={m}")
        if height.lo > base_height.hi + tol:
            raise BudgetExceededError("witness height exceeds the base height")

        distance = point_distance(w_point, base_point)
        if distance >= last_distance:
            raise BudgetExceededError("witness distances failed to decrease")

        reports.append(WitnessReport(m, witness, claim1, claim2, distance, height,
                                     m + EXTRA_CLAIM_SHIFTS - 1))
        last_distance = distance
        last_m = m
        span = max(span + 1, m)
    return reports

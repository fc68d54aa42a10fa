"""Plane dynamics for the exponential family z -> e^z + a.

Orbits, horizontal-strip itineraries, an outside-a-disk escape predicate,
Newton search for periodic cycles with multiplier classification, and a
deterministic escape-time renderer emitting a binary P6 pixmap.
"""

from __future__ import annotations

import cmath
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .intervals import TriBool, Interval

# one-step escape certificate for rendering: e^50 dwarfs any supported |a|
ESCAPE_RE = 50.0
PARAM_CAP = 10.0
TWO_PI = 2.0 * math.pi

NEWTON_TOL = 1e-10
MULTIPLIER_TOL = 1e-6
MAX_UNITY_ORDER = 12


class NoConvergenceError(ArithmeticError):
    """Newton iteration failed to reach the residual tolerance."""


def _check_param(a: complex) -> complex:
    a = complex(a)
    if abs(a) > PARAM_CAP:
        raise ValueError(f"parameter |a| = {abs(a):.3g} above the supported cap {PARAM_CAP}")
    return a


def exp_orbit(a: complex, z: complex, n: int) -> list[complex]:
    """Orbit z, f(z), ..., f^n(z) for f(z) = e^z + a.

    Stops early once the real part exceeds the escape guard: the last listed
    point is the first guard-exceeding iterate and later values are omitted.
    """
    a = _check_param(a)
    pts = [complex(z)]
    for _ in range(n):
        if pts[-1].real > ESCAPE_RE:
            break
        pts.append(cmath.exp(pts[-1]) + a)
    return pts


def strip_itinerary(a: complex, z: complex, n: int) -> list[int]:
    """First n strip symbols: nearest integer to Im(f^k(z)) / 2pi, k = 0..n-1.

    Strips are centered on the lines Im = 2 pi k (nearest-integer rule).
    Entries past an escape-guard crossing are undefined and truncate the list.
    """
    a = _check_param(a)
    out: list[int] = []
    w = complex(z)
    for k in range(n):
        if k > 0:
            if w.real > ESCAPE_RE:
                break
            w = cmath.exp(w) + a
        out.append(round(w.imag / TWO_PI))
    return out


@dataclass(frozen=True)
class EscapeRecord:
    escaped: bool
    first_exceed: int | None
    itinerary: list[int]


def escape_record(a: complex, z: complex, budget: int) -> EscapeRecord:
    """Escape-guard scan with the itinerary of the pre-escape orbit."""
    a = _check_param(a)
    itinerary: list[int] = []
    w = complex(z)
    for k in range(budget):
        if w.real > ESCAPE_RE:
            return EscapeRecord(True, k, itinerary)
        itinerary.append(round(w.imag / TWO_PI))
        w = cmath.exp(w) + a
    return EscapeRecord(False, None, itinerary)


def region_stays_outside(a: complex, radius: float, z: complex,
                         budget: int) -> TriBool:
    """Whether every iterate f^n(z), n >= 1, keeps modulus at least ``radius``.

    Certified no when some inspected iterate dips inside; yes when every
    inspected iterate stays outside and the last carries the growth
    certificate Re > radius + |a| + 1 (so |f| >= e^Re - |a| stays outside);
    unknown otherwise.  The modulus reading of the region is a documented
    interpretation choice.
    """
    a = _check_param(a)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    w = complex(z)
    ok_margin = 1e-9
    for _ in range(budget):
        if w.real > 700.0:
            return TriBool.yes()
        w = cmath.exp(w) + a
        if abs(w) < radius - ok_margin:
            return TriBool.no()
        if abs(w) < radius + ok_margin:
            return TriBool.unknown(Interval.point(abs(w)))
    if w.real > radius + abs(a) + 1.0:
        return TriBool.yes()
    return TriBool.unknown(Interval.point(w.real))


@dataclass(frozen=True)
class CycleInfo:
    period: int
    points: tuple[complex, ...]
    multiplier: complex
    kind: str  # attracting | parabolic | repelling | indeterminate

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "points": [[p.real, p.imag] for p in self.points],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "kind": self.kind,
        }


def _near_root_of_unity(mult: complex, tol: float = MULTIPLIER_TOL) -> bool:
    for q in range(1, MAX_UNITY_ORDER + 1):
        w = mult ** q
        if abs(w - 1.0) <= tol * q:
            return True
    return False


def classify_multiplier(mult: complex, tol: float = MULTIPLIER_TOL) -> str:
    r = abs(mult)
    if r < 1.0 - tol:
        return "attracting"
    if r > 1.0 + tol:
        return "repelling"
    if _near_root_of_unity(mult, tol):
        return "parabolic"
    return "indeterminate"


def find_cycle(a: complex, period: int, seed: complex,
               tol: float = NEWTON_TOL, max_iter: int = 200) -> CycleInfo:
    """Newton search for a period-``period`` cycle of e^z + a from a seed.

    Solves f^period(z) = z; the derivative along the orbit is the product of
    e^(z_i), which is also the cycle multiplier at convergence.  Convergence
    means residual |f^period(z) - z| below ``tol``.
    """
    a = _check_param(a)
    if period < 1:
        raise ValueError("period must be >= 1")
    z = complex(seed)
    best_z: complex | None = None
    best_res = math.inf
    prev_res = math.inf
    for _ in range(max_iter):
        w = z
        deriv = complex(1.0)
        overflow = False
        for _ in range(period):
            if abs(w.real) > 700.0:
                overflow = True
                break
            e = cmath.exp(w)
            deriv *= e
            w = e + a
        if overflow:
            raise NoConvergenceError("orbit left the computable range during Newton")
        g = w - z
        res = abs(g)
        if res < best_res:
            best_z, best_res = z, res
        if res < 1e-15:
            break
        # once below tolerance, keep polishing while the residual still falls
        # fast; multiple roots converge linearly and need the extra digits for
        # a faithful multiplier
        if res < tol and res > 0.5 * prev_res:
            break
        prev_res = res
        gp = deriv - 1.0
        if gp == 0:
            gp = complex(1e-14)
        z = z - g / gp
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise NoConvergenceError("Newton iterate left the finite plane")
    if best_z is None or best_res >= tol:
        raise NoConvergenceError(f"no residual < {tol} within {max_iter} Newton steps")
    pts = [best_z]
    for _ in range(period - 1):
        pts.append(cmath.exp(pts[-1]) + a)
    mult = complex(1.0)
    for p in pts:
        mult *= cmath.exp(p)
    return CycleInfo(period, tuple(pts), mult, classify_multiplier(mult))


@dataclass(frozen=True)
class Viewport:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    width_px: int
    height_px: int

    def __post_init__(self):
        if self.width_px < 1 or self.height_px < 1:
            raise ValueError("viewport needs at least one pixel per axis")
        if self.re_min > self.re_max or self.im_min > self.im_max:
            raise ValueError("viewport bounds are inverted")
        if (self.width_px > 1 and self.re_min == self.re_max) or (
                self.height_px > 1 and self.im_min == self.im_max):
            raise ValueError("degenerate viewport for a multi-pixel axis")


@dataclass(frozen=True)
class RenderSummary:
    escaped_pixels: int
    retained_pixels: int
    content_hash: str
    path: str

    def to_json(self) -> dict:
        return {
            "escaped_pixels": self.escaped_pixels,
            "retained_pixels": self.retained_pixels,
            "hash": self.content_hash,
            "path": self.path,
        }


def escape_times(a: complex, viewport: Viewport, max_iter: int,
                 escape_re: float = ESCAPE_RE) -> np.ndarray:
    """Escape-time grid: first n with Re(f^n(z)) > escape_re, else max_iter.

    Rows run top-down (first row at im_max); vectorized and deterministic.
    """
    a = _check_param(a)
    re = np.linspace(viewport.re_min, viewport.re_max, viewport.width_px)
    im = np.linspace(viewport.im_max, viewport.im_min, viewport.height_px)
    z = re[np.newaxis, :] + 1j * im[:, np.newaxis]
    times = np.full(z.shape, max_iter, dtype=np.int32)
    alive = np.ones(z.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        for n in range(max_iter):
            esc = alive & (z.real > escape_re)
            times[esc] = n
            alive &= ~esc
            if not alive.any():
                break
            zn = np.where(alive, z, 0.0)
            z = np.where(alive, np.exp(zn) + a, z)
            bad = alive & ~np.isfinite(z)
            # a non-finite iterate can only come from a huge real part
            times[bad] = n + 1
            alive &= ~bad
    return times


def render_escape(a: complex, viewport: Viewport, max_iter: int, path: str,
                  escape_re: float = ESCAPE_RE) -> RenderSummary:
    """Write a binary P6 pixmap of escape times and return a summary.

    Grayscale mapping (equal RGB channels): byte = round(255 * n / max_iter),
    with non-escaping pixels at 255.  Identical parameters give bit-identical
    files; the sha256 of the file contents is reported for determinism checks.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    times = escape_times(a, viewport, max_iter, escape_re)
    escaped = int((times < max_iter).sum())
    retained = int(times.size - escaped)
    scaled = np.round(times.astype(np.float64) * (255.0 / max_iter)).astype(np.uint8)
    rgb = np.repeat(scaled[:, :, np.newaxis], 3, axis=2)
    header = f"P6\n{viewport.width_px} {viewport.height_px}\n255\n".encode("ascii")
    payload = header + rgb.tobytes()
    with open(path, "wb") as fh:
        fh.write(payload)
    digest = hashlib.sha256(payload).hexdigest()
    return RenderSummary(escaped, retained, digest, path)

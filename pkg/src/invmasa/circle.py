"""Circle rotation dynamics over the three-interval partition
[0,a), [a,4a), [4a,1) for a rotation angle a in (0, 1/4).

Points live in [0,1) as plain floats; one rotation step is a single
addition followed by one conditional subtraction, so each step costs one
ulp at most.  Long orbits can be cross-checked against recomputed anchors
in extended precision.

The first-return map to the base interval [0,a) subtracts b = 1 - 4a
modulo a: a returning orbit segment always crosses the middle interval in
exactly three steps, so its itinerary is 1 2 2 2 3...3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NotInBaseInterval

__all__ = [
    "RotationConfig",
    "RationalWitness",
    "shift",
    "interval_index",
    "interval_indices",
    "FirstReturn",
    "first_return",
    "return_closed_form",
    "orbit",
    "orbit_anchor",
    "EquidistributionStats",
    "equidistribution_stats",
    "rational_witness",
]


@dataclass(frozen=True)
class RationalWitness:
    """A small-denominator rational unusually close to a given float.

    ``quality`` is q^2 * |x - p/q|; values much below 1 mean the next
    continued-fraction partial quotient is huge and rotation orbits will
    look periodic at scale q.
    """

    p: int
    q: int
    error: float
    quality: float


def rational_witness(
    x: float,
    max_q: int = 10**6,
    quality_threshold: float = 1e-3,
) -> RationalWitness | None:
    """Continued-fraction scan for a near-rational collapse of ``x``.

    Walks the (exact, terminating) continued fraction of the binary float
    ``x`` and returns the best convergent with denominator at most
    ``max_q`` if its quality drops below the threshold, else ``None``.
    """
    exact = Fraction(x)
    num, den = exact.numerator, exact.denominator
    h1, h2 = 1, 0
    k1, k2 = 0, 1
    best: RationalWitness | None = None
    n, d = num, den
    while d != 0:
        digit = n // d
        n, d = d, n - digit * d
        h1, h2 = digit * h1 + h2, h1
        k1, k2 = digit * k1 + k2, k1
        if k1 > max_q:
            break
        err = abs(exact - Fraction(h1, k1))
        quality = float(err * k1 * k1)
        if best is None or quality < best.quality:
            best = RationalWitness(p=h1, q=k1, error=float(err), quality=quality)
    if best is not None and best.quality < quality_threshold:
        return best
    return None


@dataclass(frozen=True)
class RotationConfig:
    """Rotation angle a in (0, 1/4) with its derived interval partition.

    ``a`` is supplied as a decimal float, so irrationality cannot be
    certified; :meth:`warnings` flags small-denominator rational
    approximations of ``a`` and of ``4/a - 16`` (the quantity whose
    irrationality the fourth-power return map needs).
    """

    a: float

    def __post_init__(self) -> None:
        a = float(self.a)
        if not (0.0 < a < 0.25) or not math.isfinite(a):
            raise ValueError(f"rotation angle must lie in (0, 0.25), got {a!r}")
        object.__setattr__(self, "a", a)

    @property
    def b(self) -> float:
        return 1.0 - 4.0 * self.a

    @property
    def interval_lengths(self) -> tuple[float, float, float]:
        return (self.a, 3.0 * self.a, 1.0 - 4.0 * self.a)

    def warnings(self, max_q: int = 10**6) -> tuple[str, ...]:
        notes = []
        w = rational_witness(self.a, max_q)
        if w is not None:
            notes.append(
                f"angle a is close to {w.p}/{w.q} (quality {w.quality:.2e}); "
                f"orbit statistics degrade near rationals"
            )
        w = rational_witness(4.0 / self.a - 16.0, max_q)
        if w is not None:
            notes.append(
                f"4/a - 16 is close to {w.p}/{w.q} (quality {w.quality:.2e}); "
                f"the fourth power of the return map may look periodic"
            )
        return tuple(notes)


def shift(t: float, config: RotationConfig) -> float:
    """One rotation step (t + a) mod 1, via conditional subtraction."""
    s = t + config.a
    if s >= 1.0:
        s -= 1.0
    return s


def interval_index(t: float, config: RotationConfig) -> int:
    """Index of the half-open interval containing t: 1, 2 or 3."""
    if t < config.a:
        return 1
    if t < 4.0 * config.a:
        return 2
    return 3


def interval_indices(points, config: RotationConfig) -> np.ndarray:
    ts = np.asarray(points, dtype=float)
    return np.where(ts < config.a, 1, np.where(ts < 4.0 * config.a, 2, 3))


@dataclass(frozen=True)
class FirstReturn:
    t_return: float
    steps: int
    word: tuple[int, ...]


def first_return(t: float, config: RotationConfig) -> FirstReturn:
    """Iterate the rotation from t in [0,a) until it re-enters [0,a).

    The itinerary (interval index before each step) is always 1 2 2 2
    followed by zero or more 3s: starting below a, the next three points
    sweep [a,4a) in steps of a, and the remaining steps cross [4a,1) until
    the wrap.  The landing point equals ``return_closed_form(t, config)``
    up to accumulated ulps.
    """
    a = config.a
    if not (0.0 <= t < a):
        raise NotInBaseInterval(f"t = {t!r} is not in [0, {a!r})")
    word = []
    cur = t
    steps = 0
    limit = int(1.0 / a) + 3
    while True:
        word.append(interval_index(cur, config))
        cur = shift(cur, config)
        steps += 1
        if cur < a:
            return FirstReturn(t_return=cur, steps=steps, word=tuple(word))
        if steps > limit:
            raise RuntimeError("first return exceeded its step bound")


def return_closed_form(t: float, config: RotationConfig) -> float:
    """Closed form of the first-return map: (t - b) mod a with b = 1 - 4a.

    A returning segment wraps past 1 exactly once, so the landing point is
    t + n*a - 1 for some n, which is congruent to t - 1 and hence to t - b
    modulo a.
    """
    r = math.fmod(t - config.b, config.a)
    if r < 0.0:
        r += config.a
    return r


def orbit(t0: float, config: RotationConfig, steps: int) -> np.ndarray:
    """Rotation orbit [t0, t0+a, ..., t0+(steps-1)a], each entry mod 1."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    out = np.empty(steps, dtype=float)
    cur = float(t0)
    if not (0.0 <= cur < 1.0):
        cur = cur % 1.0
    for k in range(steps):
        out[k] = cur
        cur = shift(cur, config)
    return out


def orbit_anchor(t0: float, k: int, config: RotationConfig) -> float:
    """Recompute the k-th orbit point as (t0 + k*a) mod 1 in extended
    precision; used to bound drift of the stepped orbit."""
    ld = np.longdouble
    val = float((ld(t0) + ld(k) * ld(config.a)) % ld(1.0))
    if val >= 1.0:
        val -= 1.0
    return val


@dataclass(frozen=True)
class EquidistributionStats:
    frequencies: tuple[float, float, float]
    discrepancy: float
    steps: int


def equidistribution_stats(points, config: RotationConfig) -> EquidistributionStats:
    """Visit frequencies of the three intervals and their worst deviation
    from the interval lengths."""
    ts = np.asarray(points, dtype=float)
    if ts.size == 0:
        raise ValueError("orbit must be nonempty")
    idx = interval_indices(ts, config)
    freqs = tuple(float(np.count_nonzero(idx == j)) / ts.size for j in (1, 2, 3))
    lengths = config.interval_lengths
    disc = max(abs(f - l) for f, l in zip(freqs, lengths))
    return EquidistributionStats(frequencies=freqs, discrepancy=disc, steps=int(ts.size))

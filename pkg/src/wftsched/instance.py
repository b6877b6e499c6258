"""Exact numerics, jobs, instances, and the line-oriented instance format."""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


class InstanceFormatError(ValueError):
    """Raised for a malformed instance file; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def as_rational(value) -> Fraction:
    """Convert ints, strings ("3", "0.25", "3/4"), Fractions and floats exactly.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numeric inputs")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    # numpy scalars and the like
    return as_rational(value.item()) if hasattr(value, "item") else Fraction(value)


def floor_log2(x) -> int:
    """Return the unique ``i`` with ``2**i <= x < 2**(i+1)``, exactly."""
    return _floor_log2(as_rational(x))


@functools.lru_cache(maxsize=65536)
def _floor_log2(x: Fraction) -> int:
    if x <= 0:
        raise ValueError(f"floor_log2 needs a positive argument, got {x}")
    n, d = x.numerator, x.denominator
    k = n.bit_length() - d.bit_length()
    # 2**k <= x  <=>  n >= d * 2**k
    if (n << -k if k < 0 else n) < (d if k < 0 else d << k):
        k -= 1
    return k


@functools.lru_cache(maxsize=1024)
def pow2(i: int) -> Fraction:
    return Fraction(1 << i) if i >= 0 else Fraction(1, 1 << -i)


@dataclass(frozen=True)
class Job:
    index: int
    release: Fraction
    proc: Fraction
    weight: Fraction

    def __post_init__(self):
        object.__setattr__(self, "release", as_rational(self.release))
        object.__setattr__(self, "proc", as_rational(self.proc))
        object.__setattr__(self, "weight", as_rational(self.weight))
        if not isinstance(self.index, int) or self.index < 1:
            raise ValueError(f"job index must be a positive integer, got {self.index!r}")
        if self.proc <= 0:
            raise ValueError(f"job {self.index}: nonpositive processing time {self.proc}")
        if self.weight <= 0:
            raise ValueError(f"job {self.index}: nonpositive weight {self.weight}")
        if self.release < 0:
            raise ValueError(f"job {self.index}: negative release time {self.release}")

    @property
    def density(self) -> Fraction:
        """p(J)/w(J); note this is volume per unit weight."""
        return self.proc / self.weight


class Instance:
    """An immutable job set, ordered by (release, index)."""

    __slots__ = ("_jobs", "_by_index")

    def __init__(self, jobs: Iterable[Job]):
        jobs = sorted(jobs, key=lambda j: (j.release, j.index))
        by_index = {}
        for job in jobs:
            if job.index in by_index:
                raise ValueError(f"duplicate job index {job.index}")
            by_index[job.index] = job
        self._jobs = tuple(jobs)
        self._by_index = by_index

    @classmethod
    def from_tuples(cls, rows: Iterable[Sequence]) -> "Instance":
        """Build from ``(release, proc, weight)`` rows, indexed from 1 in order."""
        return cls(Job(i, r, p, w) for i, (r, p, w) in enumerate(rows, start=1))

    @property
    def jobs(self) -> tuple[Job, ...]:
        return self._jobs

    def job(self, index: int) -> Job:
        return self._by_index[index]

    def __len__(self):
        return len(self._jobs)

    def __iter__(self):
        return iter(self._jobs)

    def __eq__(self, other):
        return isinstance(other, Instance) and self._jobs == other._jobs

    def __hash__(self):
        return hash(self._jobs)

    def __repr__(self):
        return f"Instance({list(self._jobs)!r})"

    def with_weights(self, weights: dict[int, Fraction]) -> "Instance":
        """Copy of the instance with some weights replaced (e.g. rounded)."""
        return Instance(
            Job(j.index, j.release, j.proc, weights.get(j.index, j.weight)) for j in self._jobs
        )


@dataclass(frozen=True)
class InstanceStats:
    p_ratio: Fraction
    w_ratio: Fraction
    d_ratio: Fraction

    @property
    def min_ratio(self) -> Fraction:
        return min(self.p_ratio, self.w_ratio, self.d_ratio)


def _ratio(values: list[Fraction]) -> Fraction:
    return max(values) / min(values)


def instance_stats(inst: Instance) -> InstanceStats:
    if len(inst) == 0:
        raise ValueError("instance_stats of an empty instance")
    return InstanceStats(
        p_ratio=_ratio([j.proc for j in inst]),
        w_ratio=_ratio([j.weight for j in inst]),
        d_ratio=_ratio([j.density for j in inst]),
    )


def ceil_log2(x) -> int:
    """Smallest ``k`` with ``x <= 2**k``."""
    x = as_rational(x)
    k = floor_log2(x)
    return k if pow2(k) == x else k + 1


def format_rational(x: Fraction) -> str:
    x = as_rational(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# -- file format -----------------------------------------------------------


def _parse_number(token: str, lineno: int, what: str) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise InstanceFormatError(lineno, f"bad {what} {token!r}") from None


def parse_instance(text: str) -> Instance:
    jobs = []
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] != "job" or len(fields) != 5:
            raise InstanceFormatError(lineno, f"expected 'job <index> <release> <proc> <weight>', got {line!r}")
        try:
            index = int(fields[1])
        except ValueError:
            raise InstanceFormatError(lineno, f"bad job index {fields[1]!r}") from None
        if index < 1:
            raise InstanceFormatError(lineno, f"job index must be positive, got {index}")
        release = _parse_number(fields[2], lineno, "release time")
        proc = _parse_number(fields[3], lineno, "processing time")
        weight = _parse_number(fields[4], lineno, "weight")
        if proc <= 0:
            raise InstanceFormatError(lineno, f"nonpositive processing time {fields[3]}")
        if weight <= 0:
            raise InstanceFormatError(lineno, f"nonpositive weight {fields[4]}")
        if release < 0:
            raise InstanceFormatError(lineno, f"negative release time {fields[2]}")
        if index in seen:
            raise InstanceFormatError(lineno, f"duplicate job index {index} (first on line {seen[index]})")
        seen[index] = lineno
        jobs.append(Job(index, release, proc, weight))
    return Instance(jobs)


def serialize_instance(inst: Instance, header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for j in inst:
        lines.append(
            f"job {j.index} {format_rational(j.release)} {format_rational(j.proc)} {format_rational(j.weight)}"
        )
    return "\n".join(lines) + "\n"


# -- generation ------------------------------------------------------------

DEFAULT_PROC_RANGE = (Fraction(1, 2), Fraction(8))
DEFAULT_WEIGHT_RANGE = (Fraction(1, 2), Fraction(8))
DEFAULT_RELEASE_RANGE = (Fraction(0), Fraction(10))


def _draw(rng: random.Random, lo: Fraction, hi: Fraction, max_den: int, positive: bool) -> Fraction:
    # retry denominators until one admits a grid point inside [lo, hi]
    for _ in range(64):
        q = rng.randint(1, max_den)
        a = math.ceil(lo * q)
        b = math.floor(hi * q)
        if positive:
            a = max(a, 1)
        if a <= b:
            return Fraction(rng.randint(a, b), q)
    raise ValueError(f"no rational with denominator <= {max_den} in [{lo}, {hi}]")


def _check_range(name: str, rng_pair, positive: bool):
    lo, hi = (as_rational(v) for v in rng_pair)
    if lo > hi:
        raise ValueError(f"{name} range is empty: [{lo}, {hi}]")
    if positive and hi <= 0:
        raise ValueError(f"{name} range must contain positive values")
    if not positive and lo < 0:
        raise ValueError(f"{name} range must be nonnegative")
    return lo, hi


def generate_instance(
    n: int,
    seed: int,
    proc_range=DEFAULT_PROC_RANGE,
    weight_range=DEFAULT_WEIGHT_RANGE,
    release_range=DEFAULT_RELEASE_RANGE,
    max_den: int = 8,
) -> Instance:
    """Seeded uniform instance; every value is ``k/q`` with ``1 <= q <= max_den``."""
    if n < 1:
        raise ValueError(f"need at least one job, got n={n}")
    if max_den < 1:
        raise ValueError("max_den must be >= 1")
    p_lo, p_hi = _check_range("processing time", proc_range, positive=True)
    w_lo, w_hi = _check_range("weight", weight_range, positive=True)
    r_lo, r_hi = _check_range("release", release_range, positive=False)
    rng = random.Random(seed)
    jobs = []
    for idx in range(1, n + 1):
        r = _draw(rng, r_lo, r_hi, max_den, positive=False)
        p = _draw(rng, p_lo, p_hi, max_den, positive=True)
        w = _draw(rng, w_lo, w_hi, max_den, positive=True)
        jobs.append(Job(idx, r, p, w))
    return Instance(jobs)

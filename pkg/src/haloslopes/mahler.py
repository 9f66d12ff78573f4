"""Continuous functions on Z_p through truncated binomial-basis expansions.

Functions enter as sample vectors at z = 0..L-1; coefficients come out by
finite differences at 0, which only ever touch f(0..m).  Values are PAdicNum
or LambdaElt; everything here is generic over the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .iwasawa import OrderBound
from .padic_core import PadicError, val_p


class NotEnoughSamples(PadicError):
    pass


@dataclass(frozen=True)
class SampleVector:
    """Values f(0), f(1), ..., f(L-1)."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class MahlerFn:
    """f(z) = sum_{n < basis_len} coeffs[n] * C(z, n); truncation explicit."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def basis_len(self) -> int:
        return len(self.coeffs)


def mahler_from_samples(s: SampleVector, count: int) -> MahlerFn:
    """Coefficients a_m = m-th forward difference of f at 0, m < count."""
    if len(s) < count:
        raise NotEnoughSamples(f"need {count} samples, have {len(s)}")
    row = list(s.values[:count])
    coeffs = []
    for m in range(count):
        coeffs.append(row[0])
        row = [row[i + 1] - row[i] for i in range(len(row) - 1)]
    return MahlerFn(tuple(coeffs))


def evaluate(f: MahlerFn, z: int):
    """f(z) with exact integer binomials; z a nonnegative integer."""
    if not f.coeffs:
        raise NotEnoughSamples("empty basis")
    acc = None
    for n, a in enumerate(f.coeffs):
        term = math.comb(z, n) * a
        acc = term if acc is None else acc + term
    return acc


def delta_op(f: MahlerFn, m: int = 1) -> MahlerFn:
    """m-th forward difference: shifts coefficients left by m."""
    if m >= f.basis_len:
        raise NotEnoughSamples(f"difference order {m} exceeds basis {f.basis_len}")
    return MahlerFn(f.coeffs[m:])


def tilted_degree(f: MahlerFn) -> OrderBound:
    """Smallest certified n with v(a_j) >= j - n for every stored j.

    Coefficients must be PAdicNum.  A zero residue gives only v >= N; using
    that bound can overstate the degree, never understate it, so claims of
    the form "degree <= n" stay sound.  Inexact only when the maximum is
    witnessed solely by AtLeast coefficients; a floor at zero is exact by
    definition.
    """
    best = 0
    exact_hit = False
    for j, a in enumerate(f.coeffs):
        v = val_p(a)
        need = j - int(v.bound)
        if need > best:
            best, exact_hit = need, v.is_exact
        elif need == best and v.is_exact:
            exact_hit = True
    return OrderBound(best, exact_hit or best == 0)

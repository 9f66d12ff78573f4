"""Assembly of the block U_p operator from per-coset matrix data.

An operator instance is t x t blocks of monoid matrices, exactly p of them
in each block row and column.  Assembling against the ordered basis
1_0..1_{t-1}, z_0..z_{t-1}, C(z,2)_0.. gives a square matrix over the
coefficient ring whose entry bounds drive everything downstream, and the
rescaled variant conjugates by diag(T^{floor(row/t)}) to reach the
compact-in-the-halo shape.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .iwasawa import DEFAULT_TRUNC, CharOfDelta, HaloElt, LambdaElt, mlambda_order
from .monoid_action import (
    DeltaMat,
    MonoidClass,
    action_column,
    check_monoid,
    matrix_input_prec,
)
from .padic_core import InsufficientPrecision, PadicError, PrecisionTooLow, q_for


class ParseError(PadicError):
    pass


class InvariantViolation(PadicError):
    pass


class NegativePowerUncertified(PadicError):
    """A rescaled entry's certified T-order fell below its required shift."""


@dataclass(frozen=True)
class Synthetic:
    seed: int


@dataclass(frozen=True)
class Ingested:
    file: str


@dataclass(frozen=True)
class UpSpec:
    """t x t cells of monoid matrices, p per block row and block column."""

    t: int
    p: int
    N: int
    M_T: int
    cells: tuple  # ((i, j, DeltaMat), ...) in a fixed order
    provenance: object

    def cell(self, i: int, j: int) -> tuple:
        return tuple(d for (ci, cj, d) in self.cells if (ci, cj) == (i, j))

    def validate(self) -> None:
        rows = [0] * self.t
        cols = [0] * self.t
        for i, j, delta in self.cells:
            if not (0 <= i < self.t and 0 <= j < self.t):
                raise InvariantViolation(f"cell index ({i},{j}) out of range")
            if check_monoid(delta) is not MonoidClass.UpMonoid:
                raise InvariantViolation(
                    f"matrix {delta.to_json()} at cell ({i},{j}) is outside "
                    "the U_p class (needs p|a, q|c, unit d, nonzero det)"
                )
            rows[i] += 1
            cols[j] += 1
        if len(self.cells) != self.p * self.t:
            raise InvariantViolation(
                f"expected {self.p * self.t} matrices, found {len(self.cells)}"
            )
        for i, count in enumerate(rows):
            if count != self.p:
                raise InvariantViolation(f"block row {i} holds {count} != p matrices")
        for j, count in enumerate(cols):
            if count != self.p:
                raise InvariantViolation(f"block column {j} holds {count} != p matrices")

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "t": self.t,
            "N": self.N,
            "cells": [
                {"i": i, "j": j, "delta": d.to_json()} for i, j, d in self.cells
            ],
        }


def synth_up(
    t: int,
    p: int,
    N: int,
    M_T: int = DEFAULT_TRUNC,
    seed: int = 0,
    arbitrary_det: bool = False,
) -> UpSpec:
    """Random operator data: p uniform permutations place one matrix each.

    Within every column block the p translation parts b hit distinct residues
    mod p, so the image disks partition Z_p the way coset representatives of a
    genuine operator do; without this the summed columns degenerate and the
    characteristic coefficients cancel far past their valuation floor.

    Default determinants have valuation exactly 1; arbitrary_det allows any
    nonvanishing determinant.
    """
    rng = random.Random(seed)
    q = q_for(p)
    rows = []
    for _ in range(p):
        sigma = list(range(t))
        rng.shuffle(sigma)
        rows.append(sigma)
    cells = []
    span = p**6
    for j in range(t):
        translations = list(range(p))
        rng.shuffle(translations)
        for k in range(p):
            i = rows[k][j]
            while True:
                alpha = rng.randrange(1, span)
                b = translations[k] + p * rng.randrange(span)
                gamma = rng.randrange(span)
                d = rng.randrange(1, span)
                if d % p == 0:
                    continue
                delta = DeltaMat.from_ints(p, N, p * alpha, b, q * gamma, d)
                det = delta.det().residue
                if det == 0:
                    continue
                # p | a and q | c force v(det) >= 1; default keeps it exactly 1
                if arbitrary_det or det % p**2 != 0:
                    break
            cells.append((i, j, delta))
    cells.sort(key=lambda c: (c[0], c[1]))
    return UpSpec(t, p, N, M_T, tuple(cells), Synthetic(seed))


def save_up(spec: UpSpec, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(spec.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_up(path: str, M_T: int = DEFAULT_TRUNC) -> UpSpec:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read operator file {path}: {exc}") from exc
    try:
        p, t, n = int(obj["p"]), int(obj["t"]), int(obj["N"])
        cells = tuple(
            (int(c["i"]), int(c["j"]), DeltaMat.from_json(c["delta"], p, n))
            for c in obj["cells"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed operator file {path}: {exc}") from exc
    spec = UpSpec(t, p, n, int(obj.get("M_T", M_T)), cells, Ingested(path))
    spec.validate()
    return spec


@dataclass(frozen=True)
class BlockMatrix:
    """Square matrix over the coefficient ring, rows/cols indexed m*t + i."""

    t: int
    entries: tuple  # entries[row][col]

    @property
    def size(self) -> int:
        return len(self.entries)

    def entry(self, row: int, col: int):
        return self.entries[row][col]


def attainable_target(p: int, size: int, trunc: int, N: int) -> int:
    """Largest output precision the budget allows for entries of this size."""
    nt = N
    while nt > 0 and matrix_input_prec(p, size, trunc, nt) > N:
        nt -= 1
    return nt


def assemble(spec: UpSpec, n_blocks: int, omega: CharOfDelta) -> BlockMatrix:
    """Entry ((m,i),(n,j)) = sum over cell (i,j) of P_{m,n}(delta).

    Output component i collects the matrices stored at (i, j) applied to
    input component j.  All entries share the largest certifiable precision.
    Invariants are checked where specs enter the system (synthesis, file
    ingestion), not here, so partial cell lists can be assembled and summed.
    """
    p, t, trunc = spec.p, spec.t, spec.M_T
    n_target = attainable_target(p, n_blocks, trunc, spec.N)
    if n_target <= 0:
        raise InsufficientPrecision(
            f"operator data at precision {spec.N} cannot certify any digits "
            f"for {n_blocks} basis blocks"
        )
    size = t * n_blocks
    zero = LambdaElt.zero(p, n_target, trunc)
    grid = [[zero for _ in range(size)] for _ in range(size)]
    for i, j, delta in spec.cells:
        for n in range(n_blocks):
            col = action_column(delta, n, omega, n_blocks - 1, trunc, n_target)
            for m in range(n_blocks):
                row_idx, col_idx = m * t + i, n * t + j
                grid[row_idx][col_idx] = grid[row_idx][col_idx] + col.entries[m]
    return BlockMatrix(t, tuple(tuple(r) for r in grid))


def block_bound(row: int, col: int, t: int, p: int) -> int:
    return max(row // t - col // (p * t), 0)


def verify_block_bounds(mat: BlockMatrix, p: int) -> tuple:
    """Certify the block-level entry bound; returns violations as a tuple.

    Entries whose order can neither be certified nor refuted (zero residues
    at too low a precision) raise rather than mislabel.
    """
    t = mat.t
    violations = []
    for row in range(mat.size):
        for col in range(mat.size):
            need = block_bound(row, col, t, p)
            if need == 0:
                continue
            order = mlambda_order(mat.entry(row, col))
            if order.certainly_at_least(need):
                continue
            if order.is_exact:
                violations.append((row, col, order))
            else:
                raise PrecisionTooLow(
                    f"entry ({row},{col}) certifies only order {order.value}, "
                    f"bound {need} undecidable"
                )
    return tuple(violations)


def rescale_halo_basis(mat: BlockMatrix, t: int, p: int) -> BlockMatrix:
    """Conjugate by diag(T^{floor(row/t)}); entries become shifted elements.

    Column col of the result must consist of elements of halo T-order at
    least floor(col/t) - floor(col/pt); entries whose certified order falls
    short (a precision failure, the mathematics guarantees the bound) raise
    NegativePowerUncertified.
    """
    out = []
    for row in range(mat.size):
        line = []
        for col in range(mat.size):
            shifted = HaloElt(col // t - row // t, mat.entry(row, col))
            need = col // t - col // (p * t)
            if not shifted.halo_T_order().certainly_at_least(need):
                raise NegativePowerUncertified(
                    f"entry ({row},{col}) certifies halo order "
                    f"{shifted.halo_T_order().value}, need {need}"
                )
            line.append(shifted)
        out.append(tuple(line))
    return BlockMatrix(t, tuple(out))

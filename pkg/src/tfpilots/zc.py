"""Zadoff-Chu pilot families: 1D, separable, and stacked.

All generators return unit-energy pilots (prefactor ``1/sqrt(L)`` or
``1/sqrt(M N)``); correlation properties are scale free.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import gcd, sqrt
from typing import Sequence

import numpy as np

from .grid import ComplexGrid

FAMILIES = ("zc1d", "separable", "stacked", "stacked_transposed")


class PilotError(ValueError):
    """Invalid pilot parameters."""


def _check_length(L: int, name: str = "L") -> None:
    if int(L) != L or L < 1:
        raise PilotError(f"{name} must be a positive integer, got {L}")
    if L % 2 == 0:
        raise PilotError(f"{name} must be odd, got {L}")


def _check_root(r: int, L: int, name: str = "r", length_name: str = "L") -> None:
    if int(r) != r:
        raise PilotError(f"{name} must be an integer, got {r}")
    if gcd(int(r), int(L)) != 1:
        raise PilotError(f"gcd({name}, {length_name}) must be 1, got gcd({r}, {L}) = {gcd(int(r), int(L))}")


def zc_sequence(L: int, r: int) -> np.ndarray:
    """Unit-energy Zadoff-Chu sequence ``exp(-j pi r n (n+1) / L) / sqrt(L)``.

    Parameters
    ----------
    L : int
        Odd sequence length.
    r : int
        Root index, coprime to ``L``.

    Returns
    -------
    s : ndarray of complex, shape (L,)
    """
    _check_length(L)
    _check_root(r, L)
    n = np.arange(L)
    # n(n+1) is even, reduce mod 2L before scaling to keep the phase small
    phase = (int(r) * n * (n + 1)) % (2 * L)
    return np.exp(-1j * np.pi * phase / L) / sqrt(L)


def default_roots(M: int, N: int) -> list[int]:
    """The ``M`` smallest positive integers coprime to ``N``, ascending."""
    _check_length(N, "N")
    roots: list[int] = []
    r = 1
    while len(roots) < M:
        if gcd(r, N) == 1:
            roots.append(r)
        r += 1
    return roots


def default_zc1d_length(M: int, N: int, r: int = 1) -> int:
    """Largest odd ``L <= M*N`` coprime to ``r``; the 1D baseline's length."""
    L = M * N if (M * N) % 2 == 1 else M * N - 1
    while L > 1 and gcd(L, r) != 1:
        L -= 2
    return L


def separable_zc(M: int, N: int, r_f: int = 1, r_t: int = 1,
                 delta_f: float = 1.0, delta_t: float = 1.0) -> ComplexGrid:
    """Outer product of a length-``M`` and a length-``N`` ZC sequence."""
    _check_length(M, "M")
    _check_length(N, "N")
    _check_root(r_f, M, "r_f", "M")
    _check_root(r_t, N, "r_t", "N")
    F = np.outer(zc_sequence(M, r_f), zc_sequence(N, r_t))
    return ComplexGrid(F, 0, 0, delta_f, delta_t)


def _check_roots(roots: Sequence[int], M: int, N: int) -> list[int]:
    roots = [int(r) for r in roots]
    if len(roots) != M:
        raise PilotError(f"need {M} roots, got {len(roots)}")
    if len(set(roots)) != len(roots):
        raise PilotError(f"roots must be distinct, got {roots}")
    for r in roots:
        _check_root(r, N, "r_m", "N")
    return roots


def stacked_zc(M: int, N: int, roots: Sequence[int] | None = None,
               delta_f: float = 1.0, delta_t: float = 1.0) -> ComplexGrid:
    """Row ``m`` is a length-``N`` ZC sequence with its own root ``roots[m]``.

    ``roots`` defaults to :func:`default_roots`. Roots are required to be
    distinct integers; note two roots congruent mod ``N`` give the same
    sequence.
    """
    _check_length(N, "N")
    if M < 1:
        raise PilotError(f"M must be positive, got {M}")
    roots = _check_roots(default_roots(M, N) if roots is None else roots, M, N)
    G = np.stack([zc_sequence(N, r) for r in roots]) / sqrt(M)
    return ComplexGrid(G, 0, 0, delta_f, delta_t)


def stacked_transposed_zc(M: int, N: int, roots: Sequence[int] | None = None,
                          delta_f: float = 1.0, delta_t: float = 1.0) -> ComplexGrid:
    """Column ``n`` is a length-``M`` ZC sequence with root ``roots[n]``."""
    G = stacked_zc(N, M, roots)
    return ComplexGrid(G.data.T, 0, 0, delta_f, delta_t)


def zc1d_grid(L: int, r: int = 1, delta_f: float = 1.0, delta_t: float = 1.0) -> ComplexGrid:
    """1D ZC sequence occupying a single frequency row."""
    return ComplexGrid(zc_sequence(L, r)[None, :], 0, 0, delta_f, delta_t)


@dataclass(frozen=True)
class PilotSpec:
    """Which pilot to build and with what parameters.

    Unset fields (``None``) are filled by :meth:`resolved`.
    """

    family: str = "separable"
    M: int = 23
    N: int = 17
    L: int | None = None
    r: int = 1
    r_f: int = 1
    r_t: int = 1
    roots: tuple[int, ...] | None = None

    def resolved(self) -> "PilotSpec":
        if self.family not in FAMILIES:
            raise PilotError(f"unknown pilot family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        out = self
        if out.L is None:
            out = replace(out, L=default_zc1d_length(out.M, out.N, out.r))
        if out.roots is None and out.family in ("stacked", "stacked_transposed"):
            if out.family == "stacked":
                out = replace(out, roots=tuple(default_roots(out.M, out.N)))
            else:
                out = replace(out, roots=tuple(default_roots(out.N, out.M)))
        return out

    def validate(self) -> None:
        spec = self.resolved()
        if spec.family == "zc1d":
            _check_length(spec.L)
            _check_root(spec.r, spec.L)
        elif spec.family == "separable":
            _check_length(spec.M, "M")
            _check_length(spec.N, "N")
            _check_root(spec.r_f, spec.M, "r_f", "M")
            _check_root(spec.r_t, spec.N, "r_t", "N")
        elif spec.family == "stacked":
            _check_length(spec.N, "N")
            _check_roots(spec.roots, spec.M, spec.N)
        else:
            _check_length(spec.M, "M")
            _check_roots(spec.roots, spec.N, spec.M)

    @property
    def shape(self) -> tuple[int, int]:
        spec = self.resolved()
        return (1, spec.L) if spec.family == "zc1d" else (spec.M, spec.N)


def make_pilot(spec: PilotSpec, delta_f: float = 1.0, delta_t: float = 1.0) -> ComplexGrid:
    """Build the unit-energy pilot grid described by ``spec``."""
    spec = spec.resolved()
    spec.validate()
    if spec.family == "zc1d":
        return zc1d_grid(spec.L, spec.r, delta_f, delta_t)
    if spec.family == "separable":
        return separable_zc(spec.M, spec.N, spec.r_f, spec.r_t, delta_f, delta_t)
    if spec.family == "stacked":
        return stacked_zc(spec.M, spec.N, spec.roots, delta_f, delta_t)
    return stacked_transposed_zc(spec.M, spec.N, spec.roots, delta_f, delta_t)


def pilot_for_family(family: str, base: PilotSpec) -> PilotSpec:
    """Spec for ``family`` sharing ``base``'s dimensions.

    If ``base`` already is that family it is returned unchanged, keeping any
    custom roots or length. Otherwise family-specific choices (roots, 1D
    length) are reset to their defaults.
    """
    if family == base.family:
        return base.resolved()
    return PilotSpec(family=family, M=base.M, N=base.N, r=base.r,
                     r_f=base.r_f, r_t=base.r_t).resolved()

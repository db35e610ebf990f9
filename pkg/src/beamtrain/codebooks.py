"""Binary-tree hierarchical beam codebooks and their coverage validators.

Two constructions are provided for power-of-two array sizes:

* ``deact``: layer k keeps 2^k antennas active and steers them, turning the
  rest off, so beams widen as layers get coarser.
* ``bmw-ss``: beams are widened by splitting the array into sub-arrays that
  steer toward evenly spaced directions (with a phase per sub-array chosen to
  lift the crossover dips) and, on alternating layers, by deactivating half
  of the sub-arrays.  Every codeword keeps all or half of the antennas live.

Both codebooks share the same last layer of steering vectors spaced 2/N
apart, and within one layer every codeword is a beam rotation of the first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .arrays import (
    AngleGrid,
    Awv,
    CoverageSet,
    beam_coverage,
    coverage_factor_rho,
    default_grid,
    leaf_angles,
    rotate,
    steering_vector,
)

__all__ = [
    "CodebookMethod",
    "Codeword",
    "Codebook",
    "generate_codebook",
    "generate_deact",
    "generate_bmw_ss",
    "validate_criterion1",
    "validate_criterion2",
    "Criterion1Report",
    "Criterion2Report",
    "export_codebook",
    "load_codebook",
]

_FORMAT_TAG = "beamtrain-codebook-v1"


class CodebookMethod(str, Enum):
    DEACT = "deact"
    BMW_SS = "bmw-ss"


@dataclass(frozen=True, eq=False)
class Codeword:
    """One codebook entry: the weight vector at position (layer, index).

    ``index`` is 1-based within the layer, matching the binary-tree layout
    where codeword (k, n) has children (k+1, 2n-1) and (k+1, 2n).
    """

    awv: Awv
    layer: int
    index: int

    def __post_init__(self) -> None:
        if self.layer < 0 or not 1 <= self.index <= 2**self.layer:
            raise ValueError("codeword position outside the binary tree")

    @property
    def active_count(self) -> int:
        return self.awv.active_count

    @property
    def children(self) -> tuple[int, int]:
        return (2 * self.index - 1, 2 * self.index)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Layered binary tree of codewords for an N-antenna array (N a power of 2).

    ``layers[k]`` holds the 2^k codewords of layer k, k = 0..log2(N); the last
    layer consists of the steering vectors at ``leaf_angles(N)``.
    """

    n: int
    method: CodebookMethod
    layers: tuple[tuple[Codeword, ...], ...]

    @property
    def depth(self) -> int:
        """Index of the last layer, log2(N)."""
        return len(self.layers) - 1

    def codeword(self, layer: int, index: int) -> Codeword:
        """Codeword (layer, index) with a 1-based index."""
        return self.layers[layer][index - 1]

    def leaf(self, index: int) -> Codeword:
        return self.codeword(self.depth, index)

    def __iter__(self):
        for layer in self.layers:
            yield from layer


def _require_power_of_two(n: int, minimum: int) -> int:
    if n < minimum or n & (n - 1):
        raise ValueError(
            f"unsupported array size {n}: must be a power of two and >= {minimum}"
        )
    return n.bit_length() - 1


def _leaf_layer(n: int, depth: int) -> tuple[Codeword, ...]:
    return tuple(
        Codeword(awv=steering_vector(n, ang), layer=depth, index=i + 1)
        for i, ang in enumerate(leaf_angles(n))
    )


def _rotated_layer(first: Awv, layer: int) -> tuple[Codeword, ...]:
    """Fill a layer from its first codeword by rotating in steps of 2/2^k."""
    row = [Codeword(awv=first, layer=layer, index=1)]
    for idx in range(2, 2**layer + 1):
        psi = (2.0 * idx - 2.0) / 2**layer
        row.append(Codeword(awv=rotate(first, psi), layer=layer, index=idx))
    return tuple(row)


def generate_deact(n: int) -> Codebook:
    """Deactivation codebook: layer k steers 2^k antennas, zeros the rest.

    Codeword (k, n) holds the 2^k-element steering vector at
    -1 + (2n - 1)/2^k in its leading entries, padded with zeros.
    """
    depth = _require_power_of_two(n, minimum=1)
    layers = []
    for k in range(depth + 1):
        size = 2**k
        pad = np.zeros(n - size, dtype=np.complex128)
        first = Awv(np.concatenate([steering_vector(size, -1.0 + 1.0 / size).weights, pad]))
        layers.append(_rotated_layer(first, k))
    return Codebook(n=n, method=CodebookMethod.DEACT, layers=tuple(layers))


def generate_bmw_ss(n: int) -> Codebook:
    """Sub-array codebook with sub-array-level deactivation.

    Layer k = log2(N) - ell is built from M = 2^floor((ell+1)/2) sub-arrays of
    N_S = N/M antennas.  The first N_A sub-arrays (N_A = M/2 for odd ell, M for
    even ell) carry ``exp(j*theta_m) * steering_vector(N_S, -1 + (2m-1)/N_S)``
    with ``theta_m = -m*pi*(N_S-1)/N_S``; the rest are zero.  The whole vector
    is rescaled to unit power and the remaining codewords of the layer are
    beam rotations of the first.  Active antenna counts are N or N/2.
    """
    depth = _require_power_of_two(n, minimum=2)
    layers: list[tuple[Codeword, ...] | None] = [None] * (depth + 1)
    layers[depth] = _leaf_layer(n, depth)
    for ell in range(1, depth + 1):
        k = depth - ell
        m_sub = 2 ** ((ell + 1) // 2)
        n_sub = n // m_sub
        n_active_sub = m_sub if ell % 2 == 0 else m_sub // 2
        first = np.zeros(n, dtype=np.complex128)
        for m in range(1, n_active_sub + 1):
            theta_m = -m * np.pi * (n_sub - 1) / n_sub
            sub = steering_vector(n_sub, -1.0 + (2.0 * m - 1.0) / n_sub).weights
            first[(m - 1) * n_sub : m * n_sub] = np.exp(1j * theta_m) * sub
        first /= np.linalg.norm(first)
        layers[k] = _rotated_layer(Awv(first), k)
    return Codebook(n=n, method=CodebookMethod.BMW_SS, layers=tuple(layers))


def generate_codebook(method: CodebookMethod | str, n: int) -> Codebook:
    method = CodebookMethod(method)
    if method is CodebookMethod.DEACT:
        return generate_deact(n)
    return generate_bmw_ss(n)


# ---------------------------------------------------------------------------
# Criteria validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LayerReport:
    layer: int
    passed: bool
    uncovered: np.ndarray = field(repr=False)

    @property
    def n_uncovered(self) -> int:
        return int(self.uncovered.size)


@dataclass(frozen=True)
class Criterion1Report:
    """Per-layer full-domain coverage check."""

    rho: float
    layers: tuple[LayerReport, ...]

    @property
    def passed(self) -> bool:
        return all(rep.passed for rep in self.layers)

    def summary_lines(self) -> list[str]:
        lines = []
        for rep in self.layers:
            status = "pass" if rep.passed else f"FAIL ({rep.n_uncovered} uncovered points)"
            lines.append(f"criterion 1, layer {rep.layer}: {status}")
        return lines


@dataclass(frozen=True)
class ParentReport:
    layer: int
    index: int
    passed: bool
    violations: np.ndarray = field(repr=False)

    @property
    def n_violations(self) -> int:
        return int(self.violations.size)


@dataclass(frozen=True)
class Criterion2Report:
    """Per-parent check that the children's coverage contains the parent's."""

    rho: float
    parents: tuple[ParentReport, ...]

    @property
    def passed(self) -> bool:
        return all(rep.passed for rep in self.parents)

    def summary_lines(self) -> list[str]:
        lines = []
        by_layer: dict[int, list[ParentReport]] = {}
        for rep in self.parents:
            by_layer.setdefault(rep.layer, []).append(rep)
        for layer, reps in sorted(by_layer.items()):
            bad = [rep for rep in reps if not rep.passed]
            if bad:
                worst = max(rep.n_violations for rep in bad)
                lines.append(
                    f"criterion 2, layer {layer}: FAIL "
                    f"({len(bad)} of {len(reps)} parents, worst {worst} points)"
                )
            else:
                lines.append(f"criterion 2, layer {layer}: pass ({len(reps)} parents)")
        return lines


def _layer_coverages(
    layer: tuple[Codeword, ...], rho: float, grid: AngleGrid
) -> list[CoverageSet]:
    return [beam_coverage(cw.awv, rho, grid) for cw in layer]


def validate_criterion1(
    cb: Codebook, rho: float = 0.5, grid: AngleGrid | None = None
) -> Criterion1Report:
    """Check that each layer's codewords jointly cover every grid point."""
    if grid is None:
        grid = default_grid()
    reports = []
    for layer in cb.layers:
        union = np.zeros(grid.size, dtype=bool)
        for cov in _layer_coverages(layer, rho, grid):
            union |= cov.mask
        uncovered = grid.points[~union]
        reports.append(
            LayerReport(layer=layer[0].layer, passed=uncovered.size == 0, uncovered=uncovered)
        )
    return Criterion1Report(rho=rho, layers=tuple(reports))


def validate_criterion2(
    cb: Codebook,
    rho: float = 0.5,
    grid: AngleGrid | None = None,
    parent_rho: float | None = None,
) -> Criterion2Report:
    """Check that every parent's coverage sits inside its children's union.

    The children are measured at the tolerant threshold ``rho``.  Each
    parent's own claimed coverage is measured at ``parent_rho`` when given,
    otherwise at the parent's analytic coverage factor
    ``coverage_factor_rho(active_count)``.  Beams of different widths carry
    different coverage factors, and holding parent and children to one common
    tolerant threshold would inflate the parent's shoulders faster than the
    children's; the per-beam factor is the threshold at which a steered
    beam's coverage equals its designed width.
    """
    if grid is None:
        grid = default_grid()
    reports = []
    for k in range(cb.depth):
        child_cov = _layer_coverages(cb.layers[k + 1], rho, grid)
        for parent in cb.layers[k]:
            if parent_rho is not None:
                p_rho = parent_rho
            elif parent.active_count > 1:
                p_rho = coverage_factor_rho(parent.active_count)
            else:
                # A single active antenna radiates a flat pattern; its
                # coverage is the whole domain at any threshold below one.
                p_rho = rho
            parent_cov = beam_coverage(parent.awv, p_rho, grid)
            lo, hi = parent.children
            union = child_cov[lo - 1].mask | child_cov[hi - 1].mask
            violations = grid.points[parent_cov.mask & ~union]
            reports.append(
                ParentReport(
                    layer=k,
                    index=parent.index,
                    passed=violations.size == 0,
                    violations=violations,
                )
            )
    return Criterion2Report(rho=rho, parents=tuple(reports))


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------


def export_codebook(cb: Codebook, path) -> None:
    """Write a codebook as a self-describing text file.

    Layout::

        beamtrain-codebook-v1
        n <array size>
        method <deact|bmw-ss>
        depth <log2 n>
        codeword <layer> <index> <active_count> <re_1> <im_1> ... <re_N> <im_N>

    Weights are printed with 17 significant digits, which round-trips IEEE
    doubles exactly.
    """
    lines = [_FORMAT_TAG, f"n {cb.n}", f"method {cb.method.value}", f"depth {cb.depth}"]
    for cw in cb:
        parts = [f"codeword {cw.layer} {cw.index} {cw.active_count}"]
        for entry in cw.awv.weights:
            parts.append(f"{entry.real:.17e} {entry.imag:.17e}")
        lines.append(" ".join(parts))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_codebook(path) -> Codebook:
    """Read a codebook written by :func:`export_codebook` (lossless)."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0].strip() != _FORMAT_TAG:
        raise ValueError(f"not a {_FORMAT_TAG} file")
    header: dict[str, str] = {}
    body_start = 1
    for line in lines[1:]:
        key, _, value = line.partition(" ")
        if key == "codeword":
            break
        header[key] = value.strip()
        body_start += 1
    n = int(header["n"])
    method = CodebookMethod(header["method"])
    depth = int(header["depth"])
    rows: dict[tuple[int, int], Codeword] = {}
    for line in lines[body_start:]:
        if not line.strip():
            continue
        fields = line.split()
        if fields[0] != "codeword":
            raise ValueError(f"unexpected record {fields[0]!r}")
        layer, index, active = int(fields[1]), int(fields[2]), int(fields[3])
        values = np.array([float(x) for x in fields[4:]], dtype=np.float64)
        if values.size != 2 * n:
            raise ValueError(f"codeword ({layer},{index}) has {values.size // 2} weights, expected {n}")
        awv = Awv(values[0::2] + 1j * values[1::2])
        if awv.active_count != active:
            raise ValueError(f"codeword ({layer},{index}) active_count mismatch")
        rows[(layer, index)] = Codeword(awv=awv, layer=layer, index=index)
    layers = []
    for k in range(depth + 1):
        try:
            layers.append(tuple(rows[(k, i)] for i in range(1, 2**k + 1)))
        except KeyError as exc:
            raise ValueError(f"missing codeword {exc} in layer {k}") from exc
    if len(rows) != 2 ** (depth + 1) - 1:
        raise ValueError("file contains extra codeword records")
    return Codebook(n=n, method=method, layers=tuple(layers))

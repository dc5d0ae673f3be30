"""Decorated transmon chains and their one-excitation Hamiltonians.

A chain is a linear array of cells with three qubit types: backbone qubits
``A1`` and ``B`` carrying the hopping, and pendant qubits ``A2`` attached to
each ``A1`` by a single coupling.  A chain with ``n_cells`` cells has
``N = 3 * n_cells + 2`` qubits.  Restricted to the one-excitation subspace the
Hamiltonian is a real symmetric hopping matrix with zero diagonal and at most
three nonzeros per row.

Two site numberings are supported: ``cell`` order (cell by cell, pendant after
its backbone qubit) and ``symmetric`` order (corner pendants first, then the
backbone left to right, then the interior pendants), which makes the mirror
symmetry of a symmetric chain explicit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError

# Dense storage is used below this size; larger matrices stay in triplet form
# until a consumer asks for them.
DENSE_CUTOFF = 64

# Site descriptor: (qubit type, 1-based cell index).
Site = tuple


class Numbering(str, Enum):
    CELL = "cell"
    SYMMETRIC = "symmetric"


def _check_couplings(name, values, expected_len):
    if len(values) != expected_len:
        raise ValidationError(
            f"coupling list {name!r} has length {len(values)}, expected {expected_len}"
        )
    for x in values:
        if not math.isfinite(x) or x <= 0.0:
            raise ValidationError(f"coupling list {name!r} contains non-positive entry {x}")


@dataclass(frozen=True)
class ChainSpec:
    """Full coupling layout of a decorated chain.

    ``t[i]`` couples A1_{i+1} to B_{i+1} inside a cell, ``w[i]`` couples
    B_{i+1} to A1_{i+2} across cells, and ``g[i]`` couples A1_{i+1} to its
    pendant A2_{i+1}.  All couplings must be strictly positive.
    """

    n_cells: int
    t: tuple
    w: tuple
    g: tuple
    numbering: Numbering = Numbering.CELL

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValidationError(f"n_cells must be >= 1, got {self.n_cells}")
        object.__setattr__(self, "t", tuple(float(x) for x in self.t))
        object.__setattr__(self, "w", tuple(float(x) for x in self.w))
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        object.__setattr__(self, "numbering", Numbering(self.numbering))
        _check_couplings("t", self.t, self.n_cells)
        _check_couplings("w", self.w, self.n_cells)
        _check_couplings("g", self.g, self.n_cells + 1)

    @property
    def n(self):
        """Total number of qubits N = 3 n_cells + 2."""
        return 3 * self.n_cells + 2

    @property
    def k(self):
        """Symmetric-chain parameter, N = 3k + 5."""
        return self.n_cells - 1

    def with_numbering(self, numbering):
        return ChainSpec(self.n_cells, self.t, self.w, self.g, Numbering(numbering))


@dataclass(frozen=True)
class SymmetricChainSpec:
    """Mirror-symmetric chain given by its independent couplings.

    ``v`` holds the k+1 distinct backbone couplings of a chain with N = 3k+5
    qubits; ``g`` holds the mirror-independent pendant couplings (k/2+1 values
    for even k, (k+1)/2 for odd k).  For odd k the central pendant coupling is
    not independent under this counting and reuses the innermost ``g`` entry;
    chains with an independent central pendant coupling are expressed through a
    full :class:`ChainSpec`.
    """

    k: int
    v: tuple
    g: tuple

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError(f"k must be >= 0, got {self.k}")
        object.__setattr__(self, "v", tuple(float(x) for x in self.v))
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        _check_couplings("v", self.v, self.k + 1)
        n_g = self.k // 2 + 1 if self.k % 2 == 0 else (self.k + 1) // 2
        _check_couplings("g", self.g, n_g)

    @property
    def n(self):
        return 3 * self.k + 5


@dataclass(frozen=True)
class HamiltonianMatrix:
    """One-excitation Hamiltonian in sparse triplet form.

    ``corner_sites`` are the 0-based indices of the two extremal backbone
    qubits (the sender and receiver of the transfer protocol) under the
    matrix's numbering.
    """

    size: int
    rows: tuple
    cols: tuple
    vals: tuple
    numbering: Numbering
    corner_sites: tuple

    def dense(self):
        h = np.zeros((self.size, self.size))
        h[np.asarray(self.rows), np.asarray(self.cols)] = self.vals
        return h

    def sparse(self):
        return sp.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.size, self.size)
        )

    def toarray(self):
        if self.size < DENSE_CUTOFF:
            return self.dense()
        return self.sparse().toarray()


# ---------------------------------------------------------------------------
# site bookkeeping
# ---------------------------------------------------------------------------


def sites(spec):
    """All site descriptors of a chain: (type, cell) with 1-based cells."""
    out = []
    for i in range(1, spec.n_cells + 2):
        out.append(("A1", i))
        out.append(("A2", i))
        if i <= spec.n_cells:
            out.append(("B", i))
    return out


def edges(spec):
    """Weighted edge list [(site, site, coupling)] of the chain graph."""
    out = []
    for i in range(1, spec.n_cells + 2):
        out.append((("A1", i), ("A2", i), spec.g[i - 1]))
    for i in range(1, spec.n_cells + 1):
        out.append((("A1", i), ("B", i), spec.t[i - 1]))
        out.append((("B", i), ("A1", i + 1), spec.w[i - 1]))
    return out


def cell_index(site, n_cells):
    """0-based index of a site under the cell numbering."""
    kind, i = site
    base = 3 * (i - 1)
    if kind == "A1":
        return base
    if kind == "A2":
        return base + 1
    if kind == "B":
        if i > n_cells:
            raise ValidationError(f"no B qubit in cell {i}")
        return base + 2
    raise ValidationError(f"unknown site type {kind!r}")


def symmetric_index(site, n_cells):
    """0-based index of a site under the symmetric numbering.

    Order: corner pendant A2_1; backbone A1_1, B_1, ..., A1_{k+2}; corner
    pendant A2_{k+2}; interior pendants A2_2 ... A2_{k+1}.
    """
    kind, i = site
    k = n_cells - 1
    if kind == "A2":
        if i == 1:
            return 0
        if i == n_cells + 1:
            return 2 * k + 4
        return 2 * k + 4 + (i - 1)
    if kind == "A1":
        return 1 + 2 * (i - 1)
    if kind == "B":
        return 2 + 2 * (i - 1)
    raise ValidationError(f"unknown site type {kind!r}")


def site_index(site, spec):
    if spec.numbering is Numbering.CELL:
        return cell_index(site, spec.n_cells)
    return symmetric_index(site, spec.n_cells)


def mirror_site(site, n_cells):
    """Image of a site under the spatial reflection of the chain."""
    kind, i = site
    if kind == "B":
        return ("B", n_cells + 1 - i)
    return (kind, n_cells + 2 - i)


def corner_sites(spec):
    """0-based (sender, receiver) indices under the spec's numbering.

    The corners are the two extremal backbone qubits A1_1 and A1_last, the
    endpoints of the transfer protocol.
    """
    a = site_index(("A1", 1), spec)
    b = site_index(("A1", spec.n_cells + 1), spec)
    return (a, b)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def build_hamiltonian(spec):
    """One-excitation Hamiltonian of a chain under its requested numbering."""
    rows, cols, vals = [], [], []
    for a, b, c in edges(spec):
        ia, ib = site_index(a, spec), site_index(b, spec)
        rows += [ia, ib]
        cols += [ib, ia]
        vals += [c, c]
    return HamiltonianMatrix(
        size=spec.n,
        rows=tuple(rows),
        cols=tuple(cols),
        vals=tuple(vals),
        numbering=spec.numbering,
        corner_sites=corner_sites(spec),
    )


def numbering_permutation(spec):
    """Permutation pi with pi[cell index] = symmetric index.

    Conjugating the cell-order matrix by the associated permutation matrix
    yields the symmetric-order matrix.
    """
    pi = np.empty(spec.n, dtype=int)
    for s in sites(spec):
        pi[cell_index(s, spec.n_cells)] = symmetric_index(s, spec.n_cells)
    return pi


def backbone_sequence(spec):
    """Backbone couplings left to right: (t1, w1, t2, w2, ...)."""
    seq = []
    for ti, wi in zip(spec.t, spec.w):
        seq += [ti, wi]
    return tuple(seq)


def pendant_sequence(spec):
    """Pendant couplings left to right (alias for the g list)."""
    return spec.g


def is_mirror_symmetric(spec, rtol=0.0):
    """True if the coupling layout is invariant under the chain reflection."""
    seq = backbone_sequence(spec)
    ok = all(
        math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)
        for a, b in zip(seq, seq[::-1])
    )
    return ok and all(
        math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)
        for a, b in zip(spec.g, spec.g[::-1])
    )


def expand_symmetric(spec, numbering=Numbering.CELL):
    """Expand a :class:`SymmetricChainSpec` into a full :class:`ChainSpec`."""
    k = spec.k
    seq = list(spec.v) + list(spec.v[::-1])
    t = tuple(seq[0::2])
    w = tuple(seq[1::2])
    if k % 2 == 0:
        g = tuple(spec.g) + tuple(spec.g[::-1])
    else:
        # Odd k: the central pendant is self-mirror and reuses the innermost
        # independent value.
        g = tuple(spec.g) + (spec.g[-1],) + tuple(spec.g[::-1])
    return ChainSpec(n_cells=k + 1, t=t, w=w, g=g, numbering=numbering)


def homogeneous_chain(n, coupling=1.0, numbering=Numbering.CELL):
    """Chain of length ``n`` (n = 2 mod 3, n >= 5) with all couplings equal."""
    if n < 5 or n % 3 != 2:
        raise ValidationError(f"homogeneous chain length must be 2 mod 3 and >= 5, got {n}")
    n_cells = (n - 2) // 3
    c = float(coupling)
    return ChainSpec(
        n_cells=n_cells,
        t=(c,) * n_cells,
        w=(c,) * n_cells,
        g=(c,) * (n_cells + 1),
        numbering=numbering,
    )


# ---------------------------------------------------------------------------
# JSON chain-spec schema
# ---------------------------------------------------------------------------


def spec_to_dict(spec):
    if isinstance(spec, SymmetricChainSpec):
        return {"symmetric": {"k": spec.k, "v": list(spec.v), "g": list(spec.g)}}
    return {
        "n_cells": spec.n_cells,
        "t": list(spec.t),
        "w": list(spec.w),
        "g": list(spec.g),
        "numbering": spec.numbering.value,
    }


def spec_from_dict(data):
    """Parse the JSON chain-spec schema.

    Accepts the full form {"n_cells", "t", "w", "g", "numbering"}, the
    symmetric form {"symmetric": {"k", "v", "g"}} and the homogeneous
    shorthand {"homogeneous": {"N", "coupling"}}.
    """
    if not isinstance(data, dict):
        raise ValidationError("chain spec must be a JSON object")
    if "homogeneous" in data:
        body = data["homogeneous"]
        try:
            return homogeneous_chain(int(body["N"]), float(body.get("coupling", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad homogeneous shorthand: {exc}") from exc
    if "symmetric" in data:
        body = data["symmetric"]
        try:
            sym = SymmetricChainSpec(k=int(body["k"]), v=body["v"], g=body["g"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad symmetric chain spec: {exc}") from exc
        return expand_symmetric(sym)
    try:
        return ChainSpec(
            n_cells=int(data["n_cells"]),
            t=data["t"],
            w=data["w"],
            g=data["g"],
            numbering=data.get("numbering", "cell"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad chain spec: {exc}") from exc


def load_spec(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read chain spec {path}: {exc}") from exc
    return spec_from_dict(data)


def save_spec(spec, path):
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")

"""Inverse designs for perfect state transfer, dimerized bounds, PGT search.

Two closed-form inverse-eigenvalue solutions are implemented: an N=8 chain
with spectrum {+-k, +-(k+1), +-(k+2), 0, 0} and an N=11 chain with spectrum
{+-k, ..., +-(k+3), 0, 0, 0}.  Integer spectra make every frequency commensurate
so the corner-to-corner probability is exactly 1 at odd multiples of pi.

The dimerized section covers uniform (t_i=1, w_i=w, g_i=g) N=11 chains: the
exact five-frequency probability and the g-independent envelope
P_up = (w(1+w^2)/(1+w^4))^2 that caps the achievable transfer.

Pretty-good-transfer search scans a cosine series for the earliest time whose
infidelity drops below a target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import chains, dynamics
from .errors import InfeasibleDesignError, ValidationError

FAMILIES = ("n8", "n11")


def feasible_interval(family, k):
    """Open interval of admissible v1^2 for a PST family at offset ``k``.

    The bounds come from requiring every derived squared coupling to be
    strictly positive.
    """
    if k < 1:
        raise ValidationError(f"spectrum offset k must be >= 1, got {k}")
    if family == "n8":
        return ((4 * k * k + 8 * k + 3) / (k * k + 2 * k + 3), float((k + 1) ** 2))
    if family == "n11":
        return (
            1.5 * (4 * k * k + 12 * k + 5) / (2 * k * k + 2 * k + 5),
            (2 * k * k + 6 * k + 3) / 2,
        )
    raise ValidationError(f"unknown PST family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class PstDesign:
    """Solved perfect-state-transfer coupling set.

    ``couplings`` maps names (v2, g1, g2 and, for the longer family, v3) to
    values; ``target_spectrum`` is the full designed spectrum including the
    null eigenvalues.
    """

    family: str
    k: int
    v1: float
    couplings: dict
    feasible_interval: tuple
    target_spectrum: tuple

    def chain(self):
        """ChainSpec realizing the design."""
        c = self.couplings
        if self.family == "n8":
            return chains.ChainSpec(
                n_cells=2,
                t=(self.v1, c["v2"]),
                w=(c["v2"], self.v1),
                g=(c["g1"], c["g2"], c["g1"]),
            )
        return chains.ChainSpec(
            n_cells=3,
            t=(self.v1, c["v3"], c["v2"]),
            w=(c["v2"], c["v3"], self.v1),
            g=(c["g1"], c["g2"], c["g2"], c["g1"]),
        )

    def to_dict(self):
        return {
            "family": self.family,
            "k": self.k,
            "v1": self.v1,
            "couplings": dict(self.couplings),
            "feasible_interval": list(self.feasible_interval),
            "target_spectrum": list(self.target_spectrum),
        }


def _check_feasible(family, k, v1):
    lo, hi = feasible_interval(family, k)
    if not lo < v1 * v1 < hi:
        raise InfeasibleDesignError(
            f"v1^2 = {v1 * v1:g} outside the feasible interval ({lo:g}, {hi:g}) "
            f"for family {family}, k={k}",
            interval=(lo, hi),
        )
    return lo, hi


def design_pst_n8(k, v1):
    """Couplings of the N=8 chain with spectrum {+-k, +-(k+1), +-(k+2), 0^2}.

    v2 balances the characteristic-polynomial conditions, g1 follows from the
    middle branch of the quadratic system, and g2 is fixed by the trace
    identity sum(lambda^2) = ||h||_F^2.
    """
    interval = _check_feasible("n8", k, v1)
    v2_sq = (3 + 4 * k * (k + 2)) / (2 * v1 * v1)
    g1_sq = (k + 1) ** 2 - v1 * v1
    g2_sq = (3 * k * k + 6 * k + 5) - 2 * (v1 * v1 + v2_sq + g1_sq)
    if min(v2_sq, g1_sq, g2_sq) <= 0:
        raise InfeasibleDesignError(
            f"derived squared couplings not all positive for k={k}, v1={v1:g}",
            interval=interval,
        )
    spectrum = (-(k + 2), -(k + 1), -k, 0, 0, k, k + 1, k + 2)
    return PstDesign(
        family="n8",
        k=k,
        v1=float(v1),
        couplings={
            "v2": math.sqrt(v2_sq),
            "g1": math.sqrt(g1_sq),
            "g2": math.sqrt(g2_sq),
        },
        feasible_interval=interval,
        target_spectrum=spectrum,
    )


def design_pst_n11(k, v1):
    """Couplings of the N=11 chain with spectrum {+-k..+-(k+3), 0^3}."""
    interval = _check_feasible("n11", k, v1)
    v2 = math.sqrt(3 * (5 + 12 * k + 4 * k * k)) / (2 * v1)
    v3 = math.sqrt(3 + 2 * k)
    g1_sq = (3 + 6 * k + 2 * k * k - 2 * v1 * v1) / 2
    g2_sq = ((10 + 4 * k + 4 * k * k) * v1 * v1 - (15 + 36 * k + 12 * k * k)) / (
        4 * v1 * v1
    )
    if min(g1_sq, g2_sq) <= 0:
        raise InfeasibleDesignError(
            f"derived squared couplings not all positive for k={k}, v1={v1:g}",
            interval=interval,
        )
    spectrum = tuple(sorted([0, 0, 0] + [s * (k + j) for j in range(4) for s in (1, -1)]))
    return PstDesign(
        family="n11",
        k=k,
        v1=float(v1),
        couplings={
            "v2": v2,
            "v3": v3,
            "g1": math.sqrt(g1_sq),
            "g2": math.sqrt(g2_sq),
        },
        feasible_interval=interval,
        target_spectrum=spectrum,
    )


def design_pst(family, k, v1):
    """Dispatch to the requested PST family."""
    if family == "n8":
        return design_pst_n8(k, v1)
    if family == "n11":
        return design_pst_n11(k, v1)
    raise ValidationError(f"unknown PST family {family!r}; expected one of {FAMILIES}")


def probability_closed_form_pst(family, k):
    """Corner-to-corner cosine series of a PST design, independent of v1."""
    if k < 1:
        raise ValidationError(f"spectrum offset k must be >= 1, got {k}")
    if family == "n8":
        norm = 8.0 * (k + 1)
        freqs = (k, k + 1, k + 2)
        coeffs = ((2 * k + 3) / norm, -4 * (k + 1) / norm, (2 * k + 1) / norm)
    elif family == "n11":
        norm = 16.0 * (k + 1) * (k + 2)
        freqs = (k, k + 1, k + 2, k + 3)
        coeffs = (
            (10 + 9 * k + 2 * k * k) / norm,
            -3 * (5 + 7 * k + 2 * k * k) / norm,
            3 * (1 + 2 * k) * (2 + k) / norm,
            -(1 + 2 * k) * (1 + k) / norm,
        )
    else:
        raise ValidationError(f"unknown PST family {family!r}")
    return dynamics.CosineSeries(tuple(float(f) for f in freqs), coeffs)


# ---------------------------------------------------------------------------
# dimerized chains
# ---------------------------------------------------------------------------


def dimerized_upper_bound(w):
    """Envelope of the dimerized N=11 transfer probability over time and g."""
    if w <= 0:
        raise ValidationError(f"dimerization parameter w must be positive, got {w}")
    return (w * (1 + w * w) / (1 + w**4)) ** 2


def dimerized_chain(w, g):
    """Uniform dimerized N=11 chain: t_i = 1, w_i = w, g_i = g."""
    if w <= 0 or g <= 0:
        raise ValidationError("couplings w and g must be positive")
    return chains.ChainSpec(n_cells=3, t=(1.0, 1.0, 1.0), w=(w, w, w), g=(g, g, g, g))


def dimerized_series(w, g):
    """Exact five-frequency cosine series of the dimerized N=11 chain."""
    if w <= 0 or g <= 0:
        raise ValidationError("couplings w and g must be positive")
    r2 = math.sqrt(2.0)
    base = g * g + w * w + 1
    pref = w / (4 * (w * w + 1) * (w**4 + 1))
    freqs = [
        math.sqrt(base - r2 * w),
        math.sqrt(base + r2 * w),
        math.sqrt(base),
        g,
    ]
    coeffs = [
        pref * (w * w + 1) * (w * w + r2 * w + 1),
        pref * (w * w + 1) * (w * w - r2 * w + 1),
        pref * (-2) * (w**4 + 1),
        pref * (-4) * w * w,
    ]
    order = np.argsort(freqs)
    merged_f, merged_c = dynamics._merge_terms(
        [freqs[i] for i in order], [coeffs[i] for i in order]
    )
    return dynamics.CosineSeries(tuple(merged_f), tuple(merged_c))


def dimerized_probability_exact(w, g, times):
    """Evaluate the dimerized closed form over a time grid as a trace."""
    return dimerized_series(w, g).trace(np.asarray(times, dtype=float))


# ---------------------------------------------------------------------------
# pretty good transfer search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PgtSearchResult:
    """Outcome of a pretty-good-transfer arrival-time scan.

    ``reached`` tells whether some t <= t_max got the infidelity below
    epsilon; ``t_found`` is the earliest such time (None when not reached).
    ``best_t``/``best_infidelity`` always record the best point seen.
    """

    epsilon: float
    t_found: float | None
    reached: bool
    best_t: float
    best_infidelity: float
    scan_budget: int
    frequencies: tuple

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "t_found": self.t_found,
            "reached": self.reached,
            "best_t": self.best_t,
            "best_infidelity": self.best_infidelity,
            "scan_budget": self.scan_budget,
            "frequencies": list(self.frequencies),
        }


def pgt_search(series, epsilon, t_max, chunk=65536):
    """Earliest time with 1 - P(t) < epsilon on a cosine series.

    Coarse forward scan (step pi/(8 f_max)) in chunks; the first chunk that
    contains a hit is refined locally before reporting.
    """
    if not 0 < epsilon < 1:
        raise ValidationError(f"epsilon must be in (0,1), got {epsilon}")
    if t_max <= 0:
        raise ValidationError(f"t_max must be positive, got {t_max}")
    fmax = series.max_frequency
    step = np.pi / (8 * fmax) if fmax > 0 else t_max / chunk
    best_t, best_p = 0.0, float(series.probability(0.0)[0])
    used = 1
    start = 0.0
    while start < t_max:
        stop = min(start + chunk * step, t_max)
        n = max(int(np.ceil((stop - start) / step)), 2)
        grid = np.linspace(start, stop, n)
        prob = series.probability(grid)
        used += n
        i = int(np.argmax(prob))
        if prob[i] > best_p:
            best_t, best_p = float(grid[i]), float(prob[i])
        # a true peak can sit between grid points; with 4x oversampling the
        # sampled value can undershoot the peak by a few percent, so refine
        # every local maximum that comes within that allowance
        allowance = 0.05
        interior = np.arange(1, n - 1)
        is_peak = (prob[interior] >= prob[interior - 1]) & (
            prob[interior] >= prob[interior + 1]
        )
        candidates = [j for j in interior[is_peak] if 1.0 - prob[j] < epsilon + allowance]
        for h in candidates:
            t_star, p_star = _refine(series, grid[h - 1], grid[h + 1])
            used += 64
            if p_star < prob[h]:
                t_star, p_star = float(grid[h]), float(prob[h])
            if p_star > best_p:
                best_t, best_p = t_star, p_star
            if 1.0 - p_star < epsilon:
                return PgtSearchResult(
                    epsilon=float(epsilon),
                    t_found=t_star,
                    reached=True,
                    best_t=t_star,
                    best_infidelity=1.0 - p_star,
                    scan_budget=used,
                    frequencies=series.frequencies,
                )
        if stop >= t_max:
            break
        start = stop - step  # overlap so chunk-edge peaks stay interior
    return PgtSearchResult(
        epsilon=float(epsilon),
        t_found=None,
        reached=False,
        best_t=best_t,
        best_infidelity=1.0 - best_p,
        scan_budget=used,
        frequencies=series.frequencies,
    )


def _refine(series, lo, hi):
    from scipy import optimize

    res = optimize.minimize_scalar(
        lambda t: -series.probability(t)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x), float(-res.fun)

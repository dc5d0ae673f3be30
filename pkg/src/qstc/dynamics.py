"""Time evolution in the one-excitation subspace.

Transfer probabilities are computed from the eigendecomposition: with the
excitation starting on corner site A, the amplitude on corner site B is
amp(t) = sum_j <B|j><j|A> exp(-i lambda_j t), and P(t) = |amp(t)|^2.  For
mirror-symmetric chains the amplitude collapses to a real cosine series
P(t) = (sum_j c_j cos(lambda_j t))^2, the representation used for
pretty-good-transfer arguments and peak searches.

The averaged transmission fidelity is f = 1/2 + sqrt(P)/3 + P/6 with the
controllable phase set to its optimal value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import chains, spectral
from .errors import UnsupportedInputError, ValidationError

#: tolerance under which two frequencies count as degenerate and merge
FREQ_MERGE_TOL = 1e-9

#: probability may exceed 1 by at most this much before it is an error
PROB_SLACK = 1e-12


def fidelity_from_probability(p):
    """Averaged transmission fidelity for transfer probability ``p``."""
    p = np.asarray(p, dtype=float)
    return 0.5 + np.sqrt(p) / 3.0 + p / 6.0


@dataclass(frozen=True)
class TransferTrace:
    """Sampled corner-to-corner transfer record.

    Attributes
    ----------
    times, probability, fidelity : tuple of float
        Sample grid, P(t) and f(t) at each sample.
    peak : tuple
        (t*, P*) of the best sample in the trace.
    """

    times: tuple
    probability: tuple
    fidelity: tuple
    peak: tuple

    def to_csv(self, path):
        """Write the trace as CSV with header t,P,f at 15 significant digits."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,P,f\n")
            for t, p, f in zip(self.times, self.probability, self.fidelity):
                fh.write(f"{t:.15g},{p:.15g},{f:.15g}\n")


def _trace_from_probability(times, prob):
    prob = np.asarray(prob, dtype=float)
    if prob.min() < -PROB_SLACK or prob.max() > 1 + 1e-9:
        raise ValidationError(
            f"probability out of [0,1]: range [{prob.min()}, {prob.max()}]"
        )
    prob = np.clip(prob, 0.0, 1.0)
    fid = fidelity_from_probability(prob)
    best = int(np.argmax(prob))
    return TransferTrace(
        times=tuple(float(t) for t in times),
        probability=tuple(float(p) for p in prob),
        fidelity=tuple(float(f) for f in fid),
        peak=(float(times[best]), float(prob[best])),
    )


def transfer_probability(spec, times):
    """Corner-to-corner transfer probability over a time grid.

    Parameters
    ----------
    spec : ChainSpec
        Chain to evolve; the excitation starts on the first corner qubit and
        is read out on the second.
    times : array_like
        Finite sample times in inverse-coupling units.

    Returns
    -------
    TransferTrace
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValidationError("times must be a non-empty 1-d array")
    if not np.all(np.isfinite(times)):
        raise ValidationError("times must be finite")
    h = chains.build_hamiltonian(spec)
    spect = spectral.decompose(h)
    a, b = h.corner_sites
    weights = spect.eigenvectors[b, :] * spect.eigenvectors[a, :]
    phases = np.exp(-1j * np.outer(times, spect.eigenvalues))
    amp = phases @ weights
    return _trace_from_probability(times, np.abs(amp) ** 2)


@dataclass(frozen=True)
class CosineSeries:
    """P(t) = (sum_j c_j cos(f_j t))^2 with non-negative frequencies.

    The coefficient sum vanishes (so P(0) = 0 between distinct corners) and
    sum |c_j| bounds sqrt(P) from above, which is the quantity that decides
    whether pretty good transfer is possible.
    """

    frequencies: tuple
    coefficients: tuple

    def __post_init__(self):
        if len(self.frequencies) != len(self.coefficients):
            raise ValidationError("frequencies and coefficients differ in length")
        if any(f < -FREQ_MERGE_TOL for f in self.frequencies):
            raise ValidationError("frequencies must be non-negative")

    @property
    def coefficient_sum(self):
        return float(sum(self.coefficients))

    @property
    def amplitude_ceiling(self):
        """sum |c_j|, the supremum of |amplitude| over all times."""
        return float(sum(abs(c) for c in self.coefficients))

    @property
    def max_frequency(self):
        return float(max(self.frequencies)) if self.frequencies else 0.0

    def amplitude(self, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return np.cos(np.outer(times, self.frequencies)) @ np.asarray(self.coefficients)

    def probability(self, times):
        return self.amplitude(times) ** 2

    def trace(self, times):
        return _trace_from_probability(times, self.probability(times))

    def to_dict(self):
        return {
            "frequencies": list(self.frequencies),
            "coefficients": list(self.coefficients),
        }


def _merge_terms(freqs, coeffs, tol=FREQ_MERGE_TOL):
    order = np.argsort(freqs)
    out_f, out_c = [], []
    for i in order:
        if out_f and abs(freqs[i] - out_f[-1]) < tol:
            out_c[-1] += coeffs[i]
        else:
            out_f.append(freqs[i])
            out_c.append(coeffs[i])
    kept = [(f, c) for f, c in zip(out_f, out_c) if abs(c) > 1e-12]
    if not kept:
        return [0.0], [0.0]
    return [f for f, _ in kept], [c for _, c in kept]


def closed_form_probability(spectrum, sender, receiver, tol=1e-9):
    """Cosine-series representation of the transfer probability.

    Valid when sender and receiver are mirror images of each other, which
    makes every projector element <receiver|j><j|sender> real and symmetric
    between +lambda and -lambda; otherwise the amplitude needs complex
    phases and :class:`UnsupportedInputError` is raised.

    Parameters
    ----------
    spectrum : spectral.Spectrum
        Full eigendecomposition of the chain Hamiltonian.
    sender, receiver : int
        Site indices in the numbering the spectrum was computed in.
    """
    vals = spectrum.eigenvalues
    weights = spectrum.eigenvectors[receiver, :] * spectrum.eigenvectors[sender, :]
    scale = max(1.0, float(np.max(np.abs(vals))))
    freqs, coeffs = [], []
    used = np.zeros(len(vals), dtype=bool)
    for j in range(len(vals)):
        if used[j]:
            continue
        lam = vals[j]
        if lam < -tol * scale:
            # locate the mirror partner +|lam|
            partners = np.nonzero(~used & (np.abs(vals + lam) < tol * scale))[0]
            partners = partners[partners != j]
            if partners.size == 0:
                raise UnsupportedInputError("unpaired negative eigenvalue")
            p = int(partners[0])
            if abs(weights[j] - weights[p]) > tol:
                raise UnsupportedInputError(
                    "sender and receiver are not mirror-related: "
                    "asymmetric +/- weights"
                )
            freqs.append(abs(lam))
            coeffs.append(weights[j] + weights[p])
            used[j] = used[p] = True
        elif abs(lam) <= tol * scale:
            freqs.append(0.0)
            coeffs.append(weights[j])
            used[j] = True
    if not np.all(used):
        raise UnsupportedInputError("leftover positive eigenvalues without partners")
    freqs, coeffs = _merge_terms(freqs, coeffs)
    series = CosineSeries(tuple(freqs), tuple(coeffs))
    if abs(series.coefficient_sum) > 1e-10:
        raise UnsupportedInputError(
            f"coefficient sum {series.coefficient_sum} not zero; "
            "sites are not distinct mirror corners"
        )
    return series


def chain_series(spec):
    """Cosine series between the corner qubits of a mirror-symmetric chain."""
    h = chains.build_hamiltonian(spec)
    a, b = h.corner_sites
    return closed_form_probability(spectral.decompose(h), a, b)


def peak_search(series, t_max, refine_tol=1e-9):
    """Global probability maximum of a cosine series over [0, t_max].

    Coarse scan with step at most pi/(8 f_max) (4x Nyquist oversampling of
    the fastest oscillation), then bounded scalar minimization of -P around
    the best sample.

    Returns
    -------
    (t_star, p_star) : tuple of float
    """
    if t_max <= 0:
        raise ValidationError(f"t_max must be positive, got {t_max}")
    fmax = series.max_frequency
    step = np.pi / (8 * fmax) if fmax > 0 else t_max / 64
    n = max(int(np.ceil(t_max / step)) + 1, 65)
    grid = np.linspace(0.0, t_max, n)
    prob = series.probability(grid)
    best = int(np.argmax(prob))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, n - 1)]
    res = optimize.minimize_scalar(
        lambda t: -series.probability(t)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": refine_tol},
    )
    t_star, p_star = float(res.x), float(-res.fun)
    if prob[best] > p_star:
        t_star, p_star = float(grid[best]), float(prob[best])
    return t_star, min(p_star, 1.0)

"""Dense symmetric eigensolves, random principal submatrices, Haar orthogonals.

Everything here is deterministic given a seed.  Randomness flows through a
single counter-based generator (Philox, 64-bit) keyed by the user seed, so
independent streams can be split off without correlating parallel runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError

__all__ = [
    "SpectrumSample",
    "make_rng",
    "eigenvalues_symmetric",
    "sample_principal_submatrix",
    "haar_orthogonal",
]


def make_rng(seed):
    """Return a Philox-backed generator keyed by ``seed``.

    Philox is a splittable 64-bit counter-based generator; every stochastic
    routine in the package accepts a seed and builds its generator here, so
    there is no hidden entropy anywhere.
    """
    if seed is None:
        raise InputError("seed is required; stochastic routines use no hidden entropy")
    return np.random.Generator(np.random.Philox(key=np.uint64(np.int64(seed))))


@dataclass(frozen=True)
class SpectrumSample:
    """Eigenvalues of a sampled principal submatrix plus provenance.

    Attributes
    ----------
    eigenvalues : ndarray
        All eigenvalues, sorted ascending.
    source_order : int
        Dimension of the (sub)matrix the eigenvalues came from.
    parent_order : int or None
        Dimension of the full matrix, when known.
    """

    eigenvalues: np.ndarray
    source_order: int
    parent_order: int | None = None

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size != self.source_order:
            raise InputError("eigenvalue count must equal source_order")
        if np.any(np.diff(ev) < 0):
            raise InputError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", ev)


def _check_symmetric(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError("expected a square matrix of order >= 1")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix contains non-finite entries")
    if not np.array_equal(a, a.T):
        raise InputError("matrix is not exactly symmetric; symmetrize with (a + a.T)/2")
    return a


def eigenvalues_symmetric(a, parent_order=None):
    """All eigenvalues of a real symmetric matrix, sorted ascending.

    Parameters
    ----------
    a : (n, n) ndarray
        Exactly symmetric with finite entries.
    parent_order : int, optional
        Recorded on the returned sample when ``a`` is a submatrix of a
        larger matrix.

    Returns
    -------
    SpectrumSample
    """
    a = _check_symmetric(a)
    try:
        ev = scipy.linalg.eigh(a, eigvals_only=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"symmetric eigensolve failed to converge: {exc}") from exc
    ev = np.sort(ev)
    return SpectrumSample(ev, a.shape[0], parent_order)


def _random_index_subset(n, k, rng):
    # Partial Fisher-Yates: only the first k swaps are performed, O(k) draws.
    idx = np.arange(n)
    for i in range(k):
        j = i + int(rng.integers(0, n - i))
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k]


def sample_principal_submatrix(a, k, seed):
    """Principal submatrix on a uniformly random ``k``-subset of indices.

    Equivalent to the top-left ``k x k`` block after conjugating by a uniform
    random permutation.  Deterministic for a fixed seed; the subset is drawn
    without replacement.
    """
    a = _check_symmetric(a)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"submatrix order k={k} out of range [1, {n}]")
    idx = _random_index_subset(n, k, make_rng(seed))
    return a[np.ix_(idx, idx)]


def haar_orthogonal(n, seed):
    """Haar-distributed orthogonal matrix via QR with sign correction.

    QR of a Gaussian matrix alone is not Haar; rescaling each column of Q by
    the sign of the corresponding diagonal entry of R fixes the distribution.
    """
    if n < 1:
        raise InputError("order must be >= 1")
    rng = make_rng(seed)
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    signs = np.where(d >= 0, 1.0, -1.0)
    return q * signs[np.newaxis, :]

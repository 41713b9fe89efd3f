"""Diagonalization and figures of merit: transitions, matrix elements, anharmonicities, ratios."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .quantization import QuantizedSystem

DENSE_LIMIT = 3000
RESIDUAL_TOLERANCE = 1e-9
CLUSTER_TOLERANCE = 1e-6
DEFAULT_OPERATOR = "charge-edge-left"


class DegenerateDenominator(ZeroDivisionError):
    """A transition used as a denominator vanishes."""


class EigensolverFailure(RuntimeError):
    pass


def _norm(H) -> float:
    if sp.issparse(H):
        return float(abs(H).sum(axis=1).max()) if H.nnz else 0.0
    return float(np.abs(H).sum(axis=1).max()) if H.size else 0.0


def _fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so that its largest-magnitude entry is real and positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)[None, :]


def _residuals(H, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(H @ v - v * w[None, :], axis=0)


def lowest_eigenpairs(H, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``k`` eigenpairs of a Hermitian matrix, ascending, gauge fixed.

    Small matrices use a dense solver. Larger ones use Lanczos (``eigsh``) and
    fall back to the dense solver if it fails to converge or misses the
    residual tolerance.
    """
    n = H.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"requested {k} eigenpairs of a {n}-dimensional matrix")
    scale = max(_norm(H), 1e-300)
    w = v = None
    if n > DENSE_LIMIT and k < n - 1:
        try:
            w, v = spla.eigsh(sp.csr_matrix(H), k=k, which="SA", tol=1e-13, ncv=max(2 * k + 1, 40))
            order = np.argsort(w)
            w, v = w[order], v[:, order]
            if np.max(_residuals(H, w, v)) > RESIDUAL_TOLERANCE * scale:
                w = v = None
        except (spla.ArpackNoConvergence, spla.ArpackError):
            w = v = None
    if w is None:
        dense = H.toarray() if sp.issparse(H) else np.asarray(H)
        try:
            w, v = sla.eigh(dense, subset_by_index=(0, k - 1))
        except (np.linalg.LinAlgError, MemoryError) as exc:
            raise EigensolverFailure(f"dense eigensolver failed on dimension {n}") from exc
    return np.asarray(w, dtype=float), _fix_gauge(np.asarray(v, dtype=complex))


@dataclass
class SpectrumReport:
    """Lowest eigenvalues (hertz, ascending) with matrix elements of chosen operators.

    ``matrix_elements[label][i, j] = <i|O|j>``.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray | None = None
    matrix_elements: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def levels(self) -> int:
        return len(self.eigenvalues)

    def omega(self, i: int, j: int) -> float:
        """Transition frequency ``w_ij = w_i - w_j`` in hertz."""
        return float(self.eigenvalues[i] - self.eigenvalues[j])

    @property
    def transitions(self) -> np.ndarray:
        w = self.eigenvalues
        return w[:, None] - w[None, :]

    def element(self, i: int, j: int, label: str = DEFAULT_OPERATOR) -> complex:
        return complex(self.matrix_elements[label][i, j])

    def scaled(self, s: float) -> SpectrumReport:
        return SpectrumReport(self.eigenvalues * s, self.vectors, dict(self.matrix_elements))


def eigensystem(system: QuantizedSystem, k: int) -> tuple[np.ndarray, np.ndarray]:
    return lowest_eigenpairs(system.H, min(k, system.dimension))


def operator(system: QuantizedSystem, label: str):
    """Lifted operator for a label.

    Labels: ``charge-edge-left``, ``charge-edge-right``, ``phase-edge-left``,
    ``phase-edge-right``, ``charge:i`` and ``phase:i`` for node ``i``.
    """
    n = len(system.charge_ops)
    kind, _, where = label.partition("-edge-") if "-edge-" in label else label.partition(":")
    ops = {"charge": system.charge_ops, "phase": system.phase_ops}.get(kind)
    if ops is None or not where:
        raise KeyError(f"unknown operator label {label!r}")
    if where == "left":
        idx = 0
    elif where == "right":
        idx = n - 1
    else:
        try:
            idx = int(where)
        except ValueError:
            raise KeyError(f"unknown operator label {label!r}") from None
        if not 0 <= idx < n:
            raise KeyError(f"operator label {label!r}: node index out of range")
    op = ops[idx]
    if op is None:
        raise KeyError(f"operator {label!r} is not defined in this basis (charge-basis node has no phase operator)")
    return op


def _clusters(w: np.ndarray) -> list[list[int]]:
    scale = max(float(np.max(np.abs(w - w[0]))), float(np.max(np.abs(w))), 1.0)
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[groups[-1][-1]] < CLUSTER_TOLERANCE * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def matrix_elements(system: QuantizedSystem, eigenpairs, label: str = DEFAULT_OPERATOR) -> np.ndarray:
    """``<i|O|j>`` over the given eigenvectors.

    Inside a degenerate cluster the eigenvectors are first rotated so that ``O``
    is diagonal there, which makes elements between degenerate states well defined.
    """
    w, v = eigenpairs
    op = operator(system, label)
    v = v.copy()
    for group in _clusters(w):
        if len(group) > 1:
            sub = v[:, group]
            block = sub.conj().T @ (op @ sub)
            _, rot = np.linalg.eigh((block + block.conj().T) / 2)
            v[:, group] = _fix_gauge(sub @ rot)
    return v.conj().T @ (op @ v)


def spectrum(system: QuantizedSystem, k: int = 4, labels=(DEFAULT_OPERATOR,)) -> SpectrumReport:
    """Diagonalize and tabulate matrix elements for every label in ``labels``."""
    w, v = eigensystem(system, k)
    elems = {lab: matrix_elements(system, (w, v), lab) for lab in labels}
    return SpectrumReport(w, v, elems)


def anharmonicity(report: SpectrumReport, ij: tuple[int, int], kl: tuple[int, int]) -> float:
    """``A_ij,kl = (w_ij - w_kl) / (w_ij + w_kl)``."""
    a, b = report.omega(*ij), report.omega(*kl)
    if abs(b) <= 1e-6 or abs(a + b) <= 1e-6:
        raise DegenerateDenominator(f"transition {kl} vanishes")
    return (a - b) / (a + b)


def transition_ratio(report: SpectrumReport, jk: tuple[int, int], lm: tuple[int, int]) -> float:
    """``R_jk,lm = (w_j - w_k) / (w_l - w_m)`` with ``j > k`` and ``l > m``."""
    (j, k), (l, m) = jk, lm
    if j <= k or l <= m:
        raise ValueError("ratio indices must be ordered (j > k, l > m)")
    den = report.omega(l, m)
    if abs(den) <= 1e-6:
        raise DegenerateDenominator(f"transition {lm} vanishes")
    return report.omega(j, k) / den

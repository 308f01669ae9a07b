"""Kasteleyn matrix, its LU factorization and the coupling function C = K^{-T}."""
from __future__ import annotations

import csv
import threading
import warnings

import numpy as np
from scipy import linalg as sla

from .lattice import Domain, is_black

# weight of the edge (u, v) keyed by the offset u - v
WEIGHTS = {(1, 1): 1.0, (-1, -1): -1.0, (-1, 1): 1j, (1, -1): -1j}
GROWTH_WARN = 1e8


class NoMatchingError(ValueError):
    def __init__(self, msg, det_estimate=0.0):
        super().__init__(msg)
        self.det_estimate = det_estimate


class AdjacencyError(ValueError):
    pass


class ConditionWarning(RuntimeWarning):
    pass


def weight(u, v) -> complex:
    return WEIGHTS.get((u[0] - v[0], u[1] - v[1]), 0.0)


def kasteleyn_matrix(blacks, whites):
    bi = {b: k for k, b in enumerate(blacks)}
    wi = {w: k for k, w in enumerate(whites)}
    K = np.zeros((len(blacks), len(whites)), dtype=complex)
    for v, j in wi.items():
        for (dn, dm), w in WEIGHTS.items():
            k = bi.get((v[0] + dn, v[1] + dm))
            if k is not None:
                K[k, j] = w
    return K, bi, wi


class KasteleynSystem:
    """K (black x white), its pivoted LU and lazily cached coupling columns."""

    def __init__(self, domain: Domain, check: bool = True):
        self.domain = domain
        self.blacks = list(domain.blacks)
        self.whites = list(domain.whites)
        if len(self.blacks) != len(self.whites):
            raise NoMatchingError(
                f"{len(self.blacks)} black vs {len(self.whites)} white squares")
        self.K, self.black_index, self.white_index = kasteleyn_matrix(self.blacks, self.whites)
        self._lu = None
        self._logdet = -np.inf
        self._cache = {}
        self._lock = threading.Lock()
        self._full = None
        if self.K.size:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                self._lu = sla.lu_factor(self.K, check_finite=False)
            piv = np.abs(np.diag(self._lu[0]))
            if piv.min() < 1e-12 * max(1.0, piv.max()):
                self._logdet = -np.inf
                if check:
                    raise NoMatchingError("singular Kasteleyn matrix: no perfect matching",
                                          det_estimate=float(np.prod(piv)))
            else:
                self._logdet = float(np.sum(np.log(piv)))
            growth = np.abs(self._lu[0]).max() / max(np.abs(self.K).max(), 1.0)
            if growth > GROWTH_WARN:
                warnings.warn(f"pivot growth {growth:.3g} exceeds {GROWTH_WARN:g}",
                              ConditionWarning)
        else:
            self._logdet = 0.0

    @property
    def n(self) -> int:
        return len(self.blacks)

    def k(self, u, v) -> complex:
        i, j = self.black_index.get(u), self.white_index.get(v)
        if i is None or j is None:
            return 0.0
        return self.K[i, j]

    def coupling_column(self, v) -> np.ndarray:
        """C(., v) over self.blacks: solves sum_u K(u, v') C(u, v) = [v = v']."""
        if is_black(v):
            raise TypeError(f"{v} is a black square")
        j = self.white_index.get(v)
        if j is None:
            raise KeyError(f"{v} not in domain")
        col = self._cache.get(v)
        if col is not None:
            return col
        if self._full is not None:
            col = self._full[:, j]
        else:
            e = np.zeros(self.n, dtype=complex)
            e[j] = 1.0
            col = sla.lu_solve(self._lu, e, trans=1, check_finite=False)
            col.setflags(write=False)
        with self._lock:
            return self._cache.setdefault(v, col)

    def coupling_matrix(self) -> np.ndarray:
        """Dense C[u_index, v_index] = C(u, v); one multi-rhs solve."""
        if self._full is None:
            full = sla.lu_solve(self._lu, np.eye(self.n, dtype=complex), trans=1,
                                check_finite=False)
            full.setflags(write=False)
            with self._lock:
                if self._full is None:
                    self._full = full
        return self._full

    def coupling(self, u, v) -> complex:
        """C(u, v), extended by 0 for black squares outside the domain."""
        i = self.black_index.get(u)
        if i is None:
            return 0.0
        return self.coupling_column(v)[i]

    def coupling_function(self, v) -> dict:
        col = self.coupling_column(v)
        return {u: col[i] for i, u in enumerate(self.blacks)}

    def edge_probability(self, u, v) -> float:
        w = self.k(u, v)
        if w == 0:
            raise AdjacencyError(f"{u} and {v} are not adjacent squares of the domain")
        return float(abs(w * self.coupling(u, v)))

    def edge_probabilities(self) -> dict:
        C = self.coupling_matrix()
        P = {}
        for (i, j) in zip(*np.nonzero(self.K)):
            P[(self.blacks[i], self.whites[j])] = float(abs(self.K[i, j] * C[i, j]))
        return P

    def joint_probability(self, dominoes) -> float:
        dominoes = [(tuple(u), tuple(v)) for u, v in dominoes]
        used = [s for d in dominoes for s in d]
        if len(set(used)) != len(used):
            raise ValueError("overlapping dominoes")
        if not dominoes:
            return 1.0
        pref = 1.0 + 0j
        for u, v in dominoes:
            w = self.k(u, v)
            if w == 0:
                raise AdjacencyError(f"{u} and {v} are not adjacent squares of the domain")
            pref *= w
        M = np.array([[self.coupling(u, v) for _, v in dominoes] for u, _ in dominoes])
        return float(abs(pref * np.linalg.det(M)))

    def log_partition_function(self) -> float:
        return self._logdet

    def partition_function(self) -> float:
        return float(np.exp(self._logdet))

    def residual(self) -> float:
        """max |K^T C - I| over all columns."""
        C = self.coupling_matrix()
        return float(np.abs(self.K.T @ C - np.eye(self.n)).max()) if self.n else 0.0

    def export_column_csv(self, v, path) -> None:
        col = self.coupling_column(v)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "m", "Re", "Im"])
            for i, u in enumerate(self.blacks):
                w.writerow([u[0], u[1], repr(float(col[i].real)), repr(float(col[i].imag))])


def assemble(d: Domain, check: bool = True) -> KasteleynSystem:
    return KasteleynSystem(d, check=check)

"""Regularized spectral clustering for balanced two-block models, with a
Davis-Kahan certificate computed instance-wise.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .graph_model import ProbabilityMatrix, SparseAdjacency
from .spectral import (
    DiffOperator,
    ExpectedOperator,
    Kind,
    Mode,
    RegularizedOperator,
    eig_symmetric,
    operator_norm,
    second_eigenvector_laplacian,
    second_pair_laplacian,
)


def auto_tau(A: SparseAdjacency) -> float:
    """tau = (d_1 + ... + d_n) / n^2, so n*tau is the average degree."""
    return float(A.degrees.sum()) / (A.n ** 2)


def eigenvector_distance(v: np.ndarray, vbar: np.ndarray) -> float:
    """min over a global sign flip of ||v - vbar||_2; inputs must be unit."""
    v = np.asarray(v, dtype=np.float64)
    vbar = np.asarray(vbar, dtype=np.float64)
    for u in (v, vbar):
        if abs(np.linalg.norm(u) - 1.0) > 1e-8:
            raise ValueError("inputs must be unit-norm")
    return float(min(np.linalg.norm(v - vbar), np.linalg.norm(v + vbar)))


@dataclass
class ClusterResult:
    labels: np.ndarray            # {1, 2}^n
    v: np.ndarray                 # unit second eigenvector
    lambda2: float                # second eigenvalue of L(A_tau)
    tau: float
    misclassification: float | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "labels": self.labels.tolist(),
                "v": self.v.tolist(),
                "lambda2": self.lambda2,
                "tau": self.tau,
                "misclassification": self.misclassification,
            }
        )

    def write_labels(self, path):
        with open(path, "w") as fh:
            for lab in self.labels:
                fh.write(f"{int(lab)}\n")


def misclassification_rate(labels: np.ndarray, truth: np.ndarray) -> float:
    """Min over the global label flip of the disagreement fraction."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    direct = float(np.mean(labels != truth))
    flipped = float(np.mean((3 - labels) != truth))
    return min(direct, flipped)


def spectral_cluster(A: SparseAdjacency, tau: float,
                     ground_truth: np.ndarray | None = None,
                     seed: int = 0) -> ClusterResult:
    """Labels from the signs of the second eigenvector of L(A_tau).

    Zero entries are assigned to class 1 (the sign rule is silent on exact
    zeros).
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    lam2, v = second_pair_laplacian(A, tau, seed=seed)
    labels = np.where(v >= 0, 1, 2)
    mis = None
    if ground_truth is not None:
        mis = misclassification_rate(labels, ground_truth)
    return ClusterResult(labels=labels, v=v, lambda2=lam2, tau=tau,
                         misclassification=mis)


@dataclass
class DkReport:
    """Instance-wise Davis-Kahan certificate for one sampled graph.

    lambda2 is the closed form (a-b)/(a+b+n*tau); lambda2_observed is the
    second eigenvalue actually computed from L(Abar_tau), which the interval
    construction uses so the certificate is valid for the true spectra.
    """

    lambda2: float
    lambda2_observed: float
    norm_diff: float       # ||L(A_tau) - L(Abar_tau)||
    gap: float             # dist(S, S'); <= 0 means Davis-Kahan inapplicable
    applicable: bool
    projector_diff: float  # ||v v^T - vbar vbar^T||
    vector_dist: float     # min over sign of ||v + beta vbar||
    tau: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


def _expected_second_eigenvector(labels: np.ndarray) -> np.ndarray:
    """For the balanced model the second eigenvector of L(Abar_tau) is exactly
    +-1/sqrt(n) by community (expected degrees are constant)."""
    n = len(labels)
    v = np.where(labels == 1, 1.0, -1.0) / math.sqrt(n)
    return v


def davis_kahan_report(A: SparseAdjacency, P: ProbabilityMatrix, tau: float,
                       seed: int = 0) -> DkReport:
    """Measure the Davis-Kahan chain on one sample of a two-block model."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    rates = P.block_rates
    if rates is None:
        raise ValueError("davis_kahan_report requires a structured two-block model")
    a, b, labels = rates
    n = P.n
    if a == b:
        raise ValueError("a == b carries no community structure")
    n1 = int(np.count_nonzero(labels == 1))
    if n1 * 2 != n:
        raise ValueError("communities must be balanced")

    ntau = n * tau
    lambda2_formula = (a - b) / (a + b + ntau)

    op_a = RegularizedOperator(A, tau, Mode.FULL, Kind.AVERAGING)
    op_e = ExpectedOperator(P, tau, Mode.FULL, Kind.AVERAGING)

    # second eigenvalue of the expected averaging operator, computed
    lam_e = eig_symmetric(op_e, 2, tol=1e-10, seed=seed).eigenvalues
    lambda2_observed = float(lam_e[1])

    norm_diff = operator_norm(DiffOperator(op_a, op_e), tol=1e-8, seed=seed)

    vbar = _expected_second_eigenvector(labels)
    v = second_eigenvector_laplacian(A, tau, seed=seed)

    ip = float(np.clip(v @ vbar, -1.0, 1.0))
    projector_diff = math.sqrt(max(1.0 - ip * ip, 0.0))
    vector_dist = eigenvector_distance(v, vbar)

    delta = norm_diff
    # S = (lambda2 - delta, 4/5 + delta), S' = (-delta, delta) u (1-delta, 1+delta)
    gap = min(lambda2_observed - 2.0 * delta, 0.2 - 2.0 * delta)
    return DkReport(
        lambda2=lambda2_formula,
        lambda2_observed=lambda2_observed,
        norm_diff=norm_diff,
        gap=gap,
        applicable=gap > 0,
        projector_diff=projector_diff,
        vector_dist=vector_dist,
        tau=tau,
    )

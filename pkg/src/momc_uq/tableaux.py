"""Runge-Kutta tableaux for the explicit and IMEX time integrators.

Explicit schemes: forward Euler, Heun's 2nd-order, Heun's 3rd-order.

IMEX pairs (registry keys in parentheses):
  - ARS(1,1,1)     (ars111):    forward/backward Euler pair, GSA.
  - ARS(2,2,2)     (ars222):    gamma = 1 - sqrt(2)/2, L-stable, GSA.
  - SI-IMEX(3,4,3) (si_imex343): 4 stages, 3 implicit solves, order 3,
                    stiffly accurate L-stable implicit part.
  - BPR(3,4,3)     (bpr343):    order-3 globally stiffly accurate pair with
                    zero first implicit column and L-stable implicit part.
                    Implemented with 5 stages / 4 implicit solves: a 4-stage
                    pair with these structural properties cannot satisfy the
                    full additive order-3 conditions (the closure condition
                    reduces to c2 / (2 c3 (c3 - c2)) = 0, which has no root).

All coefficient sets are gated by `verify_tableau` / `verify_imex_tableau`
rather than trusted: order conditions (including the mixed ones for the
additive pairs) must hold to 1e-12, and the named implicit parts must be
L-stable with R(inf) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# root of 6 g^3 - 18 g^2 + 9 g - 1 = 0; L-stable SDIRK order-3 diagonal
_GAMMA3 = 0.43586652150845884
# ARS(2,2,2) constants
_G222 = 1.0 - 0.5 * np.sqrt(2.0)
_D222 = 1.0 - 1.0 / (2.0 * _G222)
# SI-IMEX(3,4,3) derived weights (see module docstring; verifier-gated)
_B2_343 = 1.2084966491760092
_B3_343 = -0.6443631706844681
_C3_343 = (1.0 + _GAMMA3) / 2.0
_W_343 = 0.7323539363379432


@dataclass(frozen=True)
class ButcherTableau:
    """Plain Runge-Kutta tableau (a strictly lower triangular for explicit)."""

    name: str
    a: np.ndarray
    b: np.ndarray
    order: int

    @property
    def c(self) -> np.ndarray:
        return self.a.sum(axis=1)

    @property
    def stages(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class ImexTableau:
    """Paired explicit/implicit tableaux sharing abscissae c = a_im.sum(1)."""

    name: str
    a_ex: np.ndarray
    b_ex: np.ndarray
    a_im: np.ndarray
    b_im: np.ndarray
    order: int

    @property
    def c(self) -> np.ndarray:
        return self.a_im.sum(axis=1)

    @property
    def stages(self) -> int:
        return len(self.b_im)

    @property
    def gsa(self) -> bool:
        """Globally stiffly accurate: both b vectors equal the last rows."""
        return bool(
            np.array_equal(self.a_ex[-1], self.b_ex)
            and np.array_equal(self.a_im[-1], self.b_im)
        )

    @property
    def stiffly_accurate(self) -> bool:
        return bool(np.array_equal(self.a_im[-1], self.b_im))


def _arr(rows):
    return np.array(rows, dtype=np.float64)


EXPLICIT_TABLEAUX: dict[int, ButcherTableau] = {
    1: ButcherTableau("Forward Euler", _arr([[0.0]]), _arr([1.0]), 1),
    2: ButcherTableau(
        "Heun 2", _arr([[0.0, 0.0], [1.0, 0.0]]), _arr([0.5, 0.5]), 2
    ),
    3: ButcherTableau(
        "Heun 3",
        _arr([[0, 0, 0], [1 / 3, 0, 0], [0, 2 / 3, 0]]),
        _arr([0.25, 0.0, 0.75]),
        3,
    ),
}


IMEX_TABLEAUX: dict[str, ImexTableau] = {
    "ars111": ImexTableau(
        "ARS(1,1,1)",
        a_ex=_arr([[0, 0], [1, 0]]),
        b_ex=_arr([1.0, 0.0]),
        a_im=_arr([[0, 0], [0, 1]]),
        b_im=_arr([0.0, 1.0]),
        order=1,
    ),
    "ars222": ImexTableau(
        "ARS(2,2,2)",
        a_ex=_arr([[0, 0, 0], [_G222, 0, 0], [_D222, 1 - _D222, 0]]),
        b_ex=_arr([_D222, 1 - _D222, 0.0]),
        a_im=_arr([[0, 0, 0], [0, _G222, 0], [0, 1 - _G222, _G222]]),
        b_im=_arr([0.0, 1 - _G222, _G222]),
        order=2,
    ),
    "si_imex343": ImexTableau(
        "SI-IMEX(3,4,3)",
        a_ex=_arr(
            [
                [0, 0, 0, 0],
                [_GAMMA3, 0, 0, 0],
                [0.0, _C3_343, 0, 0],
                [1 - 2 * _W_343, _W_343, _W_343, 0],
            ]
        ),
        b_ex=_arr([0.0, _B2_343, _B3_343, _GAMMA3]),
        a_im=_arr(
            [
                [0, 0, 0, 0],
                [0, _GAMMA3, 0, 0],
                [0, (1 - _GAMMA3) / 2, _GAMMA3, 0],
                [0, _B2_343, _B3_343, _GAMMA3],
            ]
        ),
        b_im=_arr([0.0, _B2_343, _B3_343, _GAMMA3]),
        order=3,
    ),
    "bpr343": ImexTableau(
        "BPR(3,4,3)",
        a_ex=_arr(
            [
                [0.0, 0.0, 0.0, 0.0, 0.0],
                [0.43586652150845884, 0.0, 0.0, 0.0, 0.0],
                [-0.20205164421384608, 0.28528847811464814, 0.0, 0.0, 0.0],
                [0.3205237125789689, 0.4931770943941291, 0.09418132895506202, 0.0, 0.0],
                [-0.4169932983520213, 0.33130753857398754, 0.7640625240607248,
                 0.32162323571730883, 0.0],
            ]
        ),
        b_ex=_arr(
            [-0.4169932983520213, 0.33130753857398754, 0.7640625240607248,
             0.32162323571730883, 0.0]
        ),
        a_im=_arr(
            [
                [0.0, 0.0, 0.0, 0.0, 0.0],
                [0.0, 0.43586652150845884, 0.0, 0.0, 0.0],
                [0.0, -0.3526296876076568, 0.43586652150845884, 0.0, 0.0],
                [0.0, 0.4720156144197012, 0.0, 0.43586652150845884, 0.0],
                [0.0, 0.7417746721029592, 0.11872255993649397, -0.2963637535479121,
                 0.43586652150845884],
            ]
        ),
        b_im=_arr(
            [0.0, 0.7417746721029592, 0.11872255993649397, -0.2963637535479121,
             0.43586652150845884]
        ),
        order=3,
    ),
}


def imex_tableau(key: str) -> ImexTableau:
    try:
        return IMEX_TABLEAUX[key]
    except KeyError:
        raise KeyError(f"unknown IMEX tableau {key!r}; have {sorted(IMEX_TABLEAUX)}")


# ---------------------------------------------------------------------------
# verification


def order_condition_residuals(a: np.ndarray, b: np.ndarray, order: int) -> dict:
    """Residuals of the single-tableau order conditions up to `order`."""
    c = a.sum(axis=1)
    res = {"sum_b": float(b.sum() - 1.0)}
    if order >= 2:
        res["b.c"] = float(b @ c - 0.5)
    if order >= 3:
        res["b.c2"] = float(b @ (c * c) - 1.0 / 3.0)
        res["b.Ac"] = float(b @ (a @ c) - 1.0 / 6.0)
    return res


def imex_coupling_residuals(tab: ImexTableau) -> dict:
    """Residuals of the additive (mixed) conditions for the IMEX pair.

    Both parts share c, so at order 2 nothing extra arises; at order 3 the
    four mixed quadrature conditions b_s . (A_m c) = 1/6 must hold.
    """
    c = tab.c
    res = {"c_match": float(np.max(np.abs(tab.a_ex.sum(axis=1) - c)))}
    if tab.order >= 3:
        res["bex.Aim.c"] = float(tab.b_ex @ (tab.a_im @ c) - 1.0 / 6.0)
        res["bim.Aex.c"] = float(tab.b_im @ (tab.a_ex @ c) - 1.0 / 6.0)
        res["bex.Aex.c"] = float(tab.b_ex @ (tab.a_ex @ c) - 1.0 / 6.0)
        res["bim.Aim.c"] = float(tab.b_im @ (tab.a_im @ c) - 1.0 / 6.0)
    return res


def _active_implicit(a: np.ndarray, b: np.ndarray):
    """Stages that actually participate in the implicit method."""
    s = len(b)
    keep = [
        j
        for j in range(s)
        if np.any(a[j, :] != 0) or np.any(a[:, j] != 0) or b[j] != 0
    ]
    return a[np.ix_(keep, keep)], b[keep]


def stability_function(a: np.ndarray, b: np.ndarray, z: complex) -> complex:
    """R(z) of the implicit tableau on y' = lambda*y, z = lambda*dt."""
    ak, bk = _active_implicit(a, b)
    s = len(bk)
    y = np.linalg.solve(np.eye(s) - z * ak, np.ones(s))
    return 1.0 + z * (bk @ y)


def stability_at_infinity(a: np.ndarray, b: np.ndarray) -> float:
    """R(inf); zero for an L-stable (stiffly decaying) implicit part."""
    ak, bk = _active_implicit(a, b)
    return float(1.0 - bk @ np.linalg.solve(ak, np.ones(len(bk))))


def verify_tableau(tab: ButcherTableau) -> float:
    """Max order-condition residual of a plain tableau."""
    res = order_condition_residuals(tab.a, tab.b, tab.order)
    return max(abs(v) for v in res.values())


def verify_imex_tableau(tab: ImexTableau) -> float:
    """Max residual over both parts' order conditions and the coupling set."""
    res = {}
    res.update({f"ex:{k}": v for k, v in
                order_condition_residuals(tab.a_ex, tab.b_ex, tab.order).items()})
    res.update({f"im:{k}": v for k, v in
                order_condition_residuals(tab.a_im, tab.b_im, tab.order).items()})
    res.update(imex_coupling_residuals(tab))
    return max(abs(v) for v in res.values())

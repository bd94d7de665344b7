"""PDE model definitions: fluxes, stiff sources, wave speeds, equilibria,
reduced asymptotic-limit models and randomized initial data.

Five systems are supported:

  Burgers            scalar conservation law, flux u^2/2
  JinXin             linear-convection relaxation pair (u, v) with stiff
                     source -(v - F(u))/eps and frozen wave speed a
  ShallowWater       dimensionless free-surface system (eta, hu, b) with
                     pressure coupling h/Fr^2 * d(eta)/dx
  BloodFlow          cross-section/flow-rate/pressure system (A, q, p) with
                     viscoelastic wall relaxation of rate 1/tau_r
  BloodFlowElastic   the tau_r -> 0 limit of BloodFlow: (A, q) with the
                     elastic tube law folded into the momentum equation

All model objects are immutable and picklable; per-sample coefficient
arrays (wall parameter fields, relaxation times, frozen wave speeds) are
produced by `grid_fields(grid, z)` and passed alongside states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateInputError, PositivityError
from .mesh import CellField, Grid1D, extend
from .sampling import DistributionSpec, uniform

SQRT_PI = math.sqrt(math.pi)
_GL3_NODES = (-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0))
_GL3_WEIGHTS = (5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0)


def _gaussian_pulse(x: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0.0:
        raise DegenerateInputError("Gaussian width sigma(z) = 0")
    return np.exp(-(x * x) / (2.0 * sigma * sigma)) / (math.sqrt(2.0 * math.pi) * sigma)


# ---------------------------------------------------------------------------
# per-sample coefficient containers


@dataclass(frozen=True)
class ScalarFields:
    """Coefficient bundle for models with only scalar parameters."""

    a: float = 0.0          # frozen wave speed (JinXin)
    eps: float = 0.0        # relaxation rate (JinXin)
    froude: float = 1.0     # Froude number (shallow water)

    def pad(self, boundary: str, width: int) -> "ScalarFields":
        return self


@dataclass(frozen=True)
class WallFields:
    """Blood-flow wall parameter fields sampled at cell centers."""

    A0: np.ndarray
    p0: np.ndarray
    E0: np.ndarray
    Einf: np.ndarray
    tau: np.ndarray
    rho: float
    re: float
    h0: float

    def pad(self, boundary: str, width: int) -> "WallFields":
        return WallFields(
            A0=extend(self.A0, boundary, width)[0],
            p0=extend(self.p0, boundary, width)[0],
            E0=extend(self.E0, boundary, width)[0],
            Einf=extend(self.Einf, boundary, width)[0],
            tau=extend(self.tau, boundary, width)[0],
            rho=self.rho,
            re=self.re,
            h0=self.h0,
        )


def tube_law_gap(A: np.ndarray, f: WallFields) -> np.ndarray:
    """F(A) = h0 sqrt(pi)/A0 * (sqrt(A) - sqrt(A0))."""
    return f.h0 * SQRT_PI / f.A0 * (np.sqrt(A) - np.sqrt(f.A0))


def tube_law_slope(A: np.ndarray, f: WallFields) -> np.ndarray:
    """G(A) = h0 sqrt(pi) / (2 A0 sqrt(A)), the derivative of F."""
    return f.h0 * SQRT_PI / (2.0 * f.A0 * np.sqrt(A))


def elastic_pressure(A: np.ndarray, f: WallFields) -> np.ndarray:
    """Equilibrium pressure p0 + (E_inf / Re) F(A)."""
    return f.p0 + (f.Einf / f.re) * tube_law_gap(A, f)


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class Burgers:
    kind = "burgers"
    n_vars = 1
    var_names = ("u",)
    flux_kind = "godunov"
    implicit_policy = "none"
    has_relaxation = False
    ic: str = "gaussian"
    boundary: str = "transmissive"

    def distribution(self) -> DistributionSpec:
        return uniform(-1.0, 1.0)

    def grid_fields(self, grid: Grid1D, z: np.ndarray) -> ScalarFields:
        return ScalarFields()

    def point_state(self, x: np.ndarray, z: np.ndarray, f=None) -> np.ndarray:
        if self.ic == "smooth-front":
            # monotone rarefying profile for order studies
            return (0.5 + 0.4 * np.tanh(x))[None, :]
        return _gaussian_pulse(x, float(z[0]))[None, :]

    def physical_flux(self, U: np.ndarray, f) -> np.ndarray:
        return 0.5 * U * U

    def max_wave_speed(self, U: np.ndarray, f) -> np.ndarray:
        return np.abs(U[0])

    def explicit_wave_speed(self, U, f):
        return self.max_wave_speed(U, f)

    def quasilinear_matrix(self, U: np.ndarray, f) -> np.ndarray:
        return U[0][:, None, None].copy()

    def quasilinear_increment(self, U, face_means, f, dx):
        return None

    def check_admissible(self, U: np.ndarray) -> None:
        pass

    def equilibrium(self, U, f):
        return U

    def report_spec(self):
        return ("u", 0)


@dataclass(frozen=True)
class JinXin:
    """Relaxation pair for a scalar law with flux F(u) = u^2/2.

    `a` is the frozen convection speed; when None it is set per sample to
    1.05 * max|u0| so the subcharacteristic condition a^2 > F'(u)^2 holds.
    """

    kind = "jinxin"
    n_vars = 2
    var_names = ("u", "v")
    flux_kind = "rusanov"
    implicit_policy = "relaxation"
    has_relaxation = True
    relaxed_row = 1
    eps: float = 1e-6
    a: float | None = None
    boundary: str = "transmissive"

    def distribution(self) -> DistributionSpec:
        return uniform(-1.0, 1.0)

    def flux_f(self, u: np.ndarray) -> np.ndarray:
        return 0.5 * u * u

    def grid_fields(self, grid: Grid1D, z: np.ndarray) -> ScalarFields:
        u0 = _gaussian_pulse(grid.cell_centers(), float(z[0]))
        a = self.a if self.a is not None else 1.05 * float(np.max(np.abs(u0)))
        if a * a <= float(np.max(u0 * u0)):
            raise PositivityError(
                f"subcharacteristic condition violated: a={a}, max|F'(u0)|={np.max(np.abs(u0))}"
            )
        return ScalarFields(a=a, eps=self.eps)

    def point_state(self, x: np.ndarray, z: np.ndarray, f=None) -> np.ndarray:
        u = _gaussian_pulse(x, float(z[0]))
        return np.stack([u, self.flux_f(u)])

    def physical_flux(self, U: np.ndarray, f: ScalarFields) -> np.ndarray:
        return np.stack([U[1], f.a * f.a * U[0]])

    def max_wave_speed(self, U, f: ScalarFields) -> np.ndarray:
        return np.full(U.shape[1], f.a)

    def explicit_wave_speed(self, U, f):
        return self.max_wave_speed(U, f)

    def quasilinear_matrix(self, U, f: ScalarFields) -> np.ndarray:
        n = U.shape[1]
        M = np.zeros((n, 2, 2))
        M[:, 0, 1] = 1.0
        M[:, 1, 0] = f.a * f.a
        return M

    def quasilinear_increment(self, U, face_means, f, dx):
        return None

    def check_admissible(self, U: np.ndarray) -> None:
        pass

    def relaxation_time(self, f: ScalarFields):
        return f.eps

    def equilibrium(self, U: np.ndarray, f) -> np.ndarray:
        out = U.copy()
        out[1] = self.flux_f(U[0])
        return out

    def equilibrium_target(self, U: np.ndarray, f) -> np.ndarray:
        """Value the relaxed row is driven toward."""
        return self.flux_f(U[0])

    def relaxation_source(self, U: np.ndarray, f: ScalarFields):
        S = np.zeros_like(U)
        S[1] = U[1] - self.flux_f(U[0])
        inv = np.inf if f.eps == 0.0 else 1.0 / f.eps
        return S, inv

    def reduced(self) -> Burgers:
        return Burgers(boundary=self.boundary)

    def lift_reduced(self, U_red: np.ndarray, f_red) -> np.ndarray:
        u = U_red[0]
        return np.stack([u, self.flux_f(u)])

    def report_spec(self):
        return ("u", 0)


@dataclass(frozen=True)
class ShallowWater:
    """Dimensionless shallow water system in (eta, hu, b) with h = eta - b."""

    kind = "swe"
    n_vars = 3
    var_names = ("eta", "hu", "b")
    flux_kind = "rusanov"
    implicit_policy = "swe-elliptic"
    has_relaxation = False
    froude: float = 1.0
    ic: str = "double-gaussian"
    ic_amp: float = 0.01
    ic_u0: float = 0.0
    boundary: str = "transmissive"

    def distribution(self) -> DistributionSpec:
        return uniform(0.0, 1.0)

    def grid_fields(self, grid, z) -> ScalarFields:
        return ScalarFields(froude=self.froude)

    def point_state(self, x: np.ndarray, z: np.ndarray, f=None) -> np.ndarray:
        if self.ic == "double-gaussian":
            sigma = 1.0 + float(z[0])
            h = (
                1.0
                + self.ic_amp * np.exp(-((x - 10.0) ** 2) / (2.0 * sigma**2))
                + self.ic_amp * np.exp(-((x - 20.0) ** 2) / (2.0 * sigma**2))
            )
            u = np.zeros_like(x)
        elif self.ic == "smooth-wave":
            h = 1.0 + self.ic_amp * np.sin(2.0 * np.pi * x)
            u = np.full_like(x, self.ic_u0)
        elif self.ic == "smooth-front":
            h = 1.0 + self.ic_amp * np.tanh(x - 15.0)
            u = np.full_like(x, self.ic_u0)
        elif self.ic == "lake-at-rest":
            h = np.ones_like(x)
            u = np.zeros_like(x)
        else:
            raise ValueError(f"unknown SWE initial condition {self.ic!r}")
        b = np.zeros_like(x)
        return np.stack([h + b, h * u, b])

    @staticmethod
    def depth(U: np.ndarray) -> np.ndarray:
        return U[0] - U[2]

    def velocity(self, U: np.ndarray) -> np.ndarray:
        return U[1] / self.depth(U)

    def physical_flux(self, U: np.ndarray, f) -> np.ndarray:
        h = self.depth(U)
        return np.stack([U[1], U[1] * U[1] / h, np.zeros_like(h)])

    def explicit_split_flux(self, U: np.ndarray, f) -> np.ndarray:
        """Convection-only flux for the IMEX splitting (mass and pressure
        fluxes are handled by the implicit stage solve)."""
        h = self.depth(U)
        return np.stack([np.zeros_like(h), U[1] * U[1] / h, np.zeros_like(h)])

    def max_wave_speed(self, U, f: ScalarFields) -> np.ndarray:
        h = self.depth(U)
        return np.abs(self.velocity(U)) + np.sqrt(h) / f.froude

    def explicit_wave_speed(self, U, f) -> np.ndarray:
        # spectral radius of the convective subsystem is 2|u| (its
        # eigenvalues are 0 and 2u), not |u|; using |u| is unstable at
        # CFL near 1
        return 2.0 * np.abs(self.velocity(U))

    def quasilinear_matrix(self, U, f: ScalarFields) -> np.ndarray:
        h = self.depth(U)
        u = self.velocity(U)
        n = U.shape[1]
        M = np.zeros((n, 3, 3))
        M[:, 0, 1] = 1.0
        M[:, 1, 0] = h / f.froude**2 - u * u
        M[:, 1, 1] = 2.0 * u
        M[:, 1, 2] = u * u
        return M

    def quasilinear_increment(self, U, face_means, f: ScalarFields, dx):
        # full (non-split) form only; under IMEX the pressure term is implicit
        h = self.depth(U)
        grad_eta = (face_means[0, 1:] - face_means[0, :-1]) / dx
        out = np.zeros_like(U)
        out[1] = -(h / f.froude**2) * grad_eta
        return out

    def check_admissible(self, U: np.ndarray) -> None:
        if np.any(self.depth(U) <= 0.0):
            raise PositivityError("water depth h <= 0")

    def equilibrium(self, U, f):
        return U

    def report_spec(self):
        return ("h", self.depth)


def _sin2pi(x: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * np.pi * x)


def _cos2pi(x: np.ndarray) -> np.ndarray:
    return np.cos(2.0 * np.pi * x)


@dataclass(frozen=True)
class BloodFlow:
    """Viscoelastic vessel model (A, q, p), dimensionless with Re = 1.

    test=1: uncertain wall viscosity, eta(z) = 5e5 (1+z), z ~ U(-1,1).
    test=2: uncertain initial/equilibrium area amplitude 1e-4 (1 + z/2);
            constant wall viscosity `visc`.
    `tau_override` pins the relaxation time to a constant (grid-uniform)
    value regardless of the test's viscosity rule.
    """

    kind = "bloodflow"
    n_vars = 3
    var_names = ("A", "q", "p")
    flux_kind = "dot"
    implicit_policy = "relaxation"
    has_relaxation = True
    relaxed_row = 2
    test: int = 1
    rho: float = 1050.0
    re: float = 1.0
    h0: float = 0.0015
    visc: float = 5.0e5
    tau_override: float | None = None
    ic: str = "sinusoidal"
    boundary: str = "periodic"

    def distribution(self) -> DistributionSpec:
        return uniform(-1.0, 1.0)

    def _area_amp(self, z: np.ndarray) -> float:
        if self.test == 2:
            return 1.0e-4 * (1.0 + 0.5 * float(z[0]))
        return 1.0e-4

    def grid_fields(self, grid: Grid1D, z: np.ndarray) -> WallFields:
        x = grid.cell_centers()
        if self.ic == "smooth-front":
            A0 = np.full_like(x, 5.0e-4)
            p0 = np.full_like(x, 5.0e3)
            E0 = np.full_like(x, 1.0e6)
            Einf = np.full_like(x, 8.0e5)
        else:
            # 'area-uncertain' keeps the equilibrium area fixed so the
            # random input perturbs A away from A0
            amp = 1.0e-4 if self.ic == "area-uncertain" else self._area_amp(z)
            A0 = 5.0e-4 + amp * _sin2pi(x)
            p0 = 5.0e3 + 5.0e2 * _cos2pi(x)
            E0 = 1.0e6 + 1.0e5 * _sin2pi(x)
            Einf = 8.0e5 + 1.0e5 * _sin2pi(x)
        if self.tau_override is not None:
            tau = np.full_like(x, float(self.tau_override))
        else:
            eta = self.visc * (1.0 + float(z[0])) if self.test == 1 else self.visc
            tau = (eta / E0) * (1.0 - Einf / E0)
        return WallFields(A0=A0, p0=p0, E0=E0, Einf=Einf, tau=tau,
                          rho=self.rho, re=self.re, h0=self.h0)

    def point_state(self, x: np.ndarray, z: np.ndarray, f=None) -> np.ndarray:
        if self.ic == "smooth-front":
            A = 5.0e-4 + 5.0e-5 * np.tanh((x - 0.5) / 0.1)
            q = np.full_like(x, 5.0e-5)
            p_eq = 5.0e3 + (8.0e5 / self.re) * (self.h0 * SQRT_PI / 5.0e-4) * (
                np.sqrt(A) - np.sqrt(5.0e-4))
            return np.stack([A, q, p_eq])
        if self.ic == "area-uncertain":
            # well-prepared variant: uncertain area around the fixed
            # equilibrium, pressure starting on the tube law
            amp = 1.0e-4 * (1.0 + 0.5 * float(z[0]))
            A = 5.0e-4 + amp * _sin2pi(x)
            A0 = 5.0e-4 + 1.0e-4 * _sin2pi(x)
            Einf = 8.0e5 + 1.0e5 * _sin2pi(x)
            p0 = 5.0e3 + 5.0e2 * _cos2pi(x)
            p = p0 + (Einf / self.re) * (self.h0 * SQRT_PI / A0) * (
                np.sqrt(A) - np.sqrt(A0))
            return np.stack([A, np.full_like(x, 5.0e-5), p])
        A = 5.0e-4 + self._area_amp(z) * _sin2pi(x)
        q = np.full_like(x, 5.0e-5)
        p = 1.5e4 + 5.0e3 * _sin2pi(x)
        return np.stack([A, q, p])

    def physical_flux(self, U: np.ndarray, f) -> np.ndarray:
        A, q = U[0], U[1]
        return np.stack([q, q * q / A, np.zeros_like(A)])

    def sound_speed(self, U: np.ndarray, f: WallFields) -> np.ndarray:
        return np.sqrt((f.E0 / f.re) * tube_law_slope(U[0], f) * U[0] / f.rho)

    def max_wave_speed(self, U, f: WallFields) -> np.ndarray:
        return np.abs(U[1] / U[0]) + self.sound_speed(U, f)

    def explicit_wave_speed(self, U, f):
        return self.max_wave_speed(U, f)

    def quasilinear_matrix(self, U, f: WallFields) -> np.ndarray:
        A, q = U[0], U[1]
        u = q / A
        n = U.shape[1]
        M = np.zeros((n, 3, 3))
        M[:, 0, 1] = 1.0
        M[:, 1, 0] = -u * u
        M[:, 1, 1] = 2.0 * u
        M[:, 1, 2] = A / f.rho
        M[:, 2, 1] = (f.E0 / f.re) * tube_law_slope(A, f)
        return M

    def quasilinear_increment(self, U, face_means, f: WallFields, dx):
        grad_p = (face_means[2, 1:] - face_means[2, :-1]) / dx
        grad_q = (face_means[1, 1:] - face_means[1, :-1]) / dx
        out = np.zeros_like(U)
        out[1] = -(U[0] / f.rho) * grad_p
        out[2] = -(f.E0 / f.re) * tube_law_slope(U[0], f) * grad_q
        return out

    def abs_matrix_times(self, psi: np.ndarray, dq: np.ndarray, f: WallFields):
        """|M(psi)| @ dq via the closed-form eigenstructure.

        Eigenvalues are {0, u - c, u + c}; the standing eigenvector is
        (1, 0, rho u^2 / A), the acoustic ones (1, u +- c, g) with
        g = (E0/Re) G(A). Returns (result, ok); sonic states (u^2 = c^2)
        are flagged for the caller's fallback.
        """
        A, q = psi[0], psi[1]
        u = q / A
        g = (f.E0 / f.re) * tube_law_slope(A, f)
        c2 = g * A / f.rho
        c = np.sqrt(c2)
        denom = (f.rho / A) * (u * u - c2)
        # NaN states fail both comparisons, so no separate finiteness check
        ok = (np.abs(denom) > 1e-12 * (np.abs(g) + 1e-300)) & (c > 0)
        safe = np.where(ok, denom, 1.0)
        da, dm, dp = dq[:, 0], dq[:, 1], dq[:, 2]
        beta0 = (dp - g * da) / safe
        s = da - beta0
        diff = (dm - u * s) / np.where(c > 0, c, 1.0)
        beta_plus = 0.5 * (s + diff)
        beta_minus = 0.5 * (s - diff)
        lam_m = np.abs(u - c)
        lam_p = np.abs(u + c)
        out = np.empty_like(dq)
        out[:, 0] = lam_m * beta_minus + lam_p * beta_plus
        out[:, 1] = lam_m * beta_minus * (u - c) + lam_p * beta_plus * (u + c)
        out[:, 2] = (lam_m * beta_minus + lam_p * beta_plus) * g
        return out, ok

    def check_admissible(self, U: np.ndarray) -> None:
        if np.any(U[0] <= 0.0):
            raise PositivityError("cross-sectional area A <= 0")

    def positivity_mask(self, U: np.ndarray) -> np.ndarray:
        return U[0] > 0.0

    def relaxation_time(self, f: WallFields):
        return f.tau

    def equilibrium(self, U: np.ndarray, f: WallFields) -> np.ndarray:
        out = U.copy()
        out[2] = elastic_pressure(U[0], f)
        return out

    def equilibrium_target(self, U: np.ndarray, f: WallFields) -> np.ndarray:
        return elastic_pressure(U[0], f)

    def relaxation_source(self, U: np.ndarray, f: WallFields):
        S = np.zeros_like(U)
        S[2] = U[2] - elastic_pressure(U[0], f)
        with np.errstate(divide="ignore"):
            inv = np.where(f.tau == 0.0, np.inf, 1.0 / f.tau)
        return S, inv

    def reduced(self) -> "BloodFlowElastic":
        return BloodFlowElastic(test=self.test, rho=self.rho, re=self.re,
                                h0=self.h0, ic=self.ic, boundary=self.boundary)

    def lift_reduced(self, U_red: np.ndarray, f_red: WallFields) -> np.ndarray:
        A, q = U_red[0], U_red[1]
        return np.stack([A, q, elastic_pressure(A, f_red)])

    def report_spec(self):
        return ("p", 2)


@dataclass(frozen=True)
class BloodFlowElastic:
    """Elastic-wall limit of BloodFlow: (A, q) with the tube law slaved."""

    kind = "bloodflow-elastic"
    n_vars = 2
    var_names = ("A", "q")
    flux_kind = "dot"
    implicit_policy = "none"
    has_relaxation = False
    test: int = 1
    rho: float = 1050.0
    re: float = 1.0
    h0: float = 0.0015
    ic: str = "sinusoidal"
    boundary: str = "periodic"

    def distribution(self) -> DistributionSpec:
        return uniform(-1.0, 1.0)

    def _full(self) -> "BloodFlow":
        return BloodFlow(test=self.test, rho=self.rho, re=self.re, h0=self.h0,
                         ic=self.ic)

    def grid_fields(self, grid: Grid1D, z: np.ndarray) -> WallFields:
        f = self._full().grid_fields(grid, z)
        return replace(f, tau=np.zeros_like(f.tau))

    def point_state(self, x: np.ndarray, z: np.ndarray, f=None) -> np.ndarray:
        return self._full().point_state(x, z)[:2]

    def physical_flux(self, U: np.ndarray, f) -> np.ndarray:
        A, q = U[0], U[1]
        return np.stack([q, q * q / A])

    def sound_speed(self, U: np.ndarray, f: WallFields) -> np.ndarray:
        return np.sqrt((f.Einf / f.re) * tube_law_slope(U[0], f) * U[0] / f.rho)

    def max_wave_speed(self, U, f: WallFields) -> np.ndarray:
        return np.abs(U[1] / U[0]) + self.sound_speed(U, f)

    def explicit_wave_speed(self, U, f):
        return self.max_wave_speed(U, f)

    def quasilinear_matrix(self, U, f: WallFields) -> np.ndarray:
        A, q = U[0], U[1]
        u = q / A
        c2 = (f.Einf / f.re) * tube_law_slope(A, f) * A / f.rho
        n = U.shape[1]
        M = np.zeros((n, 2, 2))
        M[:, 0, 1] = 1.0
        M[:, 1, 0] = c2 - u * u
        M[:, 1, 1] = 2.0 * u
        return M

    def quasilinear_increment(self, U, face_means, f: WallFields, dx):
        # face_means carries the elastic pressure as an extra trailing row
        grad_p = (face_means[-1, 1:] - face_means[-1, :-1]) / dx
        out = np.zeros_like(U)
        out[1] = -(U[0] / f.rho) * grad_p
        return out

    def abs_matrix_times(self, psi: np.ndarray, dq: np.ndarray, f: WallFields):
        """|M(psi)| @ dq for the 2x2 elastic system with eigenvalues
        u -+ c and eigenvectors (1, u -+ c)."""
        A, q = psi[0], psi[1]
        u = q / A
        c2 = (f.Einf / f.re) * tube_law_slope(A, f) * A / f.rho
        c = np.sqrt(c2)
        ok = c > 0  # NaN states compare False
        csafe = np.where(ok, c, 1.0)
        da, dm = dq[:, 0], dq[:, 1]
        beta_plus = (dm - (u - csafe) * da) / (2.0 * csafe)
        beta_minus = da - beta_plus
        lam_m = np.abs(u - c)
        lam_p = np.abs(u + c)
        out = np.empty_like(dq)
        out[:, 0] = lam_m * beta_minus + lam_p * beta_plus
        out[:, 1] = lam_m * beta_minus * (u - c) + lam_p * beta_plus * (u + c)
        return out, ok

    def face_scalar_rows(self, U: np.ndarray, f: WallFields) -> np.ndarray:
        """Rows whose reconstructed face values feed the nonconservative
        terms: state rows plus the pointwise elastic pressure."""
        return np.concatenate([U, elastic_pressure(U[0], f)[None, :]])

    def check_admissible(self, U: np.ndarray) -> None:
        if np.any(U[0] <= 0.0):
            raise PositivityError("cross-sectional area A <= 0")

    def positivity_mask(self, U: np.ndarray) -> np.ndarray:
        return U[0] > 0.0

    def equilibrium(self, U, f):
        return U

    def report_spec(self):
        return ("p", None)


# ---------------------------------------------------------------------------
# module-level operations


def physical_flux(model, state: np.ndarray, fields=None) -> np.ndarray:
    state = np.atleast_2d(np.asarray(state, dtype=float).T).T \
        if state.ndim == 1 else state
    model.check_admissible(state)
    return model.physical_flux(state, fields)


def max_wave_speed(model, state: np.ndarray, fields=None) -> np.ndarray:
    model.check_admissible(state)
    return model.max_wave_speed(state, fields)


def relaxation_source(model, state: np.ndarray, fields=None):
    if not model.has_relaxation:
        return np.zeros_like(state), 0.0
    return model.relaxation_source(state, fields)


def equilibrium_project(model, state: np.ndarray, fields=None) -> np.ndarray:
    return model.equilibrium(state, fields)


def reduced_model_of(model):
    if not hasattr(model, "reduced"):
        raise ValueError(f"model {model.kind!r} has no reduced asymptotic form")
    return model.reduced()


def initial_condition(model, grid: Grid1D, z: np.ndarray, quad: str = "midpoint") -> CellField:
    """Cell-averaged initial data; `quad` is 'midpoint' or 'gauss3'.

    Midpoint keeps second-order initialization; the 3-point Gauss average is
    used by the third-order solvers so initialization does not cap order.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    x = grid.cell_centers()
    if quad == "midpoint":
        values = model.point_state(x, z)
    elif quad == "gauss3":
        half = 0.5 * grid.dx
        values = None
        for node, w in zip(_GL3_NODES, _GL3_WEIGHTS):
            contrib = w * model.point_state(x + node * half, z)
            values = contrib if values is None else values + contrib
    else:
        raise ValueError(f"unknown quadrature {quad!r}")
    field = CellField(grid, values, model.boundary)
    model.check_admissible(field.values)
    return field


MODEL_KINDS = {
    "burgers": Burgers,
    "jinxin": JinXin,
    "swe": ShallowWater,
    "bloodflow": BloodFlow,
    "bloodflow-elastic": BloodFlowElastic,
}

"""Bellman functions and the pointwise inequalities behind the certificates.

For an admissible Psi with phi(s) = s*Psi(s) and U = 1/phi, the kernel
quantities are

    G(s) = int_0^s  d sigma / phi(sigma)        (= B'(s))
    H(s) = int_0^s  d sigma / Psi(sigma)        (= int_0^s sigma U)
    B(s) = s G(s) - H(s)                        (B(0)=B'(0)=0, B'' = U)

All three have elementary or special-function closed forms for the clamped
log family (scipy's expn covers integer alpha); other families fall back to
a Gauss-Legendre panel grid in x = log(1/s), with panel edges pinned to the
clamp knot so each panel integrand is smooth.  The normalization multiplier
k of Psi is folded in: G, H, B all scale by 1/k, so m(s) (the profile with
int_0^1 1/phi <= 1) is simply B of a normalized Psi.

Derived inequality constants used throughout (each follows from phi
increasing, Psi decreasing, and the divisor range only):

    midpoint gain of B      >= 1/4 int U(N) (dN)^2 dt      (dN = half-difference)
                            >= (Delta_I w)^2 / (16 n_psi)   (Cauchy-Schwarz)
    -dT/da (a in [1,2])     >= N^2 / (4 phi(N))
    pair inequality          : constant 1/20
    n-point inequality       : constant 1/80
    paraproduct inequality   : constant 1/16
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import expn, roots_legendre

from .carleson import CheckReport
from .config import DEFAULT_TOL, Tolerances
from .distribution import DistributionFunction, merged_pieces, mix
from .intervals import DyadicInterval
from .orlicz import ConstructionError, PsiFunction, n_psi
from .weights import DyadicWeight

PDE_STAGE1_FACTOR = 0.25       # midpoint finite-difference constant for nonincreasing U
PDE_FINAL_FACTOR = 1.0 / 16.0  # after Cauchy-Schwarz with half-differences
EMBED_STEP_FACTOR = 0.25       # from divisor^2 <= 4 and phi increasing
PAIR_CONSTANT = 1.0 / 20.0     # c/4 with c = 1/5 from 2/(8n+u) >= 1/(5n)
NPOINT_CONSTANT = 1.0 / 80.0   # c/16 with the same c
PARAPRODUCT_CONSTANT = 1.0 / 16.0


# ---------------------------------------------------------------------------
# quadrature backend for families without special-function closed forms
# ---------------------------------------------------------------------------

class _PanelGrid:
    """Cumulative tail integrals of g over x in [0, X] with GL panels.

    tail(x) = int_x^X g(y) dy; panel edges include the supplied knots so g
    only needs to be smooth per panel.
    """

    def __init__(self, g, knots: Sequence[float], X: float = 60.0,
                 panels: int = 1200, order: int = 12) -> None:
        edges = np.linspace(0.0, X, panels + 1)
        edges = np.union1d(edges, [k for k in knots if 0.0 < k < X])
        self.edges = edges
        self.g = g
        nodes, weights = roots_legendre(order)
        self._nodes = nodes
        self._weights = weights
        a = edges[:-1]
        b = edges[1:]
        mid = 0.5 * (a + b)[:, None]
        half = 0.5 * (b - a)[:, None]
        vals = g(mid + half * nodes[None, :])
        panel_ints = (half[:, 0]) * (vals @ weights)
        suffix = np.zeros(edges.size)
        suffix[:-1] = np.cumsum(panel_ints[::-1])[::-1]
        self.suffix = suffix

    def tail(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        xc = np.clip(x, 0.0, self.edges[-1])
        idx = np.searchsorted(self.edges, xc, side="right")
        idx = np.minimum(idx, self.edges.size - 1)
        upper = self.edges[idx]
        mid = 0.5 * (xc + upper)
        half = 0.5 * (upper - xc)
        vals = self.g(mid[:, None] + half[:, None] * self._nodes[None, :])
        partial = half * (vals @ self._weights)
        return partial + self.suffix[idx]


# ---------------------------------------------------------------------------
# kernel: G, H, B for one Psi
# ---------------------------------------------------------------------------

def _solve_phidphi(phi, target: float) -> float:
    """Solve Phi(t) Phi'(t) = target by bisection in log t."""
    lo, hi = phi.t_min, 2.0 * phi.t_min
    while float(phi.phi(hi) * phi.dphi(hi)) < target:
        hi *= 2.0
        if hi > 1e300:
            raise ConstructionError("Phi*Phi' bracket failed")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if float(phi.phi(mid) * phi.dphi(mid)) < target:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


class BellmanKernel:
    """Vectorized G, H, B, T for a PsiFunction (normalization included)."""

    def __init__(self, psi: PsiFunction) -> None:
        self.psi = psi
        self._x0 = math.log(1.0 / psi.s0) if psi.s0 < 1.0 else 0.0
        self._H_grid: Optional[_PanelGrid] = None
        self._G_grid: Optional[_PanelGrid] = None
        a = psi.alpha
        self._integer_log = (psi.mode == "clamped-log"
                             and abs(a - round(a)) < 1e-12 and round(a) >= 2)

    # raw pieces (without the 1/k factor) ---------------------------------

    def _G_raw(self, s: np.ndarray) -> np.ndarray:
        psi = self.psi
        a, x0 = psi.alpha, self._x0
        with np.errstate(divide="ignore"):
            x = np.log(1.0 / s)
        if psi.mode == "clamped-log":
            xs = np.maximum(x, x0)
            below = xs ** (1.0 - a) / (a - 1.0)
            g0 = x0 ** (1.0 - a) / (a - 1.0)
            above = g0 + np.log(np.maximum(s, psi.s0) / psi.s0) / psi.clamp_value
            return np.where(s <= psi.s0, below, above)
        if psi.mode == "clamped-loglog":
            xs = np.maximum(x, x0)
            lx = np.log(xs)
            below = lx ** (1.0 - a) / (a - 1.0)
            g0 = math.log(x0) ** (1.0 - a) / (a - 1.0)
            above = g0 + np.log(np.maximum(s, psi.s0) / psi.s0) / psi.clamp_value
            return np.where(s <= psi.s0, below, above)
        # parametric: panel grid on x-space plus an analytic-tail estimate
        grid = self._ensure_G_grid()
        xs = np.minimum(x, 59.0)
        return grid.tail(xs) + self._param_G_tail

    def _H_raw(self, s: np.ndarray) -> np.ndarray:
        psi = self.psi
        a, x0 = psi.alpha, self._x0
        with np.errstate(divide="ignore"):
            x = np.log(1.0 / s)
        xs = np.maximum(x, x0)
        if self._integer_log:
            n = int(round(a))
            below = xs ** (1.0 - a) * expn(n, xs)
            h0 = x0 ** (1.0 - a) * expn(n, x0)
        else:
            grid = self._ensure_H_grid()
            below = grid.tail(xs)
            h0 = float(grid.tail(x0)[0])
        above = h0 + (np.maximum(s, psi.s0) - psi.s0) / psi.clamp_value
        return np.where(s <= psi.s0, below, above)

    def _ensure_H_grid(self) -> _PanelGrid:
        if self._H_grid is None:
            g = lambda y: np.exp(-y) / self.psi.psi_raw(np.exp(-y))
            panels = 300 if self.psi.mode == "parametric" else 1200
            self._H_grid = _PanelGrid(g, knots=[self._x0], panels=panels)
        return self._H_grid

    def _ensure_G_grid(self) -> _PanelGrid:
        if self._G_grid is None:
            g = lambda y: 1.0 / self.psi.psi_raw(np.exp(-y))
            panels = 300 if self.psi.mode == "parametric" else 1200
            self._G_grid = _PanelGrid(g, knots=[self._x0], panels=panels)
            # tail beyond x = 60 via the parametric identity: with
            # y = log(Phi Phi'), int 1/Psi dy = int (1/Phi + Phi''/Phi'^2) dt,
            # whose second part telescopes to 1/Phi'.  Table-grade accuracy.
            src = self.psi.phi_source
            if src is not None:
                t60 = _solve_phidphi(src, math.exp(60.0))
                self._param_G_tail = src.tail_integral(t60) + 1.0 / float(src.dphi(t60))
            else:
                self._param_G_tail = 0.0
        return self._G_grid

    # public evaluators ---------------------------------------------------------

    def G(self, s) -> np.ndarray | float:
        """B'(s) = int_0^s d sigma / phi(sigma)."""
        arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = np.where(arr > 0, self._G_raw(np.maximum(arr, 1e-300)) / self.psi.k, 0.0)
        return out if np.ndim(s) else float(out[0])

    def H(self, s) -> np.ndarray | float:
        arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = np.where(arr > 0, self._H_raw(np.maximum(arr, 1e-300)) / self.psi.k, 0.0)
        return out if np.ndim(s) else float(out[0])

    def B(self, s) -> np.ndarray | float:
        """Convex potential with B(0) = B'(0) = 0 and B'' = 1/phi."""
        arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        pos = np.maximum(arr, 1e-300)
        out = np.where(arr > 0, pos * self._G_raw(pos) / self.psi.k
                       - self._H_raw(pos) / self.psi.k, 0.0)
        return out if np.ndim(s) else float(out[0])

    def U(self, s) -> np.ndarray | float:
        return 1.0 / self.psi.phi(s)

    @property
    def C(self) -> float:
        """int_0^1 ds/phi = B'(1); the leaf-bound constant."""
        return float(self.G(1.0))

    @property
    def is_normalized(self) -> bool:
        """m-profile requirements: C <= 1 and phi(s) >= s."""
        return self.C <= 1.0 + 1e-12 and self.psi.min_psi >= 1.0 - 1e-12

    # m-profile: identical integrals, valid under normalization ------------

    def m(self, s):
        return self.B(s)

    def mprime(self, s):
        return self.G(s)

    # the two-variable auxiliary function -----------------------------------

    def T(self, divisor: float, s) -> np.ndarray | float:
        """T(divisor, s) = s * G(s / divisor), divisor in [1, 2] (embed: A+1,
        paraproduct: M+1)."""
        if divisor < 1.0 - 1e-9:
            raise ValueError("divisor below 1")
        arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = arr * np.atleast_1d(self.G(arr / divisor))
        return out if np.ndim(s) else float(out[0])

    def dT_ddivisor(self, divisor: float, s) -> np.ndarray | float:
        """Analytic partial: dT/d(divisor) = -s^2 / (divisor^2 phi(s/divisor))."""
        arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = -(arr * arr) / (divisor * divisor * self.psi.phi(arr / divisor))
        return out if np.ndim(s) else float(out[0])

    # distribution-level integrals ------------------------------------------

    def script_B(self, dist: DistributionFunction) -> float:
        """int B(N(t)) dt, exact step sum."""
        return dist.step_integral(self.B)

    def script_T(self, divisor: float, dist: DistributionFunction) -> float:
        return dist.step_integral(lambda s: self.T(divisor, s))

    def n_of(self, dist: DistributionFunction) -> float:
        return n_psi(self.psi, dist)

    def w_of(self, dist: DistributionFunction) -> float:
        return dist.layer_cake()

    def u_of(self, dist: DistributionFunction) -> float:
        """u(N) = int (2N - m(N)) dt; requires a normalized Psi."""
        if dist.is_zero:
            return 0.0
        return dist.step_integral(lambda s: 2.0 * s - self.m(s))

    def u_of_m(self, dist: DistributionFunction, m_budget: float) -> float:
        """u(N, M) = 2 w(N) - int T(M+1, N(t)) dt, M in [0, 1]."""
        if not -1e-9 <= m_budget <= 1.0 + 1e-9:
            raise ValueError(f"M = {m_budget} outside [0, 1]")
        if dist.is_zero:
            return 0.0
        return dist.step_integral(lambda s: 2.0 * s - self.T(m_budget + 1.0, s))


def scalar_bellman(f: float, u: float) -> float:
    """B(f, u) = f^2/u with the perspective-function closure B(0, 0) = 0."""
    if u > 0:
        return f * f / u
    if f == 0.0:
        return 0.0
    raise ValueError("f^2/u undefined: u <= 0 with f != 0")


# ---------------------------------------------------------------------------
# profiles (grid + monotone cubic view, used for tables and profile checks)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BellmanProfile:
    grid: np.ndarray
    B: np.ndarray
    Bprime: np.ndarray
    kind: str                     # "B" or "m"
    C: float                      # B'(1)
    interpolator: PchipInterpolator = field(repr=False, compare=False, default=None)

    def __call__(self, s):
        return self.interpolator(s)


def build_profile(psi: PsiFunction, kind: str = "B", points: int = 2000,
                  tol: Tolerances = DEFAULT_TOL) -> BellmanProfile:
    """Tabulate B (or m) on a log-spaced grid with validation.

    Checks: endpoint limits, convexity of the grid values, B <= B'(1) s,
    and a finite-difference match B'' = 1/phi at interior points away from
    the clamp knot (tolerance 1e-8).  For kind="m" the Psi must be
    normalized and m' <= 1, m(s) <= s are verified.
    """
    kernel = BellmanKernel(psi)
    if kind == "m" and not kernel.is_normalized:
        raise ConstructionError("m-profile requires a normalized Psi")
    s = np.geomspace(1e-16, 1.0, points)
    Bv = np.asarray(kernel.B(s))
    Gv = np.asarray(kernel.G(s))
    C = kernel.C
    if not (Bv[0] >= 0 and Bv[0] < 1e-12):
        raise ConstructionError(f"B(0+) limit violated: {Bv[0]}")
    if np.any(np.diff(Bv) < -1e-15):
        raise ConstructionError("B not nondecreasing on the grid")
    if np.any(Bv > C * s + 1e-10):
        raise ConstructionError("B(s) <= B'(1) s violated on the grid")
    # chord convexity on consecutive grid triples
    x1, x2, x3 = s[:-2], s[1:-1], s[2:]
    lam = (x2 - x1) / (x3 - x1)
    chord = (1 - lam) * Bv[:-2] + lam * Bv[2:]
    if np.any(Bv[1:-1] > chord + 1e-10):
        raise ConstructionError("grid convexity of B violated")
    # FD second derivative vs 1/phi at interior points (splice excluded);
    # h balances Richardson truncation (h^4) against rounding (eps/h^2).
    # Panel-backed kernels carry an absolute error floor ~1e-17, so their
    # meaningful probe range starts higher than the closed-form one.
    s_lo = 1e-8 if kernel._integer_log else 1e-3
    probe = s[(s > s_lo) & (s < 0.9)][::50]
    probe = probe[np.abs(np.log(probe / psi.s0)) > 0.02]
    for sv in probe:
        h = 2e-3 * sv
        d1 = (float(kernel.B(sv + h)) - 2 * float(kernel.B(sv)) + float(kernel.B(sv - h))) / h**2
        h2 = h / 2
        d2 = (float(kernel.B(sv + h2)) - 2 * float(kernel.B(sv)) + float(kernel.B(sv - h2))) / h2**2
        richardson = (4 * d2 - d1) / 3.0
        target = float(kernel.U(sv))
        if abs(richardson - target) > 1e-8 * max(1.0, abs(target)):
            raise ConstructionError(
                f"B'' mismatch at s={sv:.6g}: fd {richardson:.12g} vs 1/phi {target:.12g}")
    if kind == "m":
        if np.any(Gv > 1.0 + 1e-10):
            raise ConstructionError("m'(s) <= 1 violated")
        if np.any(Bv > s + 1e-10):
            raise ConstructionError("m(s) <= s violated")
    interp = PchipInterpolator(s, Bv, extrapolate=False)
    return BellmanProfile(s, Bv, Gv, kind, C, interp)


# ---------------------------------------------------------------------------
# per-node checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepGain:
    gain: float
    stage1: float
    stage2: float
    passed: bool
    flags: tuple[str, ...] = ()
    detail: dict = field(default_factory=dict)


def bellman_potential(w: DyadicWeight, i: DyadicInterval, psi: PsiFunction,
                      kernel: BellmanKernel | None = None,
                      tol: Tolerances = DEFAULT_TOL) -> float:
    """Script-B potential int_0^inf B(N_I(t)) dt; asserts <= B'(1) <w>_I."""
    kernel = kernel or BellmanKernel(psi)
    dist = w.distribution(i)
    if dist.is_zero:
        return 0.0
    val = kernel.script_B(dist)
    bound = kernel.C * w.average(i)
    if val > bound + tol.slack(bound):
        raise AssertionError(f"script-B leaf bound violated: {val} > {bound}")
    return val


def check_pde_step(w: DyadicWeight, i: DyadicInterval, psi: PsiFunction,
                   kernel: BellmanKernel | None = None,
                   dists: tuple | None = None,
                   tol: Tolerances = DEFAULT_TOL) -> StepGain:
    """Midpoint gain of the B-potential at one node with its two-stage bound.

    gain   = (scriptB(I-) + scriptB(I+))/2 - scriptB(I)
    stage1 = 1/4 int U(N_I) (dN)^2 dt,  dN = (N_{I+} - N_{I-})/2
    stage2 = (Delta_I w)^2 / (16 n_psi(N_I))

    gain >= stage1 holds for any nonincreasing U (one-sided tent bound);
    stage1 >= stage2 is Cauchy-Schwarz plus int dN dt = Delta_I w / 2.
    """
    kernel = kernel or BellmanKernel(psi)
    if dists is None:
        d_i = w.distribution(i)
        d_m = w.distribution(i.minus)
        d_p = w.distribution(i.plus)
    else:
        d_i, d_m, d_p = dists
    if d_i.is_zero:
        raise ValueError("w vanishes identically on the interval")
    flags = []
    if d_m.is_zero or d_p.is_zero:
        flags.append("zero child")
    gain = 0.5 * (kernel.script_B(d_m) + kernel.script_B(d_p)) - kernel.script_B(d_i)
    dt, nl, nr = merged_pieces(d_m, d_p)
    nm = 0.5 * (nl + nr)
    dn = 0.5 * (nr - nl)
    mask = nm > 0
    stage1 = PDE_STAGE1_FACTOR * float(
        np.dot(dt[mask], dn[mask] ** 2 / psi.phi(nm[mask])))
    dw = w.haar_difference(i)
    n_val = kernel.n_of(d_i)
    stage2 = PDE_FINAL_FACTOR * dw * dw / n_val
    ok = (gain >= stage1 - tol.slack(gain, stage1)
          and stage1 >= stage2 - tol.slack(stage1, stage2))
    return StepGain(gain, stage1, stage2, ok, tuple(flags),
                    {"haar_difference": dw, "n_psi": n_val})


def check_embed_step(w: DyadicWeight, i: DyadicInterval, psi: PsiFunction,
                     alpha_i: float, acc_parent: float, acc_minus: float,
                     acc_plus: float,
                     kernel: BellmanKernel | None = None,
                     dists: tuple | None = None,
                     tol: Tolerances = DEFAULT_TOL) -> StepGain:
    """Concavity gain of B(A, N) = C N - T(A+1, N) at one node.

    gain   = (T(A_- + 1, I-) + T(A_+ + 1, I+))/2 - T(A_I + 1, I)
    stage1 = 1/4 alpha_I int N^2/phi(N) dt
    stage2 = 1/4 alpha_I <w>_I^2 / n_psi(N_I)

    Requires the normalized Carleson accumulator A_I <= 1.  The first bound
    combines joint convexity of T with -dT/d(divisor) >= N^2/(4 phi(N)); the
    second is Cauchy-Schwarz.
    """
    kernel = kernel or BellmanKernel(psi)
    if acc_parent > 1.0 + 1e-9:
        raise ValueError(f"Carleson accumulator {acc_parent} exceeds 1; normalize first")
    if dists is None:
        d_i = w.distribution(i)
        d_m = w.distribution(i.minus)
        d_p = w.distribution(i.plus)
    else:
        d_i, d_m, d_p = dists
    if d_i.is_zero:
        raise ValueError("w vanishes identically on the interval")
    flags = []
    if d_m.is_zero or d_p.is_zero:
        flags.append("zero child")
    gain = (0.5 * (kernel.script_T(acc_minus + 1.0, d_m)
                   + kernel.script_T(acc_plus + 1.0, d_p))
            - kernel.script_T(acc_parent + 1.0, d_i))
    stage1 = EMBED_STEP_FACTOR * alpha_i * d_i.step_integral(
        lambda s: s * s / psi.phi(s))
    avg = w.average(i)
    n_val = kernel.n_of(d_i)
    stage2 = EMBED_STEP_FACTOR * alpha_i * avg * avg / n_val
    ok = (gain >= stage1 - tol.slack(gain, stage1)
          and stage1 >= stage2 - tol.slack(stage1, stage2))
    return StepGain(gain, stage1, stage2, ok, tuple(flags),
                    {"average": avg, "n_psi": n_val, "alpha": alpha_i})


def check_t_convexity(psi: PsiFunction,
                      grid_divisor: np.ndarray | None = None,
                      grid_n: np.ndarray | None = None,
                      kernel: BellmanKernel | None = None,
                      tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Grid check of T's convexity, Monge-Ampere degeneracy, and slope bound.

    On a divisor x N grid (divisor = A+1 in [1,2]):
      (a) the central-difference Hessian of T is PSD up to 1e-6 * scale;
      (b) |T_aa T_nn - T_an^2| <= 1e-5 * scale^2 (T is linear on rays n = c a);
      (c) -dT/d(divisor) >= N^2 / (4 phi(N)) via the analytic formula;
      (d) analytic dT/d(divisor) matches finite differences to 1e-6 relative.
    Points whose inner argument n/divisor falls in a small log-neighborhood
    of the clamp knot are excluded and counted.
    """
    kernel = kernel or BellmanKernel(psi)
    if grid_divisor is None:
        grid_divisor = np.linspace(1.02, 1.98, 50)
    if grid_n is None:
        grid_n = np.linspace(0.02, 0.98, 50)
    h_rel = 1e-4
    excluded = 0
    checked = 0
    failures = []
    for a in grid_divisor:
        for n in grid_n:
            u_in = n / a
            if abs(math.log(u_in / psi.s0)) < 0.02 or abs(math.log(min(n, 1.0) / psi.s0)) < 0.02:
                excluded += 1
                continue
            ha = h_rel * a
            hn = h_rel * n
            T = lambda aa, nn: float(kernel.T(aa, nn))
            t0 = T(a, n)
            taa = (T(a + ha, n) - 2 * t0 + T(a - ha, n)) / ha**2
            tnn = (T(a, n + hn) - 2 * t0 + T(a, n - hn)) / hn**2
            tan = (T(a + ha, n + hn) - T(a + ha, n - hn)
                   - T(a - ha, n + hn) + T(a - ha, n - hn)) / (4 * ha * hn)
            checked += 1
            scale = abs(taa) + abs(tnn) + abs(tan) + 1e-30
            tr = taa + tnn
            det = taa * tnn - tan * tan
            eig_min = 0.5 * (tr - math.sqrt(max(tr * tr - 4 * det, 0.0)))
            if eig_min < -1e-6 * scale:
                failures.append(("psd", a, n, eig_min))
            if abs(det) > 1e-5 * scale * scale:
                failures.append(("monge-ampere", a, n, det))
            slope = float(kernel.dT_ddivisor(a, n))
            bound = n * n / (4.0 * float(psi.phi(n)))
            if -slope < bound * (1 - 1e-9):
                failures.append(("slope-bound", a, n, -slope - bound))
            fd_slope = (T(a + ha, n) - T(a - ha, n)) / (2 * ha)
            if abs(fd_slope - slope) > 1e-6 * max(abs(slope), 1e-12):
                failures.append(("slope-fd", a, n, fd_slope - slope))
    return CheckReport("t-convexity", float(len(failures)), 0.0, not failures,
                       detail={"checked": checked, "excluded": excluded,
                               "failures": failures[:20]})


# ---------------------------------------------------------------------------
# main inequalities of the scalar Bellman function f^2/u
# ---------------------------------------------------------------------------

def _require_normalized(kernel: BellmanKernel) -> None:
    if not kernel.is_normalized:
        raise ValueError("this inequality requires a normalized Psi "
                         "(int 1/phi <= 1 and phi(s) >= s)")


def check_main_ineq_pair(psi: PsiFunction, f1: float, d1: DistributionFunction,
                         f2: float, d2: DistributionFunction,
                         d_mid: DistributionFunction | None = None,
                         kernel: BellmanKernel | None = None,
                         tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Pair convexity gain of f^2/u(N) with constant 1/20.

    (B(f1,u(N1)) + B(f2,u(N2)))/2 - B(f,u(N)) >= (1/20) (f1-f)^2 / n_psi(N)
    for f = (f1+f2)/2, N = (N1+N2)/2.
    """
    kernel = kernel or BellmanKernel(psi)
    _require_normalized(kernel)
    if d_mid is None:
        d_mid = mix([d1, d2], np.array([0.5, 0.5]))
    fm = 0.5 * (f1 + f2)
    u1, u2, um = kernel.u_of(d1), kernel.u_of(d2), kernel.u_of(d_mid)
    if (u1 <= 0 and f1 != 0) or (u2 <= 0 and f2 != 0):
        raise ValueError("invalid input: u <= 0 with a nonzero f")
    lhs = 0.5 * (scalar_bellman(f1, u1) + scalar_bellman(f2, u2)) \
        - scalar_bellman(fm, um)
    if d_mid.is_zero:
        return CheckReport("main-ineq-pair", lhs, 0.0, lhs >= -tol.slack(lhs),
                           flags=("degenerate",))
    n_val = kernel.n_of(d_mid)
    rhs = PAIR_CONSTANT * (f1 - fm) ** 2 / n_val
    return CheckReport("main-ineq-pair", lhs, rhs,
                       lhs >= rhs - tol.slack(lhs, rhs),
                       ratio=lhs / rhs if rhs > 0 else float("inf"),
                       detail={"n_psi": n_val, "u_mid": um})


def check_main_ineq_npoint(psi: PsiFunction, fs: Sequence[float],
                           dists: Sequence[DistributionFunction],
                           alphas: Sequence[float],
                           d_mix: DistributionFunction | None = None,
                           kernel: BellmanKernel | None = None,
                           tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """n-point convexity gain with constant 1/80.

    -B(f, u(N)) + sum_k alpha_k B(f_k, u(N_k))
        >= (1/80) (sum_k alpha_k |f_k - f|)^2 / n_psi(N)
    under f = sum alpha_k f_k, N = sum alpha_k N_k, sum alpha_k = 1.
    """
    kernel = kernel or BellmanKernel(psi)
    _require_normalized(kernel)
    alphas = np.asarray(alphas, dtype=np.float64)
    if abs(float(alphas.sum()) - 1.0) > tol.identity:
        raise ValueError("alphas must sum to 1")
    if np.any(alphas < 0):
        raise ValueError("alphas must be nonnegative")
    fbar = float(np.dot(alphas, np.asarray(fs, dtype=np.float64)))
    if d_mix is None:
        d_mix = mix(list(dists), alphas)
    um = kernel.u_of(d_mix)
    lhs = -scalar_bellman(fbar, um)
    for a, f, d in zip(alphas, fs, dists):
        lhs += a * scalar_bellman(f, kernel.u_of(d))
    if d_mix.is_zero:
        return CheckReport("main-ineq-npoint", lhs, 0.0, lhs >= -tol.slack(lhs),
                           flags=("degenerate",))
    n_val = kernel.n_of(d_mix)
    spread = float(np.dot(alphas, np.abs(np.asarray(fs) - fbar)))
    rhs = NPOINT_CONSTANT * spread * spread / n_val
    return CheckReport("main-ineq-npoint", lhs, rhs,
                       lhs >= rhs - tol.slack(lhs, rhs),
                       ratio=lhs / rhs if rhs > 0 else float("inf"),
                       detail={"n_psi": n_val})


def check_paraproduct_step(psi: PsiFunction,
                           f: float, dist: DistributionFunction, m_budget: float,
                           fs: Sequence[float],
                           dists: Sequence[DistributionFunction],
                           m_budgets: Sequence[float],
                           alphas: Sequence[float], a: float,
                           kernel: BellmanKernel | None = None,
                           spot_check_derivative: bool = False,
                           tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Paraproduct step inequality with constant 1/16.

    With B~(f, N, M) = f^2 / u(N, M), u(N, M) = 2 w(N) - int T(M+1, N) dt:
    -B~(X) + sum_k alpha_k B~(X_k) >= (1/16) a f^2 / n_psi(N)
    under f = sum alpha_k f_k, N = sum alpha_k N_k, M = a + sum alpha_k M_k.
    """
    kernel = kernel or BellmanKernel(psi)
    _require_normalized(kernel)
    alphas = np.asarray(alphas, dtype=np.float64)
    if abs(float(alphas.sum()) - 1.0) > tol.identity:
        raise ValueError("alphas must sum to 1")
    if a < 0:
        raise ValueError("a must be >= 0")
    if not -1e-9 <= m_budget <= 1.0 + 1e-9:
        raise ValueError(f"M = {m_budget} outside [0, 1]")
    fsum = float(np.dot(alphas, np.asarray(fs, dtype=np.float64)))
    if abs(fsum - f) > tol.identity * max(1.0, abs(f)):
        raise ValueError("f inconsistent with sum alpha_k f_k")
    msum = a + float(np.dot(alphas, np.asarray(m_budgets, dtype=np.float64)))
    if abs(msum - m_budget) > tol.identity * max(1.0, abs(m_budget)):
        raise ValueError("M inconsistent with a + sum alpha_k M_k")
    lhs = -scalar_bellman(f, kernel.u_of_m(dist, m_budget))
    for al, fk, dk, mk in zip(alphas, fs, dists, m_budgets):
        lhs += al * scalar_bellman(fk, kernel.u_of_m(dk, mk))
    if dist.is_zero:
        return CheckReport("paraproduct-step", lhs, 0.0, lhs >= -tol.slack(lhs),
                           flags=("degenerate",))
    n_val = kernel.n_of(dist)
    rhs = PARAPRODUCT_CONSTANT * a * f * f / n_val
    detail = {"n_psi": n_val}
    flags = []
    if spot_check_derivative and 1e-4 < m_budget < 1.0 - 1e-4:
        h = 1e-5
        bp = scalar_bellman(f, kernel.u_of_m(dist, m_budget + h))
        bm = scalar_bellman(f, kernel.u_of_m(dist, m_budget - h))
        slope = -(bp - bm) / (2 * h)
        target = PARAPRODUCT_CONSTANT * f * f / n_val
        detail["dB_dM"] = slope
        detail["dB_dM_bound"] = target
        if slope < target * (1 - 1e-6) - 1e-12:
            flags.append("derivative bound failed")
    passed = lhs >= rhs - tol.slack(lhs, rhs) and "derivative bound failed" not in flags
    return CheckReport("paraproduct-step", lhs, rhs, passed,
                       ratio=lhs / rhs if rhs > 0 else float("inf"),
                       flags=tuple(flags), detail=detail)


def u_of(psi: PsiFunction, dist: DistributionFunction) -> float:
    """u(N) = int (2N - m(N)) dt; asserts w(N) <= u <= 2 w(N)."""
    kernel = BellmanKernel(psi)
    _require_normalized(kernel)
    val = kernel.u_of(dist)
    w = dist.layer_cake()
    if not (w - 1e-9 * max(1.0, w) <= val <= 2 * w + 1e-9 * max(1.0, w)):
        raise AssertionError(f"u(N) = {val} outside [w, 2w] = [{w}, {2 * w}]")
    return val


def u_of_m(psi: PsiFunction, dist: DistributionFunction, m_budget: float) -> float:
    kernel = BellmanKernel(psi)
    _require_normalized(kernel)
    val = kernel.u_of_m(dist, m_budget)
    w = dist.layer_cake()
    if not (w - 1e-9 * max(1.0, w) <= val <= 2 * w + 1e-9 * max(1.0, w)):
        raise AssertionError(f"u(N, M) = {val} outside [w, 2w]")
    return val

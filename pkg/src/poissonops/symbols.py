"""Symbol-kernels, multiplier symbols, and numerical seminorm estimators.

A symbol-kernel ``k(xi', mu; x_n)`` defines a Poisson operator: a tangential
Fourier multiplier whose value depends on the normal coordinate.  The "strong"
class asks for Schwartz-type decay of the rescaled kernel
``ktilde(xi', mu; t) = k(xi', mu; t / <xi', mu>)`` in ``t``; the "weak" class
only for bounded ``(t d/dt)``-derivatives against polynomial weights.  Both
seminorm families are estimated here by sampling a finite probe lattice with
central finite differences, which yields lower estimates; refinement stability
of those estimates is the operational finiteness certificate.

Evaluator convention: ``func(xi, mu, xn)`` where the last axis of ``xi`` holds
the frequency components (a bare scalar is a single one-dimensional frequency),
``mu`` is a complex scalar, a broadcastable array, or ``None`` for kernels with
the empty sector, and ``xn`` broadcasts against the leading axes of ``xi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .core import Sector, SectorError, bracket, sector_contains

__all__ = [
    "SymbolKernel",
    "MultiplierSymbol",
    "ProbeSpec",
    "eval_kernel",
    "eval_scaled",
    "seminorm",
    "char_lp_bound",
    "mikhlin_fnorm",
    "lemma_max_eval",
    "heat_kernel",
    "dtn_symbol",
    "heat_dynbc_b",
    "ch_b",
    "kpp_m1",
    "kpp_m2",
    "kpp_kernel",
    "constant_one",
    "zero_kernel",
    "freeze_mu",
    "kernel_catalog",
]

# central difference stencils, offsets paired with coefficients; divide by h**order
_STEN: dict[int, tuple[tuple[int, float], ...]] = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}

_STEN_RADIUS = {j: max(abs(off) for off, _ in st) for j, st in _STEN.items()}

# Stirling numbers of the second kind: (t d/dt)^m = sum_j S(m,j) t^j (d/dt)^j
_STIRLING2: dict[int, dict[int, float]] = {
    0: {0: 1.0},
    1: {1: 1.0},
    2: {1: 1.0, 2: 1.0},
    3: {1: 1.0, 2: 3.0, 3: 1.0},
    4: {1: 1.0, 2: 7.0, 3: 6.0, 4: 1.0},
}


def _xi_sq(xi) -> np.ndarray:
    arr = np.asarray(xi, dtype=float)
    if arr.ndim == 0:
        return arr * arr
    return np.sum(arr * arr, axis=-1)


def _abs_sq(mu) -> np.ndarray | float:
    if mu is None:
        return 0.0
    return np.abs(mu) ** 2


@dataclass(frozen=True)
class SymbolKernel:
    """A symbol-kernel with its order, claimed class, and admissible sector.

    Parameters
    ----------
    name : str
        Catalog identifier.
    order : float
        Growth order ``d`` of the bracket weight in the seminorms.
    kind : {"strong", "weak"}
        Claimed symbol class of the kernel.
    sector : Sector
        Admissible region for the spectral parameter.
    func : callable
        Evaluator ``func(xi, mu, xn)`` as described in the module docstring.
    xn_derivative : callable, optional
        Analytic normal derivative ``(xi, mu, xn, order) -> value`` when the
        kernel has one in closed form; finite differences otherwise.
    """

    name: str
    order: float
    kind: str
    sector: Sector
    func: Callable
    xn_derivative: Optional[Callable] = None

    def __post_init__(self) -> None:
        if self.kind not in ("strong", "weak"):
            raise ValueError(f"kind must be 'strong' or 'weak', got {self.kind!r}")


@dataclass(frozen=True)
class MultiplierSymbol:
    """A parameter-dependent tangential Fourier multiplier ``a(xi', mu)``."""

    name: str
    func: Callable
    sector: Sector


def _require_mu(kernel_sector: Sector, mu) -> None:
    if mu is None:
        if not kernel_sector.is_empty:
            raise SectorError("spectral parameter required for a nonempty sector")
    else:
        if not sector_contains(kernel_sector, mu):
            raise SectorError(f"mu={mu} outside the admissible sector")


def eval_kernel(k: SymbolKernel, xi, mu, xn):
    """Evaluate ``k(xi, mu, xn)`` with sector and domain checks.

    ``xn`` must be nonnegative; ``mu`` may be omitted exactly when the sector
    is empty.  Scalar inputs give a complex scalar back.
    """
    _require_mu(k.sector, mu)
    xn_arr = np.asarray(xn, dtype=float)
    if np.any(xn_arr < 0):
        raise ValueError("normal coordinate must be nonnegative")
    out = k.func(xi, mu, xn_arr)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def eval_scaled(k: SymbolKernel, xi, mu, t):
    """Evaluate the rescaled kernel ``ktilde`` at ``(xi, mu, t)``.

    This is ``k`` at normal coordinate ``t / <xi, mu>``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("scaled coordinate must be nonnegative")
    return eval_kernel(k, xi, mu, t_arr / bracket(xi, mu))


# ---------------------------------------------------------------------------
# probe lattices


@dataclass(frozen=True)
class ProbeSpec:
    """Sampling lattice for seminorm and characterization estimates.

    ``refined()`` doubles the sampling density and widens every range by a
    factor of four, the refinement step used for finiteness certificates.
    Finite-difference steps are ``h_rel`` times the local bracket weight.
    ``rays`` optionally pins the spectral samples to explicit argument angles
    (used as given, e.g. ``(0.0,)`` for a real-parameter scan) instead of the
    default three rays spread across the sector interior.
    """

    xi_max: float = 8.0
    mu_max: float = 8.0
    t_max: float = 8.0
    density: int = 1
    h_rel: float = 1e-3
    margin: float = 0.01
    rays: tuple | None = None

    def refined(self) -> "ProbeSpec":
        return replace(
            self,
            xi_max=4.0 * self.xi_max,
            mu_max=4.0 * self.mu_max,
            t_max=4.0 * self.t_max,
            density=2 * self.density,
        )

    def xi_values(self) -> np.ndarray:
        n = 4 * self.density + 1
        mags = np.geomspace(0.25, self.xi_max, n)
        return np.concatenate([[0.0], mags, -mags])

    def t_values(self) -> np.ndarray:
        n = 8 * self.density + 1
        return np.concatenate([[0.0], np.geomspace(0.125, self.t_max, n)])

    def mu_values(self, sector: Sector) -> list:
        """Spectral samples on rays inside the sector, or ``[None]`` if empty.

        Rays keep an angular distance of at least ``margin`` from the sector
        boundary to avoid grazing branch cuts.
        """
        if sector.is_empty:
            return [None]
        if self.rays is not None:
            angles = list(self.rays)
        else:
            lo = sector.alpha + self.margin
            hi = sector.beta - self.margin
            if hi <= lo:
                angles = [0.5 * (sector.alpha + sector.beta)]
            else:
                angles = [lo + f * (hi - lo) for f in (0.05, 0.5, 0.95)]
        n = 2 * self.density + 2
        mags = np.geomspace(0.5, self.mu_max, n)
        return [m * complex(math.cos(a), math.sin(a)) for a in angles for m in mags]

    def mikhlin_axis_values(self) -> np.ndarray:
        """Per-axis samples for the multiplier norm; zero excluded."""
        n = 6 * self.density + 1
        mags = np.geomspace(1e-2, self.xi_max, n)
        return np.concatenate([mags, -mags])


# ---------------------------------------------------------------------------
# seminorm estimation


def seminorm(k: SymbolKernel, N: int, probe: ProbeSpec | None = None) -> float:
    """Lower estimate of the order-``N`` symbol-class seminorm of ``k``.

    For the strong class this is the lattice supremum over all index
    combinations ``l + l' + |a| + |b| <= N`` of

        ``|t^l D_t^l' D_xi^a D_mu^b ktilde| * <xi, mu>^(-d + |a| + |b|)``

    and for the weak class the analogue with ``(t D_t)^m`` derivatives and
    ``<t>^l`` weights.  Derivatives in ``mu`` act on its two real coordinates.
    Returns a lower bound; compare against a refined probe to certify
    finiteness.
    """
    if not 0 <= N <= 4:
        raise ValueError("derivative budget N must lie in 0..4")
    probe = probe or ProbeSpec()
    best = 0.0
    for mu in probe.mu_values(k.sector):
        best = max(best, _seminorm_at_mu(k, N, probe, mu))
    return best


def _seminorm_at_mu(k: SymbolKernel, N: int, probe: ProbeSpec, mu) -> float:
    xi = probe.xi_values()[:, None]  # (nx, 1)
    t = probe.t_values()[None, :]  # (1, nt)
    br = np.sqrt(1.0 + xi * xi + _abs_sq(mu))
    h = probe.h_rel * br

    cache: dict[tuple[int, int, int, int], np.ndarray] = {}

    def shifted_eval(i: int, p: int, q: int, s: int) -> np.ndarray:
        key = (i, p, q, s)
        if key not in cache:
            xs = xi + i * h
            ms = None if mu is None else mu + (p + 1j * q) * h
            brs = np.sqrt(1.0 + xs * xs + _abs_sq(ms))
            ts = np.maximum(t + s * h, 0.0)
            cache[key] = np.asarray(k.func(xs[..., None], ms, ts / brs), dtype=complex)
        return cache[key]

    def d_mixed(a: int, b1: int, b2: int, jt: int) -> np.ndarray:
        acc = np.zeros(np.broadcast_shapes(xi.shape, t.shape), dtype=complex)
        for i, ci in _STEN[a]:
            for p, cp in _STEN[b1]:
                for q, cq in _STEN[b2]:
                    for s, cs in _STEN[jt]:
                        acc = acc + (ci * cp * cq * cs) * shifted_eval(i, p, q, s)
        return acc / h ** (a + b1 + b2 + jt)

    def valid_mask(jt: int) -> np.ndarray:
        # central t-stencils must not reach below t = 0
        return t - _STEN_RADIUS[jt] * h >= 0.0

    best = 0.0
    max_mu_order = N if mu is not None else 0
    for a in range(N + 1):
        for b1 in range(max_mu_order + 1):
            for b2 in range(max_mu_order + 1):
                rem = N - a - b1 - b2
                if rem < 0:
                    continue
                wscale = br ** (-k.order + a + b1 + b2)
                if k.kind == "strong":
                    for jt in range(rem + 1):
                        g = d_mixed(a, b1, b2, jt)
                        ok = valid_mask(jt) if jt else np.ones_like(g, dtype=bool)
                        for l in range(rem - jt + 1):
                            vals = np.abs(t**l * g) * wscale
                            best = max(best, float(np.max(np.where(ok, vals, 0.0))))
                else:
                    gs = [d_mixed(a, b1, b2, j) for j in range(rem + 1)]
                    for m in range(rem + 1):
                        acc = np.zeros_like(gs[0])
                        for j, c in _STIRLING2[m].items():
                            acc = acc + c * t**j * gs[j]
                        ok = valid_mask(m) if m else np.ones_like(acc, dtype=bool)
                        for l in range(rem - m + 1):
                            vals = np.abs(acc) * (1.0 + t * t) ** (0.5 * l) * wscale
                            best = max(best, float(np.max(np.where(ok, vals, 0.0))))
    return best


# ---------------------------------------------------------------------------
# characterization bound


def char_lp_bound(
    k: SymbolKernel,
    p: float,
    l: int,
    lp: int,
    alpha,
    probe: ProbeSpec | None = None,
    ngrid=None,
) -> float:
    """Weighted normal-direction L^p bound characterizing the strong class.

    Estimates the lattice supremum over ``(xi, mu)`` of

        ``<xi, mu>^(-d + 1/p + l - l' + |a|)
          * || x^l D_x^l' D_xi^a k(xi, mu; .) ||_{L^p(R_+)}``

    with quadrature on a graded normal grid (``p = inf`` takes the pointwise
    supremum and drops the ``1/p``).  Finiteness and refinement stability of
    this quantity certify strong-class membership numerically.
    """
    from .core import NormalGrid

    if not p >= 1:
        raise ValueError(f"integrability exponent must be >= 1, got {p}")
    if k.kind != "strong":
        raise ValueError("characterization bound applies to strong-class kernels")
    a = int(np.sum(alpha)) if np.ndim(alpha) else int(alpha)
    if l < 0 or lp < 0 or a < 0:
        raise ValueError("derivative orders must be nonnegative")
    if lp + a > 3:
        raise ValueError("derivative budget l' + |alpha| is capped at 3")
    probe = probe or ProbeSpec()
    ngrid = ngrid or NormalGrid(256)
    x = ngrid.nodes
    w = ngrid.weights
    inv_p = 0.0 if math.isinf(p) else 1.0 / p

    best = 0.0
    for mu in probe.mu_values(k.sector):
        for xiv in probe.xi_values():
            br = bracket(xiv, mu)
            h_xi = probe.h_rel * br
            phi = np.zeros_like(x, dtype=complex)
            for i, ci in _STEN[a]:
                phi = phi + ci * _normal_profile(k, xiv + i * h_xi, mu, x, lp, probe.h_rel)
            phi = phi / h_xi**a
            vals = np.abs(x**l * phi)
            if math.isinf(p):
                nrm = float(np.max(vals))
            else:
                nrm = float(np.sum(vals**p * w) ** inv_p)
            best = max(best, br ** (-k.order + inv_p + l - lp + a) * nrm)
    return best


def _normal_profile(k: SymbolKernel, xi_s: float, mu, x: np.ndarray, order: int, h_rel: float):
    """Order-th normal derivative of the kernel profile at frequency ``xi_s``."""
    xi_vec = np.array([xi_s])
    if order == 0:
        return np.asarray(k.func(xi_vec, mu, x), dtype=complex)
    if k.xn_derivative is not None:
        return np.asarray(k.xn_derivative(xi_vec, mu, x, order), dtype=complex)
    # fallback: central differences on the decay scale; nodes hugging x = 0
    # get clamped stencils, tolerable because their quadrature weights vanish
    h = h_rel / bracket(xi_s, mu)
    acc = np.zeros_like(x, dtype=complex)
    for s, cs in _STEN[order]:
        acc = acc + cs * np.asarray(k.func(xi_vec, mu, np.maximum(x + s * h, 0.0)), dtype=complex)
    return acc / h**order


# ---------------------------------------------------------------------------
# multiplier norm


def mikhlin_fnorm(a_sym: MultiplierSymbol, mu, dim: int = 1, probe: ProbeSpec | None = None) -> float:
    """Lower estimate of the Mikhlin multiplier norm of ``a(., mu)``.

    The norm is the supremum over multi-indices ``|alpha| <= dim`` and over
    ``xi != 0`` of ``|xi|^|alpha| |D^alpha a(xi, mu)|``; the probe lattice
    stays away from the origin where the norm is not defined.
    """
    if not 1 <= dim <= 3:
        raise ValueError("dim must lie in 1..3")
    _require_mu(a_sym.sector, mu)
    probe = probe or ProbeSpec()
    axis = probe.mikhlin_axis_values()
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)  # (P, dim)
    norms = np.sqrt(np.sum(pts * pts, axis=-1))
    h = probe.h_rel * np.sqrt(1.0 + norms * norms)  # (P,)

    import itertools

    best = 0.0
    for alpha in itertools.product(range(dim + 1), repeat=dim):
        total = sum(alpha)
        if total > dim:
            continue
        acc = np.zeros(pts.shape[0], dtype=complex)
        for offs_coeffs in itertools.product(*(_STEN[o] for o in alpha)):
            coeff = 1.0
            shift = np.zeros_like(pts)
            for axis_i, (off, c) in enumerate(offs_coeffs):
                coeff *= c
                shift[:, axis_i] = off * h
            acc = acc + coeff * np.asarray(a_sym.func(pts + shift, mu), dtype=complex)
        deriv = acc / h**total
        best = max(best, float(np.max(norms**total * np.abs(deriv))))
    return best


# ---------------------------------------------------------------------------
# scalar maximization lemma


def lemma_max_eval(a: float, rho: float, t: float) -> float:
    """Closed form of ``max_{s >= 1} s^a <s t>^(-rho)`` for ``rho > 1, 0 < a < rho``.

    For ``t`` at least ``(rho/a - 1)^(-1/2)`` the maximum sits at ``s = 1``
    and equals ``<t>^(-rho)``; below that threshold it is attained in the
    interior and equals ``c * t^(-a)`` with
    ``c = (1 - a/rho)^(rho/2) * (rho/a - 1)^(-a/2)``.
    """
    if not rho > 1:
        raise ValueError(f"need rho > 1, got {rho}")
    if not 0 < a < rho:
        raise ValueError(f"need 0 < a < rho, got a={a}")
    if not t > 0:
        raise ValueError(f"need t > 0, got {t}")
    t_star = (rho / a - 1.0) ** -0.5
    if t >= t_star:
        return (1.0 + t * t) ** (-rho / 2.0)
    c = (1.0 - a / rho) ** (rho / 2.0) * (rho / a - 1.0) ** (-a / 2.0)
    return c * t ** (-a)


# ---------------------------------------------------------------------------
# built-in catalog

_HALF_SECTOR = Sector.symmetric(0.45 * math.pi)


def _tau(xi, mu):
    """Principal branch of sqrt(1 + |xi|^2 + mu^2)."""
    musq = 0.0j if mu is None else np.asarray(mu, dtype=complex) ** 2
    return np.sqrt(1.0 + _xi_sq(xi) + musq)


def _heat_eval(xi, mu, xn):
    return np.exp(-_tau(xi, mu) * xn)


def _heat_dxn(xi, mu, xn, order):
    tau = _tau(xi, mu)
    return (-tau) ** order * np.exp(-tau * xn)


heat_kernel = SymbolKernel(
    name="heat",
    order=0.0,
    kind="strong",
    sector=_HALF_SECTOR,
    func=_heat_eval,
    xn_derivative=_heat_dxn,
)


def _dtn_eval(xi, mu):
    return _tau(xi, mu)


dtn_symbol = MultiplierSymbol(name="dtn", func=_dtn_eval, sector=_HALF_SECTOR)


def _heat_dynbc_eval(xi, mu):
    mu2 = np.asarray(mu, dtype=complex) ** 2
    return mu2 / (mu2 + _tau(xi, mu))


heat_dynbc_b = MultiplierSymbol(name="heat-dynbc-b", func=_heat_dynbc_eval, sector=_HALF_SECTOR)


def _ch_eval(xi, mu):
    mu_c = np.asarray(mu, dtype=complex)
    s = _xi_sq(xi)
    tau1 = np.sqrt(s + 1j * mu_c)
    tau2 = np.sqrt(s - 1j * mu_c)
    mu2 = mu_c**2
    return mu2 * (tau1 + tau2) / ((mu2 + s) * (tau1 + tau2) + 2.0 * tau1 * tau2)


ch_b = MultiplierSymbol(name="ch-b", func=_ch_eval, sector=_HALF_SECTOR)


def _kpp_denominator(s, mu2, d, dprime, kcoef):
    root = np.sqrt(d * mu2 + d * d * s) + 1.0
    return (mu2 + kcoef + dprime * s) * root - kcoef, root


def kpp_m1(d: float = 1.0, dprime: float = 1.0, kcoef: float = 1.0) -> MultiplierSymbol:
    """Multiplier sending road data to the bulk trace in the road-field model."""
    if min(d, dprime, kcoef) <= 0:
        raise ValueError("road-field parameters must be positive")

    def f(xi, mu):
        mu2 = np.asarray(mu, dtype=complex) ** 2
        den, _ = _kpp_denominator(_xi_sq(xi), mu2, d, dprime, kcoef)
        return mu2 * kcoef / den

    return MultiplierSymbol(name="kpp-m1", func=f, sector=_HALF_SECTOR)


def kpp_m2(d: float = 1.0, dprime: float = 1.0, kcoef: float = 1.0) -> MultiplierSymbol:
    """Multiplier sending road data to the road density in the road-field model."""
    if min(d, dprime, kcoef) <= 0:
        raise ValueError("road-field parameters must be positive")

    def f(xi, mu):
        mu2 = np.asarray(mu, dtype=complex) ** 2
        den, root = _kpp_denominator(_xi_sq(xi), mu2, d, dprime, kcoef)
        return mu2 * root / den

    return MultiplierSymbol(name="kpp-m2", func=f, sector=_HALF_SECTOR)


def kpp_kernel(d: float = 1.0) -> SymbolKernel:
    """Decay kernel ``exp(-sqrt(mu^2/d + |xi|^2) x_n)`` of the bulk solution.

    Unit bounded, but its decay rate degenerates against the bracket weight as
    ``mu`` vanishes, so it is tagged with the weak class as a nominal label.
    """
    if d <= 0:
        raise ValueError("diffusivity must be positive")

    def rate(xi, mu):
        mu2 = np.asarray(mu, dtype=complex) ** 2
        return np.sqrt(mu2 / d + _xi_sq(xi))

    def f(xi, mu, xn):
        return np.exp(-rate(xi, mu) * xn)

    def fd(xi, mu, xn, order):
        r = rate(xi, mu)
        return (-r) ** order * np.exp(-r * xn)

    return SymbolKernel(
        name="kpp", order=0.0, kind="weak", sector=_HALF_SECTOR, func=f, xn_derivative=fd
    )


def _const_eval(xi, mu, xn):
    return np.ones(np.broadcast_shapes(np.shape(_xi_sq(xi)), np.shape(xn)), dtype=complex)


constant_one = SymbolKernel(
    name="constant-one",
    order=0.0,
    kind="strong",  # deliberately misdeclared: no decay, seminorms diverge
    sector=Sector.empty(),
    func=_const_eval,
    xn_derivative=lambda xi, mu, xn, order: np.zeros(
        np.broadcast_shapes(np.shape(_xi_sq(xi)), np.shape(xn)), dtype=complex
    ),
)


zero_kernel = SymbolKernel(
    name="zero",
    order=0.0,
    kind="strong",
    sector=Sector.empty(),
    func=lambda xi, mu, xn: np.zeros(
        np.broadcast_shapes(np.shape(_xi_sq(xi)), np.shape(xn)), dtype=complex
    ),
    xn_derivative=lambda xi, mu, xn, order: np.zeros(
        np.broadcast_shapes(np.shape(_xi_sq(xi)), np.shape(xn)), dtype=complex
    ),
)


def freeze_mu(k: SymbolKernel, mu: complex, kind: str | None = None) -> SymbolKernel:
    """Freeze the spectral parameter, yielding a kernel with the empty sector.

    The frozen kernel ignores its (absent) parameter; bracket weights in its
    seminorms then involve the frequency alone.  ``kind`` optionally relabels
    the claimed class of the frozen family.
    """
    if not sector_contains(k.sector, mu):
        raise SectorError(f"mu={mu} outside the admissible sector")

    def f(xi, _mu, xn):
        return k.func(xi, mu, xn)

    fd = None
    if k.xn_derivative is not None:
        def fd(xi, _mu, xn, order):
            return k.xn_derivative(xi, mu, xn, order)

    return SymbolKernel(
        name=f"{k.name}@{mu:.6g}",
        order=k.order,
        kind=kind or k.kind,
        sector=Sector.empty(),
        func=f,
        xn_derivative=fd,
    )


def kernel_catalog(name: str, d: float = 1.0) -> SymbolKernel:
    """Look up a symbol-kernel by its catalog name."""
    if name == "heat":
        return heat_kernel
    if name == "kpp":
        return kpp_kernel(d)
    if name == "constant-one":
        return constant_one
    if name == "zero":
        return zero_kernel
    raise KeyError(f"unknown kernel {name!r}")

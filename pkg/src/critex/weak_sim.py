"""Periodic pseudo-spectral runs for first- and second-order evolution models
with a power source, blow-up sweeps around the critical exponent, and a
numerical residual for the space-time integral identity.

The linear part is diagonal in Fourier space and integrated exactly (scalar
exponential for first order in time, per-mode 2x2 companion exponentials for
second order); the power source is treated explicitly with an exponential
midpoint stage.  Periodic boxes stand in for free space; a boundary-shell
monitor records when the solution stops being negligible near the box edge.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .exact import is_finite
from .exponent_engine import critical_exponent
from .fraclap import (
    GridFunction,
    PolyDecayFunction,
    integer_laplacian_coeffs,
    singular_quadrature_apply,
    squared_wavenumbers,
)
from .operator_model import OperatorSpec, index_set_I
from .testfn import TestFunctionFamily, phi_scaled, scaled_psi

VERDICT_BLOWUP = "blowup"
VERDICT_DECAYED = "decayed"
VERDICT_INCONCLUSIVE = "inconclusive"

FLAG_OVERFLOW = "overflow"
FLAG_UNCONFIRMED = "unconfirmed-blowup"
FLAG_SUPPORT = "support-violation"
FLAG_CRITICAL_POLICY = "critical-p-policy"

_DECAY_RATIO = 1e-2
_SUPPORT_LEVEL = 1e-10
_SUPPORT_SHELL = 0.9
_MAX_DT = 0.25


class SimConfigError(ValueError):
    """Raised for invalid simulation configurations."""


class InsufficientSnapshotsError(ValueError):
    """Raised when a run lacks the snapshot density the residual needs."""


@dataclass(frozen=True)
class ProfileSpec:
    """Closed-form initial datum rendered on the grid."""

    kind: str = "zero"
    amplitude: float = 0.0
    width: float = 1.0

    def render(self, mesh: Sequence[np.ndarray]) -> np.ndarray:
        r2 = sum(axis**2 for axis in mesh)
        if self.kind == "zero":
            return np.zeros_like(r2)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-r2 / self.width**2)
        if self.kind == "odd-gaussian":
            return self.amplitude * (mesh[0] / self.width) * np.exp(-r2 / self.width**2)
        raise SimConfigError(f"unknown profile kind: {self.kind!r}")

    def integral(self, dim: int) -> float:
        if self.kind == "zero" or self.kind == "odd-gaussian":
            return 0.0
        if self.kind == "gaussian":
            return self.amplitude * (self.width * math.sqrt(math.pi)) ** dim
        raise SimConfigError(f"unknown profile kind: {self.kind!r}")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ProfileSpec":
        return cls(
            kind=doc.get("kind", "zero"),
            amplitude=float(doc.get("amplitude", 0.0)),
            width=float(doc.get("width", 1.0)),
        )


@dataclass(frozen=True)
class SimConfig:
    """Run parameters: operator, power, grid, stepping and verdict policy."""

    spec: OperatorSpec
    p: float
    half_width: float
    points: int
    dt: float
    t_end: float
    blowup_threshold: float = 1e6
    data: Mapping[int, ProfileSpec] = field(default_factory=dict)
    source: str = "power"
    snapshot_stride: int = 0
    confirm_blowup: bool = True
    strict_support: bool = False

    def __post_init__(self):
        if self.spec.m not in (1, 2):
            raise SimConfigError("simulation supports time orders m = 1 and 2 only")
        if self.spec.n not in (1, 2, 3):
            raise SimConfigError("simulation supports dimensions 1..3")
        if not self.p > 1:
            raise SimConfigError("p must exceed 1")
        if self.dt <= 0 or self.dt > _MAX_DT:
            raise SimConfigError(f"dt must lie in (0, {_MAX_DT}]")
        if self.t_end <= 0:
            raise SimConfigError("t_end must be positive")
        if self.points < 16 or self.points & (self.points - 1):
            raise SimConfigError("points must be a power of two >= 16")
        if self.source not in ("power", "none"):
            raise SimConfigError("source must be 'power' or 'none'")
        for j in self.data:
            if not self.spec.ell <= j <= self.spec.m - 1:
                raise SimConfigError(f"data index {j} outside [ell, m-1]")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SimConfig":
        from .operator_model import parse_operator

        try:
            spec = parse_operator(doc["operator"])
            grid = doc["grid"]
            data = {
                int(j): ProfileSpec.from_dict(entry)
                for j, entry in doc.get("data", {}).items()
            }
            return cls(
                spec=spec,
                p=float(doc["p"]),
                half_width=float(grid["half_width"]),
                points=int(grid["points"]),
                dt=float(doc["dt"]),
                t_end=float(doc["t_end"]),
                blowup_threshold=float(doc.get("blowup_threshold", 1e6)),
                data=data,
                source=doc.get("source", "power"),
                snapshot_stride=int(doc.get("snapshot_stride", 0)),
                confirm_blowup=bool(doc.get("confirm_blowup", True)),
                strict_support=bool(doc.get("strict_support", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SimConfigError):
                raise
            raise SimConfigError(f"invalid simulation config: {exc}") from exc


@dataclass
class SimRun:
    """Recorded run: sup-norm series, sparse snapshots and the verdict."""

    config: SimConfig
    times: np.ndarray
    u_snapshots: list
    v_snapshots: Optional[list]
    data_arrays: dict
    sup_times: np.ndarray
    sup_series: np.ndarray
    verdict: str
    t_star: Optional[float]
    flags: tuple
    source_series: Optional[list] = None
    weak_residual_value: Optional[float] = None

    @property
    def grid(self) -> GridFunction:
        cfg = self.config
        return GridFunction(
            dim=cfg.spec.n,
            shape=(cfg.points,) * cfg.spec.n,
            spacing=2.0 * cfg.half_width / cfg.points,
            half_width=cfg.half_width,
            values=self.u_snapshots[-1],
        )


def _phi1(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-5
    safe = np.where(small, 1.0, z)
    out = (np.exp(safe) - 1.0) / safe
    series = 1.0 + z / 2.0 + z**2 / 6.0 + z**3 / 24.0
    return np.where(small, series, out)


def _phi1_prime(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1.0, z)
    out = (np.exp(safe) * (safe - 1.0) + 1.0) / safe**2
    series = 0.5 + z / 3.0 + z**2 / 8.0 + z**3 / 30.0
    return np.where(small, series, out)


def _companion_factors(a_sym: np.ndarray, b_sym: np.ndarray, dt: float, fn, dfn):
    """Entries of ``f(dt * [[0, 1], [-b, -a]])`` per mode via eigen splitting."""
    tr = -a_sym.astype(complex) * dt
    det = b_sym.astype(complex) * dt * dt
    disc = np.sqrt(tr * tr - 4.0 * det)
    lam1 = 0.5 * (tr + disc)
    lam2 = 0.5 * (tr - disc)
    near = np.abs(lam1 - lam2) < 1e-9 * (1.0 + np.abs(lam1) + np.abs(lam2))
    mid = 0.5 * (lam1 + lam2)
    gap = np.where(near, 1.0, lam1 - lam2)
    f1, f2 = fn(lam1), fn(lam2)
    alpha = np.where(near, dfn(mid), (f1 - f2) / gap)
    beta = np.where(near, fn(mid) - mid * dfn(mid), (lam1 * f2 - lam2 * f1) / gap)
    e11 = beta
    e12 = alpha * dt
    e21 = -alpha * b_sym * dt
    e22 = beta - alpha * a_sym * dt
    return e11, e12, e21, e22


def _linear_symbols(spec: OperatorSpec, xi2: np.ndarray):
    """Fourier symbols of the non-leading terms, keyed by time order."""
    symbols = {}
    for term in spec.terms:
        if term.j == spec.m:
            continue
        sigma = float(term.sigma)
        if sigma == 0:
            symbols[term.j] = float(term.a) * np.ones_like(xi2)
        else:
            mult = np.zeros_like(xi2)
            nz = xi2 > 0
            mult[nz] = xi2[nz] ** sigma
            symbols[term.j] = float(term.a) * mult
    return symbols


def _render_data(config: SimConfig, mesh) -> dict:
    arrays = {}
    for j in range(config.spec.ell, config.spec.m):
        profile = config.data.get(j, ProfileSpec())
        arrays[j] = profile.render(mesh)
    return arrays


def _core_integration(config: SimConfig):
    """Time loop; returns (times, u_snaps, v_snaps, sup_times, sups, t_cross,
    overflow, support_violation_t)."""
    spec = config.spec
    dim = spec.n
    grid = GridFunction(
        dim=dim,
        shape=(config.points,) * dim,
        spacing=2.0 * config.half_width / config.points,
        half_width=config.half_width,
        values=np.zeros((config.points,) * dim),
    )
    mesh = grid.meshgrid()
    xi2 = squared_wavenumbers(grid.shape, grid.spacing)
    symbols = _linear_symbols(spec, xi2)
    data = _render_data(config, mesh)

    radius = np.sqrt(sum(axis**2 for axis in mesh))
    shell = radius >= _SUPPORT_SHELL * config.half_width

    n_steps = int(round(config.t_end / config.dt))
    dt = config.t_end / n_steps
    stride = config.snapshot_stride or max(1, n_steps // 200)

    zeros = np.zeros((config.points,) * dim)
    u = data.get(0, zeros).copy()
    u_hat = np.fft.fftn(u)
    if spec.m == 2:
        v = data.get(1, zeros).copy()
        v_hat = np.fft.fftn(v)
    else:
        v = None

    if spec.m == 1:
        lam = -symbols.get(0, np.zeros_like(xi2)) * dt
        e_full = np.exp(lam)
        p_full = _phi1(lam)
        e_half = np.exp(lam / 2.0)
        p_half = _phi1(lam / 2.0)
    else:
        a_sym = symbols.get(1, np.zeros_like(xi2))
        b_sym = symbols.get(0, np.zeros_like(xi2))
        full = _companion_factors(a_sym, b_sym, dt, np.exp, np.exp)
        pfull = _companion_factors(a_sym, b_sym, dt, _phi1, _phi1_prime)
        half = _companion_factors(a_sym, b_sym, dt / 2.0, np.exp, np.exp)
        phalf = _companion_factors(a_sym, b_sym, dt / 2.0, _phi1, _phi1_prime)

    def source_of(u_phys, v_phys):
        if config.source == "none":
            return None
        base = u_phys if spec.ell == 0 else v_phys
        return np.abs(base) ** config.p

    times = [0.0]
    u_snaps = [u.copy()]
    v_snaps = [v.copy()] if spec.m == 2 else None
    sup_times = [0.0]
    sups = [float(np.max(np.abs(u)))]
    t_cross = None
    overflow = False
    support_t = None

    t = 0.0
    for step in range(1, n_steps + 1):
        if spec.m == 1:
            n1 = source_of(u.real if np.iscomplexobj(u) else u, None)
            if n1 is None:
                u_hat = e_full * u_hat
            else:
                n1_hat = np.fft.fftn(n1)
                star_hat = e_half * u_hat + (dt / 2.0) * p_half * n1_hat
                u_star = np.fft.ifftn(star_hat).real
                n2 = source_of(u_star, None)
                u_hat = e_full * u_hat + dt * p_full * np.fft.fftn(n2)
            u = np.fft.ifftn(u_hat).real
        else:
            n1 = source_of(u, v)
            if n1 is None:
                u_hat, v_hat = (
                    full[0] * u_hat + full[1] * v_hat,
                    full[2] * u_hat + full[3] * v_hat,
                )
            else:
                n1_hat = np.fft.fftn(n1)
                hd = dt / 2.0
                us_hat = half[0] * u_hat + half[1] * v_hat + hd * (
                    phalf[1] * n1_hat
                )
                vs_hat = half[2] * u_hat + half[3] * v_hat + hd * (
                    phalf[3] * n1_hat
                )
                u_star = np.fft.ifftn(us_hat).real
                v_star = np.fft.ifftn(vs_hat).real
                n2_hat = np.fft.fftn(source_of(u_star, v_star))
                u_hat, v_hat = (
                    full[0] * u_hat + full[1] * v_hat + dt * pfull[1] * n2_hat,
                    full[2] * u_hat + full[3] * v_hat + dt * pfull[3] * n2_hat,
                )
            u = np.fft.ifftn(u_hat).real
            v = np.fft.ifftn(v_hat).real

        t = step * dt
        if not np.all(np.isfinite(u)):
            overflow = True
            t_cross = t
            break
        sup = float(np.max(np.abs(u)))
        sup_times.append(t)
        sups.append(sup)
        if support_t is None and sup > 0:
            if float(np.max(np.abs(u[shell]))) > _SUPPORT_LEVEL * sup:
                support_t = t
        if step % stride == 0 or step == n_steps:
            times.append(t)
            u_snaps.append(u.copy())
            if spec.m == 2:
                v_snaps.append(v.copy())
        if sup > config.blowup_threshold:
            t_cross = t
            break

    return (
        np.array(times),
        u_snaps,
        v_snaps,
        data,
        np.array(sup_times),
        np.array(sups),
        t_cross,
        overflow,
        support_t,
    )


def simulate(config: SimConfig) -> SimRun:
    """Integrate the model and classify the run.

    Verdicts: ``blowup`` when the sup norm crosses the threshold (confirmed,
    when enabled, by a half-step rerun crossing within 10 percent of the same
    time), ``decayed`` when the final sup norm falls below 1 percent of its
    running maximum, ``inconclusive`` otherwise.  A breach of the boundary
    shell raises a flag, and downgrades the verdict only under
    ``strict_support``.
    """
    (
        times,
        u_snaps,
        v_snaps,
        data,
        sup_times,
        sups,
        t_cross,
        overflow,
        support_t,
    ) = _core_integration(config)

    flags = []
    if overflow:
        flags.append(FLAG_OVERFLOW)
    if support_t is not None:
        flags.append(FLAG_SUPPORT)

    t_star = None
    if t_cross is not None:
        verdict = VERDICT_BLOWUP
        t_star = t_cross
        if config.confirm_blowup:
            finer = replace(
                config, dt=config.dt / 2.0, confirm_blowup=False, snapshot_stride=10**9
            )
            rerun = _core_integration(finer)
            t_confirm = rerun[6]
            if t_confirm is None or abs(t_confirm - t_cross) > 0.1 * t_cross + 2 * config.dt:
                verdict = VERDICT_INCONCLUSIVE
                flags.append(FLAG_UNCONFIRMED)
    else:
        running_max = float(np.max(sups))
        if running_max > 0 and sups[-1] < _DECAY_RATIO * running_max:
            verdict = VERDICT_DECAYED
        else:
            verdict = VERDICT_INCONCLUSIVE

    if config.strict_support and support_t is not None:
        blowup_before_violation = (
            verdict == VERDICT_BLOWUP and t_star is not None and t_star <= support_t
        )
        if not blowup_before_violation:
            verdict = VERDICT_INCONCLUSIVE

    return SimRun(
        config=config,
        times=times,
        u_snapshots=u_snaps,
        v_snapshots=v_snaps,
        data_arrays=data,
        sup_times=sup_times,
        sup_series=sups,
        verdict=verdict,
        t_star=t_star,
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class SweepRow:
    p: float
    verdict: str
    t_star: Optional[float]
    flags: tuple = ()
    error: Optional[str] = None


def _sweep_one(args) -> SweepRow:
    config, p, is_critical = args
    try:
        run = simulate(replace(config, p=p))
    except Exception as exc:  # propagate per row, sweep continues
        return SweepRow(p=p, verdict="error", t_star=None, error=str(exc))
    verdict = run.verdict
    flags = run.flags
    if is_critical:
        verdict = VERDICT_INCONCLUSIVE
        flags = flags + (FLAG_CRITICAL_POLICY,)
    return SweepRow(p=p, verdict=verdict, t_star=run.t_star, flags=flags)


def sweep_p(config: SimConfig, p_values: Sequence[float], jobs: int = 1):
    """Run the same configuration across powers; rows carry verdicts.

    Rows at the exact critical power are reported inconclusive by policy: a
    finite-box finite-time run cannot settle the borderline case.
    """
    report = critical_exponent(config.spec)
    p_c = float(report.p_c) if is_finite(report.p_c) else math.inf
    tasks = [(config, float(p), abs(float(p) - p_c) <= 1e-12) for p in p_values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(task) for task in tasks]
    return rows, report


def apply_operator_term_to_profile(
    spec_term_sigma: Fraction, q: Fraction, R: float, grid: GridFunction
) -> np.ndarray:
    """Values of ``(-Lap)^sigma <x/R>^-q`` on the grid.

    Integer powers evaluate the exact expansion; fractional powers run the
    singular quadrature point by point on the distinct radii of the grid.
    """
    mesh = grid.meshgrid()
    r2 = sum(axis**2 for axis in mesh)
    sigma = Fraction(spec_term_sigma)
    if sigma == 0:
        return (1.0 + r2 / R**2) ** (-float(q) / 2.0)
    if sigma.denominator == 1:
        expansion = integer_laplacian_coeffs(grid.dim, q, int(sigma))
        return float(R) ** (-2.0 * float(sigma)) * expansion.evaluate_radial2(
            r2 / R**2
        )
    phi = PolyDecayFunction(q=q, R=float(R))
    radii = np.sqrt(r2)
    flat = radii.ravel()
    unique, inverse = np.unique(np.round(flat, 12), return_inverse=True)
    values = np.empty_like(unique)
    for i, radius in enumerate(unique):
        point = np.zeros(grid.dim)
        point[0] = radius
        values[i] = singular_quadrature_apply(phi, sigma, point, rel_tol=1e-5)
    return values[inverse].reshape(radii.shape)


def weak_residual(
    run: SimRun,
    spec: OperatorSpec,
    fam: TestFunctionFamily,
    q: Fraction,
    source_series: Optional[Sequence[np.ndarray]] = None,
) -> float:
    """Relative defect of the space-time integral identity on a recorded run.

    The left side integrates the source (the recorded power of the forced
    derivative, or explicitly supplied samples) against the cutoff in time and
    the decaying profile in space; the right side assembles the per-term
    integrals with the cutoff's derivatives and primitives plus the
    initial-data term.  The result is normalized by the magnitudes of all
    constituent terms, so it is meaningful for source-free runs as well.
    """
    cfg = run.config
    times = run.times
    support_end = fam.scaled_support_end
    if times[-1] < support_end:
        raise InsufficientSnapshotsError(
            f"run ends at t={times[-1]} before the cutoff support {support_end}"
        )
    inside = times <= support_end * 1.0001
    if int(np.sum(inside)) < 9:
        raise InsufficientSnapshotsError("need at least 9 snapshots inside the support")

    grid = run.grid
    d_vol = grid.cell_volume
    mesh = grid.meshgrid()
    r2 = sum(axis**2 for axis in mesh)
    phi_vals = (1.0 + r2 / fam.R**2) ** (-float(q) / 2.0)

    if spec.ell == 0:
        v_series = run.u_snapshots
    else:
        if run.v_snapshots is None:
            raise InsufficientSnapshotsError("run carries no derivative snapshots")
        v_series = run.v_snapshots

    if source_series is not None:
        if len(source_series) != len(times):
            raise InsufficientSnapshotsError("source series length mismatch")
        f_series = source_series
    elif cfg.source == "none":
        f_series = None
    else:
        f_series = [np.abs(v) ** cfg.p for v in v_series]

    def time_integral(order: int, space_values: np.ndarray) -> float:
        weights = scaled_psi(fam, order, times)
        return float(np.trapezoid(weights * space_values, times))

    if f_series is None:
        lhs = 0.0
    else:
        space = np.array([float(np.sum(f * phi_vals)) * d_vol for f in f_series])
        lhs = time_integral(0, space)

    term_values = []
    for term in spec.terms:
        a_phi = float(term.a) * apply_operator_term_to_profile(
            term.sigma, Fraction(q), fam.R, grid
        )
        space = np.array([float(np.sum(v * a_phi)) * d_vol for v in v_series])
        order = term.j - spec.ell
        value = (-1.0) ** order * time_integral(order, space)
        term_values.append(value)

    data_value = 0.0
    for j in range(spec.ell, spec.m):
        nxt = spec.term(j + 1)
        if nxt is None:
            continue
        a_phi = float(nxt.a) * apply_operator_term_to_profile(
            nxt.sigma, Fraction(q), fam.R, grid
        )
        data_value += float(np.sum(run.data_arrays[j] * a_phi)) * d_vol

    rhs = sum(term_values) - data_value
    scale = abs(lhs) + sum(abs(v) for v in term_values) + abs(data_value) + 1e-300
    residual = abs(lhs - rhs) / scale
    run.weak_residual_value = residual
    return residual


def sign_functional(spec: OperatorSpec, data_arrays: Mapping[int, np.ndarray],
                    cell_volume: float) -> float:
    """Grid evaluation of the signed data sum over the index set I."""
    total = 0.0
    for j in sorted(index_set_I(spec)):
        total += float(spec.term(j + 1).a) * float(np.sum(data_arrays[j])) * cell_volume
    return total

"""Nonlinear Poisson solver with Fermi-Dirac carrier statistics.

Solves d/dx(eps dphi/dx) = -q (p - n + N_D - N_A) on a device mesh with
carrier densities n = Nc F_half((E_Fn - Ec)/kT), p = Nv F_half((Ev - E_Fp)/kT)
and full dopant ionization. The Fermi level is the energy reference
(E_F = 0 at the substrate contact). Boundary conditions are ohmic: the
potential at each end is pinned to the local charge-neutral value, shifted
by the applied gate voltage at the top contact.

Under bias the contacts are treated as frozen quasi-equilibrium reservoirs:
carrier statistics reference the nearer contact's quasi-Fermi level, with
the split at mid-device, and the top reference sits at -V. The bias solve
continues from the equilibrium solution in steps of at most
``continuation_step``.

The F_half implementation is the Bednarczyk analytic approximation of the
complete Fermi-Dirac integral of order 1/2, normalized so F_half(eta) ->
exp(eta) for eta -> -inf; its global relative error against quadrature is
below 0.5%. A Boltzmann statistics branch is selectable through
SolverOptions for non-degenerate reference problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from . import constants, dataio
from .device import doping_profile, element_profile
from .materials import lookup_material

_SQRT_PI = math.sqrt(math.pi)
_FD_COEF = 3.0 * _SQRT_PI / 4.0


class NonConvergenceError(RuntimeError):
    """Newton iteration failed; carries the residual history."""

    def __init__(self, message, residual_history=None, last_bias=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])
        self.last_bias = last_bias


def fermi_half(eta):
    """Complete Fermi-Dirac integral of order 1/2, F(eta) -> e^eta as eta -> -inf.

    Bednarczyk-form analytic approximation, relative error < 0.5% globally.
    """
    eta = np.asarray(eta, dtype=float)
    safe = np.clip(eta, -50.0, 1.0e60)
    t = safe + 1.0
    g = np.exp(-0.17 * t * t)
    nu = safe ** 4 + 50.0 + 33.6 * safe * (1.0 - 0.68 * g)
    xi = _FD_COEF * nu ** -0.375
    out = np.where(eta < -50.0, np.exp(np.clip(eta, -745.0, 0.0)),
                   1.0 / (np.exp(-safe) + xi))
    return out if out.ndim else float(out)


def fermi_half_deriv(eta):
    """Analytic derivative of fermi_half (consistent with the approximation)."""
    eta = np.asarray(eta, dtype=float)
    safe = np.clip(eta, -50.0, 1.0e60)
    t = safe + 1.0
    g = np.exp(-0.17 * t * t)
    nu = safe ** 4 + 50.0 + 33.6 * safe * (1.0 - 0.68 * g)
    dnu = 4.0 * safe ** 3 + 33.6 * (1.0 - 0.68 * g) + 33.6 * 0.34 * 0.68 * safe * t * g
    xi = _FD_COEF * nu ** -0.375
    dxi = -0.375 * _FD_COEF * nu ** -1.375 * dnu
    denom = np.exp(-safe) + xi
    out = np.where(eta < -50.0, np.exp(np.clip(eta, -745.0, 0.0)),
                   (np.exp(-safe) - dxi) / (denom * denom))
    return out if out.ndim else float(out)


def inverse_fermi_half(u):
    """Solve fermi_half(eta) = u for eta (safeguarded Newton)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("inverse_fermi_half requires positive arguments")
    eta = np.where(u < 1.0, np.log(u), (0.75 * _SQRT_PI * u) ** (2.0 / 3.0))
    for _ in range(100):
        f = fermi_half(eta) - u
        df = fermi_half_deriv(eta)
        limit = 5.0 + 0.1 * np.abs(eta)
        step = np.clip(f / df, -limit, limit)
        eta = eta - step
        if np.max(np.abs(step) / np.maximum(1.0, np.abs(eta))) < 1e-13:
            break
    return eta if eta.ndim else float(eta)


def _exp_clipped(eta):
    return np.exp(np.minimum(eta, 700.0))


def _stat_functions(statistics):
    if statistics == "fermi":
        return fermi_half, fermi_half_deriv
    if statistics == "boltzmann":
        return _exp_clipped, _exp_clipped
    raise ValueError(f"unknown statistics {statistics!r}")


def _inverse_stat(u, statistics):
    if statistics == "boltzmann":
        return np.log(u)
    return inverse_fermi_half(u)


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-10        # max scaled Newton update, dimensionless
    max_iterations: int = 200
    damping: float = 1.0            # initial Newton damping in (0, 1]
    statistics: str = "fermi"       # "fermi" or "boltzmann"
    continuation_step: float = 0.25  # V, bias continuation increment

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must be in (0, 1]")


@dataclass(frozen=True)
class BandDiagram:
    mesh: object
    phi: np.ndarray          # V
    Ec: np.ndarray           # eV
    Ev: np.ndarray           # eV
    n: np.ndarray            # cm^-3
    p: np.ndarray            # cm^-3
    field: np.ndarray        # V/cm
    efn: np.ndarray          # eV, electron quasi-Fermi level
    efp: np.ndarray          # eV, hole quasi-Fermi level
    bias: float              # V
    temperature: float       # K
    converged: bool
    residual_norm: float

    def to_csv(self, path, extra_meta=None):
        meta = {
            "bias_V": dataio.format_float(self.bias),
            "temperature_K": dataio.format_float(self.temperature),
            "converged": self.converged,
            "residual_norm": dataio.format_float(self.residual_norm),
        }
        meta.update(extra_meta or {})
        return dataio.write_table(
            path,
            [self.mesh.nodes, self.Ec, self.Ev, self.phi, self.n, self.p, self.field],
            ["position_nm", "Ec_eV", "Ev_eV", "phi_V", "n_cm3", "p_cm3", "F_Vcm"],
            meta=meta,
        )


@dataclass(frozen=True)
class _DeviceArrays:
    """Mesh-resolved material/doping arrays in solver units (cm)."""

    x: np.ndarray            # node positions, cm
    h: np.ndarray            # element widths, cm
    w: np.ndarray            # node control widths, cm
    eps_el: np.ndarray       # relative permittivity per element
    Nc: np.ndarray
    Nv: np.ndarray
    Ec0: np.ndarray          # eV, conduction edge at phi = 0
    Ev0: np.ndarray
    Nd: np.ndarray
    Na: np.ndarray
    mu_e_el: np.ndarray      # cm^2/(V s) per element
    mu_h_el: np.ndarray
    Vt: float
    temperature: float


def build_device_arrays(stack, mesh):
    """Precompute per-node and per-element solver arrays for a stack/mesh."""
    from .materials import mobility_at

    T = stack.temperature
    mats = [lookup_material(l.material, T) for l in stack.layers]
    nd_n, na_n, _ = doping_profile(stack, mesh)
    nd_el, na_el, eps_el = element_profile(stack, mesh)

    nc_layer = np.array([m.nc() for m in mats])
    nv_layer = np.array([m.nv() for m in mats])
    ec_layer = np.array([m.ec_abs for m in mats])
    ev_layer = np.array([m.ev_abs for m in mats])
    mu_e_layer = np.array([
        mobility_at(m.mobility_e, l.donor_cm3 + l.acceptor_cm3, T, m.mobility_T_exponent)
        for m, l in zip(mats, stack.layers)])
    mu_h_layer = np.array([
        mobility_at(m.mobility_h, l.donor_cm3 + l.acceptor_cm3, T, m.mobility_T_exponent)
        for m, l in zip(mats, stack.layers)])

    x = mesh.nodes * constants.NM_TO_CM
    h = np.diff(x)
    w = np.empty_like(x)
    w[0] = 0.5 * h[0]
    w[-1] = 0.5 * h[-1]
    w[1:-1] = 0.5 * (h[:-1] + h[1:])

    return _DeviceArrays(
        x=x, h=h, w=w, eps_el=eps_el,
        Nc=nc_layer[mesh.node_layer], Nv=nv_layer[mesh.node_layer],
        Ec0=ec_layer[mesh.node_layer], Ev0=ev_layer[mesh.node_layer],
        Nd=nd_n, Na=na_n,
        mu_e_el=mu_e_layer[mesh.element_layer],
        mu_h_el=mu_h_layer[mesh.element_layer],
        Vt=constants.thermal_voltage(T), temperature=T,
    )


def carrier_densities(arr, phi, efn, efp, statistics="fermi"):
    """(n, p) for a potential and quasi-Fermi-level profiles."""
    f, _ = _stat_functions(statistics)
    n = arr.Nc * f((efn - (arr.Ec0 - phi)) / arr.Vt)
    p = arr.Nv * f(((arr.Ev0 - phi) - efp) / arr.Vt)
    return n, p


def neutral_potential(arr, statistics="fermi"):
    """Per-node potential solving local charge neutrality at E_F = 0."""
    f, df = _stat_functions(statistics)
    net = arr.Nd - arr.Na
    # dominant-carrier starting point
    phi = np.where(
        net >= 0,
        arr.Ec0 + arr.Vt * _inverse_stat(np.maximum(net, 1.0) / arr.Nc, statistics),
        arr.Ev0 - arr.Vt * _inverse_stat(np.maximum(-net, 1.0) / arr.Nv, statistics),
    )
    for _ in range(100):
        eta_n = (phi - arr.Ec0) / arr.Vt
        eta_p = (arr.Ev0 - phi) / arr.Vt
        resid = arr.Nv * f(eta_p) - arr.Nc * f(eta_n) + net
        slope = -(arr.Nv * df(eta_p) + arr.Nc * df(eta_n)) / arr.Vt
        step = np.clip(-resid / slope, -0.5, 0.5)
        phi = phi + step
        if np.max(np.abs(step)) < 1e-14:
            break
    return phi


def _poisson_residual(arr, phi, efn, efp, statistics, phi_bc):
    n, p = carrier_densities(arr, phi, efn, efp, statistics)
    flux = constants.EPS_0 * arr.eps_el * np.diff(phi) / arr.h
    r = np.empty_like(phi)
    r[1:-1] = (flux[1:] - flux[:-1]) + constants.Q_E * arr.w[1:-1] * (
        p[1:-1] - n[1:-1] + arr.Nd[1:-1] - arr.Na[1:-1])
    r[0] = phi[0] - phi_bc[0]
    r[-1] = phi[-1] - phi_bc[1]
    return r, n, p


def _solve_poisson(arr, efn, efp, phi_bc, phi0, opts):
    """Damped Newton iteration for the nonlinear Poisson problem."""
    f, df = _stat_functions(opts.statistics)
    phi = phi0.copy()
    phi[0], phi[-1] = phi_bc
    history = []
    converged = False
    scaled_update = np.inf

    r, n, p = _poisson_residual(arr, phi, efn, efp, opts.statistics, phi_bc)
    rnorm = np.linalg.norm(r)
    for _ in range(opts.max_iterations):
        dn = arr.Nc * df((efn - (arr.Ec0 - phi)) / arr.Vt) / arr.Vt
        dp = arr.Nv * df(((arr.Ev0 - phi) - efp) / arr.Vt) / arr.Vt

        cond = constants.EPS_0 * arr.eps_el / arr.h
        lower = np.zeros_like(phi)
        upper = np.zeros_like(phi)
        diag = np.empty_like(phi)
        lower[:-1] = cond
        upper[1:] = cond
        diag[1:-1] = -(cond[1:] + cond[:-1]) - constants.Q_E * arr.w[1:-1] * (
            dp[1:-1] + dn[1:-1])
        diag[0] = diag[-1] = 1.0
        upper[1] = 0.0
        lower[-2] = 0.0

        ab = np.zeros((3, phi.size))
        ab[0, 1:] = upper[1:]
        ab[1, :] = diag
        ab[2, :-1] = lower[:-1]
        delta = solve_banded((1, 1), ab, -r)

        scaled_update = np.max(np.abs(delta)) / arr.Vt
        t = opts.damping
        for _ in range(30):
            trial = phi + t * delta
            r_new, n, p = _poisson_residual(arr, trial, efn, efp, opts.statistics, phi_bc)
            rnorm_new = np.linalg.norm(r_new)
            if rnorm_new <= rnorm or scaled_update < opts.tolerance:
                break
            t *= 0.5
        phi = phi + t * delta
        r, rnorm = r_new, rnorm_new
        history.append(float(scaled_update))
        if scaled_update < opts.tolerance:
            converged = True
            break

    n, p = carrier_densities(arr, phi, efn, efp, opts.statistics)
    return phi, n, p, history, converged, float(scaled_update)


def _electric_field(x_cm, phi):
    """-dphi/dx [V/cm], central differences inside, one-sided at the ends."""
    field = np.empty_like(phi)
    field[1:-1] = -(phi[2:] - phi[:-2]) / (x_cm[2:] - x_cm[:-2])
    field[0] = -(phi[1] - phi[0]) / (x_cm[1] - x_cm[0])
    field[-1] = -(phi[-1] - phi[-2]) / (x_cm[-1] - x_cm[-2])
    return field


def _make_diagram(stack, mesh, arr, phi, n, p, efn, efp, bias, converged, resnorm):
    return BandDiagram(
        mesh=mesh, phi=phi, Ec=arr.Ec0 - phi, Ev=arr.Ev0 - phi, n=n, p=p,
        field=_electric_field(arr.x, phi), efn=efn, efp=efp, bias=bias,
        temperature=stack.temperature, converged=converged, residual_norm=resnorm)


def quasi_fermi_split(stack, mesh, bias):
    """Quasi-Fermi-level profile for the gated solve: 0 below mid-device,
    -bias at and above it."""
    mid = 0.5 * stack.total_thickness_nm
    ef = np.where(mesh.nodes < mid, 0.0, -bias)
    return ef


def solve_equilibrium(stack, mesh, opts=None):
    """Zero-bias band diagram (constant Fermi level at 0 eV)."""
    opts = opts or SolverOptions()
    arr = build_device_arrays(stack, mesh)
    efn = np.zeros(mesh.n_nodes)
    phi_n = neutral_potential(arr, opts.statistics)
    phi_bc = (phi_n[0], phi_n[-1])
    phi, n, p, hist, ok, resnorm = _solve_poisson(arr, efn, efn, phi_bc, phi_n, opts)
    if not ok:
        raise NonConvergenceError(
            f"equilibrium Poisson solve did not converge in {opts.max_iterations} "
            f"iterations (last scaled update {resnorm:.3e})", hist)
    return _make_diagram(stack, mesh, arr, phi, n, p, efn, efn, 0.0, ok, resnorm)


def solve_bias(stack, mesh, bias, opts=None):
    """Band diagram at gate voltage `bias`, by continuation from equilibrium."""
    opts = opts or SolverOptions()
    if abs(bias) > 5.0:
        raise ValueError("gate voltage outside the +/-5 V sanity bound")
    arr = build_device_arrays(stack, mesh)
    phi_n = neutral_potential(arr, opts.statistics)

    eq = solve_equilibrium(stack, mesh, opts)
    if bias == 0.0:
        return eq

    n_steps = max(1, int(math.ceil(abs(bias) / opts.continuation_step)))
    phi = eq.phi.copy()
    v_done = 0.0
    for k in range(1, n_steps + 1):
        v = bias * k / n_steps
        efn = quasi_fermi_split(stack, mesh, v)
        phi_bc = (phi_n[0], phi_n[-1] + v)
        phi_guess = phi.copy()
        phi_guess[-1] = phi_bc[1]
        phi, n, p, hist, ok, resnorm = _solve_poisson(arr, efn, efn, phi_bc, phi_guess, opts)
        if not ok:
            raise NonConvergenceError(
                f"bias continuation stalled at V = {v:.4f} V "
                f"(last converged V = {v_done:.4f} V)", hist, last_bias=v_done)
        v_done = v
    return _make_diagram(stack, mesh, arr, phi, n, p, efn, efn, bias, True, resnorm)


def field_lever_arm(bias, d_i_nm):
    """Mean field V/d_i in kV/cm for an intrinsic region of d_i nanometres."""
    if d_i_nm <= 0:
        raise ValueError("intrinsic thickness must be positive")
    return bias * 1.0e4 / d_i_nm

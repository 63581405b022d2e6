"""Fitting suite for optical data: SNR-gated peak fits, polarization-
resolved fine-structure extraction, power-law saturation fits,
IRF-deconvolved photon-correlation fits and biexponential lifetime fits.

Peak shapes default to Lorentzian (CW, lifetime-limited lines); Gaussian
and Voigt profiles are selectable. Single-peak and multi-peak fits use
Levenberg-Marquardt with data-driven initial guesses taken from the
highest residual maxima, and report parameter uncertainties from the
Jacobian covariance. Fits never fail silently: results carry an explicit
converged flag and discarded peaks are returned alongside accepted ones.

The photon-correlation model is a single-exponential antibunching dip
1 - (1 - g0) exp(-|tau|/tau_c) convolved with a Gaussian instrument
response and box-averaged over the histogram bin; the analytic
convolution is evaluated through scaled complementary error functions so
it stays finite at large delay. Lifetime fits are biexponential with
Poisson weights and always report the single-exponential comparison fit.

Forward models double as synthetic-data generators, so every fitter can
be validated by round trip against data it generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, brentq
from scipy.special import erfcx

from . import constants

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(7)


class PartialSeriesError(ValueError):
    """A polarization series is missing the target peak at some angles."""

    def __init__(self, angles):
        super().__init__(f"no usable peak at polarizer angles {sorted(angles)}")
        self.angles = tuple(sorted(angles))


class InsufficientDataError(ValueError):
    """Too few usable points for the requested fit."""


class InsufficientDecayError(ValueError):
    """A decay trace does not decay enough to constrain lifetimes."""


class NormalizationError(ValueError):
    """A correlation trace has no long-delay plateau to normalize by."""


@dataclass(frozen=True)
class Spectrum:
    wavelength_nm: np.ndarray
    counts: np.ndarray
    power_uW: float | None = None
    gate_V: float | None = None
    polarizer_angle_deg: float | None = None

    def __post_init__(self):
        wl = np.asarray(self.wavelength_nm, dtype=float)
        c = np.asarray(self.counts, dtype=float)
        if wl.ndim != 1 or wl.size != c.size:
            raise ValueError("wavelength and counts must be 1D arrays of equal length")
        if np.any(np.diff(wl) <= 0):
            raise ValueError("wavelength grid must be strictly increasing")
        if np.any(c < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "wavelength_nm", wl)
        object.__setattr__(self, "counts", c)


@dataclass(frozen=True)
class PeakFit:
    center_nm: float
    fwhm_nm: float
    amplitude: float
    background: float
    snr: float
    uncertainties: dict
    converged: bool
    shape: str = "lorentzian"


@dataclass(frozen=True)
class G2Trace:
    delay_ns: np.ndarray
    coincidences: np.ndarray
    bin_width_ns: float
    irf_sigma_ns: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.delay_ns, dtype=float)
        c = np.asarray(self.coincidences, dtype=float)
        if t.size != c.size or t.size < 8:
            raise ValueError("delay and coincidence arrays must match (>= 8 bins)")
        dt = np.diff(t)
        if np.any(dt <= 0) or np.ptp(dt) > 1e-9 * np.max(dt):
            raise ValueError("delay grid must be uniform and increasing")
        if self.bin_width_ns < 0 or self.irf_sigma_ns < 0:
            raise ValueError("bin width and IRF sigma must be non-negative")
        object.__setattr__(self, "delay_ns", t)
        object.__setattr__(self, "coincidences", c)


@dataclass(frozen=True)
class DecayTrace:
    time_ns: np.ndarray
    counts: np.ndarray
    irf_sigma_ns: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.time_ns, dtype=float)
        c = np.asarray(self.counts, dtype=float)
        if t.size != c.size or np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be increasing and match counts")
        object.__setattr__(self, "time_ns", t)
        object.__setattr__(self, "counts", c)


@dataclass(frozen=True)
class FitResult:
    """Named parameter estimates with uncertainties and goodness of fit."""

    parameters: dict
    uncertainties: dict
    covariance: np.ndarray
    reduced_chi2: float
    converged: bool
    flags: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FssExtraction:
    delta_ueV: float
    delta_err_ueV: float
    theta0_deg: float
    phase_defined: bool
    minmax_ueV: float
    mean_energy_ueV: float
    energies_ueV: np.ndarray


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    stderr: float
    intercept: float
    cutoff_uW: float
    n_used: int


# ---------------------------------------------------------------------------
# line-shape models

def lorentzian_profile(x, center, fwhm, amplitude):
    hw = 0.5 * fwhm
    return amplitude * hw * hw / ((x - center) ** 2 + hw * hw)


def gaussian_profile(x, center, fwhm, amplitude):
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    return amplitude * np.exp(-0.5 * ((x - center) / sigma) ** 2)


def voigt_profile_peak(x, center, fwhm, amplitude):
    # pseudo-Voigt with equal Gaussian/Lorentzian widths
    return 0.5 * (lorentzian_profile(x, center, fwhm, amplitude)
                  + gaussian_profile(x, center, fwhm, amplitude))


_SHAPES = {
    "lorentzian": lorentzian_profile,
    "gaussian": gaussian_profile,
    "voigt": voigt_profile_peak,
}


def _multi_peak_model(x, params, shape):
    profile = _SHAPES[shape]
    out = np.full(x.shape, params[0])
    for k in range((len(params) - 1) // 3):
        amp, center, fwhm = params[1 + 3 * k: 4 + 3 * k]
        out += profile(x, center, fwhm, amp)
    return out


def _multi_lorentz_jacobian(x, params):
    """Analytic Jacobian of the Lorentzian multi-peak model."""
    n = (len(params) - 1) // 3
    jac = np.empty((x.size, len(params)))
    jac[:, 0] = 1.0
    for k in range(n):
        amp, center, fwhm = params[1 + 3 * k: 4 + 3 * k]
        hw = 0.5 * fwhm
        d = (x - center) ** 2 + hw * hw
        jac[:, 1 + 3 * k] = hw * hw / d
        jac[:, 2 + 3 * k] = 2.0 * amp * hw * hw * (x - center) / (d * d)
        jac[:, 3 + 3 * k] = amp * hw * (x - center) ** 2 / (d * d)
    return jac


def _covariance(res):
    """Parameter covariance from a least_squares result."""
    m, n = res.jac.shape
    dof = max(m - n, 1)
    s_sq = 2.0 * res.cost / dof
    u, s, vt = np.linalg.svd(res.jac, full_matrices=False)
    s = np.where(s > s[0] * 1e-12, s, np.inf)
    return (vt.T / (s * s)) @ vt * s_sq


def _half_max_width(x, residual, i0, grid_step):
    """FWHM estimate from half-maximum crossings around sample i0."""
    half = 0.5 * residual[i0]
    left = i0
    while left > 0 and residual[left] > half:
        left -= 1
    right = i0
    while right < residual.size - 1 and residual[right] > half:
        right += 1
    width = x[right] - x[left]
    return max(width, 3.0 * grid_step)


def fit_peaks(spectrum, n_peaks=1, snr_gate=5.0, shape="lorentzian"):
    """Fit `n_peaks` line profiles plus a constant background.

    Initial guesses take the highest maxima of the running residual; the
    simultaneous Levenberg-Marquardt fit (Poisson-weighted, so parameter
    uncertainties are statistically calibrated) refines all peaks.
    Returns (accepted, discarded): peaks whose fitted signal-to-background
    ratio falls below `snr_gate` land in the discard list.
    """
    if n_peaks < 1:
        raise ValueError("n_peaks must be at least 1")
    if shape not in _SHAPES:
        raise ValueError(f"unknown line shape {shape!r}")
    x = spectrum.wavelength_nm
    y = spectrum.counts
    if x.size < max(8, 5 * n_peaks):
        raise InsufficientDataError(
            f"{x.size} samples is too few for {n_peaks} peak(s)")

    grid_step = float(np.median(np.diff(x)))
    bg0 = float(np.median(y))
    params = [bg0]
    residual = y - bg0
    for _ in range(n_peaks):
        i0 = int(np.argmax(residual))
        amp0 = max(residual[i0], 1e-3 * max(np.ptp(y), 1.0))
        w0 = _half_max_width(x, residual, i0, grid_step)
        params.extend([amp0, x[i0], w0])
        residual = residual - _SHAPES[shape](x, x[i0], w0, amp0)

    sigma = np.sqrt(np.maximum(y, 1.0))

    def fun(theta):
        return (_multi_peak_model(x, theta, shape) - y) / sigma

    kwargs = {"method": "lm", "xtol": 1e-12, "ftol": 1e-12, "gtol": 1e-12,
              "max_nfev": 20000}
    if shape == "lorentzian":
        kwargs["jac"] = lambda theta: _multi_lorentz_jacobian(x, theta) / sigma[:, None]
    res = least_squares(fun, np.asarray(params, dtype=float), **kwargs)
    converged = bool(res.success)
    cov = _covariance(res)
    sigmas = np.sqrt(np.maximum(np.diag(cov), 0.0))

    bg = res.x[0]
    accepted, discarded = [], []
    for k in range(n_peaks):
        amp, center, fwhm = res.x[1 + 3 * k: 4 + 3 * k]
        fwhm = abs(fwhm)
        snr = amp / bg if bg > 0 else math.inf
        peak = PeakFit(
            center_nm=float(center), fwhm_nm=float(fwhm), amplitude=float(amp),
            background=float(bg), snr=float(snr),
            uncertainties={"center_nm": float(sigmas[2 + 3 * k]),
                           "fwhm_nm": float(sigmas[3 + 3 * k]),
                           "amplitude": float(sigmas[1 + 3 * k]),
                           "background": float(sigmas[0])},
            converged=converged, shape=shape)
        (accepted if snr >= snr_gate else discarded).append(peak)
    accepted.sort(key=lambda p: p.center_nm)
    discarded.sort(key=lambda p: p.center_nm)
    return accepted, discarded


# ---------------------------------------------------------------------------
# polarization series / fine structure

def extract_fss(series, snr_gate=0.0):
    """Fine-structure splitting from a polarizer-angle series of spectra.

    Per-angle peak centers are fitted, converted to energy, and fitted to
    E(theta) = E_mean + (delta/2) cos 2(theta - theta0). Returns the
    cosine-fit splitting with its uncertainty and phase, plus the raw
    min-max estimator over the fitted per-angle energies.
    """
    if len(series) < 8:
        raise InsufficientDataError("need at least 8 polarizer angles")
    angles = np.array([s.polarizer_angle_deg for s in series], dtype=float)
    if np.any(np.isnan(angles)):
        raise ValueError("every spectrum needs polarizer_angle_deg metadata")
    if np.ptp(angles) < 180.0:
        raise InsufficientDataError("series must span at least 180 degrees")

    energies = np.empty(angles.size)
    missing = []
    for k, spec in enumerate(series):
        accepted, discarded = fit_peaks(spec, n_peaks=1, snr_gate=snr_gate)
        peaks = accepted or discarded
        peak = peaks[0]
        usable = (peak.converged and peak.amplitude > 0
                  and spec.wavelength_nm[0] < peak.center_nm < spec.wavelength_nm[-1])
        if not usable:
            missing.append(float(angles[k]))
            continue
        energies[k] = 1e6 * constants.HC_EV_NM / peak.center_nm
    if missing:
        raise PartialSeriesError(missing)

    theta = np.deg2rad(angles)
    design = np.column_stack([np.ones_like(theta), np.cos(2 * theta), np.sin(2 * theta)])
    coef, _, _, _ = np.linalg.lstsq(design, energies, rcond=None)
    resid = energies - design @ coef
    dof = max(angles.size - 3, 1)
    s_sq = float(resid @ resid) / dof
    cov = s_sq * np.linalg.inv(design.T @ design)

    a, b = coef[1], coef[2]
    r = math.hypot(a, b)
    delta = 2.0 * r
    if r > 0:
        grad = np.array([0.0, 2.0 * a / r, 2.0 * b / r])
        delta_err = float(np.sqrt(grad @ cov @ grad))
    else:
        delta_err = float(2.0 * np.sqrt(max(cov[1, 1], cov[2, 2])))
    theta0 = 0.5 * math.degrees(math.atan2(b, a))
    phase_defined = delta > max(2.0 * delta_err, 1e-9)
    return FssExtraction(
        delta_ueV=float(delta), delta_err_ueV=delta_err,
        theta0_deg=float(theta0), phase_defined=bool(phase_defined),
        minmax_ueV=float(np.max(energies) - np.min(energies)),
        mean_energy_ueV=float(coef[0]), energies_ueV=energies)


# ---------------------------------------------------------------------------
# power dependence

def fit_power_law(powers_uW, intensities, saturation_cutoff=None):
    """Log-log slope of intensity vs excitation power below saturation.

    With `saturation_cutoff=None` the cutoff is the highest power up to
    which every local log-log slope stays above half the low-power slope.
    """
    p = np.asarray(powers_uW, dtype=float)
    y = np.asarray(intensities, dtype=float)
    if p.size != y.size:
        raise ValueError("powers and intensities must have equal length")
    if np.any(p <= 0) or np.any(y <= 0):
        raise ValueError("powers and intensities must be positive")
    order = np.argsort(p)
    p, y = p[order], y[order]

    if saturation_cutoff is None:
        logp, logy = np.log(p), np.log(y)
        local = np.diff(logy) / np.diff(logp)
        low = np.mean(local[:min(3, local.size)])
        n_keep = p.size
        for k, s in enumerate(local):
            if s < 0.5 * low:
                n_keep = k + 1
                break
        saturation_cutoff = p[n_keep - 1]
    keep = p <= saturation_cutoff
    if np.count_nonzero(keep) < 3:
        raise InsufficientDataError(
            f"only {np.count_nonzero(keep)} points below the saturation cutoff")

    logp, logy = np.log(p[keep]), np.log(y[keep])
    (slope, intercept), cov = np.polyfit(logp, logy, 1, cov=True)
    return PowerLawFit(slope=float(slope), stderr=float(np.sqrt(max(cov[0, 0], 0.0))),
                       intercept=float(intercept),
                       cutoff_uW=float(saturation_cutoff),
                       n_used=int(np.count_nonzero(keep)))


# ---------------------------------------------------------------------------
# photon correlation

def antibunching_dip(tau_ns, tau_c_ns, irf_sigma_ns):
    """exp(-|tau|/tau_c) convolved with a Gaussian IRF (stable evaluation)."""
    t = np.abs(np.asarray(tau_ns, dtype=float))
    if irf_sigma_ns == 0.0:
        out = np.exp(-t / tau_c_ns)
        return out if out.ndim else float(out)
    a = irf_sigma_ns / (math.sqrt(2.0) * tau_c_ns)
    b = t / (math.sqrt(2.0) * irf_sigma_ns)
    gauss = np.exp(-b * b)
    term2 = erfcx(a + b) * gauss
    u = a - b
    safe = u > -25.0
    term1 = np.where(
        safe,
        erfcx(np.where(safe, u, 0.0)) * gauss,
        2.0 * np.exp(a * a - 2.0 * a * b) - erfcx(np.abs(u)) * gauss)
    out = 0.5 * (term1 + term2)
    return out if out.ndim else float(out)


def g2_model(tau_ns, g0, tau_c_ns, irf_sigma_ns, bin_width_ns, norm=1.0):
    """Antibunching model with IRF convolution and bin box-averaging."""
    tau = np.asarray(tau_ns, dtype=float)
    if bin_width_ns > 0.0:
        half = 0.5 * bin_width_ns
        dip = np.zeros_like(tau, dtype=float)
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            dip += weight * antibunching_dip(tau + half * node, tau_c_ns, irf_sigma_ns)
        dip *= 0.5
    else:
        dip = antibunching_dip(tau, tau_c_ns, irf_sigma_ns)
    out = norm * (1.0 - (1.0 - g0) * dip)
    return out if out.ndim else float(out)


def fit_g2(trace):
    """Fit the antibunching model; returns raw and deconvolved g2(0).

    The trace is normalized by its long-delay plateau; `g0_raw` is the
    minimum of the normalized binned data and `g0_deconvolved` the fitted
    dip depth after undoing the instrument response and bin averaging.
    """
    tau = trace.delay_ns
    y_raw = trace.coincidences
    tau_max = float(np.max(np.abs(tau)))

    plateau_sel = np.abs(tau) >= 0.6 * tau_max
    plateau = float(np.mean(y_raw[plateau_sel]))
    if plateau <= 0:
        raise NormalizationError("long-delay plateau is empty or zero")
    y = y_raw / plateau
    sigma = np.sqrt(np.maximum(y_raw, 1.0)) / plateau

    g0_raw = float(np.min(y))
    dip_deficit = np.maximum(1.0 - y, 0.0)
    tau_c0 = float(np.trapezoid(dip_deficit, tau) / max(2.0 * (1.0 - g0_raw), 1e-6))
    tau_c0 = min(max(tau_c0, float(trace.bin_width_ns) or 0.05, 0.05), tau_max / 5.0)
    if tau_max < 5.0 * tau_c0:
        raise NormalizationError(
            f"trace spans {tau_max:.2f} ns, needs >= 5 correlation times")

    def fun(theta):
        g0, tau_c, norm = theta
        return (g2_model(tau, g0, tau_c, trace.irf_sigma_ns,
                         trace.bin_width_ns, norm) - y) / sigma

    res = least_squares(fun, [max(g0_raw, 0.0), tau_c0, 1.0],
                        bounds=([-1.0, 1e-4, 0.1], [2.0, 1e4, 10.0]),
                        method="trf", xtol=1e-13, ftol=1e-13, max_nfev=5000)
    cov = _covariance(res)
    err = np.sqrt(np.maximum(np.diag(cov), 0.0))
    g0_fit, tau_c_fit, norm_fit = res.x
    dof = max(tau.size - 3, 1)
    reduced_chi2 = float(2.0 * res.cost / dof)
    identifiable = (1.0 - g0_fit) > max(3.0 * err[0], 1e-3)
    if identifiable and tau_max < 5.0 * tau_c_fit:
        raise NormalizationError(
            f"fitted correlation time {tau_c_fit:.2f} ns leaves no plateau "
            f"within the {tau_max:.2f} ns span")
    return FitResult(
        parameters={"g0_raw": g0_raw, "g0_deconvolved": float(g0_fit),
                    "tau_c_ns": float(tau_c_fit), "norm": float(norm_fit)},
        uncertainties={"g0_deconvolved": float(err[0]),
                       "tau_c_ns": float(err[1]), "norm": float(err[2])},
        covariance=cov, reduced_chi2=reduced_chi2, converged=bool(res.success),
        flags={"tau_c_identifiable": bool(identifiable)})


def calibrate_g2_instrument(g0, tau_c_ns, bin_width_ns, raw_minimum_target,
                            sigma_bracket=(1e-3, 5.0)):
    """IRF width whose noiseless binned minimum equals the target.

    1D root search in irf_sigma; the forward-simulated binned minimum is
    the oracle. Used to pin the instrument model to a measured raw dip.
    """
    def raw_min(sig):
        return g2_model(0.0, g0, tau_c_ns, sig, bin_width_ns)

    lo, hi = sigma_bracket
    if not raw_min(lo) < raw_minimum_target < raw_min(hi):
        raise ValueError("raw-minimum target is outside the bracket's reach")
    return brentq(lambda s: raw_min(s) - raw_minimum_target, lo, hi, xtol=1e-12)


# ---------------------------------------------------------------------------
# lifetime

def _biexp(t, a1, tau1, a2, tau2):
    return a1 * np.exp(-t / tau1) + a2 * np.exp(-t / tau2)


def fit_lifetime(trace):
    """Poisson-weighted biexponential decay fit with single-exp comparison.

    principal_tau is the time constant of the larger-area component; when
    the two constants agree within their joint uncertainty the fit
    collapses to the single-exponential result (degenerate flag).
    """
    t = trace.time_ns - trace.time_ns[0]
    y = trace.counts
    peak = float(np.max(y))
    tail = float(np.mean(y[-max(3, y.size // 10):]))
    if peak < 5.0 * max(tail, 1.0):
        raise InsufficientDecayError(
            f"peak/tail ratio {peak / max(tail, 1.0):.2f} is below 5")

    sigma = np.sqrt(np.maximum(y, 1.0))
    # tail estimate of the slow constant from the last positive decade
    pos = y > max(peak * 1e-4, 1.0)
    t_pos, y_pos = t[pos], y[pos]
    k = max(t_pos.size // 2, 2)
    slope = np.polyfit(t_pos[-k:], np.log(y_pos[-k:]), 1)[0]
    tau_slow0 = -1.0 / slope if slope < 0 else t[-1] / 5.0
    tau_slow0 = min(max(tau_slow0, 1e-3), t[-1])

    bounds = ([0.0, 1e-4, 0.0, 1e-4], [np.inf, 1e4, np.inf, 1e4])
    start = np.array([0.4 * peak, tau_slow0 / 5.0, 0.6 * peak, tau_slow0])
    res_bi = None
    for _ in range(2):
        def fun_bi(theta):
            return (_biexp(t, *theta) - y) / sigma

        res_bi = least_squares(fun_bi, start, bounds=bounds, method="trf",
                               xtol=1e-11, ftol=1e-11, max_nfev=400)
        start = res_bi.x
        # reweight by the model: data-based Poisson weights bias the
        # constants low in the sparse tail bins
        sigma = np.sqrt(np.maximum(_biexp(t, *res_bi.x), 1.0))
    cov = _covariance(res_bi)
    err = np.sqrt(np.maximum(np.diag(cov), 0.0))
    a1, tau1, a2, tau2 = res_bi.x
    e_a1, e_t1, e_a2, e_t2 = err
    if tau1 > tau2:
        a1, tau1, a2, tau2 = a2, tau2, a1, tau1
        e_a1, e_t1, e_a2, e_t2 = e_a2, e_t2, e_a1, e_t1
    dof_bi = max(t.size - 4, 1)
    chi2_bi = float(2.0 * res_bi.cost / dof_bi)

    s_sigma = np.sqrt(np.maximum(y, 1.0))
    res_s = None
    for _ in range(2):
        def fun_single(theta):
            return (theta[0] * np.exp(-t / theta[1]) - y) / s_sigma

        res_s = least_squares(fun_single, [peak, tau_slow0],
                              bounds=([0.0, 1e-4], [np.inf, 1e4]),
                              method="trf", xtol=1e-11, ftol=1e-11, max_nfev=400)
        s_sigma = np.sqrt(np.maximum(res_s.x[0] * np.exp(-t / res_s.x[1]), 1.0))
    chi2_single = float(2.0 * res_s.cost / max(t.size - 2, 1))

    # degenerate when the constants overlap within their joint uncertainty,
    # when one component carries no area, or when the single-exponential
    # model describes the data equally well
    areas = (a1 * tau1, a2 * tau2)
    minor_fraction = min(areas) / max(sum(areas), 1e-300)
    degenerate = (abs(tau2 - tau1) < (e_t1 + e_t2)
                  or minor_fraction < 1e-3
                  or chi2_single <= chi2_bi + 0.02)
    if degenerate:
        principal = float(res_s.x[1])
    else:
        principal = float(tau2 if a2 * tau2 >= a1 * tau1 else tau1)
    if t[-1] < 5.0 * principal:
        raise InsufficientDecayError(
            f"trace spans {t[-1]:.2f} ns, needs >= 5 principal lifetimes")

    return FitResult(
        parameters={"A1": float(a1), "tau1_ns": float(tau1),
                    "A2": float(a2), "tau2_ns": float(tau2),
                    "principal_tau_ns": principal,
                    "single_tau_ns": float(res_s.x[1])},
        uncertainties={"A1": float(e_a1), "tau1_ns": float(e_t1),
                       "A2": float(e_a2), "tau2_ns": float(e_t2)},
        covariance=cov, reduced_chi2=chi2_bi,
        converged=bool(res_bi.success and res_s.success),
        flags={"degenerate": bool(degenerate),
               "chi2_single": chi2_single, "chi2_biexp": chi2_bi})


# ---------------------------------------------------------------------------
# synthetic data generators (forward models + seeded noise)

def synth_spectrum(wavelength_nm, peaks, background=0.0, seed=None, **meta):
    """Spectrum from (center, fwhm, amplitude) peak tuples plus background."""
    wl = np.asarray(wavelength_nm, dtype=float)
    clean = np.full(wl.shape, float(background))
    for center, fwhm, amplitude in peaks:
        clean += lorentzian_profile(wl, center, fwhm, amplitude)
    counts = clean if seed is None else np.random.default_rng(seed).poisson(clean)
    return Spectrum(wavelength_nm=wl, counts=np.asarray(counts, dtype=float), **meta)


def synth_polarization_series(center_nm, fss_ueV, angles_deg, theta0_deg=0.0,
                              fwhm_nm=0.05, amplitude=1000.0, background=10.0,
                              window_nm=0.6, n_samples=301, seed=None):
    """Polarizer-angle spectra of one line with splitting `fss_ueV`."""
    e_mean = 1e6 * constants.HC_EV_NM / center_nm
    series = []
    for k, angle in enumerate(angles_deg):
        e_ueV = e_mean + 0.5 * fss_ueV * math.cos(2.0 * math.radians(angle - theta0_deg))
        lam = 1e6 * constants.HC_EV_NM / e_ueV
        wl = np.linspace(center_nm - window_nm / 2, center_nm + window_nm / 2, n_samples)
        series.append(synth_spectrum(
            wl, [(lam, fwhm_nm, amplitude)], background=background,
            seed=None if seed is None else seed + 7919 * k,
            polarizer_angle_deg=float(angle)))
    return series


def synth_g2_trace(g0, tau_c_ns, irf_sigma_ns, bin_width_ns, tau_max_ns=15.0,
                   plateau_counts=1000.0, seed=None):
    """Coincidence histogram drawn from the antibunching model."""
    if bin_width_ns > 2.0 * tau_max_ns / 100_000:
        edges = np.arange(-tau_max_ns, tau_max_ns + 0.5 * bin_width_ns, bin_width_ns)
        tau = 0.5 * (edges[:-1] + edges[1:])
    else:
        bin_width_ns = 0.0
        tau = np.linspace(-tau_max_ns, tau_max_ns, 601)
    clean = plateau_counts * g2_model(tau, g0, tau_c_ns, irf_sigma_ns, bin_width_ns)
    counts = clean if seed is None else np.random.default_rng(seed).poisson(clean)
    return G2Trace(delay_ns=tau, coincidences=np.asarray(counts, dtype=float),
                   bin_width_ns=bin_width_ns, irf_sigma_ns=irf_sigma_ns)


def synth_decay_trace(components, t_max_ns=25.0, dt_ns=0.05, peak_counts=1e4,
                      seed=None):
    """Decay histogram from (tau_ns, area_fraction) components."""
    t = np.arange(0.0, t_max_ns + 0.5 * dt_ns, dt_ns)
    total_area = sum(frac for _, frac in components)
    clean = np.zeros_like(t)
    for tau, frac in components:
        clean += (frac / total_area) / tau * np.exp(-t / tau)
    clean *= peak_counts / clean[0]
    counts = clean if seed is None else np.random.default_rng(seed).poisson(clean)
    return DecayTrace(time_ns=t, counts=np.asarray(counts, dtype=float))


def synth_power_series(slope, powers_uW, prefactor=100.0, noise_frac=0.0,
                       p_sat_uW=None, seed=None):
    """Intensity-versus-power data I = c P^m, hard-saturated above p_sat."""
    p = np.asarray(powers_uW, dtype=float)
    effective = p if p_sat_uW is None else np.minimum(p, p_sat_uW)
    intensity = prefactor * effective ** slope
    if noise_frac > 0:
        rng = np.random.default_rng(seed)
        intensity = intensity * (1.0 + noise_frac * rng.standard_normal(p.size))
    return p, np.maximum(intensity, 1e-12)

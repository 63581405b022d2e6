"""III-V material parameters and derived quantities.

The database ships as a human-readable text file (``data/materials.txt``,
one ``[Name]`` record per material, ``key = value`` lines). It is parsed
once at import and is immutable afterwards, so concurrent reads are safe.

Band alignment uses the anion-referenced valence-band-offset scale: the
absolute valence edge of a material is its ``vbo`` entry and the absolute
conduction edge is ``vbo + Eg(T)``. Electron affinities are stored on a
consistent vacuum scale, so the affinity rule gives the same conduction
offsets (verified by a unit test).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from . import constants

T_MIN = 0.0
T_MAX = 400.0


class UnknownMaterialError(KeyError):
    """Raised when a material name is not in the database."""


class DatabaseFormatError(ValueError):
    """Raised when the material database file is malformed."""


@dataclass(frozen=True)
class MobilityParams:
    """Caughey-Thomas doping-dependent mobility parameters."""

    mu_min: float       # cm^2/(V s)
    mu_max: float       # cm^2/(V s)
    N_ref: float        # cm^-3
    exponent: float     # dimensionless, in (0, 2]

    def __post_init__(self):
        if not self.mu_min <= self.mu_max:
            raise ValueError("mu_min must not exceed mu_max")
        if not self.N_ref > 0:
            raise ValueError("N_ref must be positive")
        if not 0.0 < self.exponent <= 2.0:
            raise ValueError("exponent must be in (0, 2]")


@dataclass(frozen=True)
class MaterialParams:
    """One material evaluated at a fixed temperature.

    ``Eg`` is the Varshni gap at ``temperature``; ``Eg0``, ``varshni_alpha``
    and ``varshni_beta`` are the underlying 0 K constants. ``vbo`` and
    ``electron_affinity`` place the bands on the common absolute scale.
    """

    name: str
    temperature: float          # K
    Eg0: float                  # eV, gap at 0 K
    varshni_alpha: float        # eV/K
    varshni_beta: float         # K
    Eg: float                   # eV, gap at `temperature`
    vbo: float                  # eV, absolute valence edge
    electron_affinity: float    # eV
    eps_r: float
    me: float                   # m0 units
    mh: float                   # m0 units
    mobility_e: MobilityParams
    mobility_h: MobilityParams
    mobility_T_exponent: float

    def __post_init__(self):
        if self.Eg0 <= 0:
            raise ValueError(f"{self.name}: Eg0 must be positive")
        if self.eps_r < 1:
            raise ValueError(f"{self.name}: eps_r must be >= 1")
        if not (0 < self.me < 10 and 0 < self.mh < 10):
            raise ValueError(f"{self.name}: effective masses out of range")

    @property
    def ev_abs(self):
        """Absolute valence-band edge [eV]."""
        return self.vbo

    @property
    def ec_abs(self):
        """Absolute conduction-band edge [eV] at this temperature."""
        return self.vbo + self.Eg

    def nc(self):
        """Conduction-band effective density of states [cm^-3]."""
        return constants.effective_dos(self.me, self.temperature)

    def nv(self):
        """Valence-band effective density of states [cm^-3]."""
        return constants.effective_dos(self.mh, self.temperature)


def varshni_gap(Eg0, alpha, beta, temperature):
    """Eg(T) = Eg0 - alpha*T^2/(T + beta)."""
    return Eg0 - alpha * temperature * temperature / (temperature + beta)


def _parse_database(text):
    records = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current:
                raise DatabaseFormatError(f"line {lineno}: empty material name")
            if current in records:
                raise DatabaseFormatError(f"line {lineno}: duplicate material {current!r}")
            records[current] = {}
            continue
        if current is None:
            raise DatabaseFormatError(f"line {lineno}: key-value pair outside a [material] record")
        if "=" not in line:
            raise DatabaseFormatError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        try:
            records[current][key.strip()] = float(value)
        except ValueError as exc:
            raise DatabaseFormatError(f"line {lineno}: non-numeric value {value.strip()!r}") from exc
    return records


_REQUIRED_KEYS = (
    "Eg0", "varshni_alpha", "varshni_beta", "vbo", "electron_affinity",
    "eps_r", "me", "mh",
    "mu_e_min", "mu_e_max", "mu_e_Nref", "mu_e_exponent",
    "mu_h_min", "mu_h_max", "mu_h_Nref", "mu_h_exponent",
    "mobility_T_exponent",
)


def _load_default_database():
    text = resources.files("dotdiode.data").joinpath("materials.txt").read_text()
    records = _parse_database(text)
    for name, rec in records.items():
        missing = [k for k in _REQUIRED_KEYS if k not in rec]
        if missing:
            raise DatabaseFormatError(f"material {name!r}: missing keys {missing}")
    return records


_DATABASE = _load_default_database()


def material_names():
    """Names of all materials in the database."""
    return tuple(sorted(_DATABASE))


def lookup_material(name, temperature=300.0):
    """Return the parameter record for `name` with the gap evaluated at T.

    Raises UnknownMaterialError for names not in the database and
    ValueError for temperatures outside [0, 400] K.
    """
    if name not in _DATABASE:
        raise UnknownMaterialError(
            f"unknown material {name!r}; available: {', '.join(material_names())}")
    if not T_MIN <= temperature <= T_MAX:
        raise ValueError(f"temperature {temperature} K outside [{T_MIN}, {T_MAX}] K")
    rec = _DATABASE[name]
    return MaterialParams(
        name=name,
        temperature=temperature,
        Eg0=rec["Eg0"],
        varshni_alpha=rec["varshni_alpha"],
        varshni_beta=rec["varshni_beta"],
        Eg=varshni_gap(rec["Eg0"], rec["varshni_alpha"], rec["varshni_beta"], temperature),
        vbo=rec["vbo"],
        electron_affinity=rec["electron_affinity"],
        eps_r=rec["eps_r"],
        me=rec["me"],
        mh=rec["mh"],
        mobility_e=MobilityParams(rec["mu_e_min"], rec["mu_e_max"],
                                  rec["mu_e_Nref"], rec["mu_e_exponent"]),
        mobility_h=MobilityParams(rec["mu_h_min"], rec["mu_h_max"],
                                  rec["mu_h_Nref"], rec["mu_h_exponent"]),
        mobility_T_exponent=rec["mobility_T_exponent"],
    )


def band_offsets(a, b):
    """Band-edge discontinuities between two materials at equal temperature.

    Returns (dEc, dEv) with dEc = Ec(a) - Ec(b) and dEv = Ev(b) - Ev(a),
    so dEc + dEv = Eg(a) - Eg(b) and both offsets are positive for a
    type-I well in `b`. Antisymmetric under argument exchange.
    """
    if a.temperature != b.temperature:
        raise ValueError("band_offsets requires both materials at the same temperature")
    dEc = a.ec_abs - b.ec_abs
    dEv = b.ev_abs - a.ev_abs
    return dEc, dEv


def mobility(params, N):
    """Doping-dependent mobility mu(N) [cm^2/(V s)] at 300 K.

    mu(N) = mu_min + (mu_max - mu_min)/(1 + (N/N_ref)^exponent),
    monotonically non-increasing in total doping N >= 0 [cm^-3].
    """
    if N < 0:
        raise ValueError(f"doping density must be non-negative, got {N}")
    span = params.mu_max - params.mu_min
    return params.mu_min + span / (1.0 + (N / params.N_ref) ** params.exponent)


def mobility_at(params, N, temperature, T_exponent):
    """mu(N) scaled by the fixed power law (300/T)^g."""
    return mobility(params, N) * math.pow(300.0 / temperature, T_exponent)

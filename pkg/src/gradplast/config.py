"""Scenario configuration: line-oriented text, fully validated at parse time.

Format: ``section.key = value`` with ``#`` comments; arrays are
whitespace-separated values; ``slip.system`` may repeat, one line per
system (six numbers: slip direction then plane normal).  Every violated
constraint is reported with the offending key and the rule it breaks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .algebra import ElasticModuli, SlipBasis, SlipSystem
from .constitutive import (
    IsotropicHardening,
    MaterialParams,
    PragerHardening,
    QuadraticHardening,
    validate_model,
)
from .errors import InvalidModel, InvalidSlipSystem, ParseError, ValidationError
from .grid import FACES, GridSpec
from .solver import LoadProgram, SolverConfig
from .verify import shear_profile

__all__ = ["ScenarioConfig", "parse_config"]

_KNOWN_KEYS = {
    "grid.nx", "grid.ny", "grid.nz", "grid.h", "grid.dirichlet_faces",
    "grid.hard_faces",
    "material.mu", "material.lambda", "material.L_c", "material.sigma0",
    "hardening.variant", "hardening.k2", "hardening.k1", "hardening.H",
    "slip.system",
    "load.times", "load.steps", "load.t_end",
    "load.body_force", "load.body_scales", "load.body_scale_end",
    "load.shear_amplitudes", "load.shear_amplitude_end",
    "solver.tol_energy", "solver.tol_kkt", "solver.max_outer",
    "solver.max_cg", "solver.cg_tol", "solver.max_fista",
    "solver.trace_mode", "solver.fista_restart",
    "probe.samples", "probe.seed",
    "output.directory", "output.snapshot_stride",
}


@dataclass(frozen=True)
class ScenarioConfig:
    spec: GridSpec
    basis: SlipBasis
    material: MaterialParams
    load: LoadProgram
    solver: SolverConfig
    output_directory: str
    snapshot_stride: int
    probe_samples: int
    probe_seed: int


def _tokenize(text: str) -> Dict[str, List[tuple]]:
    """Key -> list of (line_number, value_string); repeated keys append."""
    out: Dict[str, List[tuple]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'section.key = value', "
                             f"got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        out.setdefault(key, []).append((lineno, value.strip()))
    return out


class _Reader:
    def __init__(self, table):
        self.table = table
        self.used = set()

    def has(self, key):
        return key in self.table

    def raw(self, key, default=None):
        self.used.add(key)
        if key not in self.table:
            if default is None:
                raise ValidationError(f"missing required key {key!r}")
            return default
        if len(self.table[key]) > 1 and key != "slip.system":
            lines = [ln for ln, _ in self.table[key]]
            raise ValidationError(f"{key} given more than once (lines {lines})")
        return self.table[key][-1][1]

    def floats(self, key, default=None):
        raw = self.raw(key, default)
        if isinstance(raw, (list, tuple, np.ndarray)):
            return np.asarray(raw, dtype=float)
        try:
            return np.array([float(v) for v in raw.split()])
        except ValueError as exc:
            raise ParseError(f"{key}: could not parse number in {raw!r}") from exc

    def number(self, key, default=None):
        vals = self.floats(key, default if default is None else [default])
        if vals.size != 1:
            raise ValidationError(f"{key} must be a single number")
        return float(vals[0])

    def integer(self, key, default=None):
        v = self.number(key, default)
        if v != int(v):
            raise ValidationError(f"{key} must be an integer, got {v}")
        return int(v)

    def word(self, key, default=None):
        raw = self.raw(key, default)
        if len(raw.split()) != 1:
            raise ValidationError(f"{key} must be a single word, got {raw!r}")
        return raw.strip()


def _parse_grid(r: _Reader) -> GridSpec:
    nx = r.integer("grid.nx")
    ny = r.integer("grid.ny")
    nz = r.integer("grid.nz")
    for name, n in (("nx", nx), ("ny", ny), ("nz", nz)):
        if n < 2:
            raise ValidationError(
                f"grid.{name} must be >= 2 for a run scenario, got {n} "
                "(single-layer grids are reserved for the tiny oracles)")
    h = r.number("grid.h")
    faces = frozenset(r.raw("grid.dirichlet_faces").split())
    hard = None
    if r.has("grid.hard_faces"):
        hard = frozenset(r.raw("grid.hard_faces").split())
    bad = faces - set(FACES)
    if bad:
        raise ValidationError(
            f"grid.dirichlet_faces: unknown faces {sorted(bad)}; valid: {list(FACES)}")
    return GridSpec(nx, ny, nz, h, dirichlet_faces=faces, hard_faces=hard)


def _parse_slip(r: _Reader) -> SlipBasis:
    if not r.has("slip.system"):
        raise ValidationError("at least one slip.system line is required")
    systems = []
    for lineno, value in r.table["slip.system"]:
        vals = value.split()
        if len(vals) != 6:
            raise ValidationError(
                f"line {lineno}: slip.system needs 6 numbers "
                "(direction then plane normal)")
        try:
            nums = [float(v) for v in vals]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad number in slip.system") from exc
        try:
            systems.append(SlipSystem(nums[:3], nums[3:]))
        except InvalidSlipSystem as exc:
            raise ValidationError(
                f"line {lineno}: invalid slip system: {exc} "
                "(direction and normal must be unit length and orthogonal "
                "within 1e-8)") from exc
    r.used.add("slip.system")
    return SlipBasis(systems)


def _parse_material(r: _Reader, basis: SlipBasis) -> MaterialParams:
    mu = r.number("material.mu")
    lam = r.number("material.lambda")
    if mu <= 0.0:
        raise ValidationError(
            f"material.mu must be > 0, got {mu} (positive shear modulus is "
            "required for ellipticity of the elastic energy)")
    if 3.0 * lam + 2.0 * mu <= 0.0:
        raise ValidationError(
            f"material.lambda violates 3*lambda + 2*mu > 0 (got lambda={lam}, "
            f"mu={mu}); the elasticity tensor loses positive definiteness")
    l_c = r.number("material.L_c", 0.0)
    if l_c < 0.0:
        raise ValidationError(f"material.L_c must be >= 0, got {l_c}")
    sigma0 = r.number("material.sigma0")
    if sigma0 <= 0.0:
        raise ValidationError(
            f"material.sigma0 must be > 0, got {sigma0} (the dissipation "
            "threshold must be a positive initial yield stress)")

    variant = r.word("hardening.variant")
    if variant == "isotropic":
        k2 = r.number("hardening.k2")
        if k2 <= 0.0:
            raise ValidationError(
                f"hardening.k2 must be > 0, got {k2} (positive isotropic "
                "hardening is what makes the incremental problem coercive)")
        law = IsotropicHardening(k2)
    elif variant == "quadratic":
        vals = r.floats("hardening.H")
        n = basis.n_slip
        if vals.size != n * n:
            raise ValidationError(
                f"hardening.H needs {n * n} row-major entries for "
                f"{n} slip systems, got {vals.size}")
        try:
            law = QuadraticHardening(vals.reshape(n, n))
        except InvalidModel as exc:
            raise ValidationError(
                f"hardening.H: {exc} (the kinematic hardening matrix must be "
                "symmetric positive definite)") from exc
    elif variant == "prager":
        k1 = r.number("hardening.k1")
        if k1 <= 0.0:
            raise ValidationError(f"hardening.k1 must be > 0, got {k1}")
        law = PragerHardening(k1)
    else:
        raise ValidationError(
            f"hardening.variant must be isotropic, quadratic, or prager; "
            f"got {variant!r}")

    m = MaterialParams(elastic=ElasticModuli(mu, lam), L_c=l_c,
                       sigma0=sigma0, hardening=law)
    try:
        validate_model(m, basis)
    except InvalidModel as exc:
        raise ValidationError(
            f"hardening.variant = prager: {exc} (Prager hardening is "
            "positive definite in the slips only for mutually orthogonal "
            "slip systems)") from exc
    return m


def _parse_load(r: _Reader, spec: GridSpec) -> LoadProgram:
    if r.has("load.times"):
        times = r.floats("load.times")
    else:
        steps = r.integer("load.steps")
        t_end = r.number("load.t_end", 1.0)
        if steps < 1:
            raise ValidationError(f"load.steps must be >= 1, got {steps}")
        times = np.linspace(0.0, t_end, steps + 1)
    n_nodes = times.size

    body_force = None
    body_scales = None
    if r.has("load.body_force"):
        f = r.floats("load.body_force")
        if f.size != 3:
            raise ValidationError("load.body_force must have 3 components")
        body_force = np.broadcast_to(f, spec.shape + (3,)).copy()
        if r.has("load.body_scales"):
            body_scales = r.floats("load.body_scales")
        else:
            end = r.number("load.body_scale_end", 1.0)
            body_scales = np.linspace(0.0, end, n_nodes)
        if body_scales.size != n_nodes:
            raise ValidationError(
                f"load.body_scales needs {n_nodes} entries (one per time "
                f"node), got {body_scales.size}")
        if body_scales[0] != 0.0 and np.any(f != 0.0):
            raise ValidationError(
                "load.body_scales must start at 0: the evolution starts "
                "from the zero state")

    dirichlet = None
    if r.has("load.shear_amplitudes") or r.has("load.shear_amplitude_end"):
        if r.has("load.shear_amplitudes"):
            amps = r.floats("load.shear_amplitudes")
        else:
            amps = np.linspace(0.0, r.number("load.shear_amplitude_end"), n_nodes)
        if amps.size != n_nodes:
            raise ValidationError(
                f"load.shear_amplitudes needs {n_nodes} entries, got {amps.size}")
        if amps[0] != 0.0:
            raise ValidationError(
                "load.shear_amplitudes must start at 0: the evolution starts "
                "from the zero state")
        dirichlet = tuple(shear_profile(spec, a) for a in amps)

    try:
        return LoadProgram(times=times, body_force=body_force,
                           body_scales=body_scales,
                           dirichlet_values=dirichlet)
    except ValidationError as exc:
        raise ValidationError(f"load.times: {exc}") from exc


def _parse_solver(r: _Reader) -> SolverConfig:
    max_cg = r.integer("solver.max_cg", 0)
    kwargs = dict(
        tol_energy=r.number("solver.tol_energy", SolverConfig.tol_energy),
        tol_kkt=r.number("solver.tol_kkt", SolverConfig.tol_kkt),
        max_outer=r.integer("solver.max_outer", SolverConfig.max_outer),
        max_cg=None if max_cg == 0 else max_cg,
        cg_tol=r.number("solver.cg_tol", SolverConfig.cg_tol),
        max_fista=r.integer("solver.max_fista", SolverConfig.max_fista),
        trace_mode=r.word("solver.trace_mode", SolverConfig.trace_mode),
        fista_restart=bool(r.integer("solver.fista_restart", 1)),
    )
    return SolverConfig(**kwargs)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario; raises :class:`ParseError` on syntax
    problems and :class:`ValidationError` on violated model constraints."""
    table = _tokenize(text)
    r = _Reader(table)
    spec = _parse_grid(r)
    basis = _parse_slip(r)
    material = _parse_material(r, basis)
    load = _parse_load(r, spec)
    solver = _parse_solver(r)
    out_dir = r.word("output.directory", "out")
    stride = r.integer("output.snapshot_stride", 0)
    if stride < 0:
        raise ValidationError(f"output.snapshot_stride must be >= 0, got {stride}")
    samples = r.integer("probe.samples", 1000)
    if samples < 1:
        raise ValidationError(f"probe.samples must be >= 1, got {samples}")
    seed = r.integer("probe.seed", 1234)
    return ScenarioConfig(spec=spec, basis=basis, material=material,
                          load=load, solver=solver,
                          output_directory=out_dir, snapshot_stride=stride,
                          probe_samples=samples, probe_seed=seed)

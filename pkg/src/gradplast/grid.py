"""Structured-grid fields and discrete differential operators.

Fields are cell-collocated numpy arrays with the grid axes first:
scalar ``(nx, ny, nz)``, vector ``(..., 3)``, tensor ``(..., 3, 3)``, slip
``(..., n_slip)``.  All operators are built from the same per-axis forward
differences, so compositions along distinct axes commute exactly and the
structural identities curl(grad u) = 0 and div(curl X) = 0 hold at the
stencil level, not just to truncation order.

Boundary closure of the forward difference at the far (+) face of each
axis: fields extend by zero across displacement-Dirichlet faces and by a
one-sided copy across free faces.  The adjoint operators flip sign and
direction with the matching closure, so adjointness is exact for all
fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import _backend as K
from .algebra import SlipBasis
from .errors import DimensionMismatch, ValidationError

__all__ = [
    "FACES",
    "GridSpec",
    "zeros_field",
    "check_field",
    "grad",
    "grad_adjoint",
    "curl",
    "curl_adjoint",
    "divergence",
    "l2_inner",
    "l2_norm",
    "TraceConstraint",
    "build_trace_constraint",
    "write_snapshot",
    "read_snapshot",
]

FACES = ("x-", "x+", "y-", "y+", "z-", "z+")
_PLUS_FACE = ("x+", "y+", "z+")
_FACE_AXIS_SIDE = {f: (i // 2, i % 2) for i, f in enumerate(
    ("x-", "x+", "y-", "y+", "z-", "z+"))}

#: hard ceiling on cell count; beyond this the dense per-cell storage
#: stops being desk scale
MAX_CELLS = 64 ** 3

_KIND_TRAILING = {"scalar": (), "vec3": (3,), "mat3": (3, 3)}


def _validate_faces(faces, what):
    faces = frozenset(faces)
    bad = faces - set(FACES)
    if bad:
        raise ValidationError(f"{what} contains unknown faces {sorted(bad)}; "
                              f"valid names are {list(FACES)}")
    return faces


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered box grid.

    ``dirichlet_faces`` designates the displacement-Dirichlet part of the
    boundary (must be nonempty so the elastic block is definite) and fixes
    the zero-extension closure of the difference operators.
    ``hard_faces`` designates where the tangential slip constraint acts;
    it defaults to ``dirichlet_faces`` but may be any subset of the
    boundary, including empty (fully micro-free).
    """

    nx: int
    ny: int
    nz: int
    h: float
    dirichlet_faces: frozenset = frozenset(("x-",))
    hard_faces: Optional[frozenset] = None

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny), ("nz", self.nz)):
            if int(n) < 1:
                raise ValidationError(f"grid.{name} must be >= 1, got {n}")
        if self.nx * self.ny * self.nz > MAX_CELLS:
            raise ValidationError(
                f"grid has {self.nx * self.ny * self.nz} cells, "
                f"exceeding the desk-scale maximum {MAX_CELLS}")
        if not (self.h > 0.0):
            raise ValidationError(f"grid.h must be > 0, got {self.h}")
        dfaces = _validate_faces(self.dirichlet_faces, "dirichlet_faces")
        if not dfaces:
            raise ValidationError("dirichlet_faces must be nonempty")
        object.__setattr__(self, "dirichlet_faces", dfaces)
        hfaces = (dfaces if self.hard_faces is None
                  else _validate_faces(self.hard_faces, "hard_faces"))
        object.__setattr__(self, "hard_faces", hfaces)

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def cell_volume(self) -> float:
        return self.h ** 3

    def zero_closure(self, axis: int) -> bool:
        """True when the + face of ``axis`` extends fields by zero."""
        return _PLUS_FACE[axis] in self.dirichlet_faces

    def dirichlet_cell_mask(self) -> np.ndarray:
        """Boolean mask of cells in any displacement-Dirichlet layer."""
        return self._layer_mask(self.dirichlet_faces)

    def hard_cell_mask(self) -> np.ndarray:
        """Boolean mask of cells in any slip-constrained layer."""
        return self._layer_mask(self.hard_faces)

    def _layer_mask(self, faces) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for f in faces:
            axis, side = _FACE_AXIS_SIDE[f]
            sl = [slice(None)] * 3
            sl[axis] = -1 if side else 0
            mask[tuple(sl)] = True
        return mask

    def face_cells(self, face: str) -> Iterable[tuple]:
        axis, side = _FACE_AXIS_SIDE[face]
        idx = [range(self.nx), range(self.ny), range(self.nz)]
        idx[axis] = (self.shape[axis] - 1,) if side else (0,)
        for i in idx[0]:
            for j in idx[1]:
                for k in idx[2]:
                    yield (i, j, k)


def outward_normal(face: str) -> np.ndarray:
    axis, side = _FACE_AXIS_SIDE[face]
    n = np.zeros(3)
    n[axis] = 1.0 if side else -1.0
    return n


def zeros_field(kind: str, spec: GridSpec, n_slip: int = 0) -> np.ndarray:
    trailing = (n_slip,) if kind == "slip" else _KIND_TRAILING[kind]
    return np.zeros(spec.shape + trailing)


def check_field(a: np.ndarray, kind: str, spec: GridSpec, n_slip: int = 0):
    trailing = (n_slip,) if kind == "slip" else _KIND_TRAILING[kind]
    want = spec.shape + trailing
    if a.shape != want:
        raise DimensionMismatch(f"{kind} field has shape {a.shape}, expected {want}")


def grad(u: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Displacement gradient, ``out[..., i, j] = D_j u_i``."""
    check_field(u, "vec3", spec)
    out = np.empty(spec.shape + (3, 3))
    for j in range(3):
        out[..., :, j] = K.diff_forward(u, j, spec.h, spec.zero_closure(j))
    return out


def grad_adjoint(x: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Exact adjoint of :func:`grad` under the cell-volume inner product."""
    check_field(x, "mat3", spec)
    out = np.zeros(spec.shape + (3,))
    for j in range(3):
        out += K.diff_forward_adjoint(
            np.ascontiguousarray(x[..., :, j]), j, spec.h, spec.zero_closure(j))
    return out


def curl(x: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Row-wise curl of a tensor field.

    Row i of the result is the curl of row i of ``x``, using the same
    per-axis differences as :func:`grad`.
    """
    check_field(x, "mat3", spec)
    d = [K.diff_forward(x, j, spec.h, spec.zero_closure(j)) for j in range(3)]
    out = np.empty_like(x)
    out[..., :, 0] = d[1][..., :, 2] - d[2][..., :, 1]
    out[..., :, 1] = d[2][..., :, 0] - d[0][..., :, 2]
    out[..., :, 2] = d[0][..., :, 1] - d[1][..., :, 0]
    return out


def curl_adjoint(y: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Exact adjoint of :func:`curl`: backward differences with the
    sign-flipped boundary closure, combined row-wise."""
    check_field(y, "mat3", spec)
    d = [K.diff_forward_adjoint(y, j, spec.h, spec.zero_closure(j))
         for j in range(3)]
    out = np.empty_like(y)
    out[..., :, 0] = d[2][..., :, 1] - d[1][..., :, 2]
    out[..., :, 1] = d[0][..., :, 2] - d[2][..., :, 0]
    out[..., :, 2] = d[1][..., :, 0] - d[0][..., :, 1]
    return out


def divergence(x: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Row-wise divergence, ``out[..., i] = sum_j D_j x[..., i, j]``."""
    check_field(x, "mat3", spec)
    out = np.zeros(spec.shape + (3,))
    for j in range(3):
        out += K.diff_forward(
            np.ascontiguousarray(x[..., :, j]), j, spec.h, spec.zero_closure(j))
    return out


def l2_inner(a: np.ndarray, b: np.ndarray, spec: GridSpec) -> float:
    """Cell-volume weighted inner product of two matching fields."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"field shapes differ: {a.shape} vs {b.shape}")
    return spec.cell_volume * float(np.dot(a.ravel(), b.ravel()))


def l2_norm(a: np.ndarray, spec: GridSpec) -> float:
    return np.sqrt(max(l2_inner(a, a, spec), 0.0))


# ---------------------------------------------------------------------------
# tangential slip constraint at hard boundary layers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceConstraint:
    """Per-cell orthogonal projectors enforcing the tangential constraint.

    In ``kernel`` mode each constrained cell carries the projector onto
    the slip vectors whose plastic distortion has vanishing row-wise cross
    product with the outward normal(s); ``hard-zero`` pins the slips of
    constrained cells to zero outright.  Interior cells are unconstrained.
    """

    spec: GridSpec
    n_slip: int
    mode: str
    indices: np.ndarray  # (n_constrained, 3) int
    projectors: np.ndarray  # (n_constrained, n_slip, n_slip)
    _lookup: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        lookup = {tuple(c): i for i, c in enumerate(self.indices)}
        object.__setattr__(self, "_lookup", lookup)

    @property
    def n_constrained(self) -> int:
        return len(self.indices)

    def projector_at(self, cell) -> np.ndarray:
        """Projector for one cell; identity when the cell is unconstrained."""
        i = self._lookup.get(tuple(cell))
        if i is None:
            return np.eye(self.n_slip)
        return self.projectors[i]

    def apply(self, gamma: np.ndarray) -> np.ndarray:
        """Project a slip field into the constrained subspace (new array)."""
        check_field(gamma, "slip", self.spec, self.n_slip)
        out = gamma.copy()
        self.apply_inplace(out)
        return out

    def apply_inplace(self, gamma: np.ndarray) -> np.ndarray:
        if self.n_constrained:
            ix, iy, iz = self.indices.T
            out_vals = np.einsum("nab,nb->na", self.projectors, gamma[ix, iy, iz])
            gamma[ix, iy, iz] = out_vals
        return gamma

    def free_component_mask(self) -> np.ndarray:
        """Boolean ``(nx, ny, nz, n_slip)``: slip components the projector
        leaves untouched (its row equals the unit row within 1e-12)."""
        mask = np.ones(self.spec.shape + (self.n_slip,), dtype=bool)
        eye = np.eye(self.n_slip)
        for (ix, iy, iz), p in zip(self.indices, self.projectors):
            free_rows = np.all(np.abs(p - eye) <= 1e-12, axis=1)
            mask[ix, iy, iz] &= free_rows
        return mask


def build_trace_constraint(basis: SlipBasis, spec: GridSpec,
                           mode: str = "kernel") -> TraceConstraint:
    """Precompute the boundary projectors for a basis on a grid.

    ``kernel`` builds, per hard-boundary cell, the projector onto the null
    space of the linear map from slip vectors to the row-wise cross product
    of their plastic distortion with the outward normal (nine scalar
    constraints per touching face; rank cut at 1e-10).  ``hard-zero`` zeroes
    the slip vector of every hard-boundary cell, the blunt sufficient
    condition.
    """
    if mode not in ("kernel", "hard-zero"):
        raise ValidationError(f"trace mode must be 'kernel' or 'hard-zero', got {mode!r}")
    n_slip = basis.n_slip
    normals_by_cell = {}
    for f in sorted(spec.hard_faces):
        n = outward_normal(f)
        for cell in spec.face_cells(f):
            normals_by_cell.setdefault(cell, []).append(n)

    indices = []
    projectors = []
    eye = np.eye(n_slip)
    for cell in sorted(normals_by_cell):
        if mode == "hard-zero":
            indices.append(cell)
            projectors.append(np.zeros((n_slip, n_slip)))
            continue
        # one 9-row block per touching normal; column a is outer(l_a, nu_a x n)
        blocks = []
        for n in normals_by_cell[cell]:
            blk = np.stack(
                [np.outer(s.direction, np.cross(s.normal, n)).ravel()
                 for s in basis.systems], axis=1)
            blocks.append(blk)
        m = np.vstack(blocks)
        u, sv, vt = np.linalg.svd(m)
        tol = 1e-10 * max(1.0, sv[0] if sv.size else 0.0)
        rank = int(np.sum(sv > tol))
        if rank == 0:
            p = eye.copy()
        else:
            null = vt[rank:].T
            p = null @ null.T
        indices.append(cell)
        projectors.append(p)

    if indices:
        idx = np.array(indices, dtype=int)
        prj = np.array(projectors)
    else:
        idx = np.zeros((0, 3), dtype=int)
        prj = np.zeros((0, n_slip, n_slip))
    return TraceConstraint(spec=spec, n_slip=n_slip, mode=mode,
                           indices=idx, projectors=prj)


# ---------------------------------------------------------------------------
# snapshot file format
# ---------------------------------------------------------------------------

_SNAPSHOT_MAGIC = "gradplast-field"


def _kind_of(a: np.ndarray, spec: GridSpec):
    t = a.shape[3:]
    if t == ():
        return "scalar", 0
    if t == (3,):
        return "vec3", 0
    if t == (3, 3):
        return "mat3", 0
    if len(t) == 1:
        return "slip", t[0]
    raise DimensionMismatch(f"cannot snapshot field of shape {a.shape}")


def write_snapshot(path, a: np.ndarray, spec: GridSpec, kind: str = None,
                   n_slip: int = 0):
    """Write a field as text: header line then one cell per line in
    x-fastest order, full 17-significant-digit precision."""
    if kind is None:
        kind, n_slip = _kind_of(a, spec)
    check_field(a, kind, spec, n_slip)
    flat = a.reshape(spec.shape + (-1,))
    ordered = flat.transpose(2, 1, 0, 3).reshape(-1, flat.shape[-1])
    with open(path, "w") as fh:
        fh.write(f"{_SNAPSHOT_MAGIC} v1 {kind} {spec.nx} {spec.ny} {spec.nz} "
                 f"{spec.h:.17g} {n_slip}\n")
        for row in ordered:
            fh.write(" ".join(format(v, ".17g") for v in row))
            fh.write("\n")


def read_snapshot(path):
    """Read a snapshot; returns ``(array, kind, nx, ny, nz, h, n_slip)``."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 8 or header[0] != _SNAPSHOT_MAGIC or header[1] != "v1":
            raise ValidationError(f"not a field snapshot: {path}")
        kind = header[2]
        nx, ny, nz = int(header[3]), int(header[4]), int(header[5])
        h = float(header[6])
        n_slip = int(header[7])
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    n_cells = nx * ny * nz
    if len(rows) != n_cells:
        raise ValidationError(
            f"snapshot {path} has {len(rows)} cell lines, expected {n_cells}")
    data = np.array(rows)
    trailing = (n_slip,) if kind == "slip" else _KIND_TRAILING[kind]
    a = data.reshape(nz, ny, nx, -1).transpose(2, 1, 0, 3)
    a = a.reshape((nx, ny, nz) + trailing)
    return np.ascontiguousarray(a), kind, nx, ny, nz, h, n_slip

"""Independent ground truth for the iteration.

Four unrelated checks live here: a spectral Galerkin reference solver on
the torus (exact assembly, independent linear solve), an FFT multiplier
check of the preconditioner, a quadrature check of the 1D screened
Poisson kernel, and a sampling probe that validates the user's
ellipticity bounds.
"""

import itertools
import math

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .atoms import AtomSum, add, evaluate, scale
from .calculus import apply_elliptic, precondition

TWO_PI = 2.0 * math.pi

# beyond this many unknowns the direct factorization is swapped for CG
DIRECT_SOLVE_LIMIT = 200_000

GRID_DIMENSION_CAP = 3

PROBE_SEED = 15485863


class ProbeFailureError(RuntimeError):
    """The coefficients fail ellipticity or contradict the user's bounds."""


def _max_abs_frequency(s):
    if s.atom_count == 0:
        return 0
    return int(np.max(np.abs(s.frequencies)))


# cos/sin at quarter turns, kept exact: differentiation lands phases on
# these floats bitwise and the parity structure of even problems relies
# on the corresponding coefficients vanishing identically
_QUARTER_PHASES = {
    0.0: (1.0, 0.0),
    0.5 * math.pi: (0.0, 1.0),
    math.pi: (-1.0, 0.0),
    1.5 * math.pi: (0.0, -1.0),
}


def _atom_cos_sin(amplitude, phase):
    # a cos(w.x + b) = (a cos b) cos(w.x) + (-a sin b) sin(w.x)
    quarter = _QUARTER_PHASES.get(phase)
    if quarter is not None:
        return amplitude * quarter[0], -amplitude * quarter[1]
    return amplitude * math.cos(phase), -amplitude * math.sin(phase)


class SpectralField:
    """Truncated Fourier series: cosine/sine amplitude per half-space frequency.

    Frequencies are integer vectors in canonical form (first nonzero
    component positive); `truncation` caps the max-norm of every stored
    frequency.  `residual` is attached by galerkin_solve.
    """

    __slots__ = ("dimension", "truncation", "table", "residual")

    def __init__(self, dimension, truncation, table, residual=None):
        self.dimension = int(dimension)
        self.truncation = int(truncation)
        self.table = dict(table)
        self.residual = residual
        for key in self.table:
            if len(key) != self.dimension:
                raise ValueError(f"frequency {key} has wrong dimension")
            if key and max(abs(v) for v in key) > self.truncation:
                raise ValueError(f"frequency {key} outside truncation {truncation}")

    @classmethod
    def from_atom_sum(cls, s, truncation):
        if not s.torus_mode:
            raise ValueError("spectral fields need torus mode")
        truncation = int(truncation)
        table = {}
        for atom in s.atoms:
            key = tuple(int(round(v)) for v in atom.frequency)
            if key and max(abs(v) for v in key) > truncation:
                raise ValueError(
                    f"frequency {key} outside truncation {truncation}"
                )
            cv, sv = _atom_cos_sin(atom.amplitude, atom.phase)
            old = table.get(key, (0.0, 0.0))
            table[key] = (old[0] + cv, old[1] + sv)
        return cls(s.dimension, truncation, table)

    def to_atom_sum(self):
        atoms = []
        for key in sorted(self.table):
            cv, sv = self.table[key]
            freq = tuple(float(v) for v in key)
            if not any(key):
                atoms.append((cv, freq, 0.0))
                continue
            amp = math.hypot(cv, sv)
            if amp == 0.0:
                continue
            phase = math.atan2(-sv, cv) % TWO_PI
            atoms.append((amp, freq, phase))
        return AtomSum.from_atoms(atoms, dimension=self.dimension, torus_mode=True)

    def h1_norm(self):
        terms = []
        for key, (cv, sv) in self.table.items():
            weight = 1.0 if not any(key) else 0.5
            ksq = float(sum(v * v for v in key))
            terms.append(weight * (cv * cv + sv * sv) * (1.0 + ksq))
        return math.sqrt(math.fsum(terms))


def _half_space_frequencies(dimension, truncation):
    out = []
    for key in itertools.product(range(-truncation, truncation + 1), repeat=dimension):
        nonzero = next((v for v in key if v != 0), 0)
        if nonzero >= 0:
            out.append(key)
    out.sort()
    return out


def default_truncation(p, steps):
    """Smallest per-axis cutoff containing every frequency T steps can reach."""
    return int(math.ceil(p.R_f + steps * max(p.R_A, p.R_c))) + 2


def _coefficient_rows(s, index, truncation):
    """Scatter an atom sum into (row, weighted value) test-function pairs."""
    rows = []
    vals = []
    for atom in s.atoms:
        key = tuple(int(round(v)) for v in atom.frequency)
        if key and max(abs(v) for v in key) > truncation:
            continue  # outside the Galerkin span: untested
        start = index.get(key)
        if start is None:
            continue
        cv, sv = _atom_cos_sin(atom.amplitude, atom.phase)
        if any(key):
            rows.append(start)
            vals.append(0.5 * cv)
            rows.append(start + 1)
            vals.append(0.5 * sv)
        else:
            rows.append(start)
            vals.append(cv)
    return rows, vals


def galerkin_solve(p, truncation):
    """Reference solution of the weak form over frequencies |k|_inf <= K.

    The system is assembled exactly from the atom algebra (products and
    derivatives carry no quadrature error); only the linear solve is
    numeric.  Returns the truncated field with its L2 residual attached.
    """
    if not p.torus_mode:
        raise ValueError("Galerkin reference needs torus mode")
    truncation = int(truncation)
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    if _max_abs_frequency(p.f) > truncation:
        raise ValueError(
            f"truncation {truncation} too small: f has frequencies outside the span"
        )

    d = p.dimension
    freqs = _half_space_frequencies(d, truncation)
    index = {}
    n = 0
    for key in freqs:
        index[key] = n
        n += 2 if any(key) else 1

    rows = []
    cols = []
    vals = []
    for key in freqs:
        start = index[key]
        parts = (0.0,) if not any(key) else (0.0, 1.5 * math.pi)
        for offset, phase in enumerate(parts):
            basis = AtomSum.from_atoms(
                [(1.0, tuple(float(v) for v in key), phase)],
                dimension=d,
                torus_mode=True,
            )
            image = apply_elliptic(p.a_entries, p.c, basis)
            r, v = _coefficient_rows(image, index, truncation)
            rows.extend(r)
            cols.extend([start + offset] * len(r))
            vals.extend(v)

    matrix = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    matrix = (matrix + matrix.T) * 0.5

    rhs = np.zeros(n)
    r, v = _coefficient_rows(p.f, index, truncation)
    rhs[r] = v

    if n <= DIRECT_SOLVE_LIMIT:
        solution = scipy.sparse.linalg.spsolve(matrix.tocsc(), rhs)
    else:
        solution, info = scipy.sparse.linalg.cg(matrix, rhs, rtol=1e-12, atol=0.0)
        if info != 0:
            raise RuntimeError(f"CG failed to converge (info={info})")
    if not np.all(np.isfinite(solution)):
        raise RuntimeError("singular Galerkin system despite verified ellipticity")

    table = {}
    for key in freqs:
        start = index[key]
        if any(key):
            table[key] = (float(solution[start]), float(solution[start + 1]))
        else:
            table[key] = (float(solution[start]), 0.0)

    field = SpectralField(d, truncation, table)
    field.residual = _truncated_l2_residual(p, field)
    return field


def _truncated_l2_residual(p, field):
    image = apply_elliptic(p.a_entries, p.c, field.to_atom_sum())
    diff = add(image, scale(p.f, -1.0))
    terms = []
    for atom in diff.atoms:
        key = tuple(int(round(v)) for v in atom.frequency)
        if key and max(abs(v) for v in key) > field.truncation:
            continue
        a = atom.amplitude
        terms.append(a * a if not any(key) else 0.5 * a * a)
    return math.sqrt(math.fsum(terms))


def h1_distance(u, ref):
    """Exact H1 norm of u minus the reference, coefficient by coefficient.

    Frequencies of u outside the reference truncation contribute their
    full weight to the difference.
    """
    if not u.torus_mode:
        raise ValueError("H1 distance needs torus mode")
    if u.dimension != ref.dimension:
        raise ValueError("dimension mismatch")
    coeffs = {key: list(val) for key, val in ref.table.items()}
    for atom in u.atoms:
        key = tuple(int(round(v)) for v in atom.frequency)
        cv, sv = _atom_cos_sin(atom.amplitude, atom.phase)
        entry = coeffs.setdefault(key, [0.0, 0.0])
        entry[0] = cv - entry[0]
        entry[1] = sv - entry[1]
    terms = []
    for key, entry in coeffs.items():
        cv, sv = entry[0], entry[1]
        weight = 1.0 if not any(key) else 0.5
        ksq = float(sum(v * v for v in key))
        terms.append(weight * (cv * cv + sv * sv) * (1.0 + ksq))
    return math.sqrt(math.fsum(terms))


def _dense_grid(dimension, points_per_axis):
    axis = TWO_PI * np.arange(points_per_axis) / points_per_axis
    mesh = np.meshgrid(*([axis] * dimension), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def fft_precondition_check(s, grid_points_per_axis):
    """Max grid discrepancy between the atomwise and FFT preconditioners."""
    if not s.torus_mode:
        raise ValueError("FFT check needs torus mode")
    d = s.dimension
    if d > GRID_DIMENSION_CAP:
        raise ValueError(f"grid check capped at dimension {GRID_DIMENSION_CAP}")
    n = int(grid_points_per_axis)
    needed = 2 * _max_abs_frequency(s) + 1
    if n < needed:
        raise ValueError(f"grid under-resolved: need at least {needed} points per axis")

    pts = _dense_grid(d, n)
    values = evaluate(s, pts).reshape((n,) * d)
    k_axis = np.rint(np.fft.fftfreq(n) * n)
    k_mesh = np.meshgrid(*([k_axis] * d), indexing="ij")
    multiplier = 1.0 / (1.0 + sum(k * k for k in k_mesh))
    filtered = np.fft.ifftn(np.fft.fftn(values) * multiplier).real

    direct = evaluate(precondition(s), pts).reshape((n,) * d)
    return float(np.max(np.abs(filtered - direct)))


GREEN_NODES_PER_PANEL = 12


def green1d_check(w, quadrature_halfwidth=50.0, n_nodes=4096):
    """Quadrature check that the preconditioner kernel integrates cosines to 1/(1+w^2).

    Integrates (1/2) e^{-|y|} cos(w(0-y)) over [-H, H], folded to [0, H]
    by symmetry, with composite Gauss-Legendre panels.
    """
    w = float(w)
    halfwidth = float(quadrature_halfwidth)
    if halfwidth < 40.0:
        raise ValueError("halfwidth below 40 truncates the kernel visibly")
    panels = max(4, int(n_nodes) // GREEN_NODES_PER_PANEL)
    panel_width = halfwidth / panels
    if abs(w) * panel_width > 3.0:
        raise ValueError("quadrature under-resolved for this oscillation")

    nodes, weights = np.polynomial.legendre.leggauss(GREEN_NODES_PER_PANEL)
    edges = np.linspace(0.0, halfwidth, panels + 1)
    total = []
    for left, right in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (left + right)
        half = 0.5 * (right - left)
        y = mid + half * nodes
        total.append(half * np.dot(weights, np.exp(-y) * np.cos(w * y)))
    integral = math.fsum(total)
    return abs(integral - 1.0 / (1.0 + w * w))


def _extrema_at(p, pts):
    npts = len(pts)
    d = p.dimension
    mat = np.empty((npts, d, d))
    for i in range(d):
        for j in range(d):
            mat[:, i, j] = evaluate(p.a_entries[i][j], pts)
    eigenvalues = np.linalg.eigvalsh(mat)
    c_vals = evaluate(p.c, pts)
    return (
        float(np.min(eigenvalues)),
        float(np.max(eigenvalues)),
        float(np.min(c_vals)),
        float(np.max(c_vals)),
    )


def _merge_extrema(a, b):
    return (min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3]))


def _stable(prev, cur, tol=0.01):
    return all(
        abs(c - q) <= tol * max(abs(q), 1e-12) for c, q in zip(cur, prev)
    )


def ellipticity_probe(p, refinement_limit=6):
    """Sampled extrema of the A(x) eigenvalues and of c(x), checked against the user bounds.

    Dense nested grids up to dimension 3, accumulated random samples
    above; either way the estimates only widen under refinement.
    Raises ProbeFailureError on detected non-ellipticity or when the
    sampled range escapes the user's [lam_min, lam_max].
    """
    if not p.torus_mode:
        raise ValueError("probe needs torus mode")
    limit = max(1, int(refinement_limit))

    if p.dimension <= GRID_DIMENSION_CAP:
        maxfreq = max(
            [_max_abs_frequency(p.c)]
            + [_max_abs_frequency(e) for row in p.a_entries for e in row]
        )
        n = max(3, 2 * maxfreq + 1)
        est = _extrema_at(p, _dense_grid(p.dimension, n))
        for _ in range(limit - 1):
            n *= 2
            refined = _extrema_at(p, _dense_grid(p.dimension, n))
            done = _stable(est, refined)
            est = refined  # doubled grid contains the previous one
            if done:
                break
    else:
        rng = np.random.default_rng(PROBE_SEED)
        batch = 4096
        est = _extrema_at(p, rng.uniform(0.0, TWO_PI, size=(batch, p.dimension)))
        for _ in range(limit - 1):
            batch *= 2
            more = _extrema_at(p, rng.uniform(0.0, TWO_PI, size=(batch, p.dimension)))
            refined = _merge_extrema(est, more)
            done = _stable(est, refined)
            est = refined
            if done:
                break

    a_min_est, a_max_est, c_min_est, c_max_est = est
    if a_min_est <= 0.0 or c_min_est <= 0.0:
        raise ProbeFailureError(
            f"non-elliptic coefficients: sampled a_min={a_min_est!r}, c_min={c_min_est!r}"
        )
    if p.lam_min > min(a_min_est, c_min_est):
        raise ProbeFailureError(
            f"lam_min={p.lam_min!r} exceeds sampled minimum "
            f"{min(a_min_est, c_min_est)!r}"
        )
    if p.lam_max < max(a_max_est, c_max_est):
        raise ProbeFailureError(
            f"lam_max={p.lam_max!r} below sampled maximum "
            f"{max(a_max_est, c_max_est)!r}"
        )
    return est

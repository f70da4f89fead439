"""Clutter point processes: Poisson, cluster (Matern, Thomas), and Gibbs
(hardcore, Strauss) samplers, plus conditioning on the number of points.

Parameter units
---------------
``CSR.count``, ``Matern.kappa``, ``Thomas.kappa``, ``Hardcore.beta`` and
``Strauss.beta`` are expected counts (activities) over the whole sampling
window, not per unit area. ``InhomPoisson.intensity`` is per unit area.
With the default 80 x 80 window this puts every process near 100 points.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ._backend import get_kernels

MH_ITERATIONS = 100_000
MH_P_BIRTH = 0.35
MH_P_DEATH = 0.35
MH_SHIFT_RADIUS = 2.0
DEFAULT_MAX_ATTEMPTS = 10_000


class ConditioningError(RuntimeError):
    """No realization with the requested count within ``max_attempts``."""


@dataclass(frozen=True)
class Window:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError(f"empty window {self}")

    @property
    def area(self):
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)

    def dilate(self, margin):
        return Window(self.x_lo - margin, self.x_hi + margin, self.y_lo - margin, self.y_hi + margin)

    def contains(self, pts):
        pts = np.asarray(pts).reshape(-1, 2)
        return ((pts[:, 0] >= self.x_lo) & (pts[:, 0] <= self.x_hi)
                & (pts[:, 1] >= self.y_lo) & (pts[:, 1] <= self.y_hi))

    def uniform(self, rng, n):
        x = rng.uniform(self.x_lo, self.x_hi, size=n)
        y = rng.uniform(self.y_lo, self.y_hi, size=n)
        return np.column_stack([x, y])


CLUTTER_WINDOW = Window(10.0, 90.0, 10.0, 90.0)


@dataclass
class PointPattern:
    points: np.ndarray
    window: Window

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)

    def __len__(self):
        return len(self.points)


# --- process specifications -------------------------------------------------

@dataclass(frozen=True)
class CSR:
    count: float

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("CSR count must be nonnegative")


def inhom_intensity_default(x, y):
    """Per-unit-area intensity rising toward the bottom of the field (small y)."""
    return 0.037 * np.exp((10.0 - np.asarray(y, dtype=np.float64)) / 40.0)


@dataclass(frozen=True)
class InhomPoisson:
    intensity: Callable = inhom_intensity_default
    lambda_max: Optional[float] = None


@dataclass(frozen=True)
class Matern:
    kappa: float
    mu: float
    radius: float

    def __post_init__(self):
        if not (self.kappa > 0 and self.mu > 0 and self.radius > 0):
            raise ValueError("Matern parameters must be positive")


@dataclass(frozen=True)
class Thomas:
    kappa: float
    mu: float
    sigma: float
    reach: float = 4.0  # parents are sampled this many sigmas beyond the window

    def __post_init__(self):
        if not (self.kappa > 0 and self.mu > 0 and self.sigma > 0):
            raise ValueError("Thomas parameters must be positive")


@dataclass(frozen=True)
class Hardcore:
    beta: float
    d: float

    def __post_init__(self):
        if not (self.beta > 0 and self.d > 0):
            raise ValueError("hardcore parameters must be positive")


@dataclass(frozen=True)
class Strauss:
    beta: float
    d: float
    gamma: float

    def __post_init__(self):
        if not (self.beta > 0 and self.d > 0):
            raise ValueError("Strauss beta and d must be positive")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("Strauss gamma must lie in [0, 1]")


STANDARD_PROCESSES = {
    "CSR": CSR(100),
    "IP": InhomPoisson(),
    "M": Matern(10, 10, 10),
    "T": Thomas(10, 10, 5),
    "HC": Hardcore(100, 5),
    "S": Strauss(100, 5, 0.5),
}
CLUTTER_TYPES = tuple(STANDARD_PROCESSES)


def _intensity_bound(spec, window):
    if spec.lambda_max is not None:
        return float(spec.lambda_max)
    xs = np.linspace(window.x_lo, window.x_hi, 101)
    ys = np.linspace(window.y_lo, window.y_hi, 101)
    gx, gy = np.meshgrid(xs, ys)
    return float(np.max(np.broadcast_to(spec.intensity(gx, gy), gx.shape)))


def _cluster(rng, window, kappa, mu, reach, offsets):
    parent_window = window.dilate(reach)
    n_par = rng.poisson(kappa * parent_window.area / window.area)
    parents = parent_window.uniform(rng, n_par)
    n_child = rng.poisson(mu, size=n_par)
    centres = np.repeat(parents, n_child, axis=0)
    pts = centres + offsets(rng, len(centres))
    return pts[window.contains(pts)]


def _disk_offsets(radius):
    def draw(rng, n):
        r = radius * np.sqrt(rng.random(n))
        a = 2.0 * np.pi * rng.random(n)
        return np.column_stack([r * np.cos(a), r * np.sin(a)])
    return draw


def _gauss_offsets(sigma):
    def draw(rng, n):
        return rng.normal(0.0, sigma, size=(n, 2))
    return draw


def _gibbs_params(spec):
    if isinstance(spec, Hardcore):
        return spec.beta, 0.0, spec.d
    return spec.beta, spec.gamma, spec.d


def sample(spec, window=CLUTTER_WINDOW, rng=None, n_iter=MH_ITERATIONS, backend=None):
    """Draw one realization of ``spec`` observed in ``window``."""
    rng = np.random.default_rng() if rng is None else rng
    if isinstance(spec, Strauss) and spec.gamma == 1.0:
        spec = CSR(spec.beta)
    elif isinstance(spec, Strauss) and spec.gamma == 0.0:
        spec = Hardcore(spec.beta, spec.d)

    if isinstance(spec, CSR):
        pts = window.uniform(rng, rng.poisson(spec.count))
    elif isinstance(spec, InhomPoisson):
        lam = _intensity_bound(spec, window)
        cand = window.uniform(rng, rng.poisson(lam * window.area))
        keep = rng.random(len(cand)) * lam < spec.intensity(cand[:, 0], cand[:, 1])
        pts = cand[keep]
    elif isinstance(spec, Matern):
        pts = _cluster(rng, window, spec.kappa, spec.mu, spec.radius, _disk_offsets(spec.radius))
    elif isinstance(spec, Thomas):
        pts = _cluster(rng, window, spec.kappa, spec.mu, spec.reach * spec.sigma, _gauss_offsets(spec.sigma))
    elif isinstance(spec, (Hardcore, Strauss)):
        beta, gamma, d = _gibbs_params(spec)
        u = rng.random((n_iter, 5))
        pts = get_kernels(backend).gibbs_birth_death_move(
            np.zeros((0, 2)), u, float(beta), float(gamma), float(d),
            window.x_lo, window.x_hi, window.y_lo, window.y_hi,
            MH_P_BIRTH, MH_P_DEATH, MH_SHIFT_RADIUS)
    else:
        raise TypeError(f"unknown process specification {spec!r}")
    return PointPattern(pts, window)


def _hardcore_start(rng, window, n, d, max_tries):
    # random sequential placement gives a legal starting state for the chain
    pts = np.empty((n, 2))
    k = 0
    d2 = d * d
    for _ in range(max_tries):
        if k == n:
            break
        p = window.uniform(rng, 1)[0]
        if k == 0 or np.min(np.sum((pts[:k] - p) ** 2, axis=1)) >= d2:
            pts[k] = p
            k += 1
    if k < n:
        return None
    return pts


def sample_fixed_count_gibbs(spec, window, n, rng, n_iter=MH_ITERATIONS, backend=None,
                             max_attempts=DEFAULT_MAX_ATTEMPTS):
    """Gibbs process conditioned on exactly ``n`` points via a shift-only chain.

    Given the count, the Gibbs density no longer depends on ``beta``, so the
    chain targets the same law as rejection on the count.
    """
    _, gamma, d = _gibbs_params(spec)
    if gamma == 0.0:
        pts = None
        for _ in range(max(1, max_attempts // 1000)):
            pts = _hardcore_start(rng, window, n, d, 1000 * n)
            if pts is not None:
                break
        if pts is None:
            raise ConditioningError(f"could not place {n} points of {spec!r} with spacing {d}")
    else:
        pts = window.uniform(rng, n)
    pts = np.ascontiguousarray(pts)
    u = rng.random((n_iter, 4))
    get_kernels(backend).gibbs_fixed_n(pts, u, float(gamma), float(d),
                                       window.x_lo, window.x_hi, window.y_lo, window.y_hi,
                                       MH_SHIFT_RADIUS)
    return PointPattern(pts, window)


def sample_conditioned(spec, window=CLUTTER_WINDOW, n=100, rng=None,
                       max_attempts=DEFAULT_MAX_ATTEMPTS, n_iter=MH_ITERATIONS,
                       backend=None, gibbs_method="fixed_n"):
    """Realization of ``spec`` with exactly ``n`` points.

    Poisson and cluster processes are resampled until the count matches.
    CSR given its count is ``n`` i.i.d. uniform points, drawn directly.
    Gibbs processes use the fixed-count chain by default; pass
    ``gibbs_method="rejection"`` to resample full birth/death chains instead.
    """
    rng = np.random.default_rng() if rng is None else rng
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return PointPattern(np.zeros((0, 2)), window)
    if isinstance(spec, Strauss) and spec.gamma == 1.0:
        spec = CSR(spec.beta)
    if isinstance(spec, CSR):
        return PointPattern(window.uniform(rng, n), window)
    if isinstance(spec, (Hardcore, Strauss)) and gibbs_method == "fixed_n":
        return sample_fixed_count_gibbs(spec, window, n, rng, n_iter, backend, max_attempts)
    if gibbs_method not in ("fixed_n", "rejection"):
        raise ValueError(f"unknown gibbs_method {gibbs_method!r}")
    for _ in range(max_attempts):
        pat = sample(spec, window, rng, n_iter, backend)
        if len(pat) == n:
            return pat
    raise ConditioningError(f"{spec!r}: no realization with exactly {n} points in {max_attempts} attempts")


# --- pattern files ----------------------------------------------------------

def write_pattern(pattern, path, comments=()):
    w = pattern.window
    lines = [f"# window {w.x_lo!r} {w.x_hi!r} {w.y_lo!r} {w.y_hi!r}"]
    lines += [f"# {c}" for c in comments]
    lines.append("x,y")
    lines += [f"{x!r},{y!r}" for x, y in pattern.points.tolist()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pattern(path):
    window = None
    rows = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "window" and len(parts) == 5:
                window = Window(*map(float, parts[1:]))
            continue
        if line == "x,y":
            continue
        try:
            x, y = (float(v) for v in line.split(","))
        except ValueError:
            raise ValueError(f"line {lineno}: expected 'x,y', got {line!r}") from None
        rows.append((x, y))
    if window is None:
        raise ValueError(f"{path}: missing '# window' header")
    return PointPattern(np.array(rows, dtype=np.float64).reshape(-1, 2), window)


def nearest_neighbor_distances(points):
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 2:
        return np.zeros(0)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


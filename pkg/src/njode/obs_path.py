"""Data model for irregularly and partially observed paths.

A sample consists of the fully simulated ground-truth path on a fixed time
grid plus the observation schedule: a strictly increasing list of observation
times (always containing t = 0), the observed values and a {0,1} mask per
observation saying which coordinates were revealed.

The model never sees the ground truth between observations.  What it consumes
is the continuous piecewise-linear interpolation of the revealed values: each
coordinate forward-fills its last observed value and, instead of jumping at
the next observation of that coordinate, ramps linearly from the observation
event immediately preceding it.  This is deliberately not a purely
coordinate-wise interpolation; the ramp anchors at the previous observation
event even when this coordinate was not revealed there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TIME_TOL = 1e-12

DATASET_MAGIC = "# njode-dataset v1 "


@dataclass
class ObservedPath:
    """One sample: ground-truth grid path plus its observation schedule.

    Fields
    ------
    dim: number of path coordinates.
    horizon: terminal time T > 0.
    grid_times: sorted simulation grid in [0, T].
    grid_values: (len(grid_times), dim) ground-truth values.
    obs_times: strictly increasing observation times, obs_times[0] = 0.
    obs_values: (n_obs, dim) values at observation times; only entries with
        mask 1 are meaningful.
    masks: (n_obs, dim) array of {0,1}; every mask after the first has at
        least one 1.  The mask at t = 0 encodes the initial regime: all ones
        (fully observed start), all zeros (nothing revealed at 0) or a fixed
        subset shared by the whole dataset.
    """

    dim: int
    horizon: float
    grid_times: np.ndarray
    grid_values: np.ndarray
    obs_times: np.ndarray
    obs_values: np.ndarray
    masks: np.ndarray

    def __post_init__(self):
        self.grid_times = np.asarray(self.grid_times, dtype=np.float64)
        self.grid_values = np.asarray(self.grid_values, dtype=np.float64)
        self.obs_times = np.asarray(self.obs_times, dtype=np.float64)
        self.obs_values = np.asarray(self.obs_values, dtype=np.float64)
        self.masks = np.asarray(self.masks)
        if self.grid_values.ndim == 1:
            self.grid_values = self.grid_values[:, None]
        if self.obs_values.ndim == 1:
            self.obs_values = self.obs_values[:, None]
        if self.masks.ndim == 1:
            self.masks = self.masks[:, None]

    @property
    def n_obs(self) -> int:
        """Number of observation events, the one at t = 0 included."""
        return len(self.obs_times)

    def initial_regime(self) -> str:
        """'full', 'empty' or 'subset' according to the mask at t = 0."""
        m0 = self.masks[0]
        if np.all(m0 == 1):
            return "full"
        if np.all(m0 == 0):
            return "empty"
        return "subset"


@dataclass
class InterpolatedPath:
    """Continuous piecewise-linear view of the observations up to a cutoff.

    Per coordinate a list of (knot time, knot value) pairs; evaluation is
    linear between knots and constant outside.  Coordinates never observed up
    to the cutoff are the constant-zero path.
    """

    dim: int
    cutoff: float
    knot_times: list  # per coordinate, 1-D float arrays
    knot_values: list

    def coord_values(self, coord: int, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=np.float64))
        return np.interp(t, self.knot_times[coord], self.knot_values[coord])

    def values(self, times) -> np.ndarray:
        """Evaluate all coordinates, result shape (len(times), dim)."""
        t = np.atleast_1d(np.asarray(times, dtype=np.float64))
        out = np.empty((len(t), self.dim))
        for j in range(self.dim):
            out[:, j] = self.coord_values(j, t)
        return out

    def skeleton(self):
        """Union piecewise-linear skeleton (times, values).

        Returns the sorted union of all knot times with the path evaluated
        there; between consecutive union knots every coordinate is affine,
        which is what the signature fold consumes.
        """
        union = np.unique(np.concatenate([np.asarray(k) for k in self.knot_times]))
        return union, self.values(union)


@dataclass
class ValidityReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def last_obs_time(path: ObservedPath, t: float) -> float:
    """Time of the most recent observation at or before t.

    Right-continuous piecewise-constant in t; equals 0 for t before the first
    post-zero observation.
    """
    if t < -TIME_TOL or t > path.horizon + TIME_TOL:
        raise ValueError(f"query time {t} outside [0, {path.horizon}]")
    idx = int(np.searchsorted(path.obs_times, t + TIME_TOL, side="left")) - 1
    if idx < 0:
        idx = 0
    return float(path.obs_times[idx])


def interpolate(path: ObservedPath, cutoff: float) -> InterpolatedPath:
    """Continuous interpolation of all observations at times <= cutoff.

    Consistency: enlarging the cutoff never changes the path on [0, tau(t)]
    for the smaller cutoff, because a coordinate's ramp toward an observation
    starts only at the observation event immediately preceding it.
    """
    if cutoff < -TIME_TOL or cutoff > path.horizon + TIME_TOL:
        raise ValueError(f"cutoff {cutoff} outside [0, {path.horizon}]")
    n_in = int(np.searchsorted(path.obs_times, cutoff + TIME_TOL, side="left"))
    times = path.obs_times[:n_in]
    knot_times, knot_values = [], []
    for j in range(path.dim):
        seen = [k for k in range(n_in) if path.masks[k, j]]
        if not seen:
            # never revealed up to the cutoff: constant-zero convention
            knot_times.append(np.array([0.0]))
            knot_values.append(np.array([0.0]))
            continue
        kt, kv = [], []
        if seen[0] == 0:
            prev = float(path.obs_values[0, j])
            kt.append(0.0)
            kv.append(prev)
            rest = seen[1:]
        else:
            prev = 0.0
            kt.append(0.0)
            kv.append(0.0)
            rest = seen
        for k in rest:
            ramp_start = float(times[k - 1])
            if ramp_start > kt[-1] + TIME_TOL:
                kt.append(ramp_start)
                kv.append(prev)
            prev = float(path.obs_values[k, j])
            kt.append(float(times[k]))
            kv.append(prev)
        if cutoff > kt[-1] + TIME_TOL:
            kt.append(float(cutoff))
            kv.append(prev)
        knot_times.append(np.asarray(kt))
        knot_values.append(np.asarray(kv))
    return InterpolatedPath(path.dim, float(cutoff), knot_times, knot_values)


def validate(path: ObservedPath) -> ValidityReport:
    """Check the structural invariants; returns a report, never raises."""
    rep = ValidityReport()
    if path.dim < 1:
        rep.violations.append("dim must be positive")
    if not path.horizon > 0:
        rep.violations.append("horizon must be positive")
    if path.grid_values.shape != (len(path.grid_times), path.dim):
        rep.violations.append("grid_values shape mismatch")
    if np.any(np.diff(path.grid_times) <= 0):
        rep.violations.append("grid_times not strictly increasing")
    if len(path.obs_times) == 0 or abs(path.obs_times[0]) > TIME_TOL:
        rep.violations.append("first observation time must be 0")
    if np.any(np.diff(path.obs_times) <= 0):
        rep.violations.append("obs_times not strictly increasing")
    if path.obs_values.shape != (len(path.obs_times), path.dim):
        rep.violations.append("obs_values shape mismatch")
    if path.masks.shape != (len(path.obs_times), path.dim):
        rep.violations.append("masks shape mismatch")
        return rep
    if not np.all(np.isin(path.masks, (0, 1))):
        rep.violations.append("masks must be 0/1")
    for k in range(1, len(path.obs_times)):
        if not np.any(path.masks[k]):
            rep.violations.append(f"empty mask at observation {k}")
    if not (np.isfinite(path.grid_values).all() and np.isfinite(path.obs_values).all()):
        rep.violations.append("non-finite values")
    # observation times must sit on the simulation grid
    pos = np.searchsorted(path.grid_times, path.obs_times)
    pos = np.clip(pos, 0, len(path.grid_times) - 1)
    left = np.clip(pos - 1, 0, None)
    on_grid = (np.abs(path.grid_times[pos] - path.obs_times) <= TIME_TOL) | (
        np.abs(path.grid_times[left] - path.obs_times) <= TIME_TOL
    )
    if not np.all(on_grid):
        rep.violations.append("observation time off the simulation grid")
        return rep
    grid_idx = np.where(
        np.abs(path.grid_times[pos] - path.obs_times) <= TIME_TOL, pos, left
    )
    for k, gi in enumerate(grid_idx):
        for j in range(path.dim):
            if path.masks[k, j] and not np.isclose(
                path.obs_values[k, j], path.grid_values[gi, j], rtol=0, atol=1e-9
            ):
                rep.violations.append(
                    f"observed value disagrees with grid at obs {k}, coord {j}"
                )
    return rep


class PathDataset:
    """Dense batch of samples sharing one simulation grid.

    values has shape (n_samples, n_grid, dim); obs_masks the same shape with
    {0,1} entries, an all-zero row meaning no observation at that grid point.
    `meta` holds the header record (dim, horizon, grid step, generator name
    and parameters, seed).
    """

    def __init__(self, grid_times, values, obs_masks, meta):
        self.grid_times = np.asarray(grid_times, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        self.obs_masks = np.asarray(obs_masks, dtype=np.uint8)
        if self.values.ndim == 2:
            self.values = self.values[:, :, None]
        if self.obs_masks.ndim == 2:
            self.obs_masks = self.obs_masks[:, :, None]
        self.meta = dict(meta)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    @property
    def horizon(self) -> float:
        return float(self.grid_times[-1])

    def obs_grid_indices(self, i: int) -> np.ndarray:
        """Grid indices holding an observation event for sample i."""
        hit = self.obs_masks[i].any(axis=1)
        hit[0] = True  # t = 0 is always an observation event
        return np.nonzero(hit)[0]

    def path(self, i: int) -> ObservedPath:
        idx = self.obs_grid_indices(i)
        return ObservedPath(
            dim=self.dim,
            horizon=self.horizon,
            grid_times=self.grid_times,
            grid_values=self.values[i],
            obs_times=self.grid_times[idx],
            obs_values=self.values[i][idx],
            masks=self.obs_masks[i][idx],
        )

    def subset(self, indices) -> "PathDataset":
        indices = np.asarray(indices)
        return PathDataset(
            self.grid_times, self.values[indices], self.obs_masks[indices], self.meta
        )

    def split(self, train_frac: float = 0.8):
        """Leading train_frac of samples for training, the rest for testing."""
        n_train = int(round(self.n_samples * train_frac))
        return self.subset(np.arange(n_train)), self.subset(
            np.arange(n_train, self.n_samples)
        )


def save_dataset(ds: PathDataset, path: str) -> None:
    """Write a dataset as flat CSV with a JSON header line.

    Floats are written with repr, which round-trips float64 exactly, so
    save -> load -> save reproduces the file byte for byte.
    """
    header = dict(ds.meta)
    header["n_samples"] = ds.n_samples
    header["n_grid"] = len(ds.grid_times)
    header["dim"] = ds.dim
    with open(path, "w") as fh:
        fh.write(DATASET_MAGIC + json.dumps(header, sort_keys=True) + "\n")
        cols = ["sample", "grid_index"]
        cols += [f"m{j}" for j in range(ds.dim)]
        cols += [f"v{j}" for j in range(ds.dim)]
        fh.write(",".join(cols) + "\n")
        for i in range(ds.n_samples):
            vals = ds.values[i]
            msk = ds.obs_masks[i]
            for g in range(len(ds.grid_times)):
                row = [str(i), str(g)]
                row += [str(int(m)) for m in msk[g]]
                row += [repr(float(v)) for v in vals[g]]
                fh.write(",".join(row) + "\n")


def load_dataset(path: str) -> PathDataset:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith(DATASET_MAGIC):
            raise ValueError(f"{path} is not a dataset file")
        meta = json.loads(first[len(DATASET_MAGIC):])
        n, k, d = meta.pop("n_samples"), meta.pop("n_grid"), meta["dim"]
        fh.readline()  # column header
        values = np.empty((n, k, d))
        masks = np.empty((n, k, d), dtype=np.uint8)
        for line in fh:
            parts = line.rstrip("\n").split(",")
            i, g = int(parts[0]), int(parts[1])
            masks[i, g] = [int(x) for x in parts[2 : 2 + d]]
            values[i, g] = [float(x) for x in parts[2 + d :]]
    step = meta["grid_step"]
    grid = np.arange(k, dtype=np.float64) * step
    return PathDataset(grid, values, masks, meta)

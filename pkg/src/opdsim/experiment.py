"""Factorial Monte Carlo harness: clutter type x obstacle window x obstacle count.

For each clutter type ``i`` and replicate ``l`` one clutter realization is
drawn and shared by every (window, count) combination at that (i, l);
obstacles and marks are drawn afresh per record. All randomness flows from
seeds derived by hashing ``root_seed`` with the record key, so results do
not depend on scheduling or on which records were already on disk.
"""

from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
import csv
import hashlib
import itertools
import logging
from pathlib import Path

import numpy as np

from .ard import Unreachable, navigate
from .lattice import LatticeSpec
from .placement import OBSTACLE_COUNTS, WINDOW_CODES, PlacementSpec, make_window, sample_obstacles
from .pointproc import CLUTTER_TYPES, CLUTTER_WINDOW, MH_ITERATIONS, STANDARD_PROCESSES, ConditioningError, sample_conditioned
from .scene import DEFAULT_COST, DEFAULT_RADIUS, MarkModel, Scene, assign_marks

log = logging.getLogger(__name__)

RESULTS_VERSION = 1
RESULT_FIELDS = ["clutter_type", "window", "n_obstacles", "replicate", "length", "n_disamb",
                 "clutter_seed", "obstacle_seed", "mark_seed"]
ERROR_FIELDS = ["clutter_type", "window", "n_obstacles", "replicate", "kind", "message"]


class ExperimentError(RuntimeError):
    pass


class ReplayError(ExperimentError):
    pass


def derive_seed(*parts):
    """63-bit seed from a hash of ``parts`` (stable across runs and platforms)."""
    h = hashlib.blake2b(repr(parts).encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "little") & ((1 << 63) - 1)


@dataclass(frozen=True, order=True)
class TreatmentCombo:
    """1-based factor levels: clutter type, obstacle window, obstacle count."""

    clutter_type: int
    window_index: int
    n_obstacles_level: int

    def __post_init__(self):
        if not 1 <= self.clutter_type <= len(CLUTTER_TYPES):
            raise ValueError(f"clutter_type level {self.clutter_type} outside 1..{len(CLUTTER_TYPES)}")
        if not 1 <= self.window_index <= len(WINDOW_CODES):
            raise ValueError(f"window level {self.window_index} outside 1..{len(WINDOW_CODES)}")
        if not 1 <= self.n_obstacles_level <= len(OBSTACLE_COUNTS):
            raise ValueError(f"obstacle-count level {self.n_obstacles_level} outside 1..{len(OBSTACLE_COUNTS)}")

    @classmethod
    def from_names(cls, clutter, window, n_obstacles):
        try:
            return cls(CLUTTER_TYPES.index(clutter) + 1, WINDOW_CODES.index(window) + 1,
                       OBSTACLE_COUNTS.index(int(n_obstacles)) + 1)
        except ValueError:
            raise ValueError(f"unknown treatment ({clutter}, {window}, {n_obstacles})") from None

    @property
    def clutter_name(self):
        return CLUTTER_TYPES[self.clutter_type - 1]

    @property
    def window_code(self):
        return WINDOW_CODES[self.window_index - 1]

    @property
    def n_obstacles(self):
        return OBSTACLE_COUNTS[self.n_obstacles_level - 1]

    def __str__(self):
        return f"{self.clutter_name}/{self.window_code}:{self.n_obstacles}"


def all_combos(clutter_types=CLUTTER_TYPES, windows=WINDOW_CODES, counts=OBSTACLE_COUNTS):
    return tuple(TreatmentCombo.from_names(c, w, n) for c, w, n in itertools.product(clutter_types, windows, counts))


@dataclass(frozen=True)
class ExperimentConfig:
    combos: tuple
    replications: int = 100
    root_seed: int = 0
    lattice: tuple = (100, 100)
    s: tuple = (50, 100)
    t: tuple = (50, 1)
    radius: float = DEFAULT_RADIUS
    cost: float = DEFAULT_COST
    n_clutter: int = 100
    mark_model: MarkModel = field(default_factory=MarkModel)
    reuse_clutter: bool = True
    penalty_rule: str = "boundary"
    mh_iterations: int = MH_ITERATIONS

    def __post_init__(self):
        object.__setattr__(self, "combos", tuple(sorted(set(self.combos))))
        if not self.combos:
            raise ValueError("combos must be nonempty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.n_clutter < 0:
            raise ValueError("n_clutter must be >= 0")
        LatticeSpec(*self.lattice)

    def fingerprint(self):
        """Short hash of every setting that affects results, except the combo subset."""
        key = (RESULTS_VERSION, self.root_seed, tuple(self.lattice), tuple(self.s), tuple(self.t),
               self.radius, self.cost, self.n_clutter, self.mark_model.clutter, self.mark_model.obstacle,
               self.reuse_clutter, self.penalty_rule, self.mh_iterations)
        return f"{derive_seed(*key):016x}"


@dataclass(frozen=True)
class ExperimentRecord:
    combo: TreatmentCombo
    replicate: int
    traversal_length: float
    n_disambiguations: int
    clutter_seed: int
    obstacle_seed: int
    mark_seed: int

    @property
    def key(self):
        return (self.combo, self.replicate)

    def row(self):
        c = self.combo
        return [c.clutter_name, c.window_code, c.n_obstacles, self.replicate, repr(self.traversal_length),
                self.n_disambiguations, self.clutter_seed, self.obstacle_seed, self.mark_seed]


@dataclass(frozen=True)
class RecordError:
    combo: TreatmentCombo
    replicate: int
    kind: str
    message: str

    @property
    def key(self):
        return (self.combo, self.replicate)

    def row(self):
        c = self.combo
        return [c.clutter_name, c.window_code, c.n_obstacles, self.replicate, self.kind, self.message]


# --- seeds ------------------------------------------------------------------

def clutter_seed(config, combo, replicate):
    if config.reuse_clutter:
        return derive_seed(config.root_seed, "clutter", combo.clutter_type, replicate)
    return derive_seed(config.root_seed, "clutter", combo.clutter_type, combo.window_index,
                       combo.n_obstacles_level, replicate)


def record_seeds(config, combo, replicate):
    ijk = (combo.clutter_type, combo.window_index, combo.n_obstacles_level)
    return (clutter_seed(config, combo, replicate),
            derive_seed(config.root_seed, "obst", *ijk, replicate),
            derive_seed(config.root_seed, "mark", *ijk, replicate))


# --- single simulation --------------------------------------------------------

def sample_clutter(config, clutter_type, seed):
    spec = STANDARD_PROCESSES[CLUTTER_TYPES[clutter_type - 1]]
    rng = np.random.default_rng(seed)
    return sample_conditioned(spec, CLUTTER_WINDOW, config.n_clutter, rng, n_iter=config.mh_iterations).points


def build_scene(config, combo, clutter_points, obstacle_seed, mark_seed):
    spec = PlacementSpec(make_window(combo.window_code), combo.n_obstacles)
    obstacles = sample_obstacles(spec, np.random.default_rng(obstacle_seed)).points
    disks = assign_marks(clutter_points, obstacles, config.mark_model, np.random.default_rng(mark_seed),
                         config.radius)
    return Scene(LatticeSpec(*config.lattice), config.s, config.t, disks, config.cost)


def simulate(config, combo, replicate, clutter_points, seeds):
    scene = build_scene(config, combo, clutter_points, seeds[1], seeds[2])
    result = navigate(scene, penalty_rule=config.penalty_rule)
    return ExperimentRecord(combo, replicate, result.total_length, result.n_disambiguations, *seeds)


def _run_group(config, combos, replicate):
    """All ``combos`` sharing one clutter realization; returns (records, errors)."""
    records, errors = [], []
    clutter_cache = {}
    for combo in combos:
        seeds = record_seeds(config, combo, replicate)
        try:
            if seeds[0] not in clutter_cache:
                clutter_cache[seeds[0]] = sample_clutter(config, combo.clutter_type, seeds[0])
            records.append(simulate(config, combo, replicate, clutter_cache[seeds[0]], seeds))
        except ConditioningError as exc:
            errors.append(RecordError(combo, replicate, "conditioning", str(exc)))
        except Unreachable as exc:
            errors.append(RecordError(combo, replicate, "unreachable", str(exc)))
        except ValueError as exc:
            errors.append(RecordError(combo, replicate, "scene", str(exc)))
    return records, errors


def _groups(config, skip):
    by_type = {}
    for combo in config.combos:
        by_type.setdefault(combo.clutter_type, []).append(combo)
    for i in sorted(by_type):
        for replicate in range(1, config.replications + 1):
            todo = [c for c in by_type[i] if (c, replicate) not in skip]
            if todo:
                yield todo, replicate


# --- results files --------------------------------------------------------------

def _header_comment(config):
    return f"# opdsim results v{RESULTS_VERSION} root_seed={config.root_seed} config={config.fingerprint()}"


def error_path(path):
    path = Path(path)
    return path.with_name(path.name + ".errors")


def _parse_header_comment(line):
    parts = dict(p.split("=", 1) for p in line[1:].split() if "=" in p)
    version = line.split()[3] if len(line.split()) > 3 else ""
    return version, parts


def read_records(path):
    """Records from a results file; also returns the header comment fields."""
    records = []
    meta = {}
    with open(path, newline="", encoding="utf-8") as fh:
        header = None
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                version, parts = _parse_header_comment(line)
                meta.update(parts, version=version)
                continue
            cells = next(csv.reader([line]))
            if header is None:
                if cells != RESULT_FIELDS:
                    raise ExperimentError(f"{path}:{lineno}: unexpected header {line!r}")
                header = cells
                continue
            if len(cells) != len(RESULT_FIELDS):
                raise ExperimentError(f"{path}:{lineno}: expected {len(RESULT_FIELDS)} fields")
            try:
                combo = TreatmentCombo.from_names(cells[0], cells[1], cells[2])
                records.append(ExperimentRecord(combo, int(cells[3]), float(cells[4]), int(cells[5]),
                                                int(cells[6]), int(cells[7]), int(cells[8])))
            except ValueError as exc:
                raise ExperimentError(f"{path}:{lineno}: {exc}") from None
    if header is None:
        raise ExperimentError(f"{path}: missing header line")
    return records, meta


def _read_error_keys(path):
    keys = set()
    if not path.exists():
        return keys
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(line for line in fh if not line.startswith("#")):
            if row == ERROR_FIELDS or not row:
                continue
            keys.add((TreatmentCombo.from_names(*row[:3]), int(row[3])))
    return keys


class _Sink:
    """Appends rows to the results and error files as groups complete."""

    def __init__(self, config, path, resume):
        self.path = Path(path)
        self.err_path = error_path(path)
        self.done = set()
        if resume and self.path.exists():
            records, meta = read_records(self.path)
            if meta.get("config") != config.fingerprint():
                raise ExperimentError(
                    f"{self.path}: written with config {meta.get('config')}, not {config.fingerprint()}; "
                    "refusing to resume into it")
            self.done = {r.key for r in records}
            self.done |= _read_error_keys(self.err_path)
            self.fh = open(self.path, "a", newline="", encoding="utf-8")
        else:
            self.fh = open(self.path, "w", newline="", encoding="utf-8")
            self.fh.write(_header_comment(config) + "\n")
            self.fh.write(",".join(RESULT_FIELDS) + "\n")
            if self.err_path.exists():
                self.err_path.unlink()
        self.writer = csv.writer(self.fh, lineterminator="\n")
        self.err_fh = None

    def add(self, records, errors):
        for r in records:
            self.writer.writerow(r.row())
        self.fh.flush()
        if errors:
            if self.err_fh is None:
                fresh = not self.err_path.exists()
                self.err_fh = open(self.err_path, "a", newline="", encoding="utf-8")
                if fresh:
                    self.err_fh.write(",".join(ERROR_FIELDS) + "\n")
            w = csv.writer(self.err_fh, lineterminator="\n")
            for e in errors:
                w.writerow(e.row())
            self.err_fh.flush()

    def close(self):
        self.fh.close()
        if self.err_fh is not None:
            self.err_fh.close()


@dataclass
class RunOutcome:
    records: list
    errors: list
    skipped: int = 0


def run_detailed(config, jobs=1, out=None, resume=False, progress=None):
    """Run the design; with ``out`` set, rows are appended there as they finish.

    ``resume`` skips (combo, replicate) keys already present in ``out`` (or in
    its error file). ``progress`` is called with the number of finished groups.
    """
    sink = _Sink(config, out, resume) if out is not None else None
    skip = sink.done if sink is not None else set()
    groups = list(_groups(config, skip))
    outcome = RunOutcome([], [], skipped=len(skip))
    try:
        if jobs <= 1:
            results = (_run_group(config, combos, rep) for combos, rep in groups)
            for n, (recs, errs) in enumerate(results, start=1):
                _collect(outcome, sink, recs, errs, progress, n)
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_run_group, config, combos, rep) for combos, rep in groups]
                for n, fut in enumerate(as_completed(futures), start=1):
                    recs, errs = fut.result()
                    _collect(outcome, sink, recs, errs, progress, n)
    finally:
        if sink is not None:
            sink.close()
    for e in outcome.errors:
        log.warning("%s replicate %d: %s (%s)", e.combo, e.replicate, e.kind, e.message)
    return outcome


def _collect(outcome, sink, recs, errs, progress, n):
    outcome.records.extend(recs)
    outcome.errors.extend(errs)
    if sink is not None:
        sink.add(recs, errs)
    if progress is not None:
        progress(n)


def run(config, jobs=1, out=None, resume=False):
    """Records of every (combo, replicate), sorted by key; failures are logged and omitted."""
    return sorted(run_detailed(config, jobs, out, resume).records, key=lambda r: r.key)


def replay(record, config):
    """Re-run one record from its stored seeds; raises ReplayError on any mismatch."""
    if None in (record.clutter_seed, record.obstacle_seed, record.mark_seed):
        raise ReplayError("record lacks seeds")
    expected = clutter_seed(config, record.combo, record.replicate)
    if record.clutter_seed != expected:
        raise ReplayError(
            f"clutter seed {record.clutter_seed} does not derive from root seed {config.root_seed}; "
            "wrong config or results version")
    clutter = sample_clutter(config, record.combo.clutter_type, record.clutter_seed)
    scene = build_scene(config, record.combo, clutter, record.obstacle_seed, record.mark_seed)
    return navigate(scene, penalty_rule=config.penalty_rule)


def with_seed(config, root_seed):
    return replace(config, root_seed=root_seed)

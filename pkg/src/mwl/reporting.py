"""Run configuration, check records, and deterministic report emission.

Reports are JSON documents plus RFC-4180 CSV tables; all floats are written
with 17 significant digits and no timestamps, so identical (config, seed)
runs produce byte-identical files.
"""

import hashlib
import json
import os
import platform
import sys

import numpy as np

__all__ = [
    "RunConfig",
    "Check",
    "Report",
    "fmt",
    "write_csv",
    "worker_count",
    "parallel_map",
]


def fmt(x):
    """Canonical 17-significant-digit decimal rendering."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_of(obj):
    return hashlib.sha256(_canonical(obj).encode()).hexdigest()


DEFAULTS = {
    "seed": 0,
    "domain": {"N": 256, "length": 1.0},
    "theta_list": [0.25, 0.5, 0.75],
    "p_values": [1.5, 2.0, 3.0],
    "recipes": [
        {"name": "identity", "recipe": "identity", "n": 2},
        {"name": "commuting", "recipe": "commuting", "n": 2},
        {"name": "rotating", "recipe": "rotating"},
        {"name": "scalar_a2", "recipe": "scalar_a2"},
    ],
    "sizes": {
        "spectral_pairs": 200,
        "commuting_pairs": 50,
        "log_convexity_samples": 2000,
        "exactness_tuples": 12,
        "exactness_N": 128,
        "random_functions": 20,
        "resolutions": [256, 512, 1024],
        "charact_orders": 6,
        "t_grid_points": 241,
        "fine_grid_points": 961,
    },
}


class RunConfig:
    """Seeded run configuration; unknown keys are preserved for hashing."""

    def __init__(self, data=None, seed=None, out_dir=None):
        merged = json.loads(json.dumps(DEFAULTS))
        for key, value in (data or {}).items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key].update(value)
            else:
                merged[key] = value
        if seed is not None:
            merged["seed"] = int(seed)
        self.data = merged
        self.out_dir = out_dir or "."

    @classmethod
    def load(cls, path=None, seed=None, out_dir=None):
        data = None
        if path:
            with open(path) as fh:
                data = json.load(fh)
        return cls(data, seed=seed, out_dir=out_dir)

    @property
    def seed(self):
        return int(self.data["seed"])

    def size(self, key):
        return self.data["sizes"][key]

    def config_hash(self):
        return sha256_of(self.data)

    def rng(self, *stream):
        """Deterministic per-stream generator derived from the seed."""
        material = _canonical([self.data["seed"], list(stream)])
        digest = hashlib.sha256(material.encode()).digest()
        return np.random.default_rng(np.frombuffer(digest[:16], dtype=np.uint64))


class Check:
    """One verified inequality with its tolerance."""

    def __init__(self, name, formula, value, threshold, comparator="<=",
                 passed=None, inputs=None, extra=None):
        self.name = name
        self.formula = formula
        self.value = value
        self.threshold = threshold
        self.comparator = comparator
        if passed is None:
            if comparator == "<=":
                passed = bool(value <= threshold)
            elif comparator == ">=":
                passed = bool(value >= threshold)
            else:
                raise ValueError(f"unknown comparator {comparator!r}")
        self.passed = bool(passed)
        self.inputs_hash = sha256_of(inputs or {})
        self.extra = extra or {}

    def as_dict(self):
        doc = {
            "name": self.name,
            "formula": self.formula,
            "inputs_hash": self.inputs_hash,
            "value": fmt(self.value),
            "comparator": self.comparator,
            "threshold": fmt(self.threshold),
            "passed": self.passed,
        }
        if self.extra:
            doc["extra"] = {k: fmt(v) for k, v in self.extra.items()}
        return doc


class Report:
    """Suite result: checks, optional CSV tables, environment stamp."""

    def __init__(self, suite, config):
        self.suite = suite
        self.config = config
        self.checks = []
        self.tables = {}

    def add(self, *args, **kwargs):
        check = Check(*args, **kwargs)
        self.checks.append(check)
        return check

    def add_table(self, name, header, rows):
        self.tables[name] = (header, rows)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_dict(self):
        return {
            "schema_version": 1,
            "suite": self.suite,
            "seed": self.config.seed,
            "config_hash": self.config.config_hash(),
            "environment": {
                "python": sys.version.split()[0],
                "numpy": np.__version__,
                "platform": platform.platform(),
            },
            "checks": [c.as_dict() for c in self.checks],
            "passed": self.passed,
        }

    def write(self, out_dir, format="json"):
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        if format in ("json", "both"):
            path = os.path.join(out_dir, f"report_{self.suite}.json")
            with open(path, "w") as fh:
                json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
            paths.append(path)
        for name, (header, rows) in self.tables.items():
            path = os.path.join(out_dir, f"{self.suite}_{name}.csv")
            write_csv(path, header, rows)
            paths.append(path)
        return paths

    def print_summary(self):
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"[{status}] {self.suite}.{c.name}: {fmt(c.value)} "
                  f"{c.comparator} {fmt(c.threshold)}  ({c.formula})")


def write_csv(path, header, rows):
    """RFC-4180 CSV: CRLF line endings, header row, 17-digit decimals."""
    def cell(v):
        if isinstance(v, str):
            if any(ch in v for ch in ",\"\r\n"):
                return '"' + v.replace('"', '""') + '"'
            return v
        return fmt(v)

    with open(path, "w", newline="") as fh:
        fh.write(",".join(cell(h) for h in header) + "\r\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\r\n")


def worker_count():
    """Parallelism cap from MWL_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("MWL_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map honoring MWL_THREADS; deterministic aggregation."""
    n = worker_count()
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))

"""Shared utilities for the percolation lab scripts."""

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed

import pandas as pd

# ── Config ──────────────────────────────────────────────────────────────────
ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))

# Load .env
env_path = os.path.join(ROOT_DIR, ".env")
if os.path.exists(env_path):
    with open(env_path) as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#") and "=" in line:
                k, v = line.split("=", 1)
                os.environ.setdefault(k.strip(), v.strip())

WORKERS = int(os.environ.get("PERCOLAB_WORKERS", "1"))
OUT_DIR = os.environ.get("PERCOLAB_OUT_DIR", os.path.join(ROOT_DIR, "data", "out"))
MAX_BALL = int(os.environ.get("PERCOLAB_MAX_BALL", "10000000"))
MAX_BRUTE_EDGES = int(os.environ.get("PERCOLAB_MAX_BRUTE_EDGES", "24"))
SCAN_RADIUS = int(os.environ.get("PERCOLAB_SCAN_RADIUS", "16"))

FLOAT_FORMAT = "%.6f"

QUIET = False


# ── Errors ──────────────────────────────────────────────────────────────────
class LabError(Exception):
    """Base error; main() turns it into `ERROR: ...` and this exit code."""
    exit_code = 1


class ConfigError(LabError):
    exit_code = 2


class UsageError(ConfigError):
    """A call outside an operation's precondition (bad element, bad edge...)."""


class HorizonError(ConfigError):
    """A ball was requested beyond a graph's truncation horizon."""


class ResourceError(LabError):
    exit_code = 3


class UnstableLibraryError(LabError):
    exit_code = 4


# ── Progress output ─────────────────────────────────────────────────────────
def log(msg=""):
    """Progress line on stderr (stdout may be carrying CSV)."""
    if not QUIET:
        print(msg, file=sys.stderr, flush=True)


def log_summary(items):
    """The closing SUMMARY block: items is a list of (label, value)."""
    log(f"\n{'='*50}")
    log("SUMMARY")
    log(f"{'='*50}")
    width = max((len(label) for label, _ in items), default=0) + 2
    for label, value in items:
        log(f"{label + ':':<{width}}{value}")


def fail(exc):
    """Report a LabError the way the scripts do and exit with its code."""
    print(f"ERROR: {exc}", file=sys.stderr)
    sys.exit(exc.exit_code)


# ── Files ───────────────────────────────────────────────────────────────────
def ensure_dir(path):
    """Create directory if it doesn't exist."""
    os.makedirs(path, exist_ok=True)


def resolve_out(path):
    """Relative output paths land under OUT_DIR; '-' and None mean stdout."""
    if path in (None, "-"):
        return None
    if os.path.isabs(path):
        return path
    return os.path.join(OUT_DIR, path)


def write_csv(path, rows, columns):
    """Write rows (list of dicts) as CSV; path None writes to stdout."""
    df = pd.DataFrame(rows, columns=columns)
    if path is None:
        df.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return
    parent = os.path.dirname(path)
    if parent:
        ensure_dir(parent)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    size_kb = os.path.getsize(path) / 1024
    log(f"  {os.path.basename(path)}: {len(rows):,} rows ({size_kb:.1f}KB)")


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


# ── Sharding ────────────────────────────────────────────────────────────────
def shard_ranges(n, shards):
    """Split range(n) into at most `shards` contiguous (start, stop) pairs."""
    shards = max(1, min(shards, n))
    size, extra = divmod(n, shards)
    ranges = []
    start = 0
    for i in range(shards):
        stop = start + size + (1 if i < extra else 0)
        ranges.append((start, stop))
        start = stop
    return ranges


def run_sharded(task, n, workers=None):
    """Run task(start, stop) over shards of range(n); results in shard order.

    Each shard result is keyed by its start index, so the merged list is the
    same for any worker count.
    """
    workers = WORKERS if workers is None else workers
    ranges = shard_ranges(n, max(1, workers) * 4 if workers > 1 else 1)
    if workers <= 1:
        return [task(start, stop) for start, stop in ranges]

    results = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(task, start, stop): start for start, stop in ranges}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return [results[start] for start, _ in ranges]

#!/usr/bin/env python3
"""Run percolation-lab experiments and write their tables as CSV.

Subcommands:
    sample            per-sample statistics of Bernoulli configurations
    patterns          pattern libraries of a repetitive model
    repetitive-check  finite-stage repetitiveness of a model
    singularity       probability that the root cluster looks like the model, per radius
    saturation        probability that the cluster relation reaches the cylinder U_F
    oracle            brute-force vs Monte Carlo for named events on a small window
    dump              edge list of one sample or one model window

Usage:
    # Singularity decay for the even-rows model
    python3 scripts/experiments/run_experiment.py singularity --model even-rows \\
        --p 0.6 --radii 1,2,3,4 --samples 10000 --seed 7 --out singularity.csv

    # Saturation curve, conditioned on the cluster reaching radius 40
    python3 scripts/experiments/run_experiment.py saturation --p 0.7 \\
        --radii 5,10,20,40 --samples 2000 --condition --out saturation.csv

    # Same run from a JSON manifest, overriding the seed
    python3 scripts/experiments/run_experiment.py singularity --config runs/sing.json --seed 3

    # Sturmian fence patterns, saved as edge-list files
    python3 scripts/experiments/run_experiment.py patterns --model fib-fence --radii 1,2,3 \\
        --scan-radius 64 --out fib_patterns

Exit codes: 0 success, 2 configuration error, 3 resource guard, 4 unstable library.
"""

import argparse
import os
import sys
from dataclasses import dataclass, field, fields

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "lab"))
import shared
from config_space import canonical_edge, dump_configuration, edge_endpoints, window_edges
from group import GROUPS, get_group
from percolation import (
    EVENTS,
    BernoulliLaw,
    EstimateRow,
    brute_force_probability,
    cylinder_probability,
    estimate_event,
    exhaustion_support,
    insertion_image_probability,
    match_counts,
    origin_edge,
    sample,
    sample_stats,
    saturation_counts,
)
from repetitive import (
    is_proper,
    is_repetitive,
    load_library,
    model_window,
    parse_model,
    patterns,
    save_library,
)
from shared import (
    SCAN_RADIUS,
    ConfigError,
    LabError,
    fail,
    log,
    log_summary,
    read_json,
    resolve_out,
    write_csv,
)

KINDS = ["sample", "patterns", "repetitive-check", "singularity", "saturation", "oracle", "dump"]

DEFAULT_RADII = {
    "singularity": [1, 2, 3, 4],
    "saturation": [5, 10, 20, 40],
    "patterns": [1, 2],
}

SINGULARITY_COLUMNS = ["r", "m_hat", "stderr", "n"]
SATURATION_COLUMNS = ["R", "s_hat", "stderr", "n"]
ORACLE_COLUMNS = ["event", "p", "exact", "mc_estimate", "stderr", "n"]
SAMPLE_COLUMNS = ["index", "open_edges", "cluster_size", "boundary_reach", "root_degree", "clusters"]


# ── Configuration ───────────────────────────────────────────────────────────
@dataclass
class ExperimentConfig:
    kind: str
    group: str = "z2"
    model: str = "even-rows"
    p: float = 0.6
    radii: list = field(default_factory=lambda: [1])
    samples: int = 1000
    seed: int = 0
    condition: bool = False
    condition_radius: int = None
    out: str = None
    scan_radius: int = SCAN_RADIUS
    force_unstable: bool = False
    workers: int = shared.WORKERS
    reach: int = 3
    events: list = field(default_factory=lambda: ["isolated", "plus", "vertical-path"])
    source: str = "sample"
    index: int = 0
    format: str = "csv"
    library: str = None

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment {self.kind!r}")
        if self.group not in GROUPS:
            raise ConfigError(f"unknown group {self.group!r} (choose from {', '.join(GROUPS)})")
        BernoulliLaw(self.p)
        if self.samples < 1:
            raise ConfigError(f"--samples must be >= 1, got {self.samples}")
        if not self.radii or any(r < 0 for r in self.radii):
            raise ConfigError(f"radii must be non-negative, got {self.radii}")
        if any(a >= b for a, b in zip(self.radii, self.radii[1:])):
            raise ConfigError(f"radii must be strictly increasing, got {self.radii}")
        if self.condition_radius is not None and self.condition_radius < 1:
            raise ConfigError(f"--condition-radius must be >= 1, got {self.condition_radius}")
        if self.scan_radius < 1:
            raise ConfigError(f"--scan-radius must be >= 1, got {self.scan_radius}")
        if self.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {self.workers}")
        if self.kind in ("patterns", "repetitive-check", "singularity") and self.group != "z2":
            raise ConfigError(f"{self.kind} needs --group z2 (repetitive models live on z2)")
        if self.source == "model" and self.group != "z2":
            raise ConfigError("model dumps need --group z2")
        if self.kind == "oracle" and self.radius < 1:
            raise ConfigError("oracle needs --radius >= 1 so the window holds the origin edge")
        if self.source not in ("sample", "model"):
            raise ConfigError(f"--source must be sample or model, got {self.source!r}")
        if self.format not in ("csv", "edgelist"):
            raise ConfigError(f"--format must be csv or edgelist, got {self.format!r}")
        if self.library is not None and (self.kind != "singularity" or self.library == "-"):
            raise ConfigError("--library takes a directory and only applies to singularity")
        unknown = [e for e in self.events if e not in EVENTS]
        if unknown:
            raise ConfigError(f"unknown events {unknown} (choose from {', '.join(EVENTS)})")
        return self

    @property
    def radius(self):
        return self.radii[0]

    @property
    def effective_condition_radius(self):
        if not self.condition:
            return None
        return self.condition_radius or max(self.radii)


# JSON manifests carry typed values; strings are only accepted where a flag takes text
JSON_INT_KEYS = {"samples", "seed", "condition_radius", "scan_radius", "workers", "reach",
                 "index", "radius"}
JSON_STR_KEYS = {"group", "model", "out", "source", "format", "library", "experiment"}
JSON_BOOL_KEYS = {"condition", "force_unstable"}


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def check_json_value(key, value):
    """Raise ConfigError unless a manifest value has the type of its flag."""
    if key in JSON_INT_KEYS:
        ok = _is_int(value) or (key == "condition_radius" and value is None)
        expected = "an integer"
    elif key == "p":
        ok = _is_int(value) or isinstance(value, float)
        expected = "a number"
    elif key in JSON_BOOL_KEYS:
        ok = isinstance(value, bool)
        expected = "true or false"
    elif key in JSON_STR_KEYS:
        ok = isinstance(value, str) or (key in ("out", "library") and value is None)
        expected = "a string"
    elif key == "radii":
        ok = (isinstance(value, str) or _is_int(value)
              or (isinstance(value, list) and all(_is_int(r) for r in value)))
        expected = "a list of integers"
    elif key == "events":
        ok = isinstance(value, str) or (isinstance(value, list)
                                        and all(isinstance(e, str) for e in value))
        expected = "a list of event names"
    else:
        ok, expected = True, None
    if not ok:
        raise ConfigError(f"config key {key!r} must be {expected}, got {value!r}")


def parse_int_list(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError as e:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from e


def build_config(kind, args):
    """Defaults, then the JSON file, then explicitly passed flags."""
    values = {}
    if getattr(args, "config", None):
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        data = read_json(args.config)
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        known = {f.name for f in fields(ExperimentConfig)} - {"kind"} | {"radius", "experiment"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"{args.config}: unknown keys {unknown}")
        for key, value in data.items():
            check_json_value(key, value)
        data = dict(data)
        if data.pop("experiment", kind) != kind:
            raise ConfigError(f"{args.config} describes a different experiment")
        if "radius" in data:
            data["radii"] = [data.pop("radius")]
        values.update(data)

    flags = {k.replace("-", "_"): v for k, v in vars(args).items()
             if v is not None and k not in ("config", "quiet", "command")}
    if "radius" in flags:
        flags["radii"] = [flags.pop("radius")]
    values.update(flags)
    if isinstance(values.get("radii"), str):
        values["radii"] = parse_int_list(values["radii"])
    if isinstance(values.get("events"), str):
        values["events"] = [e for e in values["events"].split(",") if e]

    if "radii" not in values:
        values["radii"] = list(DEFAULT_RADII.get(kind, [1]))
    if isinstance(values.get("radii"), int):
        values["radii"] = [values["radii"]]
    try:
        cfg = ExperimentConfig(kind=kind, **values)
    except TypeError as e:
        raise ConfigError(str(e)) from e
    return cfg.validate()


# ── Experiments ─────────────────────────────────────────────────────────────
def singularity_experiment(cfg):
    """One EstimateRow per radius; all radii are evaluated on each sample."""
    model = parse_model(cfg.model)
    if model.id != "full" and not is_proper(model, cfg.scan_radius):
        raise ConfigError(f"model {model.id} has no missing edge within radius {cfg.scan_radius}; "
                          "only proper models (or 'full') are compared")
    log(f"Singularity: model {model.id}, p={cfg.p}, radii {cfg.radii}, n={cfg.samples}")
    libraries = None
    if cfg.library:
        directory = resolve_out(cfg.library)
        libraries = [load_library(os.path.join(directory, f"r{r}")) for r in cfg.radii]
        log(f"  Loaded {len(libraries)} libraries from {directory}")
    hits, counted = match_counts(
        model, cfg.radii, cfg.p, cfg.samples, cfg.seed,
        condition_radius=cfg.effective_condition_radius,
        scan_radius=cfg.scan_radius,
        force=cfg.force_unstable,
        libraries=libraries,
    )
    rows = [EstimateRow.from_counts(r, h, counted) for r, h in zip(cfg.radii, hits)]
    for row in rows:
        log(f"  r={row.parameter}: {_fmt(row)}")
    return rows


def saturation_experiment(cfg):
    """Fraction of samples with g in C_1(w), |g| <= R, and F.g open, per R."""
    spec = get_group(cfg.group)
    edges = origin_edge(spec)
    log(f"Saturation: group {spec.id}, p={cfg.p}, R in {cfg.radii}, n={cfg.samples}"
        + (f", conditioned on reaching radius {cfg.effective_condition_radius}" if cfg.condition else ""))
    hits, counted = saturation_counts(spec, cfg.radii, cfg.p, cfg.samples, cfg.seed,
                                      edges=edges, condition_radius=cfg.effective_condition_radius)
    rows = [EstimateRow.from_counts(R, h, counted) for R, h in zip(cfg.radii, hits)]
    for row in rows:
        log(f"  R={row.parameter}: {_fmt(row)}")
    return rows


def sample_experiment(cfg):
    spec = get_group(cfg.group)
    window = window_edges(spec, cfg.radius)
    log(f"Sampling {cfg.samples} configurations on the radius-{cfg.radius} {spec.id} window "
        f"({len(window.edges)} edges)")
    return [sample_stats(window, cfg.p, i, cfg.seed) for i in range(cfg.samples)]


def oracle_experiment(cfg):
    """Exact probability and Monte Carlo estimate for each named event."""
    spec = get_group(cfg.group)
    window = window_edges(spec, cfg.radius)
    log(f"Oracle: {spec.id} window radius {cfg.radius} ({len(window.edges)} edges), p={cfg.p}")
    rows = []
    for name in cfg.events:
        event = EVENTS[name]
        exact = brute_force_probability(window, cfg.p, event)
        est = estimate_event(window, cfg.p, event, cfg.samples, cfg.seed)
        rows.append({"event": name, "p": cfg.p, "exact": exact, "mc_estimate": est.estimate,
                     "stderr": est.stderr, "n": est.n})
        log(f"  {name:<14} exact={exact:.6f}  mc={est.estimate:.6f} +/- {est.stderr:.6f}")
    return rows


def insertion_witness(cfg):
    """(mu(i_F(B)), p^|F| mu(B)) for B = 'root has no open edge other than F'."""
    spec = get_group(cfg.group)
    window = window_edges(spec, cfg.radius)
    edges = origin_edge(spec)
    others = [e for e in (canonical_edge(spec, spec.identity, s) for s in spec.generators)
              if e not in edges]

    def event(config):
        return not any(e in config.open for e in others)

    lhs = insertion_image_probability(window, cfg.p, edges, event)
    rhs = cylinder_probability(edges, cfg.p) * brute_force_probability(window, cfg.p, event)
    return lhs, rhs


def dump_sample(cfg):
    """Open edges of one sample (or of the model window) as CSV or edge-list text."""
    spec = get_group(cfg.group)
    if cfg.source == "model":
        config = model_window(parse_model(cfg.model), cfg.radius)
    else:
        config = sample(window_edges(spec, cfg.radius), cfg.p, cfg.index, cfg.seed)
    path = resolve_out(cfg.out)
    if cfg.format == "edgelist":
        if path is None:
            raise ConfigError("--format edgelist needs --out")
        shared.ensure_dir(os.path.dirname(path) or ".")
        dump_configuration(config, path)
        log(f"  {os.path.basename(path)}: {len(config.open):,} edges")
        return config
    if spec.kind == "lattice":
        columns = [f"{axis}{k}" for k in (1, 2) for axis in "xyz"[:spec.rank]]
    else:
        columns = ["word1", "word2"]
    rows = []
    for e in sorted(config.open, key=lambda e: (spec.sort_key(e.base), e.dir)):
        a, b = edge_endpoints(spec, e)
        if spec.kind == "lattice":
            rows.append(dict(zip(columns, list(a) + list(b))))
        else:
            rows.append({"word1": spec.format(a), "word2": spec.format(b)})
    write_csv(path, rows, columns)
    return config


def patterns_command(cfg):
    model = parse_model(cfg.model)
    libraries = []
    for r in cfg.radii:
        library = patterns(model, r, max(cfg.scan_radius, r))
        libraries.append(library)
        log(f"  r={r}: {len(library)} patterns (scan radius {library.scan_radius}, "
            f"{'stable' if library.stable else 'UNSTABLE'})")
        if cfg.out:
            save_library(library, os.path.join(resolve_out(cfg.out), f"r{r}"))
    return libraries


def repetitive_command(cfg):
    model = parse_model(cfg.model)
    scan = max(cfg.scan_radius, cfg.reach + cfg.radius)
    ok, witness = is_repetitive(model, cfg.radius, cfg.reach, scan)
    if ok:
        log(f"  {model.id}: every {cfg.radius}-pattern within distance {cfg.reach} "
            f"of every center (scan radius {scan})")
    else:
        pattern, center = witness
        log(f"  {model.id}: pattern with {len(pattern.vertices)} vertices/"
            f"{len(pattern.edges)} edges missing near {model.spec.format(center)}")
    return ok, witness


def _fmt(row):
    if not row.defined:
        return "undefined (no conditioned samples)"
    return f"{row.estimate:.6f} +/- {row.stderr:.6f} (n={row.n})"


def estimate_rows(rows, name_param, name_est):
    return [{name_param: row.parameter, name_est: row.estimate, "stderr": row.stderr, "n": row.n}
            for row in rows]


# ── Main ────────────────────────────────────────────────────────────────────
def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with experiment parameters (flags win)")
    common.add_argument("--group", help=f"Group id ({', '.join(GROUPS)})")
    common.add_argument("--model", help="Model id (full, even-rows, fib-fence, periodic:..., sturmian:...)")
    common.add_argument("--p", type=float, help="Bernoulli edge probability")
    common.add_argument("--radius", type=int, help="Single radius")
    common.add_argument("--radii", help="Comma-separated, strictly increasing radii")
    common.add_argument("--samples", type=int, help="Number of samples")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--condition", action="store_true", default=None,
                        help="Condition on the root cluster reaching the boundary")
    common.add_argument("--condition-radius", type=int, help="Boundary radius for --condition")
    common.add_argument("--out", help="Output path (CSV file or directory); stdout if omitted")
    common.add_argument("--force-unstable", action="store_true", default=None,
                        help="Use pattern libraries even if they grow when the scan doubles")
    common.add_argument("--scan-radius", type=int, help="Pattern scan radius")
    common.add_argument("--workers", type=int, help="Worker threads (PERCOLAB_WORKERS)")
    common.add_argument("--quiet", action="store_true", help="No progress output")

    parser = argparse.ArgumentParser(description="Percolation lab experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sample", parents=[common], help="Per-sample statistics")
    sub.add_parser("patterns", parents=[common], help="Pattern libraries of a model")
    rep = sub.add_parser("repetitive-check", parents=[common], help="Finite-stage repetitiveness")
    rep.add_argument("--reach", type=int, help="Distance R within which every pattern must occur")
    sng = sub.add_parser("singularity", parents=[common], help="Match probability per radius")
    sng.add_argument("--library",
                     help="Saved libraries, one r<r> directory per radius (patterns --out)")
    sub.add_parser("saturation", parents=[common], help="Saturation of the origin-edge cylinder")
    orc = sub.add_parser("oracle", parents=[common], help="Brute force vs Monte Carlo")
    orc.add_argument("--events", help=f"Comma-separated events ({', '.join(EVENTS)})")
    dmp = sub.add_parser("dump", parents=[common], help="Edge list of a sample or model window")
    dmp.add_argument("--source", choices=["sample", "model"], help="What to dump (default sample)")
    dmp.add_argument("--index", type=int, help="Sample index (default 0)")
    dmp.add_argument("--format", choices=["csv", "edgelist"], help="Output format (default csv)")
    return parser


def run(kind, cfg):
    """Dispatch one experiment; returns the SUMMARY items."""
    shared.WORKERS = cfg.workers
    out = resolve_out(cfg.out)
    summary = [("Experiment", kind)]

    if kind == "singularity":
        rows = singularity_experiment(cfg)
        write_csv(out, estimate_rows(rows, "r", "m_hat"), SINGULARITY_COLUMNS)
        summary.append(("Rows", len(rows)))
    elif kind == "saturation":
        rows = saturation_experiment(cfg)
        write_csv(out, estimate_rows(rows, "R", "s_hat"), SATURATION_COLUMNS)
        summary.append(("Rows", len(rows)))
    elif kind == "sample":
        rows = sample_experiment(cfg)
        write_csv(out, rows, SAMPLE_COLUMNS)
        summary.append(("Samples", len(rows)))
    elif kind == "oracle":
        rows = oracle_experiment(cfg)
        write_csv(out, rows, ORACLE_COLUMNS)
        lhs, rhs = insertion_witness(cfg)
        support = exhaustion_support(window_edges(get_group(cfg.group), cfg.radius), cfg.p)
        summary += [("Events", len(rows)),
                    ("Insertion image", f"{lhs:.6f} vs p^|F| P(B) = {rhs:.6f}"),
                    ("Exhaustion support", " ".join(f"{q:.4g}" for q in support))]
    elif kind == "dump":
        config = dump_sample(cfg)
        summary.append(("Open edges", len(config.open)))
    elif kind == "patterns":
        libraries = patterns_command(cfg)
        summary += [(f"Patterns r={lib.r}", f"{len(lib)} ({'stable' if lib.stable else 'unstable'})")
                    for lib in libraries]
    elif kind == "repetitive-check":
        ok, _ = repetitive_command(cfg)
        summary.append(("Repetitive", "yes" if ok else "no"))
    return summary


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    shared.QUIET = args.quiet
    try:
        cfg = build_config(args.command, args)
        summary = run(args.command, cfg)
    except LabError as e:
        fail(e)
    log_summary(summary)


if __name__ == "__main__":
    main()

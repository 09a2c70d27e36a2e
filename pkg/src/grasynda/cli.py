"""Command line front end: generate | augment | evaluate | graph.

Every run writes its outputs plus a manifest.json capturing the
command, the effective configuration, the seed, input digests and the
library version. Re-running a command with ``--config`` pointed at a
previous manifest reproduces the outputs byte for byte.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from grasynda import __version__
from grasynda.core import (
    BUILTIN_DEFAULTS,
    DataError,
    SeriesCollection,
    TimeSeries,
    dataset_defaults,
    load_collection,
    parse_config,
    save_collection,
)
from grasynda.baselines import DEFAULT_PARAMS, METHODS, AugmenterSpec, augment
from grasynda.evaluation import FORECASTERS, run_grid
from grasynda.generator import GeneratorConfig, grasynda, prepare_graph
from grasynda.quantile_graph import export_graph

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1 for usage
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(sub, multi_input=False):
    if multi_input:
        sub.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="CSV")
    else:
        sub.add_argument("--in", dest="inputs", required=True, metavar="CSV")
    sub.add_argument("--out", dest="out", required=True, metavar="DIR")
    sub.add_argument("--config", help="flat key=value file or a previous manifest.json")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--quantiles", type=int)
    sub.add_argument("--period", type=int)
    sub.add_argument("--horizon", type=int)
    sub.add_argument("--input-window", dest="input_window", type=int)
    sub.add_argument("--no-stl", dest="no_stl", action="store_true")
    sub.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grasynda", description=__doc__)
    parser.add_argument("--version", action="version", version=f"grasynda {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    gen = subs.add_parser("generate", help="generate one synthetic replica set")
    _add_common(gen)
    gen.add_argument("--export-graph", dest="export_graph", choices=("dot", "csv"))
    gen.set_defaults(func=cmd_generate)

    aug = subs.add_parser("augment", help="append one synthetic per original series")
    _add_common(aug)
    aug.add_argument("--method", choices=METHODS)
    aug.set_defaults(func=cmd_augment)

    ev = subs.add_parser("evaluate", help="run the forecast evaluation grid")
    _add_common(ev, multi_input=True)
    ev.add_argument("--methods", default=None, help="comma-separated, e.g. none,grasynda")
    ev.add_argument(
        "--forecasters", default=None, help=f"comma-separated, from {','.join(FORECASTERS)}"
    )
    ev.add_argument("--ridge-lambda", dest="ridge_lambda", type=float)
    ev.set_defaults(func=cmd_evaluate)

    gr = subs.add_parser("graph", help="export per-series transition graphs")
    _add_common(gr)
    gr.add_argument(
        "--export-graph", dest="export_graph", choices=("dot", "csv"), default="dot"
    )
    gr.set_defaults(func=cmd_graph)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    argv_used = list(sys.argv[1:] if argv is None else argv)
    try:
        return args.func(args, argv_used)
    except (DataError, FileNotFoundError) as exc:
        print(f"grasynda: data error: {exc}", file=sys.stderr)
        _failed_manifest(args, argv_used, exc)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"grasynda: internal error: {exc!r}", file=sys.stderr)
        _failed_manifest(args, argv_used, exc)
        return EXIT_INTERNAL


def entrypoint():  # console script
    raise SystemExit(main())


# --- configuration resolution -------------------------------------------------


def _load_config_any(path) -> dict:
    """Read a flat key=value config, or the config snapshot of a manifest."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        snapshot = doc.get("config", doc)
        if not isinstance(snapshot, dict):
            raise DataError(f"{path}: manifest has no usable config snapshot")
        return {
            k: v
            for k, v in snapshot.items()
            if v is not None and not isinstance(v, (dict, list))
        }
    return parse_config(text)


def _resolve_settings(args, dataset_name: str) -> dict:
    """Precedence: CLI flag > config file > GRASYNDA_SEED > name defaults > built-ins."""
    settings: dict = dict(BUILTIN_DEFAULTS)
    settings.update({"stl": "auto", "threads": 1, "ridge_lambda": 1.0})
    named = dataset_defaults(dataset_name)
    if named:
        settings.update(named)
    env_seed = os.environ.get("GRASYNDA_SEED")
    if env_seed is not None:
        settings["seed"] = int(env_seed)
    if args.config:
        settings.update(_load_config_any(args.config))
    for key in ("seed", "quantiles", "period", "horizon", "input_window", "threads"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "ridge_lambda", None) is not None:
        settings["ridge_lambda"] = args.ridge_lambda
    if getattr(args, "no_stl", False):
        settings["stl"] = False
    if getattr(args, "method", None) is not None:
        settings["method"] = args.method
    return settings


def _augmenter_params(settings: dict, method: str) -> dict:
    prefix = f"augmenter.{method}."
    params = {
        key[len(prefix) :]: value
        for key, value in settings.items()
        if key.startswith(prefix)
    }
    unknown = set(params) - set(DEFAULT_PARAMS[method])
    if unknown:
        raise DataError(f"unknown {method} parameter(s) in config: {sorted(unknown)}")
    if method == "grasynda":
        params.setdefault("quantiles", settings["quantiles"])
        if settings["stl"] is False:
            params.setdefault("use_stl", False)
    return params


def _generator_config(settings: dict) -> GeneratorConfig:
    return GeneratorConfig(
        seed=int(settings["seed"]),
        quantiles=int(settings["quantiles"]),
        use_stl=False if settings["stl"] is False else None,
    )


# --- manifest -----------------------------------------------------------------


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(outdir: Path, doc: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    (outdir / "manifest.json").write_text(text, encoding="utf-8")


def _manifest_doc(subcommand, argv, config, inputs, outputs, status, error=None) -> dict:
    doc = {
        "tool": "grasynda",
        "version": __version__,
        "subcommand": subcommand,
        "command": list(argv),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seed": config.get("seed"),
        "config": config,
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in inputs],
        "outputs": list(outputs),
        "status": status,
    }
    if error is not None:
        doc["error"] = str(error)
    return doc


def _record_params(settings: dict, spec: AugmenterSpec) -> None:
    # resolved parameter values go into the manifest for provenance
    for key, value in spec.resolved().items():
        settings.setdefault(f"augmenter.{spec.method}.{key}", value)


def _failed_manifest(args, argv, exc) -> None:
    out = getattr(args, "out", None)
    if not out:
        return
    try:
        _write_manifest(
            Path(out),
            _manifest_doc(
                getattr(args, "subcommand", "?"), argv, {}, [], [], "failed", exc
            ),
        )
    except OSError:  # best effort only
        pass


# --- subcommands ----------------------------------------------------------------


def _map_series(fn, series, threads: int):
    if threads and int(threads) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            return list(pool.map(fn, series))
    return [fn(s) for s in series]


def _safe_name(series_id: str) -> str:
    return re.sub(r"[^\w.-]", "_", series_id)


def _export_graphs(collection, gcfg, fmt_flag: str, outdir: Path) -> list[str]:
    fmt = "dot" if fmt_flag == "dot" else "matrix-csv"
    ext = "dot" if fmt_flag == "dot" else "csv"
    gdir = outdir / "graphs"
    gdir.mkdir(parents=True, exist_ok=True)
    written = []
    for series in collection.series:
        prep = prepare_graph(series, gcfg)
        name = f"graphs/{_safe_name(series.id)}.{ext}"
        (outdir / name).write_text(export_graph(prep.graph, fmt), encoding="utf-8")
        written.append(name)
    return written


def cmd_generate(args, argv) -> int:
    outdir = Path(args.out)
    name = Path(args.inputs).stem
    settings = _resolve_settings(args, name)
    collection = load_collection(
        args.inputs,
        period=settings["period"],
        horizon=settings["horizon"],
        input_window=settings["input_window"],
    )
    gcfg = _generator_config(settings)
    replica_sets = _map_series(
        lambda s: grasynda(s, gcfg), collection.series, settings["threads"]
    )
    synthetic = [
        TimeSeries(syn.id, src.period, syn.values)
        for src, replicas in zip(collection.series, replica_sets)
        for syn in replicas
    ]
    synth_collection = SeriesCollection(
        f"{name}-synthetic", synthetic, collection.horizon, collection.input_window
    )
    outdir.mkdir(parents=True, exist_ok=True)
    save_collection(synth_collection, outdir / "synthetic.csv")
    outputs = ["synthetic.csv"]
    if args.export_graph:
        outputs += _export_graphs(collection, gcfg, args.export_graph, outdir)
    _write_manifest(
        outdir,
        _manifest_doc("generate", argv, settings, [args.inputs], outputs, "ok"),
    )
    print(f"wrote {outdir / 'synthetic.csv'} ({len(synthetic)} series)")
    return EXIT_OK


def cmd_augment(args, argv) -> int:
    outdir = Path(args.out)
    name = Path(args.inputs).stem
    settings = _resolve_settings(args, name)
    method = settings.get("method") or settings.get("augmenter.method")
    if not method:
        raise DataError("augment needs --method or an 'augmenter.method' config key")
    if method not in METHODS:
        raise DataError(f"unknown augmenter {method!r}; choose from {METHODS}")
    settings["method"] = method
    collection = load_collection(
        args.inputs,
        period=settings["period"],
        horizon=settings["horizon"],
        input_window=settings["input_window"],
    )
    spec = AugmenterSpec(
        method=method, params=_augmenter_params(settings, method), seed=int(settings["seed"])
    )
    _record_params(settings, spec)
    augmented = augment(collection, spec, threads=int(settings["threads"]))
    outdir.mkdir(parents=True, exist_ok=True)
    save_collection(augmented, outdir / "augmented.csv")
    _write_manifest(
        outdir,
        _manifest_doc("augment", argv, settings, [args.inputs], ["augmented.csv"], "ok"),
    )
    print(f"wrote {outdir / 'augmented.csv'} ({len(augmented)} series)")
    return EXIT_OK


def cmd_evaluate(args, argv) -> int:
    outdir = Path(args.out)
    base = _resolve_settings(args, Path(args.inputs[0]).stem)
    methods_text = args.methods or base.get("methods") or "none,grasynda"
    forecasters_text = args.forecasters or base.get("forecasters") or ",".join(FORECASTERS)
    methods = [m.strip() for m in methods_text.split(",") if m.strip()]
    forecasters = [f.strip() for f in forecasters_text.split(",") if f.strip()]
    if not methods:
        raise DataError("evaluate needs at least one method")
    for m in methods:
        if m not in METHODS:
            raise DataError(f"unknown augmenter {m!r}; choose from {METHODS}")

    datasets = {}
    per_dataset_meta = {}
    for path in args.inputs:
        name = Path(path).stem
        meta = _resolve_settings(args, name)
        datasets[name] = load_collection(
            path,
            period=meta["period"],
            horizon=meta["horizon"],
            input_window=meta["input_window"],
        )
        per_dataset_meta[name] = {
            "period": meta["period"],
            "horizon": meta["horizon"],
            "input_window": meta["input_window"],
        }
    settings = base
    specs = [
        AugmenterSpec(m, _augmenter_params(settings, m), seed=int(settings["seed"]))
        for m in methods
    ]
    records, report = run_grid(
        list(datasets.values()),
        specs,
        forecasters,
        ridge_lambda=float(settings["ridge_lambda"]),
        threads=int(settings["threads"]),
    )
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.csv").write_text(report.to_csv_text(), encoding="utf-8")
    (outdir / "report.txt").write_text(report.to_table_text(), encoding="utf-8")
    config = dict(settings)
    for spec in specs:
        _record_params(config, spec)
    config.update({"methods": ",".join(methods), "forecasters": ",".join(forecasters)})
    config["datasets"] = per_dataset_meta
    _write_manifest(
        outdir,
        _manifest_doc(
            "evaluate", argv, config, list(args.inputs), ["report.csv", "report.txt"], "ok"
        ),
    )
    if report.gaps:
        print(f"note: {len(report.gaps)} grid cell(s) missing; see warnings")
    print(report.to_table_text(), end="")
    print(f"wrote {outdir / 'report.csv'}")
    return EXIT_OK


def cmd_graph(args, argv) -> int:
    outdir = Path(args.out)
    name = Path(args.inputs).stem
    settings = _resolve_settings(args, name)
    collection = load_collection(
        args.inputs,
        period=settings["period"],
        horizon=settings["horizon"],
        input_window=settings["input_window"],
    )
    gcfg = _generator_config(settings)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = _export_graphs(collection, gcfg, args.export_graph, outdir)
    _write_manifest(
        outdir, _manifest_doc("graph", argv, settings, [args.inputs], outputs, "ok")
    )
    print(f"wrote {len(outputs)} graph file(s) under {outdir / 'graphs'}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    entrypoint()

"""Command-line front end.

    mirror-transfer validate --config cfg.json
    mirror-transfer run      --config cfg.json --out results/ [--jobs 4] [--seed 7] [--dry-run]
    mirror-transfer sweep    --config cfg.json --out results/
    mirror-transfer spectrum --config cfg.json
    mirror-transfer forbidden --N 5
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, parse_config
from .ensemble import EnsembleStats, Setup, ensemble_csv, summary_csv, sweep_disorder
from .evolve import trajectory_csv
from .hamiltonian import (
    ChainSpec,
    GraphError,
    WireSpec,
    attach_wire,
    build_engineered_chain,
    build_uniform_chain,
)
from .protocol import DEFAULT_SCOPE, TransferResult, run_scheme_a, run_scheme_b, scheme_b_graphs
from .spectral import check_mirror_symmetry, detect_bound_states, eigendecompose, forbidden_sigma_ratios

OUT_ENV = "QST_OUT_DIR"


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(files: dict[str, str], directory: str | os.PathLike) -> dict:
    """Write ``name -> text`` files atomically plus a manifest with sha256 checksums."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        entries = []
        for name in sorted(files):
            data = files[name]
            _atomic_write(out / name, data)
            raw = data.encode("utf-8")
            entries.append({"name": name, "bytes": len(raw), "sha256": hashlib.sha256(raw).hexdigest()})
        manifest = {"files": entries}
        _atomic_write(out / "manifest.json", _dumps(manifest))
    except OSError as exc:
        raise OSError(f"failed writing outputs to {out}: {exc}") from exc
    return manifest


def _setup(cfg: ExperimentConfig) -> Setup:
    return Setup(N=cfg.chain.N, hopping=cfg.chain.delta, sigma=cfg.chain.sigma, kappa=cfg.wire.kappa,
                 g=cfg.wire.g, L=cfg.wire.L, initial_site=cfg.protocol.initial_site)


def _scope(cfg: ExperimentConfig, scheme: str):
    s = cfg.disorder.scope_a if scheme == "A" else cfg.disorder.scope_b
    return DEFAULT_SCOPE[scheme] if s is None else frozenset(s)


def _single_runs(cfg: ExperimentConfig) -> list[TransferResult]:
    setup = _setup(cfg)
    p = cfg.protocol
    t_f = cfg.t_fs[0]
    results = []
    for scheme in cfg.schemes:
        if scheme == "A":
            r = run_scheme_a(setup.chain("A"), t_f, p.initial_site, samples=p.samples)
        else:
            r = run_scheme_b(setup.chain("B"), setup.wire(t_f), t_f / 2, p.initial_site, samples=p.samples)
        results.append(r)
    return results


def _ensembles(cfg: ExperimentConfig, jobs: int) -> list[EnsembleStats]:
    scopes = {k: _scope(cfg, k) for k in cfg.schemes}
    return sweep_disorder(cfg.schemes, _setup(cfg), cfg.deltas, cfg.t_fs, cfg.disorder.count,
                          cfg.disorder.base_seed, jobs, scopes, cfg.disorder.bins)


def execute_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike, jobs: int = 1,
                       force_ensemble: bool = False, stream=None) -> dict:
    """Run what the config asks for, write the files, and return the manifest."""
    stream = sys.stdout if stream is None else stream
    files: dict[str, str] = {"config.json": cfg.to_json() + "\n"}
    if cfg.is_ensemble or force_ensemble:
        table = _ensembles(cfg, jobs)
        for st in table:
            print(f"scheme {st.scheme}  delta={st.delta:g}  t_f={st.t_f:.6g}  "
                  f"mean={st.mean:.6f} std={st.std:.6f}  (n={st.count})", file=stream)
        if cfg.outputs.ensemble:
            files["ensemble.csv"] = ensemble_csv(table)
            files["summary.csv"] = summary_csv(table)
        if cfg.outputs.result:
            files["result.json"] = _dumps({"kind": "ensemble", "std_kind": "population",
                                           "ensembles": [st.to_dict() for st in table]})
    else:
        results = _single_runs(cfg)
        for r in results:
            extra = f"  R(t0)={r.residual_R_at_switch:.6f}" if r.residual_R_at_switch is not None else ""
            print(f"scheme {r.scheme}  t_f={r.parameters['t_f']:.6g}  fidelity={r.fidelity:.6f}{extra}",
                  file=stream)
            for w in r.warnings:
                print(f"  warning: {w}", file=stream)
        if cfg.outputs.trajectory:
            for r in results:
                if r.trajectory is None:
                    continue
                name = "trajectory.csv" if len(results) == 1 else f"trajectory_{r.scheme}.csv"
                files[name] = trajectory_csv(r.trajectory, cfg.protocol.sites)
        if cfg.outputs.result:
            files["result.json"] = _dumps({"kind": "single", "results": [r.to_dict() for r in results]})
        if cfg.outputs.graph and "B" in cfg.schemes:
            setup = _setup(cfg)
            g, _ = scheme_b_graphs(setup.chain("B"), setup.wire(cfg.t_fs[0]), cfg.t_fs[0] / 2)
            files["graph.json"] = g.to_json() + "\n"
    return write_outputs(files, out_dir)


def spectrum_report(cfg: ExperimentConfig) -> dict:
    c = cfg.chain
    chain = build_uniform_chain(ChainSpec(c.N, c.delta, c.sigma))
    spec = eigendecompose(chain)
    report = {
        "uniform_chain": {
            "eigenvalues": spec.eigenvalues.tolist(),
            "symmetry": check_mirror_symmetry(spec, 1e-10).to_dict(),
        },
        "engineered_chain": {
            "eigenvalues": eigendecompose(build_engineered_chain(ChainSpec(c.N, c.delta, 0.0, True))).eigenvalues.tolist(),
        },
        "forbidden_sigma_over_kappa": forbidden_sigma_ratios(c.N),
    }
    if "B" in cfg.schemes:
        combined = attach_wire(chain, WireSpec(cfg.wire.L, cfg.wire.kappa, cfg.wire.g))
        report["bound_states"] = detect_bound_states(combined, cfg.wire.kappa).to_dict()
    return report


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required")
    text = Path(args.config).read_text(encoding="utf-8")
    if getattr(args, "seed", None) is not None:
        doc = json.loads(text)
        doc.setdefault("disorder", {})["base_seed"] = args.seed
        return parse_config(doc)
    return parse_config(text)


def _out_dir(args, cfg: ExperimentConfig) -> str:
    return args.out or cfg.outputs.directory or os.environ.get(OUT_ENV) or "out"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mirror-transfer",
                                     description="Mirror-image state transfer: engineered chain vs wire time reversal.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", metavar="PATH", help="JSON experiment config")
        if out:
            p.add_argument("--out", metavar="DIR", help=f"output directory (default: ${OUT_ENV} or ./out)")
            p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes for ensembles")
            p.add_argument("--seed", type=int, default=None, help="override disorder.base_seed")
            p.add_argument("--dry-run", action="store_true", help="validate and print the resolved config only")

    common(sub.add_parser("validate", help="validate a config and print it fully resolved"), out=False)
    common(sub.add_parser("run", help="run the configured experiment"))
    common(sub.add_parser("sweep", help="run disorder ensembles over the delta x t_f grid"))
    sp = sub.add_parser("spectrum", help="eigenvalues, symmetry and bound-state report")
    common(sp, out=False)
    sp.add_argument("--out", metavar="DIR", help="write spectrum.json here instead of stdout")
    fp = sub.add_parser("forbidden", help="print forbidden sigma/kappa values")
    fp.add_argument("--N", type=int, default=None)
    fp.add_argument("--config", metavar="PATH")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "forbidden":
            N = args.N if args.N is not None else (_load(args).chain.N if args.config else 5)
            for x in forbidden_sigma_ratios(N):
                print(repr(x))
            return 0
        cfg = _load(args)
        if args.command == "validate" or getattr(args, "dry_run", False):
            print(cfg.to_json())
            return 0
        if args.command == "spectrum":
            text = _dumps(spectrum_report(cfg))
            if args.out:
                write_outputs({"spectrum.json": text}, args.out)
            else:
                sys.stdout.write(text)
            return 0
        execute_experiment(cfg, _out_dir(args, cfg), jobs=max(1, args.jobs),
                           force_ensemble=args.command == "sweep")
        return 0
    except (ConfigError, GraphError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

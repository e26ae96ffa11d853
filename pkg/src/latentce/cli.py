"""Command-line interface for the full pipeline.

Exit codes: 0 success, 1 domain/runtime error, 2 usage error. All
randomness is controlled by --seed flags. The default artifact directory is
$LATENT_CE_HOME or ./artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import corpus, counterfactual, dae, metrics, pipeline, probes
from .errors import LatentCeError


def artifact_home() -> Path:
    return Path(os.environ.get("LATENT_CE_HOME", "artifacts"))


def _add_common(parser, data=True, checkpoint=False, probe=False):
    if data:
        parser.add_argument("--data", default=None, help="corpus manifest path")
    if checkpoint:
        parser.add_argument("--checkpoint", default=None, help="model checkpoint path")
    if probe:
        parser.add_argument("--probe", default=None, help="probe artifact JSON path")


def _resolve(value, default_name):
    return Path(value) if value else artifact_home() / default_name


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latentce", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", help="generate the synthetic graded corpus")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="data")
    p.add_argument("--fractions", default="0.6,0.2,0.1,0.1")

    p = sub.add_parser("train", help="train the diffusion autoencoder")
    _add_common(p)
    p.add_argument("--steps", type=int, default=20_000)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--out", default=None, help="checkpoint output path")

    p = sub.add_parser("embed", help="cache semantic latents for a split")
    _add_common(p, checkpoint=True)
    p.add_argument("--split", default="train-probe", choices=corpus.SPLITS)
    p.add_argument("--out", default=None)

    p = sub.add_parser("fit-probe", help="fit a binary hyperplane on probe latents")
    _add_common(p, checkpoint=True)
    p.add_argument("--kind", default="svm", choices=["svm", "logistic"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="probe JSON output path")

    p = sub.add_parser("calibrate", help="fit distance-to-grade calibration")
    _add_common(p, checkpoint=True, probe=True)
    p.add_argument("--mode", default=probes.MEANS_OF_EXTREMES, choices=probes.CALIBRATION_MODES)
    p.add_argument("--degree", type=int, default=1)

    p = sub.add_parser("evaluate", help="held-out evaluation report")
    _add_common(p, checkpoint=True, probe=True)
    p.add_argument("--out", default=None, help="report path prefix (.json/.txt)")
    p.add_argument("--recon-count", type=int, default=16)

    p = sub.add_parser("counterfactual", help="generate counterfactual frames")
    _add_common(p, checkpoint=True, probe=True)
    p.add_argument("--id", type=int, required=True)
    p.add_argument("--mode", default=counterfactual.MODE_TARGET, choices=counterfactual.MODES)
    p.add_argument("--grade", type=float, default=None)
    p.add_argument("--sweep", default=None, help="comma-separated grades")
    p.add_argument("--allow-extrapolation", action="store_true")
    p.add_argument("--out", default="ce")

    p = sub.add_parser("project", help="PCA projection of a split's latents")
    _add_common(p, checkpoint=True)
    p.add_argument("--split", default="test", choices=corpus.SPLITS)
    p.add_argument("--out", default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_common(p, checkpoint=True, probe=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8713)
    p.add_argument("--max-workers", type=int, default=2)
    return parser


def _load_corpus(args):
    return corpus.load_corpus(_resolve(args.data, "data/manifest.csv"))


def _load_model(args):
    return dae.load_checkpoint(_resolve(args.checkpoint, "model.daec"))


def _load_probe(args):
    return probes.load_probe(_resolve(args.probe, "probe.json"))


def run(args) -> int:
    if args.command == "generate-data":
        fractions = tuple(float(f) for f in args.fractions.split(","))
        manifest = corpus.generate_corpus(args.n, args.seed, fractions, args.out)
        print(f"wrote {args.n} samples, manifest at {manifest}")
        return 0

    if args.command == "train":
        samples = _load_corpus(args)
        config = dae.TrainConfig(
            total_steps=args.steps, batch_size=args.batch_size, lr=args.lr,
            seed=args.seed, T=args.T,
        )
        model, trace = dae.train(samples, config)
        out = _resolve(args.out, "model.daec")
        out.parent.mkdir(parents=True, exist_ok=True)
        dae.save_checkpoint(model, out)
        print(f"trained {args.steps} steps; first loss {trace[0][1]:.4f}, "
              f"last loss {trace[-1][1]:.4f}; checkpoint at {out}")
        return 0

    if args.command == "embed":
        samples = _load_corpus(args)
        model = _load_model(args)
        out = _resolve(args.out, f"latents_{args.split}.zsem")
        out.parent.mkdir(parents=True, exist_ok=True)
        records = dae.embed_corpus(model, samples, args.split, cache_path=out)
        print(f"embedded {len(records)} latents to {out}")
        return 0

    if args.command == "fit-probe":
        samples = _load_corpus(args)
        model = _load_model(args)
        zmap = pipeline.embed_split(model, samples, "train-probe")
        plane = pipeline.fit_probe(samples, zmap, kind=args.kind, seed=args.seed)
        out = _resolve(args.out, "probe.json")
        out.parent.mkdir(parents=True, exist_ok=True)
        probes.save_probe(out, plane)
        print(f"fitted {args.kind} hyperplane (D={plane.n.size}) to {out}")
        return 0

    if args.command == "calibrate":
        samples = _load_corpus(args)
        model = _load_model(args)
        probe_path = _resolve(args.probe, "probe.json")
        plane, _ = probes.load_probe(probe_path)
        zmap = pipeline.embed_split(model, samples, "calibrate")
        cal = pipeline.fit_calibration_for(samples, zmap, plane, args.mode, args.degree)
        probes.save_probe(probe_path, plane, cal)
        print(f"calibration ({cal.mode}, degree {cal.degree}) written to {probe_path}")
        return 0

    if args.command == "evaluate":
        samples = _load_corpus(args)
        model = _load_model(args)
        plane, cal = _load_probe(args)
        report = pipeline.evaluate(model, samples, plane, cal, recon_count=args.recon_count)
        out = _resolve(args.out, "report")
        out.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{out}.json").write_text(report.to_json(), encoding="utf-8")
        Path(f"{out}.txt").write_text(report.to_table() + "\n", encoding="utf-8")
        print(report.to_table())
        return 0

    if args.command == "counterfactual":
        samples = _load_corpus(args)
        model = _load_model(args)
        plane, cal = _load_probe(args)
        by_id = {s.id: s for s in samples}
        if args.id not in by_id:
            raise LatentCeError(f"sample id {args.id} not in corpus")
        sweep_grades = (
            [float(g) for g in args.sweep.split(",")] if args.sweep else None
        )
        request = counterfactual.CounterfactualRequest(
            mode=args.mode, sample_id=args.id, target_grade=args.grade,
            sweep_grades=sweep_grades, allow_extrapolation=args.allow_extrapolation,
        )
        result = counterfactual.generate_ce(
            model, plane, cal, request, image=by_id[args.id].image
        )
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"ce_{args.id}.json").write_text(result.to_json(), encoding="utf-8")
        for grade, frame in zip(result.requested_grades, result.images):
            corpus.write_pgm(out_dir / f"ce_{args.id}_{grade:g}.pgm", frame)
        if result.reconstruction is not None:
            corpus.write_pgm(out_dir / f"ce_{args.id}_recon.pgm", result.reconstruction)
        print(f"wrote {len(result.images)} frames to {out_dir}")
        return 0

    if args.command == "project":
        samples = _load_corpus(args)
        model = _load_model(args)
        subset = corpus.by_split(samples, args.split)
        zmap = pipeline.embed_split(model, samples, args.split)
        coords, ratio, warning = metrics.pca_project(np.stack([zmap[s.id] for s in subset]))
        payload = {
            "split": args.split,
            "ids": [s.id for s in subset],
            "grades": [s.ordinal_grade for s in subset],
            "coords": coords.tolist(),
            "explained_variance_ratio": ratio.tolist(),
            "warning": warning,
        }
        out = _resolve(args.out, f"projection_{args.split}.json")
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(payload), encoding="utf-8")
        print(f"projection written to {out}")
        return 0

    if args.command == "serve":
        import uvicorn

        from .service import ServiceContext, create_app

        ctx = ServiceContext.load(
            manifest=_resolve(args.data, "data/manifest.csv"),
            checkpoint=_resolve(args.checkpoint, "model.daec"),
            probe=_resolve(args.probe, "probe.json"),
            max_workers=args.max_workers,
        )
        uvicorn.run(create_app(ctx), host=args.host, port=args.port)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except LatentCeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Builds the long-running artifacts used by test_acceptance.py.

Training the full model takes ~45 minutes on one CPU core, so the artifacts
are cached under .acceptance/ at the repository root and reused across test
runs.  Run this module directly to (re)build the cache ahead of time:

    python3 tests/acceptance_build.py
"""

import json
import time
from pathlib import Path

from latentce import corpus, dae, pipeline, probes

ROOT = Path(__file__).resolve().parent.parent / ".acceptance"

CORPUS_N = 1000
CORPUS_SEED = 42


def build_artifacts(root: Path = ROOT) -> dict:
    """Generate corpus, train the model, embed splits, fit probes.

    Skips any stage whose outputs already exist.  Returns a dict of paths
    plus the build metadata (train wall time, trace).
    """
    root.mkdir(parents=True, exist_ok=True)
    manifest = root / "data" / "manifest.csv"
    checkpoint = root / "checkpoint.dae"
    meta_path = root / "build_meta.json"

    if not manifest.exists():
        corpus.generate_corpus(CORPUS_N, CORPUS_SEED, out_dir=root / "data")
    samples = corpus.load_corpus(manifest)

    if not checkpoint.exists():
        config = dae.TrainConfig()  # 20k steps, batch 64, lr 1e-4, seed 42
        train_split = corpus.by_split(samples, "train-dae")
        t0 = time.time()
        model, trace = dae.train(train_split, config)
        train_seconds = time.time() - t0
        dae.save_checkpoint(model, checkpoint)
        meta_path.write_text(json.dumps({
            "train_seconds": train_seconds,
            "trace": trace,
            "config": {"total_steps": config.total_steps,
                       "batch_size": config.batch_size,
                       "lr": config.lr, "seed": config.seed},
        }))
    else:
        model = dae.load_checkpoint(checkpoint)

    latent_paths = {}
    for split in ("train-probe", "calibrate", "test"):
        path = root / f"latents_{split.replace('-', '_')}.bin"
        if not path.exists():
            records = dae.embed_corpus(model, samples, split)
            dae.save_latents(path, records)
        latent_paths[split] = path

    svm_path = root / "probe_svm.json"
    logistic_path = root / "probe_logistic.json"
    if not svm_path.exists() or not logistic_path.exists():
        zmap = pipeline.latents_by_id(dae.load_latents(latent_paths["train-probe"]))
        cal_zmap = pipeline.latents_by_id(dae.load_latents(latent_paths["calibrate"]))
        svm = pipeline.fit_probe(samples, zmap, kind="svm")
        cal = pipeline.fit_calibration_for(samples, cal_zmap, svm,
                                           mode=probes.MEANS_OF_EXTREMES)
        probes.save_probe(svm_path, svm, cal)
        logistic = pipeline.fit_probe(samples, zmap, kind="logistic")
        probes.save_probe(logistic_path, logistic)

    return {
        "manifest": manifest,
        "checkpoint": checkpoint,
        "meta": meta_path,
        "latents": latent_paths,
        "svm_probe": svm_path,
        "logistic_probe": logistic_path,
    }


if __name__ == "__main__":
    paths = build_artifacts()
    print("artifacts ready:")
    for key, value in paths.items():
        print(f"  {key}: {value}")

"""Draw archives, posterior summaries, and the reproducibility manifest."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .config import RunConfig, config_hash, config_lines

__all__ = ["write_outputs", "write_binary_draws", "read_binary_draws", "summarize"]

BINARY_MAGIC = b"SHRK"


def summarize(store, column_names=None) -> dict:
    """Per-coefficient posterior summary consistent with the draw archive:
    mean, sd, the 2.5/50/97.5 percentiles, the inclusion probability for
    selection families, and the median-probability-model flag."""
    p = store.p
    names = list(column_names) if column_names else [f"beta_{j + 1}" for j in range(p)]
    pip = store.pip()
    qs = np.percentile(store.beta, [2.5, 50.0, 97.5], axis=0)
    coef = []
    for j in range(p):
        entry = {
            "name": names[j],
            "mean": float(store.beta[:, j].mean()),
            "sd": float(store.beta[:, j].std(ddof=1)),
            "q2.5": float(qs[0, j]),
            "q50": float(qs[1, j]),
            "q97.5": float(qs[2, j]),
        }
        if pip is not None:
            entry["pip"] = float(pip[j])
            entry["in_median_model"] = bool(pip[j] > 0.5)
        coef.append(entry)
    sq = np.percentile(store.sigma2, [2.5, 50.0, 97.5])
    return {
        "n_draws": int(store.n_draws),
        "family": store.family,
        "scaling": store.scaling,
        "coefficients": coef,
        "sigma2": {
            "mean": float(store.sigma2.mean()),
            "sd": float(store.sigma2.std(ddof=1)),
            "q2.5": float(sq[0]), "q50": float(sq[1]), "q97.5": float(sq[2]),
        },
    }


def _draws_matrix(store):
    cols = [store.chain_id[:, None].astype(float), store.iteration[:, None].astype(float),
            store.beta, store.sigma2[:, None]]
    header = ["chain", "iter"] + [f"beta_{j + 1}" for j in range(store.p)] + ["sigma2"]
    if store.gamma is not None:
        cols.append(store.gamma.astype(float))
        header += [f"gamma_{j + 1}" for j in range(store.p)]
    return header, np.hstack(cols)


def write_outputs(store, cfg: RunConfig, outdir, column_names=None) -> dict:
    """Write draws.csv, summary.json, and run_manifest.txt; optionally the
    raw binary matrix. Returns the paths written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {}

    header, mat = _draws_matrix(store)
    draws_path = outdir / "draws.csv"
    with open(draws_path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in mat:
            fh.write(",".join(repr(v) for v in row) + "\n")
    paths["draws"] = draws_path

    summary_path = outdir / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summarize(store, column_names), fh, indent=2)
        fh.write("\n")
    paths["summary"] = summary_path

    manifest_path = outdir / "run_manifest.txt"
    with open(manifest_path, "w") as fh:
        fh.write("# shrinkreg run manifest; replay with --config <this file>\n")
        fh.write(f"# config_hash = {config_hash(cfg)}\n")
        fh.write(f"# numpy = {np.__version__}\n")
        for line in config_lines(cfg):
            fh.write(line + "\n")
    paths["manifest"] = manifest_path

    if cfg.values.get("output.write_binary"):
        paths["binary"] = write_binary_draws(mat, outdir / "draws.bin")
    return paths


def write_binary_draws(mat: np.ndarray, path) -> Path:
    """Raw little-endian float64 dump: 16-byte header with magic 'SHRK',
    u32 rows, u32 cols (4 bytes reserved), then the row-major matrix."""
    path = Path(path)
    rows, cols = mat.shape
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(b"\x00" * 4)
        fh.write(np.ascontiguousarray(mat, dtype="<f8").tobytes())
    return path


def read_binary_draws(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != BINARY_MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        rows, cols = struct.unpack("<II", fh.read(8))
        fh.read(4)
        data = np.frombuffer(fh.read(rows * cols * 8), dtype="<f8")
    return data.reshape(rows, cols)

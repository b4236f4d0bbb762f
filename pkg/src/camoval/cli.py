"""Command-line frontend: batch evaluation, retrieval, fusion, and controls.

Per-image failures never abort a batch; they are collected into the report's
failures section and reflected in the exit code (0 only when no row failed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from PIL import Image

from . import cemb, codmetrics, divergence, structural
from .controls import CONTRAST_LAMBDA, contrast_control
from .corpus import (MASK_THRESHOLD, DatasetManifest, ManifestEntry, RegionMask,
                     SUBSETS, load_image, load_manifest, load_sample,
                     validate_manifest)
from .errors import CamovalError, DimMismatch, MissingPrediction
from .featstats import FeatureSet, KernelConfig, frechet_distance, gaussian_stats, kid_mmd2
from .fusion import fuse_visual
from .report import EvalReport, TOOLKIT_VERSION, fmt
from .retrieval import (FeatureGrid, KnowledgeBase, global_avg_pool, masked_avg_pool,
                        retrieve_topk)

WORKERS_ENV = "CAMOVAL_WORKERS"


def _worker_count(requested: int | None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        return max(1, int(env))
    if requested is not None:
        return max(1, requested)
    return os.cpu_count() or 1


def _load_mask(path: str, width: int, height: int) -> RegionMask:
    with Image.open(path) as im:
        raw = np.asarray(im.convert("L"), dtype=np.uint8)
    if raw.shape != (height, width):
        raw = np.asarray(
            Image.fromarray(raw).resize((width, height), Image.NEAREST), dtype=np.uint8
        )
    return RegionMask((raw >= MASK_THRESHOLD).astype(np.uint8))


# ---------------------------------------------------------------------------
# eval-gen

def _eval_gen_row(task: tuple[int, ManifestEntry, str, str, str | None, int, float]):
    index, entry, image_path, mask_path, reference_path, bins, epsilon = task
    try:
        sample = load_sample(image_path, mask_path, id=entry.id, subset=entry.subset)
        result = divergence.klbf(sample.image, sample.mask, bins=bins, epsilon=epsilon)
        row = {
            "id": entry.id,
            "subset": entry.subset,
            "kl_r": result.kl_r,
            "kl_g": result.kl_g,
            "kl_b": result.kl_b,
            "kl_bf": result.kl_bf,
            "foreground_pixels": result.foreground_pixels,
            "background_pixels": result.background_pixels,
            "ssim": None,
            "status": "ok",
        }
        if reference_path is not None:
            reference = load_image(reference_path)
            row["ssim"] = structural.ssim(sample.image, reference).mean_ssim
        return index, row, None
    except Exception as exc:
        return index, None, f"{type(exc).__name__}: {exc}"


def _feature_lookup(path: str) -> tuple[dict[str, np.ndarray], str]:
    data = cemb.read_cemb(path)
    if data.grid_h != 1 or data.grid_w != 1:
        raise DimMismatch(
            f"{path}: expected pooled features (grid 1x1), got "
            f"{data.grid_h}x{data.grid_w}"
        )
    if not data.ids:
        raise MissingPrediction(f"{path}: sidecar index with sample ids is required")
    vectors = data.data.reshape(data.count, data.dim)
    return {rid: vectors[i] for i, rid in enumerate(data.ids)}, cemb.file_digest(path)


def _distribution_metrics(real: np.ndarray, gen: np.ndarray,
                          cfg: KernelConfig) -> dict:
    out: dict = {"fid": None, "kid_mean": None, "kid_stddev": None}
    if len(real) >= 2 and len(gen) >= 2:
        out["fid"] = frechet_distance(
            gaussian_stats(FeatureSet(real)), gaussian_stats(FeatureSet(gen))
        )
        block = min(cfg.block_size or 1000, len(real), len(gen))
        kid = kid_mmd2(FeatureSet(real), FeatureSet(gen),
                       KernelConfig(degree=cfg.degree, gamma=cfg.gamma, coef0=cfg.coef0,
                                    block_size=block, blocks=cfg.blocks, seed=cfg.seed))
        out["kid_mean"] = kid.mean
        out["kid_stddev"] = kid.stddev
    return out


def cmd_eval_gen(args) -> int:
    manifest = load_manifest(args.manifest)
    real_lookup, real_digest = _feature_lookup(args.features_real)
    gen_lookup, gen_digest = _feature_lookup(args.features_gen)
    missing = [e.id for e in manifest.entries
               if e.id not in real_lookup or e.id not in gen_lookup]
    if missing:
        raise MissingPrediction(
            f"feature files lack entries for ids: {', '.join(sorted(missing))}"
        )

    cfg = KernelConfig(block_size=args.kid_block_size, blocks=args.kid_blocks,
                       seed=args.seed)
    report = EvalReport(
        command="eval-gen",
        config={
            "bins": args.bins,
            "epsilon": args.epsilon,
            "mask_threshold": MASK_THRESHOLD,
            "ssim_window": structural.WINDOW,
            "ssim_sigma": structural.SIGMA,
            "ssim_k1": structural.K1,
            "ssim_k2": structural.K2,
            "ssim_dynamic_range": structural.DYNAMIC_RANGE,
            "ssim_colorspace": "luminance",
            "kid_degree": cfg.degree,
            "kid_gamma": "1/dim",
            "kid_coef0": cfg.coef0,
            "kid_block_size": args.kid_block_size or "min(1000,N)",
            "kid_blocks": cfg.blocks,
            "seed": args.seed,
            "retrieval_k_default": 3,
            "contrast_lambda": CONTRAST_LAMBDA,
            "features_real_digest": real_digest,
            "features_gen_digest": gen_digest,
        },
        row_fields=("id", "subset", "kl_r", "kl_g", "kl_b", "kl_bf",
                    "foreground_pixels", "background_pixels", "ssim", "status"),
        notes=[
            "kl_bf uses binarized masks (threshold 128); lower = stronger camouflage",
            "fid/kid are set-level and keyed to the recorded feature-file digests",
        ],
    )

    tasks = []
    for index, entry in enumerate(manifest.entries):
        ref = manifest.resolve(entry.reference_path) if entry.reference_path else None
        tasks.append((index, entry, manifest.resolve(entry.image_path),
                      manifest.resolve(entry.mask_path), ref, args.bins, args.epsilon))

    workers = _worker_count(args.workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_eval_gen_row, tasks))
    else:
        outcomes = [_eval_gen_row(t) for t in tasks]
    outcomes.sort(key=lambda item: item[0])

    for (index, row, error), task in zip(outcomes, tasks):
        if row is not None:
            report.rows.append(row)
        else:
            report.failures.append((task[1].id, error))

    ok_rows = report.rows
    scopes = [(s, [r for r in ok_rows if r["subset"] == s]) for s in SUBSETS]
    scopes.append(("overall", ok_rows))
    for scope, rows in scopes:
        ids = [r["id"] for r in rows]
        values: dict = {"count": len(rows)}
        if rows:
            values["kl_bf_mean"] = float(np.mean([r["kl_bf"] for r in rows]))
            ssims = [r["ssim"] for r in rows if r["ssim"] is not None]
            values["ssim_mean"] = float(np.mean(ssims)) if ssims else None
        else:
            values["kl_bf_mean"] = None
            values["ssim_mean"] = None
        real = np.array([real_lookup[i] for i in ids], dtype=np.float64)
        gen = np.array([gen_lookup[i] for i in ids], dtype=np.float64)
        values.update(
            _distribution_metrics(real, gen, cfg) if len(ids) >= 2
            else {"fid": None, "kid_mean": None, "kid_stddev": None}
        )
        report.aggregates.append((scope, values))

    report.write(args.out)
    print(f"wrote {args.out} ({len(report.rows)} rows, {len(report.failures)} failures)")
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# eval-cod

def _load_prediction(path: str) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    return arr.astype(np.float64) / 255.0


def cmd_eval_cod(args) -> int:
    manifest = load_manifest(args.manifest)
    pred_paths = {}
    missing = []
    for entry in manifest.entries:
        path = os.path.join(args.pred_dir, entry.id + ".png")
        if os.path.isfile(path):
            pred_paths[entry.id] = path
        else:
            missing.append(entry.id)
    if missing:
        raise MissingPrediction(f"no prediction for ids: {', '.join(missing)}")

    report = EvalReport(
        command="eval-cod",
        config={
            "s_alpha": codmetrics.S_ALPHA,
            "f_beta2": codmetrics.F_BETA2,
            "wf_beta2": codmetrics.WF_BETA2,
            "e_thresholds": codmetrics.E_THRESHOLDS,
            "e_variant": "mean",
            "mask_threshold": MASK_THRESHOLD,
            "prediction_scale": 255,
        },
        row_fields=("id", "subset", "mae", "s_alpha", "e_phi", "f_beta", "f_beta_w",
                    "status"),
    )
    for entry in manifest.entries:
        try:
            gt = load_sample(manifest.resolve(entry.image_path),
                             manifest.resolve(entry.mask_path),
                             id=entry.id, subset=entry.subset).mask
            pred = _load_prediction(pred_paths[entry.id])
            if pred.shape != gt.data.shape:
                pred_img = Image.fromarray((pred * 255).astype(np.uint8))
                pred_img = pred_img.resize((gt.width, gt.height), Image.BILINEAR)
                pred = np.asarray(pred_img, dtype=np.uint8).astype(np.float64) / 255.0
            scores = codmetrics.score_pair(pred, gt)
            report.rows.append({
                "id": entry.id, "subset": entry.subset,
                "mae": scores.mae, "s_alpha": scores.s_alpha, "e_phi": scores.e_phi,
                "f_beta": scores.f_beta, "f_beta_w": scores.f_beta_w, "status": "ok",
            })
        except Exception as exc:
            report.failures.append((entry.id, f"{type(exc).__name__}: {exc}"))

    if report.rows:
        means = {
            metric: float(np.mean([r[metric] for r in report.rows]))
            for metric in ("mae", "s_alpha", "e_phi", "f_beta", "f_beta_w")
        }
        means["count"] = len(report.rows)
        report.aggregates.append(("overall", means))
    report.write(args.out)
    print(f"wrote {args.out} ({len(report.rows)} rows, {len(report.failures)} failures)")
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# retrieve / fuse / controls / validate

def _single_grid(path: str) -> FeatureGrid:
    data = cemb.read_cemb(path)
    if data.count != 1:
        raise DimMismatch(f"{path}: expected exactly 1 record, got {data.count}")
    return FeatureGrid(data.data[0].astype(np.float64))


def cmd_retrieve(args) -> int:
    target_file = cemb.read_cemb(args.target_grid)
    if target_file.count != 1:
        raise DimMismatch(f"{args.target_grid}: expected exactly 1 record")
    grid = FeatureGrid(target_file.data[0].astype(np.float64))
    if args.mask is not None:
        # the mask lives in pixel space; its size is independent of the grid
        with Image.open(args.mask) as im:
            raw = np.asarray(im.convert("L"), dtype=np.uint8)
        mask = RegionMask((raw >= MASK_THRESHOLD).astype(np.uint8))
        target = masked_avg_pool(grid, mask)
    else:
        target = global_avg_pool(grid)

    base_file = cemb.read_cemb(args.base)
    if base_file.grid_h != 1 or base_file.grid_w != 1:
        raise DimMismatch(f"{args.base}: knowledge base must hold pooled embeddings")
    if not base_file.ids:
        raise DimMismatch(f"{args.base}: sidecar index with candidate ids is required")
    base = KnowledgeBase(
        ids=base_file.ids,
        embeddings=base_file.data.reshape(base_file.count, base_file.dim).astype(np.float64),
    )
    result = retrieve_topk(target, base, args.k)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"camoval retrieve k={args.k} base_size={base.size}\n")
        fh.write("rank,id,score\n")
        for rank, (rid, score) in enumerate(result.ranked, 1):
            fh.write(f"{rank},{rid},{fmt(score)}\n")
    print(f"wrote {args.out}")
    return 0


def cmd_fuse(args) -> int:
    target = _single_grid(args.target_grid)
    retrieved_file = cemb.read_cemb(args.retrieved)
    retrieved = [FeatureGrid(retrieved_file.data[i].astype(np.float64))
                 for i in range(retrieved_file.count)]
    with Image.open(args.mask) as im:
        raw = np.asarray(im.convert("L"), dtype=np.uint8)
    mask = RegionMask((raw >= MASK_THRESHOLD).astype(np.uint8))
    fused = fuse_visual(target, retrieved, mask, args.mode)
    cemb.write_cemb(
        args.out,
        fused.data[None, :, :, :].astype(np.float32),
        ids=["fused"],
        metadata={"mode": args.mode, "k": str(len(retrieved))},
    )
    print(f"wrote {args.out}")
    return 0


def cmd_controls(args) -> int:
    manifest = load_manifest(args.manifest)
    os.makedirs(args.out_dir, exist_ok=True)
    report = EvalReport(
        command="controls",
        config={"mode": args.mode, "contrast_lambda": CONTRAST_LAMBDA},
        row_fields=("id", "subset", "control_path", "status"),
        notes=["contrast control is a documented stand-in "
               "(mean-directed contraction, white inference background)"],
    )
    lines = []
    for entry in manifest.entries:
        try:
            sample = load_sample(manifest.resolve(entry.image_path),
                                 manifest.resolve(entry.mask_path),
                                 id=entry.id, subset=entry.subset)
            control = contrast_control(sample, args.mode)
            out_path = os.path.join(args.out_dir, f"{entry.id}_contrast.png")
            Image.fromarray(control.image.data).save(out_path)
            report.rows.append({"id": entry.id, "subset": entry.subset,
                                "control_path": out_path, "status": "ok"})
            lines.append((entry, out_path))
        except Exception as exc:
            report.failures.append((entry.id, f"{type(exc).__name__}: {exc}"))
    manifest_out = os.path.join(args.out_dir, "controls_manifest.jsonl")
    with open(manifest_out, "w", encoding="utf-8") as fh:
        for entry, out_path in lines:
            fh.write(json.dumps({
                "id": entry.id,
                "image_path": entry.image_path,
                "mask_path": entry.mask_path,
                "subset": entry.subset,
                "contrast_path": os.path.relpath(out_path, args.out_dir),
                "mode": args.mode,
            }) + "\n")
    report.write(os.path.join(args.out_dir, "controls_report.txt"))
    print(f"wrote {manifest_out} ({len(report.rows)} controls, "
          f"{len(report.failures)} failures)")
    return 0 if report.ok else 1


def cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    result = validate_manifest(manifest)
    for subset in SUBSETS:
        print(f"{subset}: {result.subset_counts[subset]}")
    print(f"valid: {result.valid_count}")
    print(f"failures: {len(result.failures)}")
    for rid, reason in result.failures:
        print(f"  {rid}: {reason}")
    return 0 if result.ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camoval",
        description="Camouflaged-image synthesis evaluation toolkit",
    )
    parser.add_argument("--version", action="version", version=TOOLKIT_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-gen", help="KL_BF/SSIM/FID/KID over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--features-real", required=True)
    p.add_argument("--features-gen", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bins", type=int, default=divergence.DEFAULT_BINS)
    p.add_argument("--epsilon", type=float, default=divergence.DEFAULT_EPSILON)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kid-block-size", type=int, default=None)
    p.add_argument("--kid-blocks", type=int, default=10)
    p.set_defaults(func=cmd_eval_gen)

    p = sub.add_parser("eval-cod", help="five-metric COD scoring of predictions")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_cod)

    p = sub.add_parser("retrieve", help="top-k background retrieval")
    p.add_argument("--target-grid", required=True)
    p.add_argument("--base", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--mask", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("fuse", help="fuse retrieved grids into the target grid")
    p.add_argument("--target-grid", required=True)
    p.add_argument("--retrieved", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--mode", choices=("training", "inference"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("controls", help="emit contrast control images")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("training", "inference"), required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_controls)

    p = sub.add_parser("validate", help="check a manifest's entries")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CamovalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands: prepare-data, train, eval, infer, sweep, plot.  Dataset
roots default to the CTXSEARCH_DATA_ROOT environment variable; usage
errors exit with status 2, runtime failures with 1 and a diagnostic on
stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ctxsearch.errors import CtxSearchError

DATA_ROOT_ENV = "CTXSEARCH_DATA_ROOT"


def _data_root(args) -> Path:
    root = args.root or os.environ.get(DATA_ROOT_ENV)
    if not root:
        raise CtxSearchError(
            f"no dataset root given; pass --root or set {DATA_ROOT_ENV}"
        )
    return Path(root)


def _load_index(path):
    from ctxsearch.data.manifest import read_manifest

    return read_manifest(path)


def _load_model(checkpoint_path):
    from ctxsearch.engine.checkpoint import load_checkpoint
    from ctxsearch.engine.config import TrainConfig
    from ctxsearch.engine.trainer import build_model

    payload = load_checkpoint(checkpoint_path)
    config = TrainConfig.from_dict(payload["config"])
    model = build_model(config)
    model.load_state_dict(payload["model"])
    model.eval()
    return model, config


# ------------------------------------------------------------- prepare-data


def _cmd_prepare_data(args) -> int:
    from ctxsearch.data.manifest import write_manifest

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.dataset == "synthetic":
        from ctxsearch.data.synthetic import make_synthetic, materialize
        from ctxsearch.data.types import SyntheticSpec

        spec = SyntheticSpec(
            num_identities=args.num_identities,
            instances_per_identity=args.instances,
            image_size=args.image_size,
            scene_correlation=args.correlation,
            seed=args.seed,
            twin_identities=args.twins,
        )
        train, test = make_synthetic(spec)
        train = materialize(train, out_dir / "images" / "train")
        test = materialize(test, out_dir / "images" / "test")
    elif args.dataset == "cuhk-sysu":
        from ctxsearch.data.cuhk_sysu import load_cuhk_sysu

        train, test = load_cuhk_sysu(_data_root(args))
    elif args.dataset == "prw":
        from ctxsearch.data.prw import load_prw

        train, test = load_prw(_data_root(args))
    else:
        from ctxsearch.data.movienet import build_movienet_cs

        train, test = build_movienet_cs(_data_root(args), cap_n=args.cap_n)

    for index in (train, test):
        path = out_dir / f"{index.split}.jsonl"
        write_manifest(index, path)
        print(
            f"{index.name} {index.split}: {len(index.images)} images, "
            f"{len(index.annotations)} boxes, {index.num_identities} identities "
            f"-> {path}"
        )
    return 0


# -------------------------------------------------------------------- train


def _cmd_train(args) -> int:
    from ctxsearch.engine.config import TrainConfig, load_config, save_config
    from ctxsearch.engine.trainer import Trainer

    if args.config:
        config = load_config(args.config)
    elif args.toy:
        config = TrainConfig.toy_profile()
    else:
        config = TrainConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.steps is not None:
        config.total_steps = args.steps

    index = _load_index(args.train_manifest)
    work_dir = Path(args.work_dir)
    if args.resume:
        trainer = Trainer.resume(args.resume, index, work_dir)
    else:
        trainer = Trainer(config, index, work_dir)
    save_config(trainer.config, work_dir / "config.yaml")
    total = trainer.total_steps

    def progress(record):
        if record["step"] % max(1, args.log_every) == 0:
            print(
                f"step {record['step']}/{total} lr={record['lr']:.5f} "
                f"total={record['total']:.4f} reid={record['reid']:.4f}"
            )

    trainer.run(checkpoint_every=args.checkpoint_every, callback=progress)
    final = work_dir / "final.ckpt"
    trainer.save(final)
    print(f"trained {trainer.step} steps -> {final}")
    return 0


# --------------------------------------------------------------------- eval


def _cmd_eval(args) -> int:
    from ctxsearch.data.protocol import build_protocol
    from ctxsearch.evaluation.modes import cross_dataset_eval, evaluate_protocol
    from ctxsearch.evaluation.reports import report_to_dict, save_report

    model, config = _load_model(args.checkpoint)
    index = _load_index(args.test_manifest)
    protocol = build_protocol(index, gallery_size=args.gallery_size, seed=args.seed)
    mode = "ground_truth" if args.boxes == "gt" else "detected"
    if args.cross_dataset:
        report = cross_dataset_eval(
            model, args.cross_dataset, index, protocol, config, mode=mode
        )
    else:
        report = evaluate_protocol(model, index, protocol, config, mode=mode)
    print(
        f"{report.dataset} [{report.mode}] gallery={report.gallery_size or 'all'}: "
        f"mAP={report.mean_ap:.4f} top1={report.top1:.4f} "
        f"({report.num_queries} queries)"
    )
    if args.out:
        save_report(report, args.out)
        print(f"report -> {args.out}")
    else:
        print(json.dumps(report_to_dict(report)))
    return 0


# -------------------------------------------------------------------- infer


def _cmd_infer(args) -> int:
    import numpy as np
    from PIL import Image

    from ctxsearch.engine.transforms import resize_to_range, to_input_tensor

    model, config = _load_model(args.checkpoint)
    with Image.open(args.image) as im:
        pixels = np.asarray(im.convert("RGB"))
    image = to_input_tensor(pixels)
    image, _, scale = resize_to_range(image, None, config.resize_min, config.resize_max)
    embeddings = model.forward_infer(image, score_threshold=args.score_threshold)
    rows = [
        {
            "box": [v / scale for v in emb.box],
            "score": emb.score,
            "embedding": emb.vector.tolist() if args.embeddings else None,
        }
        for emb in embeddings
    ]
    payload = {"image": str(args.image), "detections": rows}
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        print(f"{len(rows)} detections -> {args.out}")
    else:
        print(json.dumps(payload))
    return 0


# -------------------------------------------------------------------- sweep


def _cmd_sweep(args) -> int:
    from ctxsearch.evaluation.modes import gallery_sweep
    from ctxsearch.evaluation.reports import save_report

    model, config = _load_model(args.checkpoint)
    index = _load_index(args.test_manifest)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        raise CtxSearchError("no gallery sizes given")
    mode = "ground_truth" if args.boxes == "gt" else "detected"
    reports = gallery_sweep(model, index, sizes, config, seed=args.seed, mode=mode)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for report in reports:
        path = out_dir / f"gallery_{report.gallery_size}.json"
        save_report(report, path)
        print(
            f"gallery={report.gallery_size}: mAP={report.mean_ap:.4f} "
            f"top1={report.top1:.4f} -> {path}"
        )
    if args.plot:
        from ctxsearch.plotting import plot_gallery_sweep

        plot_path = out_dir / "sweep.png"
        plot_gallery_sweep(reports, plot_path)
        print(f"plot -> {plot_path}")
    return 0


# --------------------------------------------------------------------- plot


def _cmd_plot(args) -> int:
    from ctxsearch.evaluation.reports import load_report
    from ctxsearch.plotting import plot_report_rows

    rows = [load_report(path) for path in args.reports]
    plot_report_rows(rows, args.out)
    print(f"plot -> {args.out}")
    return 0


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxsearch",
        description="Person search with scene and group context.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare-data", help="build split manifests for a dataset")
    p.add_argument("--dataset", required=True,
                   choices=["cuhk-sysu", "prw", "movienet-cs", "synthetic"])
    p.add_argument("--root", help=f"dataset root (default ${DATA_ROOT_ENV})")
    p.add_argument("--out", required=True, help="output directory for manifests")
    p.add_argument("--cap-n", type=int, default=10,
                   help="instances kept per identity (movienet-cs)")
    p.add_argument("--num-identities", type=int, default=32)
    p.add_argument("--instances", type=int, default=6)
    p.add_argument("--image-size", type=int, default=64)
    p.add_argument("--correlation", type=float, default=0.0)
    p.add_argument("--twins", action="store_true",
                   help="give identity pairs matching appearances")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_prepare_data)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--train-manifest", required=True)
    p.add_argument("--work-dir", required=True)
    p.add_argument("--config", help="training config YAML")
    p.add_argument("--toy", action="store_true", help="use the desk-scale profile")
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--steps", type=int, help="override the planned step count")
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoint-every", type=int, default=200)
    p.add_argument("--log-every", type=int, default=20)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="run the search protocol")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--test-manifest", required=True)
    p.add_argument("--boxes", choices=["det", "gt"], default="det",
                   help="gallery boxes: detections or ground truth")
    p.add_argument("--gallery-size", type=int, default=None,
                   help="images per gallery (default: whole test set)")
    p.add_argument("--cross-dataset", metavar="SOURCE",
                   help="tag the report as a transfer from SOURCE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("infer", help="detect and embed people in one image")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--score-threshold", type=float, default=0.5)
    p.add_argument("--embeddings", action="store_true",
                   help="include embedding vectors in the output")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("sweep", help="evaluate across gallery sizes")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--test-manifest", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated gallery sizes")
    p.add_argument("--boxes", choices=["det", "gt"], default="det")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("plot", help="plot saved evaluation reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CtxSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Batch entry points: pretrain, finetune, surprisal."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import AdapterError
from .finetune import finetune_and_export
from .pretrain import Checkpoint, pretrain
from .specs import FinetuneGrid, PretrainSpec
from .surprisal import export_surprisal
from .textdata import load_utterances, mix_fifty_fifty


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_pretrain(args) -> None:
    overrides = json.loads(_read(args.spec)) if args.spec else {}
    spec = PretrainSpec(**overrides)
    train = load_utterances(_read(args.train))
    if args.train_b:
        if spec.genre != "mixed":
            raise AdapterError("--train-b requires genre=mixed")
        train = mix_fifty_fifty(train, load_utterances(_read(args.train_b)))
    dev = load_utterances(_read(args.dev))
    checkpoint = pretrain(spec, train, dev, args.out)
    print(json.dumps({"checkpoint": str(checkpoint.path)}))


def cmd_finetune(args) -> None:
    grid = FinetuneGrid()
    result = finetune_and_export(Checkpoint(Path(args.checkpoint)),
                                 [_read(p) for p in args.folds],
                                 grid, args.out, epochs=args.epochs,
                                 seed=args.seed)
    print(json.dumps(result.to_json()["winner"]))


def cmd_surprisal(args) -> None:
    tsv = export_surprisal(Checkpoint(Path(args.checkpoint)),
                           _read(args.benchmark))
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(tsv)
    print(json.dumps({"surprisal": args.out}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prosobench-adapter")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("pretrain")
    p.add_argument("--train", required=True, help="utterance-per-line text")
    p.add_argument("--train-b", default=None,
                   help="second source for genre=mixed (50-50 by tokens)")
    p.add_argument("--dev", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--spec", default=None, help="JSON of PretrainSpec fields")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("finetune")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--folds", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("surprisal")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--benchmark", required=True,
                   help="gold TSV (speaker utt idx word ...)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_surprisal)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("PROSO_ADAPTER_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        args.func(args)
    except (AdapterError, FileNotFoundError, json.JSONDecodeError,
            ValueError) as exc:
        print("prosobench-adapter: %s" % exc, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

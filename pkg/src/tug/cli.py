"""Command-line entry point: serve, lexicon utilities, embeddings synth,
simulate, assemble, export, train, evaluate, predict, pipeline."""

from __future__ import annotations

import argparse
import asyncio
import logging
import signal
import sys
from pathlib import Path

from . import datastore, embeddings, lexicon, metrics, simgen
from .config import Config, load_config
from .errors import TugError
from .model import (
    CompatibilityRegressor,
    TrainConfig,
    encode,
    load_params,
    pairs_to_inputs,
    predict_pair,
    save_params,
    train,
)
from .model.network import aux_estimate

log = logging.getLogger(__name__)


def _cfg(args, **overrides) -> Config:
    flags = {key: getattr(args, key, None) for key in Config.__dataclass_fields__}
    flags.update(overrides)
    return load_config(flags=flags, config_file=getattr(args, "config", None))


def _load_themes(cfg: Config):
    return lexicon.load_filtered_themes(cfg.lexicon_path(), cfg.max_difficulty)


def _llm_client(cfg: Config):
    if not cfg.llm_endpoint:
        raise TugError("llm scorer needs TUG_LLM_ENDPOINT or --llm-endpoint")
    return simgen.LLMClient(cfg.llm_endpoint, model=cfg.llm_model or None,
                            api_key=cfg.llm_api_key or None)


# -- subcommands ----------------------------------------------------------

def cmd_lexicon_validate(args) -> int:
    entries = lexicon.load_word_entries(args.path)
    themes = lexicon.themes_from_entries(entries)
    print(f"{args.path}: {len(entries)} words across {len(themes)} themes")
    for theme in themes:
        print(f"  {theme.name}: {len(theme.words)} words, "
              f"{len(theme.subcategories)} subcategories")
    return 0


def cmd_lexicon_filter(args) -> int:
    entries = lexicon.filter_by_difficulty(lexicon.load_word_entries(args.input),
                                           args.max)
    with open(args.output, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(f"{e.theme}\t{e.subcategory}\t{e.word}\t{e.difficulty}\n")
    print(f"kept {len(entries)} words rated <= {args.max} -> {args.output}")
    return 0


def cmd_embeddings_synth(args) -> int:
    cfg = _cfg(args)
    themes = lexicon.load_lexicon(cfg.lexicon_path())
    table = embeddings.synthetic_table(themes, cfg.seed)
    embeddings.save_table(table, args.out)
    print(f"wrote {len(table)} vectors (dim {table.dimension}) -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _cfg(args)
    themes = _load_themes(cfg)
    table = embeddings.load_table(cfg.embeddings)
    client = _llm_client(cfg) if cfg.scorer == "llm" else None
    rounds = simgen.generate_rounds(themes, table, args.rounds, cfg.seed,
                                    scorer=cfg.scorer, client=client)
    simgen.write_rounds(rounds, args.out)
    print(f"simulated {len(rounds)} scored rounds -> {args.out}")
    return 0


def cmd_assemble(args) -> int:
    cfg = _cfg(args)
    rounds = simgen.read_rounds(args.rounds)
    sessions = simgen.assemble_sessions(rounds, args.pairs, cfg.seed)
    datastore.write_dataset([simgen.session_to_pair(s) for s in sessions], args.out)
    if args.logs:
        store = datastore.Datastore(args.logs)
        for s in sessions:
            store.append(simgen.session_to_record(s))
    print(f"assembled {len(sessions)} sessions "
          f"({len(sessions) * simgen.ROUNDS_PER_SESSION} rounds) -> {args.out}")
    return 0


def cmd_export(args) -> int:
    cfg = _cfg(args)
    table = embeddings.load_table(cfg.embeddings) if cfg.embeddings else None
    pairs = datastore.export_training_set(args.logs, args.policy, table)
    datastore.write_dataset(pairs, args.out)
    print(f"exported {len(pairs)} labeled pairs ({args.policy}) -> {args.out}")
    return 0


def _dataset_inputs(cfg: Config, data_path):
    pairs = datastore.read_dataset(data_path)
    table = embeddings.load_table(cfg.embeddings)
    x, y = pairs_to_inputs(pairs, table)
    return pairs, x, y


def cmd_train(args) -> int:
    cfg = _cfg(args)
    _, x, y = _dataset_inputs(cfg, args.data)
    config = TrainConfig(alpha=cfg.alpha, lr=cfg.lr, batch_size=cfg.batch_size,
                         patience=cfg.patience, max_epochs=cfg.max_epochs,
                         seed=cfg.seed)
    params, report = train(x, y, config)
    save_params(params, args.out)
    print(f"trained on {len(y)} pairs: {report.epochs_run} epochs, "
          f"best epoch {report.best_epoch}, "
          f"final val loss {report.val_losses[-1]:.6f} -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _cfg(args)
    params = load_params(args.params)
    _, x, y = _dataset_inputs(cfg, args.data)
    z1 = encode(x[:, 0], params)
    z2 = encode(x[:, 1], params)
    preds = predict_pair(z1, z2)
    thresholds = [float(t) for t in args.thresholds.split(",")]
    report = metrics.evaluate(preds, y, thresholds)
    text = f"pairs evaluated       {len(y)}\n" + metrics.format_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote evaluation report -> {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_predict(args) -> int:
    cfg = _cfg(args)
    params = load_params(args.params)
    pairs, x, _ = _dataset_inputs(cfg, args.pair)
    z1 = encode(x[:, 0], params)
    z2 = encode(x[:, 1], params)
    preds = predict_pair(z1, z2)
    aux1 = aux_estimate(z1, params)
    aux2 = aux_estimate(z2, params)
    for pair, y_hat, y1, y2 in zip(pairs, preds, aux1, aux2):
        print(f"{pair.pair_id}\ty_hat={y_hat:.6f}\ty1={y1:.6f}\ty2={y2:.6f}")
    return 0


def cmd_serve(args) -> int:
    from .server import GameServer  # imported lazily: websockets not needed elsewhere

    cfg = _cfg(args)
    themes = _load_themes(cfg)
    table = embeddings.load_table(cfg.embeddings)
    store = datastore.Datastore(cfg.log_dir)
    server = GameServer(themes, table, store,
                        selection_timeout=cfg.selection_timeout,
                        share_timeout=cfg.share_timeout,
                        queue_timeout=cfg.queue_timeout,
                        drain_timeout=cfg.drain_timeout)

    async def main_async():
        stop = asyncio.Event()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            loop.add_signal_handler(sig, stop.set)
        await server.run(cfg.host, cfg.port, stop=stop)

    asyncio.run(main_async())
    return 0


def cmd_pipeline(args) -> int:
    """synth-embeddings -> simulate -> assemble -> train -> evaluate, all
    deterministic from one seed."""
    cfg = _cfg(args)
    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    themes_all = lexicon.load_lexicon(cfg.lexicon_path())
    themes = _load_themes(cfg)

    table = embeddings.synthetic_table(themes_all, cfg.seed)
    table_path = workdir / "embeddings.txt"
    embeddings.save_table(table, table_path)

    client = _llm_client(cfg) if cfg.scorer == "llm" else None
    # small surplus over 10 per pair so every bucket allocation stays feasible
    n_rounds = args.pairs * simgen.ROUNDS_PER_SESSION + args.pairs // 2 + 50
    rounds = simgen.generate_rounds(themes, table, n_rounds, cfg.seed,
                                    scorer=cfg.scorer, client=client)
    rounds_path = workdir / "rounds.jsonl"
    simgen.write_rounds(rounds, rounds_path)

    sessions = simgen.assemble_sessions(rounds, args.pairs, cfg.seed)
    pairs = [simgen.session_to_pair(s) for s in sessions]
    dataset_path = workdir / "dataset.jsonl"
    datastore.write_dataset(pairs, dataset_path)

    x, y = pairs_to_inputs(pairs, table)
    config = TrainConfig(alpha=cfg.alpha, lr=cfg.lr, batch_size=cfg.batch_size,
                         patience=cfg.patience, max_epochs=cfg.max_epochs,
                         seed=cfg.seed)
    params, report = train(x, y, config)
    params_path = workdir / "params.npz"
    save_params(params, params_path)

    z1 = encode(x[:, 0], params)
    z2 = encode(x[:, 1], params)
    preds = predict_pair(z1, z2)
    eval_report = metrics.evaluate(preds, y, (0.75, 0.80))
    report_path = workdir / "report.txt"
    report_path.write_text(
        f"pairs evaluated       {len(y)}\n"
        f"epochs run            {report.epochs_run}\n"
        f"best epoch            {report.best_epoch}\n"
        + metrics.format_report(eval_report),
        encoding="utf-8",
    )
    print(f"pipeline done: {len(pairs)} pairs, "
          f"{len(pairs) * simgen.ROUNDS_PER_SESSION} rounds -> {workdir}")
    return 0


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tug", description=__doc__)
    parser.add_argument("--config", help="JSON config file (flags and TUG_* override it)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *names):
        for name in names:
            flag = "--" + name.replace("_", "-")
            if name in ("seed", "port", "batch_size", "patience", "max_epochs",
                        "max_difficulty"):
                p.add_argument(flag, type=int, default=None)
            elif name in ("alpha", "lr", "selection_timeout", "share_timeout",
                          "queue_timeout", "drain_timeout"):
                p.add_argument(flag, type=float, default=None)
            else:
                p.add_argument(flag, default=None)

    p = sub.add_parser("serve", help="run the game server")
    common(p, "host", "port", "lexicon", "embeddings", "log_dir", "max_difficulty",
           "selection_timeout", "share_timeout", "queue_timeout", "drain_timeout")
    p.set_defaults(func=cmd_serve)

    p_lex = sub.add_parser("lexicon", help="lexicon utilities")
    lex_sub = p_lex.add_subparsers(dest="lexicon_command", required=True)
    p = lex_sub.add_parser("validate", help="parse and summarize a lexicon file")
    p.add_argument("path")
    p.set_defaults(func=cmd_lexicon_validate)
    p = lex_sub.add_parser("filter", help="keep words at or below a difficulty")
    p.add_argument("--max", type=int, default=3)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_lexicon_filter)

    p_emb = sub.add_parser("embeddings", help="embedding table utilities")
    emb_sub = p_emb.add_subparsers(dest="embeddings_command", required=True)
    p = emb_sub.add_parser("synth", help="build the deterministic synthetic table")
    common(p, "lexicon", "seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embeddings_synth)

    p = sub.add_parser("simulate", help="simulate and score gameplay rounds")
    common(p, "lexicon", "embeddings", "seed", "max_difficulty")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--scorer", choices=("oracle", "llm"), default=None)
    p.add_argument("--llm-endpoint", dest="llm_endpoint", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("assemble", help="assemble scored rounds into sessions")
    common(p, "seed")
    p.add_argument("--rounds", required=True)
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--logs", default=None, help="also append session records here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("export", help="export a training set from stored logs")
    common(p, "embeddings")
    p.add_argument("--logs", required=True)
    p.add_argument("--policy", choices=("urcs", "llm", "oracle"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("train", help="train the compatibility model")
    common(p, "embeddings", "seed", "alpha", "lr", "batch_size", "patience",
           "max_epochs")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate stored parameters on a dataset")
    common(p, "embeddings")
    p.add_argument("--params", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--thresholds", default="0.75,0.80")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="print predictions for pairs in a file")
    common(p, "embeddings")
    p.add_argument("--params", required=True)
    p.add_argument("--pair", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("pipeline", help="run the full synthetic pipeline")
    common(p, "lexicon", "seed", "alpha", "lr", "batch_size", "patience",
           "max_epochs", "max_difficulty")
    p.add_argument("--pairs", type=int, default=400)
    p.add_argument("--scorer", choices=("oracle", "llm"), default=None)
    p.add_argument("--llm-endpoint", dest="llm_endpoint", default=None)
    p.add_argument("--workdir", default="pipeline_out")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TugError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

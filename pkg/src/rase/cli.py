"""Command-line interface: ``rase simulate|fit|predict|rank|bench``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 fit failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .bench import BenchSpec, run_benchmark
from .classifiers import BASE_NAMES, BaseKind
from .criteria import CRITERIA, CriterionConfig
from .ensemble import EnsembleConfig, default_threads, fit
from .errors import DataError, DimensionMismatch, FitFailure, IndexOutOfRange, SchemaError
from .simulation import MODELS, SimModelSpec, generate

EXIT_USAGE, EXIT_DATA, EXIT_FIT = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {text}")
    return v


def _seed(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {text}")
    return v


def build_parser():
    p = _Parser(prog="rase", description="Random subspace ensemble classification")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="draw train/test CSVs from a simulation model")
    s.add_argument("--model", required=True, choices=MODELS)
    s.add_argument("--n", type=_positive, required=True, help="training size")
    s.add_argument("--n-test", type=_positive, default=1000)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out-train", required=True)
    s.add_argument("--out-test")

    f = sub.add_parser("fit", help="fit an ensemble on a CSV training set")
    f.add_argument("--train", required=True)
    f.add_argument("--base", choices=BASE_NAMES, default="lda")
    f.add_argument("--criterion", choices=CRITERIA, default=None,
                   help="default: ric (loo for the knn base)")
    f.add_argument("--b1", type=_positive, default=200)
    f.add_argument("--b2", type=_positive, default=500)
    f.add_argument("--d", type=_positive, default=None, help="maximal subspace size")
    f.add_argument("--cn", type=float, default=None, help="penalty scale (default log(n)/n)")
    f.add_argument("--c0", type=float, default=0.1)
    f.add_argument("--iterations", type=_nonneg, default=0, help="re-weighting rounds T")
    f.add_argument("--seed", type=_seed, default=0)
    f.add_argument("--threads", type=_positive, default=None)
    f.add_argument("--model-out", required=True)

    q = sub.add_parser("predict", help="predict labels for a CSV")
    q.add_argument("--model", required=True)
    q.add_argument("--data", required=True)
    q.add_argument("--out", required=True)

    r = sub.add_parser("rank", help="print features by selection frequency")
    r.add_argument("--model", required=True)
    r.add_argument("--top", type=_positive, default=None)

    b = sub.add_parser("bench", help="replicate benchmark on a simulation model")
    b.add_argument("--model-spec", required=True, choices=MODELS)
    b.add_argument("--methods", required=True,
                   help="comma separated, e.g. rase-lda,rase1-lda,sig")
    b.add_argument("--n", type=_positive, default=200)
    b.add_argument("--n-test", type=_positive, default=1000)
    b.add_argument("--replicates", type=_positive, default=20)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--b1", type=_positive, default=200)
    b.add_argument("--b2", type=_positive, default=500)
    b.add_argument("--threads", type=_positive, default=None)
    b.add_argument("--json-out", help="also write the report as JSON here")
    b.add_argument("--timing", action="store_true",
                   help="include wall time (makes the report non-reproducible)")
    return p


def _cmd_simulate(a):
    train, test, s_star = generate(SimModelSpec(a.model, a.n, a.n_test, a.seed))
    io.save_csv(train, a.out_train)
    if a.out_test:
        io.save_csv(test, a.out_test)
    print(f"signal features: {' '.join(map(str, s_star.one_based()))}")


def _cmd_fit(a):
    data = io.load_csv(a.train)
    if not a.c0 > 0:
        raise UsageError("--c0 must be positive")
    if a.cn is not None and not a.cn >= 0:
        raise UsageError("--cn must be non-negative")
    crit = CriterionConfig(a.criterion, c_n=a.cn) if a.criterion else None
    if crit is None and a.cn is not None:
        crit = CriterionConfig("loo" if a.base == "knn" else "ric", c_n=a.cn)
    if crit is not None and crit.kind == "ric" and a.base == "knn":
        raise UsageError("--criterion ric needs an lda, qda or gamma base (try ric-np or loo)")
    cfg = EnsembleConfig(B1=a.b1, B2=a.b2, D=a.d, base=BaseKind(a.base), criterion=crit,
                         T=a.iterations, C0=a.c0, seed=a.seed,
                         threads=a.threads or default_threads())
    model = fit(data, cfg)
    io.save_model(model, a.model_out)
    err = float((model.predict(data.X) != data.y).mean())
    print(f"alpha_hat={model.alpha_hat!r} training_error={err:.4f}")


def _cmd_predict(a):
    model = io.load_model(a.model)
    data = io.load_csv(a.data)
    if data.p != model.p:
        raise DataError(f"{a.data}: {data.p} feature columns, model expects {model.p}")
    nu = model.predict_score(data.X)
    labels = (nu > model.alpha_hat).astype(np.int64)
    io.save_predictions(a.out, labels, nu)
    print(f"error={float((labels != data.y).mean()):.4f} on {data.n} rows")


def _cmd_rank(a):
    model = io.load_model(a.model)
    ranking = model.feature_ranking()
    if a.top:
        ranking = ranking[:a.top]
    print("feature\teta")
    for j, eta in ranking:
        print(f"{j + 1}\t{eta:.4f}")


def _cmd_bench(a):
    methods = tuple(m for m in a.methods.split(",") if m.strip())
    if not methods:
        raise UsageError("--methods is empty")
    spec = BenchSpec(a.model_spec, a.n, methods, a.replicates, a.seed, a.n_test,
                     a.b1, a.b2, a.threads or default_threads(), a.timing)
    try:
        report = run_benchmark(spec, progress=lambda i, k: logging.info("replicate %d/%d", i, k))
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise UsageError(str(exc)) from exc
    sys.stdout.write(report.to_text())
    if a.json_out:
        with open(a.json_out, "w") as fh:
            fh.write(report.to_json() + "\n")


COMMANDS = {"simulate": _cmd_simulate, "fit": _cmd_fit, "predict": _cmd_predict,
            "rank": _cmd_rank, "bench": _cmd_bench}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FitFailure as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (DataError, SchemaError, DimensionMismatch, IndexOutOfRange) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())

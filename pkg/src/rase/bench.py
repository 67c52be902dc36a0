"""Replicate benchmark runner producing table-style error summaries.

Method names:

* ``rase-<base>``, ``rase1-<base>``, ``rase2-<base>``, ...: the ensemble after
  ``T`` re-weighting rounds (no digit means ``T = 0``);
* ``sig-<base>`` (or just ``sig``, meaning the model's own base): the base
  classifier fit on the true signal set.

All RaSE methods sharing a base come from one fit per replicate: the model
after round ``t`` of a ``T``-round fit is exactly the ``T = t`` model.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field

import numpy as np

from .classifiers import BASE_NAMES
from .ensemble import EnsembleConfig, fit, misclassification_rate
from .simulation import BASE_FOR_MODEL, SimModelSpec, generate, learner_error, signal_oracle

_METHOD = re.compile(r"^(?:rase(\d*)|sig)(?:-(\w+))?$")


@dataclass(frozen=True)
class Method:
    name: str
    kind: str  # "rase" or "sig"
    base: str
    T: int = 0


def parse_method(name, model):
    m = _METHOD.match(name.strip().lower())
    if not m:
        raise ValueError(f"unknown method {name!r} (expected rase[T]-<base> or sig[-<base>])")
    base = m.group(2) or BASE_FOR_MODEL[model]
    if base not in BASE_NAMES:
        raise ValueError(f"unknown base classifier {base!r} in method {name!r}")
    if name.strip().lower().startswith("sig"):
        return Method(f"sig-{base}", "sig", base)
    if m.group(2) is None:
        raise ValueError(f"method {name!r} needs a base classifier, e.g. rase-lda")
    T = int(m.group(1)) if m.group(1) else 0
    return Method(f"rase{m.group(1)}-{base}", "rase", base, T)


def replicate_seeds(master, r):
    """``(data_seed, fit_seed)`` for replicate ``r``; independent of the replicate count."""
    s = np.random.SeedSequence(int(master), spawn_key=(int(r),)).generate_state(2, np.uint64)
    return int(s[0]), int(s[1])


@dataclass(frozen=True)
class BenchSpec:
    model: str
    n: int
    methods: tuple
    replicates: int = 20
    seed: int = 0
    n_test: int = 1000
    B1: int = 200
    B2: int = 500
    threads: int = 1
    timing: bool = False


@dataclass
class MethodResult:
    method: str
    errors: list = field(default_factory=list)
    seconds: float = 0.0
    eta_sum: np.ndarray | None = None

    @property
    def mean_pct(self):
        return 100.0 * float(np.mean(self.errors))

    @property
    def sd_pct(self):
        return 100.0 * float(np.std(self.errors, ddof=1)) if len(self.errors) > 1 else 0.0

    @property
    def mean_eta(self):
        return None if self.eta_sum is None else self.eta_sum / len(self.errors)


@dataclass
class BenchmarkReport:
    spec: BenchSpec
    results: list

    def row(self, method):
        for r in self.results:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_dict(self):
        s = self.spec
        rows = []
        for r in self.results:
            row = {"method": r.method, "mean_error_pct": round(r.mean_pct, 2),
                   "sd_pct": round(r.sd_pct, 2), "replicates": len(r.errors),
                   "errors": r.errors}
            if s.timing:
                row["wall_seconds"] = round(r.seconds, 3)
            if r.eta_sum is not None:
                row["mean_eta"] = r.mean_eta.tolist()
            rows.append(row)
        return {"model": s.model, "n": s.n, "n_test": s.n_test, "replicates": s.replicates,
                "seed": s.seed, "B1": s.B1, "B2": s.B2, "sd_convention": "sample (n-1)",
                "methods": rows}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self, top=10):
        s = self.spec
        lines = [f"model {s.model}, n={s.n}, n_test={s.n_test}, replicates={s.replicates}, "
                 f"seed={s.seed}, B1={s.B1}, B2={s.B2}",
                 "test error in percent; sd is the sample standard deviation (n-1)"]
        head = f"{'method':<14}{'mean':>8}{'sd':>8}{'reps':>6}"
        if s.timing:
            head += f"{'seconds':>10}"
        lines.append(head)
        for r in self.results:
            line = f"{r.method:<14}{r.mean_pct:>8.2f}{r.sd_pct:>8.2f}{len(r.errors):>6d}"
            if s.timing:
                line += f"{r.seconds:>10.1f}"
            lines.append(line)
        for r in self.results:
            if r.eta_sum is None:
                continue
            eta = r.mean_eta
            order = np.argsort(-eta, kind="stable")[:top]
            pairs = ", ".join(f"{i + 1}:{eta[i]:.3f}" for i in order)
            lines.append(f"top features {r.method}: {pairs}")
        return "\n".join(lines) + "\n"


def run_benchmark(spec: BenchSpec, progress=None) -> BenchmarkReport:
    model = SimModelSpec(spec.model, spec.n).model
    methods = [parse_method(m, model) for m in spec.methods]
    if len({m.name for m in methods}) != len(methods):
        raise ValueError("duplicate methods")
    results = {m.name: MethodResult(m.name) for m in methods}
    rase_T = {}
    for m in methods:
        if m.kind == "rase":
            rase_T[m.base] = max(rase_T.get(m.base, 0), m.T)
    for r in range(spec.replicates):
        data_seed, fit_seed = replicate_seeds(spec.seed, r)
        sim = SimModelSpec(model, spec.n, spec.n_test, data_seed)
        train, test, _ = generate(sim)
        for base, T in rase_T.items():
            cfg = EnsembleConfig(B1=spec.B1, B2=spec.B2, base=base, T=T, seed=fit_seed,
                                 threads=spec.threads)
            t0 = time.perf_counter()
            final = fit(train, cfg, keep_history=True)
            elapsed = time.perf_counter() - t0
            for m in methods:
                if m.kind == "rase" and m.base == base:
                    mod = final.history[m.T]
                    res = results[m.name]
                    res.errors.append(misclassification_rate(mod, test))
                    res.seconds += elapsed
                    res.eta_sum = mod.eta.copy() if res.eta_sum is None else res.eta_sum + mod.eta
        for m in methods:
            if m.kind == "sig":
                t0 = time.perf_counter()
                learner = signal_oracle(sim, train, m.base)
                results[m.name].errors.append(learner_error(learner, test))
                results[m.name].seconds += time.perf_counter() - t0
        if progress is not None:
            progress(r + 1, spec.replicates)
    return BenchmarkReport(spec, [results[m.name] for m in methods])


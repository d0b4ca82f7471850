"""Experiment configs, runners and deterministic reports behind the CLI."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from .bmo import classical_bmo_lower_bound, dyadic_bmo_norm, harness_grid, pointwise_domination, verify_equivalence
from .circle import BASE_SHIFT, Arc, Shift, dyadic_distance, fit_interval, pairwise_distance
from .corpus import CorpusItem, demo_corpus, generate_corpus, grid_corpus
from .hardy import AtomicCombination, atomize_dyadic, decompose_h1, is_atom
from .multidim import (
    GridFn,
    ShiftFamily,
    build_r_filtration,
    fit_interval_r,
    md_grids,
    verify_equivalence_md,
)
from .rational import decimal, fmt, mod1, rat
from .scan import ArcScan
from .stepfn import StepFn

PRNG = "MT19937 (Python random.Random), string seeds '<seed>:<purpose>'"
COMMANDS = ("d-delta", "fit", "norms", "verify", "verify-md", "verify-r", "maximal", "atoms", "scan")
DEFAULT_SHIFTS = {"verify-md": ["1/7", "2/7", "4/7"], "verify-r": ["1/3", "2/3"]}
R_LEVELS = (-20, 20)


@dataclass
class ExperimentConfig:
    command: str
    seed: int = 0
    shifts: Optional[list[str]] = None
    depth: Optional[int] = None
    grid_per_axis: Optional[int] = None
    corpus: Optional[list[dict]] = None
    count: int = 1000
    max_q: int = 12
    function: Optional[str] = None
    arcs: list[str] = field(default_factory=list)
    workers: int = 1
    witness_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        if self.shifts is None:
            self.shifts = list(DEFAULT_SHIFTS.get(self.command, ["1/3"]))
        self.shifts = [fmt(rat(s)) for s in self.shifts]
        if self.depth is None:
            self.depth = 3 if self.command == "verify-md" else 10
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.count < 0:
            raise ValueError("count must be >= 0")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(**obj)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("workers")  # scheduling only, never changes results
        out.pop("witness_dir")
        return out

    @property
    def hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def rng(self, purpose: str) -> random.Random:
        return random.Random(f"{self.seed}:{purpose}")


@dataclass
class RunReport:
    command: str
    config: dict
    config_hash: str
    ok: bool
    summary: dict
    results: list
    violations: list

    def to_json(self) -> dict:
        return {"command": self.command, "config": self.config, "config_hash": self.config_hash, "prng": PRNG,
                "ok": self.ok, "summary": self.summary, "results": self.results, "violations": self.violations}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


def q(x: Fraction) -> dict:
    return {"exact": fmt(x), "decimal": decimal(x)}


def parse_arc(text: str) -> Arc:
    """``"start:length"`` (both rationals)."""
    try:
        a, b = text.split(":")
    except ValueError:
        raise ValueError(f"arc must be 'start:length', got {text!r}") from None
    return Arc(mod1(rat(a)), rat(b))


def load_function(path: str):
    with open(path) as fh:
        obj = json.load(fh)
    if obj["breakpoints"] and isinstance(obj["breakpoints"][0], list):
        return GridFn.from_json(obj)
    return StepFn.from_json(obj)


def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))  # input order, not completion order


class _Runner:
    def __init__(self, config: ExperimentConfig):
        self.cfg = config
        self.violations: list[dict] = []
        wd = config.witness_dir
        self.witness_dir = Path(wd) if wd else Path("witnesses")

    # -- helpers ---------------------------------------------------------------

    def admissible_shift(self) -> Shift:
        sh = Shift(rat(self.cfg.shifts[0]))
        sh.require_admissible()
        return sh

    def circle_items(self) -> list[CorpusItem]:
        cfg = self.cfg
        if cfg.function:
            fn = load_function(cfg.function)
            if not isinstance(fn, StepFn):
                raise ValueError("this command needs a circle StepFn file")
            return [CorpusItem(Path(cfg.function).stem, "file", fn)]
        if cfg.corpus:
            return [it for it in generate_corpus(cfg.corpus, cfg.seed) if isinstance(it.obj, StepFn)]
        return demo_corpus()

    def grid(self, fn: StepFn, shift: Shift) -> list[Fraction]:
        pts = harness_grid(fn, (BASE_SHIFT, shift), self.cfg.depth)
        k = self.cfg.grid_per_axis
        if k:
            pts = sorted(set(pts) | {Fraction(i, k) for i in range(k)})
        return pts

    def witness(self, item: CorpusItem, replay_args: str, detail: dict) -> dict:
        self.witness_dir.mkdir(parents=True, exist_ok=True)
        path = self.witness_dir / f"{self.cfg.command}-{item.name}.json"
        path.write_text(json.dumps(item.obj.to_json(), sort_keys=True, indent=2) + "\n")
        out = {"function": item.name, "file": str(path),
               "replay": f"python3 -m dyadbmo {self.cfg.command} {replay_args} --function {path}"}
        out.update(detail)
        return out

    def shift_args(self) -> str:
        return " ".join(f"--delta {s}" for s in self.cfg.shifts) + f" --depth {self.cfg.depth}"

    # -- commands ----------------------------------------------------------------

    def d_delta(self):
        rows = [{"delta": s, "d_delta": fmt(dyadic_distance(rat(s)))} for s in self.cfg.shifts]
        return {"count": len(rows)}, rows

    def fit(self):
        sh = self.admissible_shift()
        cap = 2 / sh.distance
        if self.cfg.arcs:
            arcs = [parse_arc(a) for a in self.cfg.arcs]
        else:
            arcs = random_arcs(self.cfg.rng("arcs"), self.cfg.count)
        results, worst = [], Fraction(0)
        for arc in arcs:
            fit = fit_interval(arc, sh)
            ok = fit.interval.arc.contains(arc) and fit.ratio <= cap
            worst = max(worst, fit.ratio)
            rec = {"arc": {"start": fmt(arc.start), "length": fmt(arc.length)}, "filtration": fit.filtration,
                   "level": fit.interval.level, "index": fit.interval.index, "ratio": fmt(fit.ratio), "ok": ok}
            if not ok:
                rec["replay"] = f"python3 -m dyadbmo fit --delta {fmt(sh.delta)} --arc {fmt(arc.start)}:{fmt(arc.length)}"
                self.violations.append(rec)
            if self.cfg.arcs or len(arcs) <= 100:
                results.append(rec)
        return {"arcs": len(arcs), "fit_constant": fmt(cap), "max_ratio": q(worst)}, results

    def norms(self):
        sh = self.admissible_shift()
        results = []
        for it in self.circle_items():
            fn = it.obj
            b, s = dyadic_bmo_norm(fn, BASE_SHIFT, self.cfg.depth), dyadic_bmo_norm(fn, sh, self.cfg.depth)
            lower, w = classical_bmo_lower_bound(fn, self.grid(fn, sh))
            results.append({"function": it.name, "dyadic_norm_base": q(b.value), "dyadic_norm_shifted": q(s.value),
                            "exact": {"base": b.exact, "shifted": s.exact}, "classical_lower": q(lower),
                            "classical_witness": w.to_json()})
        return {"functions": len(results), "depth": self.cfg.depth}, results

    def verify(self):
        sh = self.admissible_shift()
        items = self.circle_items()
        reports = _pmap(_VerifyJob(sh, self.cfg.depth, self.cfg.grid_per_axis), [it.obj for it in items],
                        self.cfg.workers)
        results, worst = [], None
        for it, rep in zip(items, reports):
            rec = {"function": it.name, "kind": it.kind, "approximate": it.approximate, **rep}
            results.append(rec)
            m = rat(rep["margin"]["exact"])
            worst = m if worst is None else min(worst, m)
            if not rep["holds"]:
                self.violations.append(self.witness(it, self.shift_args(), {"margin": rep["margin"]}))
        return {"functions": len(results), "bound_constant": fmt(4 / sh.distance),
                "worst_margin": q(worst) if worst is not None else None, "depth": self.cfg.depth}, results

    def maximal(self):
        sh = self.admissible_shift()
        results = []
        for it in self.circle_items():
            scan = ArcScan(it.obj, self.grid(it.obj, sh))
            rep = pointwise_domination(it.obj, sh, scan=scan)
            sv, mv = rep.sharp_violations(), rep.maximal_violations()
            ratio_s = max((p.sharp_lower / max(p.dyadic_sharp) for p in rep.points if max(p.dyadic_sharp) > 0),
                          default=Fraction(0))
            ratio_m = max((p.maximal_lower / max(p.dyadic_maximal) for p in rep.points if max(p.dyadic_maximal) > 0),
                          default=Fraction(0))
            results.append({"function": it.name, "points": len(rep.points), "chain_depth": rep.chain_depth,
                            "sharp_violations": len(sv), "maximal_violations": len(mv),
                            "max_sharp_ratio": q(ratio_s), "max_maximal_ratio": q(ratio_m)})
            if sv or mv:
                pts = [fmt(p.t) for p in (sv + mv)[:5]]
                self.violations.append(self.witness(it, self.shift_args(), {"points": pts}))
        return {"functions": len(results), "sharp_constant": fmt(4 / sh.distance),
                "maximal_constant": fmt(2 / sh.distance)}, results

    def atoms(self):
        sh = self.admissible_shift()
        cap = 2 / sh.distance
        items = generate_corpus(self.cfg.corpus or {"kind": "atoms", "count": self.cfg.count}, self.cfg.seed)
        atoms = [it for it in items if it.kind == "atoms"]
        worst, bad = Fraction(0), 0
        for it in atoms:
            da = atomize_dyadic(it.obj, sh)
            ok = (is_atom(da.atom.profile, da.interval.arc).ok and da.lam <= cap
                  and da.atom.profile.scale(da.lam) == it.obj.profile)
            worst = max(worst, da.lam)
            if not ok:
                bad += 1
                self.violations.append({"function": it.name, "lambda": fmt(da.lam), "atom": it.obj.to_json()})
        rng = self.cfg.rng("combinations")
        combos, worst_cost = 0, Fraction(0)
        for i in range(0, len(atoms), 5):
            terms = tuple((Fraction(rng.randint(-6, 6) or 1, rng.randint(1, 3)), it.obj) for it in atoms[i:i + 5])
            comb = AtomicCombination(terms)
            h = decompose_h1(comb, sh)
            combos += 1
            worst_cost = max(worst_cost, h.cost_ratio)
            if h.reconstruct() != comb.evaluate() or h.cost_ratio > cap:
                self.violations.append({"combination": i // 5, "cost_ratio": fmt(h.cost_ratio),
                                        "terms": comb.to_json()})
        return {"atoms": len(atoms), "max_lambda": q(worst), "lambda_cap": fmt(cap), "combinations": combos,
                "max_cost_ratio": q(worst_cost), "invalid": bad}, []

    def verify_md(self):
        fam = ShiftFamily(tuple(rat(s) for s in self.cfg.shifts))
        if not fam.admissible:
            raise ValueError(f"inadmissible family: pairwise distance is 0 for {self.cfg.shifts}")
        if self.cfg.function:
            fn = load_function(self.cfg.function)
            items = [CorpusItem(Path(self.cfg.function).stem, "file", fn)]
        elif self.cfg.corpus:
            items = [it for it in generate_corpus(self.cfg.corpus, self.cfg.seed) if isinstance(it.obj, GridFn)]
        else:
            items = grid_corpus(20, self.cfg.seed)
        cap = self.cfg.grid_per_axis or 32
        results, worst = [], None
        for it in items:
            depth = self.cfg.depth
            grids = md_grids(it.obj, fam, depth)
            while depth > 0 and max(len(g) for g in grids) > cap:
                depth -= 1
                grids = md_grids(it.obj, fam, depth)
            rep = verify_equivalence_md(it.obj, fam, depth, grids)
            rec = {"function": it.name, "grid_points": [len(g) for g in grids], **rep.to_json()}
            results.append(rec)
            worst = rep.margin if worst is None else min(worst, rep.margin)
            if not rep.holds:
                self.violations.append(self.witness(it, self.shift_args(), {"margin": fmt(rep.margin)}))
        return {"functions": len(results), "bound_constant": fmt(2 * fam.fit_constant ** 2),
                "worst_margin": q(worst) if worst is not None else None}, results

    def verify_r(self):
        lo, hi = R_LEVELS
        systems = [build_r_filtration(rat(s), lo, hi) for s in self.cfg.shifts]
        if self.cfg.arcs:
            ivs = []
            for a in self.cfg.arcs:
                x, y = a.split(":")
                ivs.append((rat(x), rat(y)))
        else:
            ivs = random_r_intervals(self.cfg.rng("r-intervals"), self.cfg.count)
        results, worst, fails = [], Fraction(0), 0
        for a, b in ivs:
            fit = fit_interval_r(a, b, systems)
            if fit.ratio is not None:
                worst = max(worst, fit.ratio)
            if not fit.ok:
                fails += 1
                rec = fit.to_json()
                rec["replay"] = ("python3 -m dyadbmo verify-r " + " ".join(f"--delta {s}" for s in self.cfg.shifts)
                                 + f" --arc {fmt(a)}:{fmt(b)}")
                self.violations.append(rec)
            if self.cfg.arcs or len(ivs) <= 100:
                results.append(fit.to_json())
        bound = 4 / pairwise_distance([s.delta for s in systems])
        return {"intervals": len(ivs), "levels": [lo, hi], "bound": fmt(bound), "max_ratio": q(worst),
                "failures": fails, "offsets": [s.to_json() for s in systems]}, results

    def scan(self):
        rows = scan_d_delta(self.cfg.max_q)
        return density_summary(rows, self.cfg.max_q), [{"delta": fmt(d), "d_delta": fmt(v)} for d, v in rows]


class _VerifyJob:
    """Picklable per-function verification, for process fan-out."""

    def __init__(self, shift: Shift, depth: int, extra: Optional[int]):
        self.shift, self.depth, self.extra = shift, depth, extra

    def __call__(self, fn: StepFn) -> dict:
        grid = harness_grid(fn, (BASE_SHIFT, self.shift), self.depth)
        if self.extra:
            grid = sorted(set(grid) | {Fraction(i, self.extra) for i in range(self.extra)})
        return verify_equivalence(fn, self.shift, self.depth, grid).to_json()


def random_arcs(rng: random.Random, count: int) -> list[Arc]:
    """Arcs with random rational start and length in (0, 1]; mixed denominators."""
    out = []
    for _ in range(count):
        den = rng.choice((2 ** rng.randint(1, 12), rng.randint(2, 4000)))
        start = Fraction(rng.randrange(den), den)
        e = rng.uniform(-12, 0)
        length = Fraction(max(1, round(2 ** e * 10 ** 6)), 10 ** 6)
        out.append(Arc(start, length))
    return out


def random_r_intervals(rng: random.Random, count: int) -> list[tuple[Fraction, Fraction]]:
    """Lengths log-uniform in [2^-10, 2^10], left ends uniform in [-2^10, 2^10] (grid 1/4096)."""
    out = []
    for _ in range(count):
        length = Fraction(max(1, round(2 ** rng.uniform(-10, 10) * 4096)), 4096)
        a = Fraction(rng.randrange(-2 ** 22, 2 ** 22), 4096)
        out.append((a, a + length))
    return out


def scan_d_delta(max_q: int) -> list[tuple[Fraction, Fraction]]:
    if max_q < 2:
        raise ValueError("max_q must be >= 2")
    # reduced fractions ordered by denominator, then numerator
    pts = [Fraction(p, qq) for qq in range(2, max_q + 1) for p in range(1, qq) if math.gcd(p, qq) == 1]
    return [(d, dyadic_distance(d)) for d in pts]


def density_summary(rows, max_q: int) -> dict:
    pos = [Fraction(0)] + sorted(d for d, v in rows if v > 0) + [Fraction(1)]
    gap = max(b - a for a, b in zip(pos, pos[1:]))
    return {"max_q": max_q, "rows": len(rows), "positive": sum(1 for _, v in rows if v > 0),
            "max_gap_between_positive": fmt(gap), "dense_at_width_2_over_q": gap <= Fraction(2, max_q),
            "measure_zero": "not checkable by finite computation"}


def run_experiment(config: ExperimentConfig) -> RunReport:
    runner = _Runner(config)
    method = getattr(runner, config.command.replace("-", "_"))
    summary, results = method()
    return RunReport(config.command, config.to_json(), config.hash, not runner.violations, summary, results,
                     runner.violations)


def to_csv(report: RunReport) -> str:
    if report.command not in ("scan", "d-delta"):
        raise ValueError("csv output is available for scan and d-delta only")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "d_delta"])
    for row in report.results:
        w.writerow([row["delta"], row["d_delta"]])
    return buf.getvalue()

"""Command-line driver: corpus generation, theorem verification, psi tables.

Outputs are byte-stable: JSON is dumped with sorted keys and default float
repr, CSV columns are fixed, and the worker pool merges results in task
order, so runs with 1 and k workers produce identical files.

Exit codes: 0 all verdicts pass, 2 any certificate failure, 3 configuration
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .config import Tolerances
from .corpus import (
    gen_carleson_sequence,
    gen_test_function,
    load_corpus,
    load_corpus_entry,
    write_corpus,
)
from .orlicz import psi_closed_form, psi_from_phi, young_function, ConstructionError
from .bellman import BellmanKernel, build_profile, check_t_convexity
from .verifiers import (
    failure_demo,
    verify_buckley_classic,
    verify_d_embed,
    verify_embed,
    verify_embed2,
    verify_fd_embed,
    verify_folk,
)

THEOREMS = ("buc-classic", "folk", "d-embed", "fd-embed", "embed", "embed2",
            "bump-embed", "failure-demo", "bellman-checks")
SEQUENCE_KINDS = ("root-only", "level-uniform", "random", "stopping-time")
FUNCTION_KINDS = (("constant", 0), ("haar", 0), ("random-bounded", 11),
                  ("random-bounded", 12), ("w-normalized", 13))


@dataclass(frozen=True)
class RunConfig:
    command: str
    theorem: str = ""
    psi_family: str = "log-bump"
    alpha: float = 2.0
    clamp_s0: float | None = None
    normalize: bool = True
    corpus: str = ""
    out: str = ""
    workers: int = 1
    depth: int = 12
    seed: int = 0
    tol_ineq: float = 1e-9
    tol_quad: float = 1e-10
    tol_identity: float = 1e-12

    def tolerances(self) -> Tolerances:
        return Tolerances(self.tol_ineq, self.tol_quad, self.tol_identity)

    def psi(self):
        if self.psi_family == "parametric":
            phi = young_function("log-bump", self.alpha)
            return psi_from_phi(phi)
        return psi_closed_form(self.alpha, self.psi_family,
                               clamp_s0=self.clamp_s0, normalize=self.normalize)


def _default_out() -> str:
    return os.environ.get("DYADEMBED_OUT", "runs")


# ---------------------------------------------------------------------------
# worker entry point (top level so the process pool can import it)
# ---------------------------------------------------------------------------

def _run_task(task: dict) -> dict:
    cfg = RunConfig(**task["config"])
    psi = cfg.psi()
    tol = cfg.tolerances()
    entry, w = load_corpus_entry(task["manifest"], task["index"])
    theorem = task["theorem"]
    label = entry.spec.label
    if theorem == "buc-classic":
        cert = verify_buckley_classic(w, tol=tol)
    elif theorem == "folk":
        seq = gen_carleson_sequence(task["sequence"], w.depth, cfg.seed)
        cert = verify_folk(w, seq, assert_rhi_bound=entry.is_ainfty, tol=tol)
        label = f"{label}|{task['sequence']}"
    elif theorem == "d-embed":
        cert = verify_d_embed(w, psi, tol=tol)
    elif theorem == "fd-embed":
        kind, fseed = task["function"]
        f = gen_test_function(kind, w.depth, fseed, weight=w)
        cert = verify_fd_embed(w, f, psi, tol=tol)
        label = f"{label}|{kind}"
    elif theorem == "embed":
        seq = gen_carleson_sequence(task["sequence"], w.depth, cfg.seed)
        cert = verify_embed(w, seq, psi, tol=tol)
        label = f"{label}|{task['sequence']}"
    elif theorem in ("embed2", "bump-embed"):
        kind, fseed = task["function"]
        f = gen_test_function(kind, w.depth, fseed, weight=w)
        seq = gen_carleson_sequence(task["sequence"], w.depth, cfg.seed)
        cert = verify_embed2(w, f, seq, psi, tol=tol)
        label = f"{label}|{task['sequence']}|{kind}"
    else:
        raise ValueError(f"unknown worker theorem {theorem}")
    out = cert.to_dict()
    out["weight"] = label
    out["depth"] = w.depth
    return out


def _build_tasks(theorem: str, manifest: str, n_entries: int, cfg: RunConfig):
    base = {"manifest": manifest, "config": asdict(cfg), "theorem": theorem}
    tasks = []
    for k in range(n_entries):
        if theorem in ("buc-classic", "d-embed"):
            tasks.append({**base, "index": k})
        elif theorem in ("folk", "embed"):
            for s in SEQUENCE_KINDS:
                tasks.append({**base, "index": k, "sequence": s})
        elif theorem == "fd-embed":
            for fk in FUNCTION_KINDS:
                tasks.append({**base, "index": k, "function": fk})
        elif theorem in ("embed2", "bump-embed"):
            for fk in FUNCTION_KINDS:
                tasks.append({**base, "index": k, "function": fk,
                              "sequence": "random"})
    return tasks


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen_corpus(args) -> int:
    out = Path(args.out or _default_out()) / "corpus"
    try:
        manifest = write_corpus(out)
    except (OSError, ValueError) as exc:
        print(f"corpus generation failed: {exc}", file=sys.stderr)
        return 3
    print(f"wrote corpus manifest {manifest}")
    return 0


def cmd_verify(args) -> int:
    if args.theorem not in THEOREMS:
        print(f"unknown theorem id {args.theorem!r}; choose from {THEOREMS}",
              file=sys.stderr)
        return 3
    cfg = RunConfig(
        command="verify", theorem=args.theorem, psi_family=args.psi_family,
        alpha=args.alpha, clamp_s0=args.clamp_s0,
        normalize=not args.no_normalize,
        corpus=args.corpus or "", out=args.out or _default_out(),
        workers=args.workers, depth=args.depth, seed=args.seed,
        tol_ineq=args.tolerance_ineq, tol_quad=args.tolerance_quad,
        tol_identity=args.tolerance_identity)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        psi = cfg.psi()
    except ConstructionError as exc:
        print(f"psi construction failed: {exc}", file=sys.stderr)
        return 3

    if args.theorem == "failure-demo":
        demo = failure_demo(6, cfg.depth, psi, cfg.tolerances())
        report = {
            "depths": list(demo.depths),
            "classical_ratios": list(demo.classical_ratios),
            "d_embed_ratios": list(demo.d_embed_ratios),
            "classical_growth": demo.classical_growth,
            "d_embed_change": demo.d_embed_change,
            "verdict": "pass" if demo.passed else "fail",
        }
        _write_json(out_dir / "failure_demo.json", report)
        print(json.dumps(report, sort_keys=True, indent=1))
        return 0 if demo.passed else 2

    if args.theorem == "bellman-checks":
        kernel = BellmanKernel(psi)
        profile = build_profile(psi)
        conv = check_t_convexity(psi, kernel=kernel, tol=cfg.tolerances())
        sweep = _pointwise_sweep(psi, kernel, cfg)
        ok = conv.passed and sweep["violations"] == 0
        report = {
            "bprime_1": kernel.C,
            "b_1": float(kernel.B(1.0)),
            "profile_points": int(profile.grid.size),
            "t_convexity": {"passed": conv.passed, **conv.detail,
                            "failures": [list(f) for f in conv.detail["failures"]]},
            "pointwise_sweep": sweep,
            "verdict": "pass" if ok else "fail",
        }
        _write_json(out_dir / "bellman_checks.json", report)
        print(json.dumps({k: report[k] for k in ("bprime_1", "b_1", "verdict")},
                         sort_keys=True))
        return 0 if ok else 2

    manifest = Path(cfg.corpus or str(Path(_default_out()) / "corpus" / "manifest.json"))
    if not manifest.exists():
        print(f"corpus manifest not found: {manifest} (run gen-corpus first)",
              file=sys.stderr)
        return 3
    entries = load_corpus(manifest)
    tasks = _build_tasks(args.theorem, str(manifest), len(entries), cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        results = [_run_task(t) for t in tasks]

    cert_path = out_dir / f"certificates_{args.theorem}.json"
    _write_json(cert_path, results)
    csv_path = out_dir / f"summary_{args.theorem}.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "depth", "lhs", "rhs", "ratio", "verdict"])
        for r in results:
            writer.writerow([r["weight"], r["depth"], repr(r["lhs"]),
                             repr(r["rhs_base"]), repr(r["ratio"]), r["verdict"]])
    n_fail = sum(1 for r in results if r["verdict"] != "pass")
    print(f"{args.theorem}: {len(results) - n_fail}/{len(results)} certificates pass; "
          f"wrote {cert_path} and {csv_path}")
    return 0 if n_fail == 0 else 2


def _pointwise_sweep(psi, kernel, cfg: RunConfig, trials: int = 400) -> dict:
    """Random-node sweep of the pair / n-point / paraproduct inequalities."""
    import numpy as np

    from .bellman import (check_main_ineq_npoint, check_main_ineq_pair,
                          check_paraproduct_step, check_pde_step)
    from .corpus import CorpusSpec, gen_test_function, gen_weight
    from .intervals import DyadicInterval

    rng = np.random.default_rng(cfg.seed)
    counts = {"pde": 0, "pair": 0, "npoint": 0, "paraproduct": 0}
    violations = 0
    for trial in range(trials):
        depth = int(rng.integers(3, min(8, cfg.depth) + 1))
        w = gen_weight(CorpusSpec("random-martingale", depth, (0.7,), trial + 1))
        f = gen_test_function("random-bounded", depth, trial)
        fw = f.product(w)
        lev = int(rng.integers(0, depth))
        idx = int(rng.integers(0, 2 ** lev))
        node = DyadicInterval(lev, idx)
        d_i = w.distribution(node)
        d_m, d_p = w.distribution(node.minus), w.distribution(node.plus)
        res = check_pde_step(w, node, psi, kernel, (d_i, d_m, d_p))
        counts["pde"] += 1
        violations += not res.passed
        rep = check_main_ineq_pair(psi, fw.average(node.minus), d_m,
                                   fw.average(node.plus), d_p, d_i, kernel)
        counts["pair"] += 1
        violations += not rep.passed
        if lev + 2 <= depth:
            kids = [DyadicInterval(lev + 2, (idx << 2) + k) for k in range(4)]
            rep = check_main_ineq_npoint(
                psi, [fw.average(c) for c in kids],
                [w.distribution(c) for c in kids], [0.25] * 4, d_i, kernel)
            counts["npoint"] += 1
            violations += not rep.passed
        mk = rng.uniform(0, 0.4, 2)
        a = float(rng.uniform(0, 0.5))
        rep = check_paraproduct_step(
            psi, fw.average(node), d_i, a + 0.5 * float(mk.sum()),
            [fw.average(node.minus), fw.average(node.plus)], [d_m, d_p],
            list(mk), [0.5, 0.5], a, kernel)
        counts["paraproduct"] += 1
        violations += not rep.passed
    return {"violations": violations, **counts}


def cmd_psi_table(args) -> int:
    cfg = RunConfig(command="psi-table", psi_family=args.psi_family,
                    alpha=args.alpha, clamp_s0=args.clamp_s0,
                    normalize=not args.no_normalize,
                    out=args.out or _default_out())
    try:
        psi = cfg.psi()
        psi.validate()
    except ConstructionError as exc:
        print(f"psi not admissible: {exc}", file=sys.stderr)
        return 3
    kernel = BellmanKernel(psi)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"psi_table_{cfg.psi_family}_a{cfg.alpha:g}.csv"
    s = np.geomspace(1e-12, 1.0, 1000)
    psis = np.asarray(psi.psi(s))
    phis = np.asarray(psi.phi(s))
    bprime = np.asarray(kernel.G(s))
    bvals = np.asarray(kernel.B(s))
    mvals = bvals if kernel.is_normalized else np.full_like(bvals, float("nan"))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "psi", "phi", "bprime", "b", "m"])
        for row in zip(s, psis, phis, bprime, bvals, mvals):
            writer.writerow([repr(float(v)) for v in row])
    print(f"wrote {path}")
    return 0


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_psi_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--psi-family", default="log-bump",
                   choices=("log-bump", "loglog-bump", "parametric"))
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--clamp-s0", type=float, default=None,
                   help="clamp point of the closed-form Psi (default: auto)")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--out", default="")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadembed",
        description="Certified Carleson-type embeddings on dyadic step weights")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-corpus", help="write the default 50-weight corpus")
    g.add_argument("--out", default="")
    g.set_defaults(func=cmd_gen_corpus)

    v = sub.add_parser("verify", help="run one theorem verifier over the corpus")
    v.add_argument("--theorem", required=True)
    v.add_argument("--corpus", default="", help="path to corpus manifest.json")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--depth", type=int, default=12)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tolerance-ineq", type=float, default=1e-9)
    v.add_argument("--tolerance-quad", type=float, default=1e-10)
    v.add_argument("--tolerance-identity", type=float, default=1e-12)
    _add_psi_flags(v)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("psi-table", help="CSV of (s, psi, phi, B', B, m)")
    _add_psi_flags(t)
    t.set_defaults(func=cmd_psi_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

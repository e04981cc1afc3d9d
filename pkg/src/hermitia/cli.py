"""``hermitia`` command line: check, flow, aa-flow, vaisman-flow, skt-feasible, sweep, corpus."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from . import almost_abelian as aa
from . import classifiers, corpus, flows
from .hermitian import StructureError


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))           # shortest round-trip decimal
    return str(x)


def write_csv(path: str | None, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    finally:
        if path:
            fh.close()


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=_json_default))


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


def _finite(x: float):
    return float(x) if np.isfinite(x) else None


# -- subcommands -------------------------------------------------------------

def cmd_check(args) -> int:
    H = corpus.load_structure(args.input)
    report = classifiers.classify(H, tol=args.tol, k=args.k)
    if args.json:
        _emit(report.to_json())
    else:
        print(report.table())
    if report.falsified:
        if not args.json:
            _emit(report.to_json())
        return 1
    return 0


def cmd_flow(args) -> int:
    H = corpus.load_structure(args.input)
    traj = flows.integrate_pluriclosed(H, args.t_max, args.dt, monitor_every=args.monitor_every)
    if args.out:
        write_csv(args.out, traj.csv_header(), traj.rows())
    _emit({"steps": len(traj.times) - 1, "t_final": float(traj.times[-1]), "halted": traj.halted,
           "max_skt": _finite(np.nanmax(traj.monitors["skt"])),
           "min_eig": _finite(np.nanmin(traj.monitors["min_eig"]))})
    return 0 if traj.halted is None else 1


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",") if x.strip()])


def _aa_spec_from_args(args) -> aa.AlmostAbelianSpec:
    if args.input:
        return corpus.load_almost_abelian(args.input)
    if args.v is None or args.A is None:
        raise corpus.InputError("aa-flow needs an input or all of --a, --v, --A")
    v = _parse_vector(args.v)
    A = np.array([_parse_vector(r) for r in args.A.split(";")]) if v.size else np.zeros((0, 0))
    return aa.AlmostAbelianSpec(args.a, v, A)


def cmd_aa_flow(args) -> int:
    spec = _aa_spec_from_args(args)
    traj = aa.integrate_flow(spec, args.t_max, args.dt, k_override=args.k)
    if args.out:
        write_csv(args.out, traj.csv_header(), traj.rows())
    _emit({"steps": len(traj.times) - 1, "halted": traj.halted,
           **{f"max_{k}": traj.max_monitor(k) for k in traj.monitors}})
    return 0 if traj.halted is None else 1


def cmd_vaisman_flow(args) -> int:
    H = corpus.load_structure(args.input)
    state = flows.vaisman_state(H)
    traj = flows.vaisman_f_ode(state, args.t_max, args.dt, H)
    samples = flows.constant_scalar_monitor(traj, every=args.monitor_every)
    by_t = {s.t: s for s in samples}
    header = ["t", "f", "s", "b", "h", "ansatz_residual"]

    def rows():
        for i, t in enumerate(traj.times):
            s = by_t.get(float(t))
            if s is None:
                yield [t, traj.f[i], *([float("nan")] * 4)]
            else:
                yield [t, traj.f[i], s.s, s.b, s.h, flows.ansatz_residual(traj, i)]

    if args.out:
        write_csv(args.out, header, rows())
    _emit({"h0": state.h, "theta0_norm2": state.norm2, "f_final": float(traj.f[-1]),
           "fixed_point": traj.fixed_point, "halted": traj.halted,
           "max_identity_residual": max(s.identity for s in samples),
           "max_h_vs_f": max(s.h_vs_f for s in samples)})
    return 0 if traj.halted is None else 1


def cmd_skt_feasible(args) -> int:
    H = corpus.load_structure(args.input)
    res = classifiers.skt_feasibility_invariant(H.sc, H.J)
    _emit(res.to_json())
    return 0


# sweep jobs must be module-level for the process pool

def _deformation_job(t: complex) -> dict:
    _, H = corpus.resolve(f"corpus:calabi_eckmann?t={t.real!r}{t.imag:+.17g}j")
    res = classifiers.skt_feasibility_invariant(H.sc, H.J)
    locus = abs(t) ** 2 + t.real - t.imag
    return {"t": [t.real, t.imag], "feasible": res.feasible, "exact": res.exact,
            "locus_value": locus, "on_locus": abs(locus) < 1e-12}


def _aa_job(payload: tuple[int, int, int]) -> dict:
    seed, n, vmode = payload
    rng = np.random.default_rng(seed)
    # alternate generic draws with draws satisfying the Av-criterion
    spec = aa.random_kahler_like_spec(rng, n) if vmode else aa.random_spec(rng, n, skew=True)
    H = aa.build(spec)
    bianchi, jinv = classifiers.kahler_like_residuals(H)
    crit = aa.kahler_like_criterion(spec).residual
    tol = 1e-8
    return {"seed": seed, "n": n, "criterion": crit, "kahler_like": max(bianchi, jinv),
            "agree": (crit <= tol) == (max(bianchi, jinv) <= tol)}


def _parse_complex(text: str) -> complex:
    return complex(text.strip().replace(" ", "").replace("i", "j"))


def cmd_sweep(args) -> int:
    if args.kind == "deformation":
        items = [_parse_complex(s) for s in args.values.split(",") if s.strip()] if args.values else []
        job = _deformation_job
    else:
        items = [(args.seed + i, args.n, i % 2) for i in range(args.samples)]
        job = _aa_job
    if not items:
        _emit([])
        return 0
    if args.workers == 1:
        out = [job(x) for x in items]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            out = list(pool.map(job, items))
    _emit(out)
    return 0


def cmd_corpus(args) -> int:
    if args.action == "list":
        for name in corpus.names():
            e = corpus.ENTRIES[name]
            params = ",".join(e.params) or "-"
            print(f"{name:<16}{params:<10}{e.note}")
        return 0
    if not args.name:
        raise corpus.InputError("corpus build needs an entry name")
    uri = args.name if args.name.startswith("corpus:") else f"corpus:{args.name}"
    entry, H = corpus.resolve(uri)
    spec = corpus.almost_abelian_6d() if entry.name == "aa6d" else None
    text = json.dumps(corpus.structure_to_json(H, spec), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hermitia", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="classify a Hermitian structure")
    c.add_argument("input", help="corpus:NAME[?k=v] or structure JSON file")
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("-k", type=int, default=1, help="index for the k-th Gauduchon residual")
    fmt = c.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--table", action="store_true")
    c.set_defaults(func=cmd_check)

    for name, func, help_ in [("flow", cmd_flow, "general invariant pluriclosed flow"),
                              ("aa-flow", cmd_aa_flow, "reduced almost abelian flow"),
                              ("vaisman-flow", cmd_vaisman_flow, "Vaisman surface scalar reduction")]:
        f = sub.add_parser(name, help=help_)
        f.add_argument("input", nargs="?" if name == "aa-flow" else None)
        f.add_argument("--t-max", type=float, default=1.0)
        f.add_argument("--dt", type=float, default=1e-3)
        f.add_argument("--out", help="CSV trajectory path")
        if name == "aa-flow":
            f.add_argument("-k", type=int, default=None, help="override the half-rank k of A + A^t")
            f.add_argument("--a", type=float, default=0.0)
            f.add_argument("--v", help="comma-separated vector in n_1")
            f.add_argument("--A", help="matrix rows separated by ';', entries by ','")
        else:
            f.add_argument("--monitor-every", type=int, default=1)
        f.set_defaults(func=func)

    s = sub.add_parser("skt-feasible", help="decide existence of an invariant SKT metric for J")
    s.add_argument("input")
    s.set_defaults(func=cmd_skt_feasible)

    w = sub.add_parser("sweep", help="parallel parameter sweep")
    w.add_argument("kind", choices=["deformation", "almost-abelian"])
    w.add_argument("--values", default="", help="comma-separated complex t values, e.g. 0,0.3,-0.3j")
    w.add_argument("--samples", type=int, default=20)
    w.add_argument("--n", type=int, default=2, help="complex dimension of the abelian ideal block")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--workers", type=int, default=4)
    w.set_defaults(func=cmd_sweep)

    k = sub.add_parser("corpus", help="list or export built-in structures")
    k.add_argument("action", choices=["list", "build"])
    k.add_argument("name", nargs="?")
    k.add_argument("--out")
    k.set_defaults(func=cmd_corpus)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (corpus.InputError, KeyError, StructureError, ValueError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"hermitia: error: {msg}", file=sys.stderr)
        _emit({"error": str(msg)})
        return 2


if __name__ == "__main__":
    sys.exit(main())

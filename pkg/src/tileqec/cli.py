"""Command-line interface: reproducible experiments over all toolkit modules.

Every command takes flags (optionally seeded from a flat JSON config via
--config); the fully resolved configuration is echoed as ``# key=value``
header lines in the output.  Stochastic commands require --seed.

Exit codes: 0 ok; 1 validation error; 2 budget exhausted (partial results
flushed with an ``# INCOMPLETE`` marker); 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import blo as blo_mod
from . import bounds as bounds_mod
from . import capacity as cap_mod
from . import channel as chan_mod
from . import circuit as circ_mod
from . import deform as deform_mod
from . import effbias as eff_mod
from . import tilecode as tc_mod
from . import weightred as wr_mod
from .bposd import DecoderConfig

STOCHASTIC = {
    "capacity",
    "phase-sweep",
    "bias-sweep",
    "weightred",
    "circuit-run",
    "effbias",
    "pheno",
}


class ValidationError(Exception):
    pass


class Budget:
    """Wall-clock budget; loops poll `spent` and flush partial output."""

    def __init__(self, seconds):
        self.t0 = time.time()
        self.seconds = seconds

    @property
    def spent(self) -> bool:
        return self.seconds is not None and time.time() - self.t0 > self.seconds


def _build_code(args) -> tc_mod.TileCode:
    if args.family == "open":
        if args.size not in tc_mod.OPEN_SIZES:
            raise ValidationError(f"size: open family supports {tc_mod.OPEN_SIZES}")
        return tc_mod.build_open(args.size)
    if args.family == "periodic":
        return tc_mod.build_periodic(args.size, args.ly or args.size)
    raise ValidationError("family: must be open or periodic")


def _build_deform(args, code) -> deform_mod.DeformationMap | None:
    spec = getattr(args, "deform", "none") or "none"
    if spec == "none":
        return None
    if spec == "linear":
        return deform_mod.ti_linear(code)
    if spec == "xy":
        return deform_mod.ti_xy(code)
    if spec == "unitcell":
        return deform_mod.ti_unitcell(code)
    if spec.startswith("random:"):
        try:
            pi_xz, pi_yz = (float(v) for v in spec.split(":", 1)[1].split(","))
        except ValueError:
            raise ValidationError("deform: random:PI_XZ,PI_YZ expected")
        if args.seed is None:
            raise ValidationError("seed: required for random deformations")
        return deform_mod.random_map(code.n, pi_xz, pi_yz, args.seed)
    raise ValidationError(f"deform: unknown kind {spec!r}")


def _channel(args) -> chan_mod.BiasedChannel:
    eta = math.inf if args.eta in ("inf", math.inf) else float(args.eta)
    return chan_mod.BiasedChannel(args.p, eta)


def _decoder_config(args) -> DecoderConfig:
    kw = {}
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    if getattr(args, "osd_mode", None) is not None:
        kw["osd_mode"] = args.osd_mode
    return DecoderConfig(**kw)


def _emit(args, lines):
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _header(args) -> list:
    keys = sorted(k for k in vars(args) if k not in ("func", "config"))
    return [f"# {k}={getattr(args, k)}" for k in keys]


# ---------------------------------------------------------------------------
# Commands


def cmd_build_code(args):
    code = _build_code(args)
    lines = _header(args)
    lines += [f"# n={code.n} k={code.k} checks={code.num_checks}"]
    lines += [tc_mod.dumps(code).rstrip("\n")]
    _emit(args, lines)
    return 0


def cmd_deform(args):
    code = _build_code(args)
    dmap = _build_deform(args, code)
    if dmap is None:
        raise ValidationError("deform: a deformation kind is required")
    lines = _header(args)
    lines += [deform_mod.dumps_map(dmap).rstrip("\n")]
    _emit(args, lines)
    return 0


def cmd_blo(args):
    lines = _header(args)
    lines.append("family,size,blo_count,min_weight,max_weight")
    family = {}
    for size in args.sizes:
        code = tc_mod.build_open(size) if args.family == "open" else tc_mod.build_periodic(size, size)
        dmap = _build_deform(args, code)
        dc = deform_mod.apply(code, dmap) if dmap is not None else code
        basis = blo_mod.minimize_weights(blo_mod.blo_basis(dc), dc)
        ws = [int(e.zbits.sum()) for e in basis.elements]
        family[dc.n] = basis
        lines.append(
            f"{args.family},{size},{blo_mod.count_logicals(basis)},"
            f"{min(ws) if ws else 0},{max(ws) if ws else 0}"
        )
    if len(args.sizes) > 1:
        diag = blo_mod.diagnostics(family)
        lines.append(blo_mod.diagnostics_csv(diag).rstrip("\n"))
    _emit(args, lines)
    return 0


def cmd_bounds(args):
    code = _build_code(args)
    dmap = _build_deform(args, code)
    dc = deform_mod.apply(code, dmap) if dmap is not None else code
    basis = blo_mod.minimize_weights(blo_mod.blo_basis(dc), dc)
    assignment = bounds_mod.assign_loads(basis)
    lines = _header(args)
    lines.append("p,nonoverlap_bound,load_bound")
    for p in args.p_grid:
        nb = bounds_mod.nonoverlap_bound(basis, p)
        try:
            lb = bounds_mod.load_bound(basis, assignment, p)
        except ValueError:
            lb = float("nan")  # load bound invalid at this rate
        lines.append(f"{p!r},{nb!r},{lb!r}")
    _emit(args, lines)
    return 0


def cmd_capacity(args):
    budget = Budget(args.budget_seconds)
    lines = _header(args)
    lines.append(cap_mod.trials_csv_header())
    curves = {}
    incomplete = False
    for size in args.sizes:
        code = tc_mod.build_open(size) if args.family == "open" else tc_mod.build_periodic(size, size)
        dmap = _build_deform(args, code)
        pts = []
        for i, p in enumerate(args.p_grid):
            if budget.spent:
                incomplete = True
                break
            ch = chan_mod.BiasedChannel(p, math.inf if args.eta == "inf" else float(args.eta))
            r = cap_mod.run_trials(
                code, dmap, ch, args.trials, args.seed + 1000 * i,
                _decoder_config(args), f"{args.family}{size}",
            )
            pts.append((p, r.failures / r.trials))
            lines.append(cap_mod.trials_csv_row(r, size))
        curves[size] = pts
        if incomplete:
            break
    if incomplete:
        lines.append("# INCOMPLETE")
        _emit(args, lines)
        return 2
    if len(curves) > 1:
        est = cap_mod.threshold_estimate(curves, method=args.method)
        if est is not None:
            p_th, spread = est
            lines.append(cap_mod.thresholds_csv_header())
            lines.append(
                cap_mod.thresholds_csv_row(args.deform, args.eta, p_th, spread, args.method)
            )
    _emit(args, lines)
    return 0


def cmd_phase_sweep(args):
    budget = Budget(args.budget_seconds)
    build = tc_mod.build_open if args.family == "open" else (lambda L: tc_mod.build_periodic(L, L))
    lines = _header(args)
    lines.append("pi_xz,pi_yz,size,p,rate")
    for pt in args.points:
        if budget.spent:
            lines.append("# INCOMPLETE")
            _emit(args, lines)
            return 2
        pi_xz, pi_yz = (float(v) for v in pt.split(","))
        rates = cap_mod.phase_point(
            build, args.sizes, pi_xz, pi_yz, args.p_grid, args.trials,
            args.disorder_samples, args.seed, _decoder_config(args),
        )
        for size in args.sizes:
            for p, rate in rates[size]:
                lines.append(f"{pi_xz},{pi_yz},{size},{p!r},{rate!r}")
    _emit(args, lines)
    return 0


def cmd_bias_sweep(args):
    budget = Budget(args.budget_seconds)
    lines = _header(args)
    lines.append(cap_mod.trials_csv_header())
    for size in args.sizes:
        code = tc_mod.build_open(size) if args.family == "open" else tc_mod.build_periodic(size, size)
        dmap = _build_deform(args, code)
        for j, eta in enumerate(args.eta_grid):
            for i, p in enumerate(args.p_grid):
                if budget.spent:
                    lines.append("# INCOMPLETE")
                    _emit(args, lines)
                    return 2
                ch = chan_mod.BiasedChannel(p, math.inf if eta == "inf" else float(eta))
                r = cap_mod.run_trials(
                    code, dmap, ch, args.trials, args.seed + 1000 * i + 100000 * j,
                    _decoder_config(args), f"{args.family}{size}",
                )
                lines.append(cap_mod.trials_csv_row(r, size))
    _emit(args, lines)
    return 0


def cmd_weightred(args):
    if not wr_mod.admissible(args.ell):
        raise ValidationError(f"ell: {args.ell} is not admissible")
    L = args.size if args.size else 7 * args.ell
    rate = wr_mod.monte_carlo_failure(L, args.p, args.trials, args.seed)
    lines = _header(args)
    lines.append("ell,L,p,trials,failure_rate")
    lines.append(f"{args.ell},{L},{args.p!r},{args.trials},{rate!r}")
    _emit(args, lines)
    return 0


def cmd_circuit_build(args):
    code = _build_code(args)
    dmap = _build_deform(args, code)
    noise = _channel(args) if args.p else None
    circ = circ_mod.build_memory(
        code, dmap, rounds=args.rounds, noise=noise, noise_mode=args.noise_mode
    )
    lines = _header(args)
    lines.append(circ_mod.circuit_dumps(circ).rstrip("\n"))
    _emit(args, lines)
    return 0


def cmd_circuit_run(args):
    code = _build_code(args)
    dmap = _build_deform(args, code)
    noise = _channel(args)
    p_l = circ_mod.memory_failure_rate(
        code, dmap, noise, args.shots, args.seed,
        rounds=args.rounds, config=_decoder_config(args), noise_mode=args.noise_mode,
    )
    lines = _header(args)
    lines.append("p,eta,rounds,shots,p_l")
    lines.append(f"{args.p!r},{args.eta},{args.rounds},{args.shots},{p_l!r}")
    _emit(args, lines)
    return 0


def cmd_schedule_search(args):
    code = _build_code(args)
    valid = circ_mod.schedule_search(code, rounds=args.rounds)
    lines = _header(args)
    lines.append(f"# valid={len(valid)} of 720")
    for perm in valid:
        lines.append(",".join(str(v) for v in perm))
    _emit(args, lines)
    return 0


def cmd_effbias(args):
    code = _build_code(args)
    dmap = _build_deform(args, code)
    model = eff_mod.platform_model(args.platform)
    params = eff_mod.estimate(
        code, dmap, args.strategy, model, args.samples, args.seed,
        rounds=args.rounds, transport=args.transport,
    )
    lines = _header(args)
    lines.append(eff_mod.effbias_csv_header())
    lines.append(eff_mod.effbias_csv_row(args.deform, args.strategy, args.platform, params))
    _emit(args, lines)
    return 0


def cmd_pheno(args):
    code = _build_code(args)
    dmap = _build_deform(args, code)
    res = eff_mod.pheno_eval(
        code, dmap, args.p_eff, args.eta_eff, args.shots, args.seed,
        rounds=args.rounds, config=_decoder_config(args),
    )
    lines = _header(args)
    lines.append("p_eff,eta_eff,rounds,shots,p_l")
    lines.append(f"{args.p_eff!r},{args.eta_eff!r},{args.rounds},{args.shots},{res.p_l!r}")
    _emit(args, lines)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _floats(s):
    return [float(v) for v in s.split(",")]


def _ints(s):
    return [int(v) for v in s.split(",")]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tileqec")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, code=True, deform=False, seed=False, out=True):
        p = sub.add_parser(name)
        p.set_defaults(func=fn)
        p.add_argument("--config", help="flat JSON config supplying defaults")
        if code:
            p.add_argument("--family", default="open")
            p.add_argument("--size", type=int)
            p.add_argument("--ly", type=int)
        if deform:
            p.add_argument("--deform", default="none")
        p.add_argument("--seed", type=int, default=None if seed else None)
        if out:
            p.add_argument("--out")
        p.add_argument("--budget-seconds", type=float, default=None)
        return p

    add("build-code", cmd_build_code)
    add("deform", cmd_deform, deform=True)

    p = add("blo", cmd_blo, deform=True)
    p.add_argument("--sizes", type=_ints, default=[6, 8, 10, 12])

    p = add("bounds", cmd_bounds, deform=True)
    p.add_argument("--p-grid", type=_floats, default=[0.1, 0.2, 0.3, 0.4])

    p = add("capacity", cmd_capacity, deform=True, seed=True)
    p.add_argument("--sizes", type=_ints, default=[6, 8, 10])
    p.add_argument("--p-grid", type=_floats, default=[0.08, 0.09, 0.10, 0.11, 0.12])
    p.add_argument("--eta", default="1.0")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--method", default="fss")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--osd-mode")

    p = add("phase-sweep", cmd_phase_sweep, code=False, seed=True)
    p.add_argument("--family", default="open")
    p.add_argument("--sizes", type=_ints, default=[6, 8, 10])
    p.add_argument("--points", nargs="+", required=True, help="PI_XZ,PI_YZ pairs")
    p.add_argument("--p-grid", type=_floats, default=[0.40, 0.45])
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--disorder-samples", type=int, default=5)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--osd-mode")

    p = add("bias-sweep", cmd_bias_sweep, deform=True, seed=True)
    p.add_argument("--sizes", type=_ints, default=[6, 8])
    p.add_argument("--eta-grid", nargs="+", default=["1", "10", "100", "inf"])
    p.add_argument("--p-grid", type=_floats, default=[0.1, 0.2, 0.3])
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--osd-mode")

    p = add("weightred", cmd_weightred, code=False, seed=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--size", type=int, help="lattice size; default 7*ell")
    p.add_argument("--p", type=float, default=0.40)
    p.add_argument("--trials", type=int, default=10000)

    p = add("circuit-build", cmd_circuit_build, deform=True)
    p.add_argument("--rounds", type=int, default=circ_mod.DEFAULT_ROUNDS)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--eta", default="1.0")
    p.add_argument("--noise-mode", default="circuit")

    p = add("circuit-run", cmd_circuit_run, deform=True, seed=True)
    p.add_argument("--rounds", type=int, default=circ_mod.DEFAULT_ROUNDS)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eta", default="1.0")
    p.add_argument("--shots", type=int, default=2000)
    p.add_argument("--noise-mode", default="circuit")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--osd-mode")

    p = add("schedule-search", cmd_schedule_search)
    p.add_argument("--rounds", type=int, default=3)

    p = add("effbias", cmd_effbias, deform=True, seed=True)
    p.add_argument("--strategy", default="no-native")
    p.add_argument("--platform", default="no-phys-gate")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--transport", default="sampled")

    p = add("pheno", cmd_pheno, deform=True, seed=True)
    p.add_argument("--p-eff", type=float, required=True)
    p.add_argument("--eta-eff", type=float, required=True)
    p.add_argument("--rounds", type=int, default=circ_mod.DEFAULT_ROUNDS)
    p.add_argument("--shots", type=int, default=2000)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--osd-mode")

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as f:
                conf = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            print(f"config: {e}", file=sys.stderr)
            return 1
        # flags given explicitly on the command line win over the config file
        explicit = {
            a[2:].split("=", 1)[0].replace("-", "_")
            for a in argv
            if a.startswith("--")
        }
        for k, v in conf.items():
            key = k.replace("-", "_")
            if not hasattr(args, key):
                print(f"config: unknown key {k!r}", file=sys.stderr)
                return 1
            if key not in explicit:
                setattr(args, key, v)
    if args.command in STOCHASTIC and args.seed is None:
        print("seed: required for stochastic commands", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except ValidationError as e:
        print(str(e), file=sys.stderr)
        return 1
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 1
    except AssertionError as e:
        print(f"internal invariant violated: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""``sicmultiport`` command-line entry point.

Exit codes: 0 when every verification gate passes, 1 when a gate or a
stage fails, 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import checks
from .compiler import reck_decompose, sic_netlist, verify_netlist
from .jsonio import decode_array, encode_array, read_json, write_json
from .naimark import naimark_for_dim
from .netlist import OpticalNetlist, validate_netlist
from .optics import DEVICES, DetectionRecord, device_label, device_povm, run_sic_experiment
from .qstate import (
    TOL_PROFILE,
    DensityOperator,
    PureState,
    UnitaryMatrix,
    check_unitary,
    random_pure_state,
)
from .sic import QUTRIT_FIDUCIAL, SicPovm, qubit_sic, qutrit_sic, verify_sic
from .tomography import (
    estimate_fidelity,
    linear_reconstruct,
    project_to_pure_manifold,
    pure_estimate_from_linear,
)

DEFAULT_TOLERANCES = {
    "gram": 1e-12,
    "unitary": 1e-12,
    "recompose": 1e-9,
    "agreement": 1e-10,
    "solver": 1e-9,
}
STATE_PRESETS = ("zero", "fiducial", "mixed", "random")


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def derive_seed(seed: int, stage: str) -> int:
    """64-bit seed for ``stage``: first 8 bytes (little endian) of sha256("<seed>/<stage>")."""
    digest = hashlib.sha256(f"{int(seed)}/{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


# -- state handling ------------------------------------------------------------


def load_state(source, dim: int, seed: int = 0):
    """A preset name or a JSON file holding a vector (pure) or matrix (density)."""
    if source in STATE_PRESETS:
        if source == "zero":
            return PureState.from_amplitudes(np.eye(dim)[0])
        if source == "fiducial":
            return PureState.from_amplitudes(qubit_sic().vectors[0] if dim == 2 else QUTRIT_FIDUCIAL)
        if source == "mixed":
            return DensityOperator.maximally_mixed(dim)
        return random_pure_state(dim, seed)
    obj = read_json(source)
    if "state" in obj:
        obj = obj["state"]
    a = decode_array(obj)
    state = PureState.from_amplitudes(a) if a.ndim == 1 else DensityOperator(a)
    sdim = state.dim
    if sdim != dim:
        raise ConfigError(f"state in {source} has dimension {sdim}, device needs {dim}")
    return state


def _rho(state):
    return state.projector() if isinstance(state, PureState) else state


# -- estimation ------------------------------------------------------------------


def estimate_from_record(record: DetectionRecord, mode: str, tol: float, max_iter: int, truth=None) -> dict:
    """Estimate JSON for one record; shared by ``estimate`` and ``pipeline``."""
    label = device_label(record.device_label or {4: "qubit-sic", 9: "qutrit-sic"}[record.counts.size])
    povm = device_povm(label)
    f = record.frequencies
    out = {"mode": mode, "device": label, "frequencies": f.tolist()}
    if mode == "linear":
        rho = linear_reconstruct(f, povm)
        out.update({"rho": encode_array(rho.matrix), "psd": rho.psd})
    elif mode == "pure" and povm.dim == 3:
        est = project_to_pure_manifold(f, tol=tol, max_iter=max_iter)
        rho = est.rho_star
        out.update(est.to_json())
        out["tol"] = tol
    elif mode == "pure":
        # no pure-state manifold constraints for the qubit: dominant eigenvector instead
        state = pure_estimate_from_linear(f, povm)
        rho = state.projector()
        out.update({"rho": encode_array(rho.matrix), "state": encode_array(state.amplitudes), "converged": True})
    else:
        raise ConfigError(f"unknown estimate mode {mode!r}")
    if truth is not None:
        out["fidelity"] = estimate_fidelity(rho, _rho(truth))
    return out


def _record_from_file(path) -> DetectionRecord:
    obj = read_json(path)
    if "record" in obj:
        obj = obj["record"]
    return DetectionRecord.from_json(obj)


# -- pipeline --------------------------------------------------------------------------


@dataclass
class RunConfig:
    device: str = "qutrit-sic"
    shots: int = 100_000
    seed: int = 0
    state: str = "random"
    truth: str | None = None
    mode: str = "pure"
    max_iter: int = 500
    out: str = "-"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def validate(self):
        try:
            self.device = device_label(self.device)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not isinstance(self.shots, int) or isinstance(self.shots, bool) or self.shots < 1:
            raise ConfigError(f"shots must be a positive integer, got {self.shots!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.mode not in ("linear", "pure"):
            raise ConfigError(f"mode must be 'linear' or 'pure', got {self.mode!r}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance names {sorted(unknown)}")
        bad = {k: v for k, v in self.tolerances.items() if not (isinstance(v, (int, float)) and v > 0)}
        if bad:
            raise ConfigError(f"tolerances must be positive: {bad}")
        for name in ("state", "truth"):
            value = getattr(self, name)
            if value is not None and value not in STATE_PRESETS and not Path(value).is_file():
                raise ConfigError(f"{name} {value!r} is neither a preset nor a readable file")
        if self.out != "-" and not Path(self.out).resolve().parent.is_dir():
            raise ConfigError(f"output directory for {self.out!r} does not exist")
        return self


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            data = read_json(args.config)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        known = set(asdict(cfg))
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for k, v in data.items():
            if k == "tolerances":
                cfg.tolerances.update(v)
            else:
                setattr(cfg, k, v)
    for k in ("device", "shots", "seed", "state", "truth", "mode", "max_iter", "out"):
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    cfg.tolerances.update(args.tol or {})
    return cfg.validate()


def run_pipeline(cfg: RunConfig) -> dict:
    tol = cfg.tolerances
    d = DEVICES[cfg.device]
    seeds = {stage: derive_seed(cfg.seed, stage) for stage in ("state", "simulate")}
    gates = {}

    povm = qubit_sic() if d == 2 else qutrit_sic()
    sic_rep = verify_sic(povm, tol["gram"])
    gates["sic-gram"] = sic_rep.passed
    ext = naimark_for_dim(d)
    unit = check_unitary(ext.completion.matrix, tol["unitary"])
    gates["naimark-unitary"] = unit.ok

    net = sic_netlist(cfg.device)
    rec = verify_netlist(net, ext.completion.matrix.conj().T, tol=tol["recompose"])
    limit = checks.QUBIT_ELEMENT_LIMIT if d == 2 else checks.QUTRIT_ELEMENT_LIMIT
    gates["compile-recompose"] = rec.passed
    gates["compile-count"] = net.count() <= limit

    try:
        state = load_state(cfg.state, d, seeds["state"])
        truth = state if cfg.truth is None else load_state(cfg.truth, d, seeds["state"])
    except (OSError, ValueError) as exc:
        raise StageError("state", str(exc)) from exc
    try:
        record, ideal = run_sic_experiment(state, cfg.device, cfg.shots, seeds["simulate"], tol["agreement"])
    except (RuntimeError, ValueError) as exc:
        raise StageError("simulate", str(exc)) from exc
    gates["simulate-agreement"] = True

    try:
        estimate = estimate_from_record(record, cfg.mode, tol["solver"], cfg.max_iter, truth)
    except (RuntimeError, ValueError) as exc:
        raise StageError("estimate", str(exc)) from exc
    gates["estimate-converged"] = bool(estimate.get("converged", True))

    return {
        "config": asdict(cfg),
        "seeds": seeds,
        "tolerance_profile": TOL_PROFILE,
        "build": {
            "sic_gram_deviation": sic_rep.gram_deviation,
            "sic_identity_deviation": sic_rep.identity_deviation,
            "naimark_unitarity_defect": unit.defect,
        },
        "compile": {
            "elements": net.count(),
            "by_kind": net.count_by_kind(),
            "limit": limit,
            "recompose_defect": rec.defect,
        },
        "simulate": {
            "ideal": ideal.probs.tolist(),
            "empirical": record.frequencies.tolist(),
        },
        "record": record.to_json(ideal),
        "truth": encode_array(_rho(truth).matrix),
        "estimate": estimate,
        "fidelity": estimate.get("fidelity"),
        "gates": gates,
        "passed": all(gates.values()),
    }


# -- subcommand handlers -----------------------------------------------------------------


def _err(msg):
    print(msg, file=sys.stderr)


def cmd_sic(args) -> int:
    if args.action == "build":
        povm = qubit_sic() if args.dim == 2 else qutrit_sic()
        write_json(args.out, povm.to_json())
        return 0
    povm = SicPovm.from_json(read_json(args.input))
    rep = verify_sic(povm, args.tol)
    status = "PASS" if rep.passed else "FAIL"
    print(f"{status} gram deviation {rep.gram_deviation:.3e}, identity deviation {rep.identity_deviation:.3e} (tol {args.tol:g})")
    return 0 if rep.passed else 1


def cmd_naimark(args) -> int:
    write_json(args.out, naimark_for_dim(args.dim).to_json())
    return 0


def _load_unitary(path) -> np.ndarray:
    obj = read_json(path)
    if "unitary" in obj:
        obj = obj["unitary"]
    return UnitaryMatrix(decode_array(obj)).matrix


def cmd_compile(args) -> int:
    if args.action == "build":
        if bool(args.target) == bool(args.unitary):
            raise ConfigError("give exactly one of --target or --unitary")
        if args.target:
            net = sic_netlist(args.target)
        else:
            if args.method != "reck":
                raise ConfigError(f"unknown method {args.method!r}")
            net = reck_decompose(_load_unitary(args.unitary))
        write_json(args.out, net.to_json())
        _err(f"{net.count()} elements ({net.count_by_kind()})")
        return 0
    if not args.net:
        raise ConfigError("--net is required")
    net = OpticalNetlist.from_json(read_json(args.net))
    if args.action == "count":
        print(json.dumps({"elements": net.count(), "by_kind": net.count_by_kind()}, sort_keys=True))
        return 0
    problems = validate_netlist(net)
    if problems:
        for p in problems:
            print(f"FAIL {p}")
        return 1
    if args.unitary:
        target = _load_unitary(args.unitary)
    elif args.target:
        target = naimark_for_dim(DEVICES[device_label(args.target)]).completion.matrix.conj().T
    else:
        raise ConfigError("give --unitary or --target to verify against")
    rep = verify_netlist(net, target, tol=args.tol, up_to_global_phase=args.up_to_global_phase)
    phase = " up to global phase" if rep.up_to_global_phase else ""
    print(f"{'PASS' if rep.passed else 'FAIL'} defect {rep.defect:.3e}{phase} (tol {rep.tol:g}), {rep.element_count} elements")
    return 0 if rep.passed else 1


def cmd_simulate(args) -> int:
    label = device_label(args.device)
    state = load_state(args.state, DEVICES[label], args.seed)
    record, ideal = run_sic_experiment(state, label, args.shots, args.seed)
    write_json(args.out, record.to_json(ideal))
    return 0


def cmd_estimate(args) -> int:
    record = _record_from_file(args.record)
    d = 2 if record.counts.size == 4 else 3
    truth = load_state(args.truth, d) if args.truth else None
    tol = (args.tol or {}).get("solver", DEFAULT_TOLERANCES["solver"])
    out = estimate_from_record(record, args.mode, tol, args.max_iter, truth)
    write_json(args.out, out)
    return 0 if out.get("converged", True) else 1


def cmd_pipeline(args) -> int:
    cfg = build_config(args)
    try:
        report = run_pipeline(cfg)
    except StageError as exc:
        _err(str(exc))
        return 1
    write_json(cfg.out, report)
    for name, ok in report["gates"].items():
        if not ok:
            _err(f"[gate] {name} failed")
    return 0 if report["passed"] else 1


def cmd_verify_all(args) -> int:
    tol = (args.tol or {}).get("recompose", DEFAULT_TOLERANCES["recompose"])
    results = checks.run_all(tol)
    for path in args.net or []:
        try:
            net = OpticalNetlist.from_json(read_json(path))
        except (OSError, ValueError, KeyError) as exc:
            results.append(checks.CheckResult(f"netlist:{path}", False, detail=f"unreadable: {exc}"))
            continue
        results += checks.check_netlist_file(net, f"netlist:{path}")
    print(checks.format_table(results))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    if args.json:
        write_json(args.json, [r.to_json() for r in results])
    return 0 if failed == 0 else 1


# -- argument parsing --------------------------------------------------------------------


def _tol_arg(text: str) -> dict:
    """``1e-9`` sets the command's main tolerance; ``name=value`` sets a named one."""
    name, _, value = text.rpartition("=")
    try:
        v = float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance {text!r}") from exc
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return {name or "_": v}


class _TolAction(argparse.Action):
    def __init__(self, *args, main: str = "solver", **kwargs):
        self.main = main
        super().__init__(*args, **kwargs)

    def __call__(self, parser, namespace, values, option_string=None):
        cur = dict(getattr(namespace, self.dest) or {})
        for k, v in values.items():
            cur[self.main if k == "_" else k] = v
        setattr(namespace, self.dest, cur)


def _add_tol(p, main):
    p.add_argument(
        "--tol",
        type=_tol_arg,
        action=_TolAction,
        main=main,
        metavar="[NAME=]VALUE",
        help=f"tolerance; a bare value sets '{main}' (names: {', '.join(DEFAULT_TOLERANCES)})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sicmultiport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sic", help="build or verify a SIC-POVM")
    p.add_argument("action", choices=("build", "verify"))
    p.add_argument("--dim", type=int, choices=(2, 3), default=3)
    p.add_argument("--in", dest="input")
    p.add_argument("--out", default="-")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_sic)

    p = sub.add_parser("naimark", help="write the device unitary and embedding")
    p.add_argument("action", choices=("build",))
    p.add_argument("--dim", type=int, choices=(2, 3), default=3)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_naimark)

    p = sub.add_parser("compile", help="compile, verify or count an optical netlist")
    p.add_argument("action", nargs="?", choices=("build", "verify", "count"), default="build")
    p.add_argument("--target", choices=tuple(DEVICES))
    p.add_argument("--unitary")
    p.add_argument("--method", default="reck")
    p.add_argument("--net")
    p.add_argument("--out", default="-")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--up-to-global-phase", action="store_true")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="sample a detection record")
    p.add_argument("--device", required=True, choices=tuple(DEVICES))
    p.add_argument("--state", required=True, help=f"JSON file or one of {', '.join(STATE_PRESETS)}")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="reconstruct a state from a record or report")
    p.add_argument("--record", required=True)
    p.add_argument("--mode", choices=("linear", "pure"), default="pure")
    p.add_argument("--truth")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--out", default="-")
    _add_tol(p, "solver")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("pipeline", help="run every stage from construction to estimation")
    p.add_argument("--config")
    p.add_argument("--device", choices=tuple(DEVICES))
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--state", help=f"JSON file or one of {', '.join(STATE_PRESETS)}")
    p.add_argument("--truth")
    p.add_argument("--mode", choices=("linear", "pure"))
    p.add_argument("--max-iter", type=int)
    p.add_argument("--out")
    _add_tol(p, "solver")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("verify-all", help="run the invariant suite")
    p.add_argument("--net", action="append", help="also check this netlist file (repeatable)")
    p.add_argument("--json", help="write the results as JSON")
    _add_tol(p, "recompose")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "sic" and args.action == "verify" and not args.input:
        parser.error("sic verify needs --in")
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return 2
    except (OSError, ValueError, KeyError) as exc:
        _err(f"[{args.command}] {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

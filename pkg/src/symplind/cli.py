"""Command-line interface: parse a model file, dispatch, emit JSON or CSV.

Commands
--------
spectrum      gauge-fixed eigenvalues, optional occupation sums
normal-form   transition-matrix blocks, eigenvalues, residuals, Jordan data
stability     stability class with leading real part and spectral gap
cumulants     generating-function samples plus factorial/ordinary cumulants
symmetry      verdicts for the candidates listed in the model file
oracle-check  side-by-side engine vs truncated-Fock spectra
evolve-jordan coefficient table of the defective-pair time evolution

Exit codes: 0 success, 1 computational error, 2 input error.  Errors are
emitted as a JSON object ``{code, message, context}`` on stdout; stderr
carries diagnostics only.  Complex numbers serialize as [re, im] pairs; CSV
output flattens them into paired ``_re``/``_im`` columns.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import counting, oracle, symmetry, thirdq
from .errors import (
    ComputationError,
    InputError,
    ModelParseError,
    SymplindError,
    UnsupportedJordanStructure,
)
from .linalg import detect_jordan
from .model import assemble_liouvillian, build_dissipation_m, model_from_json

_TABLE_KEYS = {"rows"}


def _c(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _carray(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [_c(z) for z in a]
    return [[_c(z) for z in row] for row in a]


def _jordan_rows(pairs) -> list:
    return [
        {
            "kind": p.kind,
            "mu": _c(p.mu),
            "nu": None if p.nu is None else _c(p.nu),
            "modes": list(p.modes),
        }
        for p in pairs
    ]


def _spectral_data(blocks):
    """Gauge-fixed spectrum with Jordan data; falls back to detection when
    the chain construction is out of scope (multi-mode head defects)."""
    try:
        form = thirdq.third_quantize(blocks)
        return {
            "lambdas": form.lambdas,
            "jordan": form.jordan,
            "residual_J": form.residual_J,
            "residual_L": form.residual_L,
            "route": form.route,
            "form": form,
        }
    except UnsupportedJordanStructure:
        rep = detect_jordan(blocks.L, blocks.J)
        return {
            "lambdas": np.asarray(rep.eigenvalues),
            "jordan": rep.pairs,
            "residual_J": None,
            "residual_L": None,
            "route": "jordan-detection",
            "form": None,
        }


# ------------------------------------------------------------------ commands

def _cmd_spectrum(args, model, blocks, extras):
    data = _spectral_data(blocks)
    form = data["form"]
    heff_res = thirdq.heff_eigencheck(form) if form is not None else None
    rows = [
        {"mode": i, "lambda": _c(lam), "residual": heff_res}
        for i, lam in enumerate(data["lambdas"])
    ]
    occ_rows = []
    for occ in args.occupation or []:
        if form is None:
            raise UnsupportedJordanStructure(
                "occupation sums need a diagonalizable normal form")
        vec = _parse_occupation(occ, len(data["lambdas"]))
        val = thirdq.liouvillian_eigenvalue(form, vec)
        occ_rows.append({"occupation": list(map(int, vec)), "eigenvalue": _c(val)})
    out = {
        "lambdas": _carray(data["lambdas"]),
        "route": data["route"],
        "jordan": _jordan_rows(data["jordan"]),
        "residual_J": data["residual_J"],
        "residual_L": data["residual_L"],
        "heff_residual": heff_res,
        "rows": rows,
    }
    if occ_rows:
        out["occupation_sums"] = occ_rows
    return out


def _cmd_normal_form(args, model, blocks, extras):
    form = thirdq.third_quantize(blocks)
    rows = [
        {"mode": i, "lambda": _c(lam), "residual_J": form.residual_J,
         "residual_L": form.residual_L}
        for i, lam in enumerate(form.lambdas)
    ]
    return {
        "lambdas": _carray(form.lambdas),
        "S1": _carray(form.S1),
        "S2": _carray(form.S2),
        "S3": _carray(form.S3),
        "eta_prime": _carray(form.eta_prime),
        "L0": _c(form.L0),
        "jordan": _jordan_rows(form.jordan),
        "residual_J": form.residual_J,
        "residual_L": form.residual_L,
        "route": form.route,
        "rows": rows,
    }


def _cmd_stability(args, model, blocks, extras):
    data = _spectral_data(blocks)
    scale = max(float(np.max(np.abs(blocks.Heff))), 1.0)
    rep = thirdq.classify_spectrum(data["lambdas"], data["jordan"], scale)
    out = {
        "class": rep.stability,
        "max_real_part": rep.max_real_part,
        "spectral_gap": rep.spectral_gap,
        "tol": rep.tol,
        "jordan": _jordan_rows(data["jordan"]),
        "rows": [{
            "class": rep.stability,
            "max_real_part": rep.max_real_part,
            "spectral_gap": rep.spectral_gap,
            "tol": rep.tol,
        }],
    }
    if len(data["jordan"]) == 1 and data["jordan"][0].nu is not None:
        p = data["jordan"][0]
        out["jordan_pair"] = {"mu": _c(p.mu), "nu": _c(p.nu)}
    return out


def _counting_setup(blocks, extras):
    spec = extras.get("counting") or {}
    mode = int(spec.get("mode", 0))
    gamma = float(spec.get("gamma", 1.0))
    return counting.photon_current_observable(blocks, mode, gamma)


def _cmd_cumulants(args, model, blocks, extras):
    obs = _counting_setup(blocks, extras)
    branches = counting.track_branches(blocks, obs, s_max=args.s_max, steps=args.s_steps)
    fact = counting.factorial_cumulants(branches, args.order)
    ordin = counting.ordinary_cumulants(branches, args.order)
    rows = [
        {"s": float(s.real), "G": _c(g)}
        for s, g in zip(branches.s_grid, branches.g_values)
    ]
    return {
        "s_grid": [float(s.real) for s in branches.s_grid],
        "G": _carray(branches.g_values),
        "factorial_cumulants": _carray(fact),
        "ordinary_cumulants": _carray(ordin),
        "order": args.order,
        "min_overlap": branches.overlap_log,
        "grid_spacing": float(np.real(branches.s_grid[1] - branches.s_grid[0])),
        "rows": rows,
    }


def _cmd_symmetry(args, model, blocks, extras):
    cands = extras.get("symmetries", [])
    if not cands:
        raise InputError("model file lists no symmetry candidates under 'symmetries'")
    d = build_dissipation_m(model.m, model.jumps)
    data = _spectral_data(blocks)
    scale = max(float(np.max(np.abs(blocks.Heff))), 1.0)
    herm = symmetry.hermiticity_check(blocks)
    rows = []
    for spec in cands:
        kind, name, P = spec["type"], spec.get("name", ""), spec["P"]
        if kind == "unitary":
            verdict = symmetry.unitary_symmetry_check(
                model, d, symmetry.UnitarySymmetryCandidate(P=P, name=name))
            row = {"candidate": name or "unitary", "type": kind,
                   "passed": verdict.passed, "max_residual": verdict.worst(),
                   "tol": verdict.tol}
        elif kind == "pt":
            verdict = symmetry.pt_symmetry_check(
                model, d, symmetry.PTSymmetryCandidate(P=P, name=name))
            row = {"candidate": name or "pt", "type": kind,
                   "passed": verdict.passed, "max_residual": verdict.worst(),
                   "tol": verdict.tol}
            if verdict.passed:
                row["classification"] = symmetry.pt_classification(
                    data["lambdas"], data["jordan"], scale)
        else:
            raise InputError(f"unknown symmetry type {kind!r}")
        rows.append(row)
    return {
        "hermiticity": {"max_residual": herm["max"], "passed": herm["passed"]},
        "conjugate_pairing": symmetry.conjugate_pairing_check(data["lambdas"]),
        "rows": rows,
    }


def _cmd_oracle_check(args, model, blocks, extras):
    data = _spectral_data(blocks)
    form = data["form"]
    gen = oracle.build_oracle(model, cutoff=args.cutoff)
    count = 6
    if form is not None and not form.jordan:
        engine = [val for _, val in thirdq.lowest_eigenvalues(form, count)]
    else:
        engine = sorted(np.asarray(data["lambdas"], dtype=complex),
                        key=lambda z: abs(z.real))[:count]
        engine = [0.0 + 0.0j] + list(engine)
    ora = oracle.oracle_spectrum(gen, max(30, 4 * count))
    rows = []
    worst = 0.0
    for val in engine:
        j = int(np.argmin(np.abs(ora - val)))
        dev = float(abs(ora[j] - val))
        worst = max(worst, dev)
        rows.append({"engine": _c(val), "oracle": _c(ora[j]), "deviation": dev})
    return {
        "cutoff": args.cutoff,
        "max_deviation": worst,
        "tol": args.tol,
        "passed": bool(worst <= args.tol),
        "rows": rows,
    }


def _cmd_evolve_jordan(args, model, blocks, extras):
    data = _spectral_data(blocks)
    pair = next((p for p in data["jordan"] if p.kind == "mode" and p.nu is not None), None)
    if pair is None:
        raise ComputationError(
            "model has no defective pair with extractable (mu, nu); "
            "evolve-jordan applies at an exceptional point")
    occ = args.occupation or ["1,0"]
    vec = _parse_occupation(occ[0], 2)
    coeffs = thirdq.jordan_evolution_coefficients(
        pair.mu, pair.nu, args.time, int(vec[0]), int(vec[1]))
    rows = [
        {"m": k, "target": [int(vec[0]) - k, int(vec[1]) + k], "coefficient": _c(c)}
        for k, c in coeffs
    ]
    return {
        "mu": _c(pair.mu),
        "nu": _c(pair.nu),
        "t": args.time,
        "start": [int(vec[0]), int(vec[1])],
        "rows": rows,
    }


# ---------------------------------------------------------------- plumbing

def _parse_occupation(text: str, n: int) -> np.ndarray:
    try:
        vec = np.array([int(x) for x in text.split(",")], dtype=int)
    except ValueError as exc:
        raise InputError(f"bad --occupation {text!r}: {exc}") from exc
    if len(vec) != n or np.any(vec < 0):
        raise InputError(
            f"--occupation needs {n} non-negative integers, got {text!r}")
    return vec


def _load_model(path):
    from .model import model_from_dict

    with open(path) as fh:
        raw = json.load(fh)
    model = model_from_dict(raw)
    extras = {
        "symmetries": _parse_symmetries(raw),
        "counting": raw.get("counting"),
    }
    return model, extras


def _parse_symmetries(raw) -> list:
    out = []
    for k, spec in enumerate(raw.get("symmetries", []) or []):
        path = f"$.symmetries[{k}]"
        if not isinstance(spec, dict) or "type" not in spec or "P" not in spec:
            raise ModelParseError(path, "expected object with 'type' and 'P'")
        P = np.array([[_num(x, f"{path}.P") for x in row] for row in spec["P"]])
        out.append({"type": spec["type"], "name": spec.get("name", ""), "P": P})
    return out


def _num(x, path):
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2:
        return complex(x[0], x[1])
    raise ModelParseError(path, f"expected number or [re, im], got {x!r}")


def _emit(result: dict, fmt: str, stream) -> None:
    if fmt == "json":
        json.dump(result, stream, indent=2, default=_json_default)
        stream.write("\n")
        return
    rows = result.get("rows", [])
    flat_rows = [_flatten_row(r) for r in rows]
    header: list = []
    for r in flat_rows:
        for k in r:
            if k not in header:
                header.append(k)
    writer = csv.DictWriter(stream, fieldnames=header)
    writer.writeheader()
    for r in flat_rows:
        writer.writerow(r)


def _flatten_row(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if isinstance(v, complex):
            v = _c(v)
        if isinstance(v, list) and len(v) == 2 and all(isinstance(x, float) for x in v):
            out[f"{k}_re"], out[f"{k}_im"] = v
        elif isinstance(v, list):
            out[k] = " ".join(str(x) for x in v)
        else:
            out[k] = v
    return out


def _json_default(obj):
    if isinstance(obj, complex):
        return _c(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)}")


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "normal-form": _cmd_normal_form,
    "stability": _cmd_stability,
    "cumulants": _cmd_cumulants,
    "symmetry": _cmd_symmetry,
    "oracle-check": _cmd_oracle_check,
    "evolve-jordan": _cmd_evolve_jordan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symplind",
        description="Quadratic bosonic Lindblad solver via symplectic normal forms",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--model", required=True, help="model JSON file")
        p.add_argument("--output", choices=("json", "csv"), default="json")
        p.add_argument("--cutoff", type=int, default=16, help="Fock levels per mode")
        p.add_argument("--s-max", dest="s_max", type=float, default=0.4)
        p.add_argument("--s-steps", dest="s_steps", type=int, default=20)
        p.add_argument("--order", type=int, default=2, help="cumulant order")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--occupation", action="append",
                       help="comma-separated occupation numbers; repeatable")
        p.add_argument("--time", type=float, default=1.0,
                       help="evolution time for evolve-jordan")
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        model, extras = _load_model(args.model)
        blocks = assemble_liouvillian(model)
        result = _COMMANDS[args.command](args, model, blocks, extras)
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        json.dump({"code": "input-error", "message": str(exc), "context": {}}, stdout)
        stdout.write("\n")
        return 2
    except InputError as exc:
        json.dump(exc.as_dict(), stdout)
        stdout.write("\n")
        return 2
    except ComputationError as exc:
        json.dump(exc.as_dict(), stdout)
        stdout.write("\n")
        return 1
    except SymplindError as exc:
        json.dump(exc.as_dict(), stdout)
        stdout.write("\n")
        return 1
    _emit(result, args.output, stdout)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

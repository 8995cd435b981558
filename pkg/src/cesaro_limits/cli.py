"""Command-line front end.

Subcommands wrap the library one-to-one and emit deterministic JSON reports:
identical inputs, flags and seeds produce byte-identical output (timing is
opt-in via --timing precisely so the default stays reproducible).

Exit codes: 0 success, 1 check-suite failure, 2 parse/usage error,
3 numerical failure, 4 not power-bounded, 5 infeasible target.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    cesaro_limit,
    cesaro_means,
    check_invariance,
    harmonic_mean_check,
    harmonic_mean_counterexample,
    iterated_limit,
    norm_lower_bound_check,
    oracle_envelope,
    trace_condition,
)
from .classify import class_label, classify, norm_limit_exists, spectral_set_membership
from .config import DEFAULT, Tolerances
from .errors import (
    CesaroError,
    EigenFailure,
    HorizonTooSmall,
    Infeasible,
    MatrixFileError,
    NotC11,
    NotConverging,
    NotInSpectralSet,
    NotPositiveDefinite,
    NotPowerBounded,
    NotPSD,
    RankDeficient,
    RankMismatch,
    SingularMatrix,
    WrongDimension,
)
from .linalg import adjoint, operator_norm
from .matrixio import load_matrix, matrix_to_obj
from .shifts import (
    ShiftRule,
    banach_bracket,
    cesaro_verdict,
    evaluate,
    powerbounded_verdict,
)
from .synthesis import (
    classify_target,
    generate_instance,
    haar_unitary,
    random_contraction,
    random_idempotent,
    synthesize,
    synthesize_norm_limit,
)

EXIT_OK = 0
EXIT_SUITE_FAIL = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_NOT_POWER_BOUNDED = 4
EXIT_INFEASIBLE = 5

COUNTEREXAMPLE_EIGS = (1.27178, 2.1285, 2.59972)


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, (MatrixFileError, HorizonTooSmall, WrongDimension, NotC11, ValueError)):
        return EXIT_PARSE
    if isinstance(exc, (NotPowerBounded, NotConverging)):
        return EXIT_NOT_POWER_BOUNDED
    if isinstance(exc, (Infeasible, RankMismatch, NotInSpectralSet, NotPositiveDefinite)):
        return EXIT_INFEASIBLE
    if isinstance(exc, (SingularMatrix, NotPSD, RankDeficient, EigenFailure, CesaroError)):
        return EXIT_NUMERIC
    raise exc


def _complex_list(values) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex)]


def _real_list(values) -> list:
    return [float(v) for v in np.asarray(values, dtype=float)]


def _digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _digest_text(text: str) -> str:
    return _digest_bytes(text.encode())


def _limit_obj(lim) -> dict:
    return {
        "A": matrix_to_obj(lim.A),
        "rank_k": lim.rank_k,
        "stable_dim_l": lim.stable_dim_l,
        "nonzero_eigs": _real_list(lim.nonzero_eigs),
        "method": lim.method,
        "n_used": lim.n_used,
    }


def _parse_tolerances(pairs) -> Tolerances:
    tol = DEFAULT
    for pair in pairs or ():
        name, _, value = pair.partition("=")
        if not value or not hasattr(tol, name):
            raise MatrixFileError(f"unknown tolerance override {pair!r}")
        tol = dataclasses.replace(tol, **{name: float(value)})
    return tol


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if out_path:
        Path(out_path).write_text(text)


def _report(command: str, arguments: dict, digest: str, tol: Tolerances, result: dict,
            timing_ms: float | None) -> dict:
    return {
        "schema_version": 1,
        "version": __version__,
        "command": command,
        "arguments": arguments,
        "input_digest": digest,
        "tolerances": tol.as_dict(),
        "result": result,
        "timing_ms": timing_ms,
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_classify(args, tol: Tolerances) -> tuple[dict, str, int]:
    T = load_matrix(args.matrix)
    report = classify(T, tol)
    result = {
        "verdict": report.verdict,
        "reason": report.reason,
        "d": report.d,
        "m": report.m,
        "stable_dim_l": report.stable_dim_l,
        "annulus_warning": report.annulus_warning,
        "power_bound_estimate": float(report.power_bound_estimate),
        "unimodular_values": _complex_list(report.unimodular_values),
        "class_label": None,
        "similarity_S": None,
        "interior_block_B": None,
        "norm_limit_exists": None,
    }
    if report.power_bounded:
        label = class_label(report)
        result["class_label"] = {"kind": label.kind, "stable_dim": label.stable_dim}
        result["similarity_S"] = matrix_to_obj(report.similarity_S)
        result["interior_block_B"] = matrix_to_obj(report.interior_block_B) if report.m < report.d else {"d": 0, "entries": []}
        result["norm_limit_exists"] = norm_limit_exists(T, tol, report=report)
    digest = _digest_bytes(Path(args.matrix).read_bytes())
    return result, digest, EXIT_OK


def _cmd_limit(args, tol: Tolerances) -> tuple[dict, str, int]:
    T = load_matrix(args.matrix)
    result: dict = {"method": args.method, "n": args.n, "disagreement": None}
    if args.method in ("iterate", "both") and not args.n:
        raise MatrixFileError("--method iterate requires --n")
    spectral = iterated = None
    if args.method in ("spectral", "both"):
        spectral = cesaro_limit(T, tol)
        result["limit"] = _limit_obj(spectral)
    if args.method in ("iterate", "both"):
        iterated = iterated_limit(T, args.n, tol)
        key = "limit" if args.method == "iterate" else "iterated_limit"
        result[key] = _limit_obj(iterated)
    if args.method == "both":
        result["disagreement"] = float(operator_norm(spectral.A - iterated.A))
    primary = spectral if spectral is not None else iterated
    result["invariance_residual"] = float(check_invariance(T, primary))
    result["norm_lower_bound_ok"] = bool(norm_lower_bound_check(primary, tol))
    result["trace_condition"] = trace_condition(primary, tol)
    digest = _digest_bytes(Path(args.matrix).read_bytes())
    return result, digest, EXIT_OK


def _spectrum_target_matrix(args) -> tuple[np.ndarray, str]:
    values = [float(v) for v in args.spectrum.split(",") if v.strip() != ""]
    d, l = args.d, args.l
    if d is None or l is None:
        raise MatrixFileError("--spectrum requires --d and --l")
    if len(values) != d - l:
        raise MatrixFileError(f"expected d - l = {d - l} spectrum values, got {len(values)}")
    target = classify_target(d, values)
    if target.feasibility == "infeasible":
        s = sum(1.0 / t for t in values) if values else 0.0
        bound = f"= {d}" if l == 0 else f"<= {d - l}"
        raise Infeasible(f"sum of reciprocal eigenvalues is {s:.9g}, needs {bound}")
    A = np.zeros((d, d), dtype=complex)
    A[: d - l, : d - l] = np.diag(values)
    digest = _digest_text(f"spectrum:{args.spectrum};d={d};l={l}")
    return A, digest


def _cmd_synthesize(args, tol: Tolerances) -> tuple[dict, str, int]:
    if (args.target is None) == (args.spectrum is None):
        raise MatrixFileError("exactly one of --target or --spectrum is required")
    if args.target:
        A = load_matrix(args.target)
        digest = _digest_bytes(Path(args.target).read_bytes())
    else:
        A, digest = _spectrum_target_matrix(args)

    if args.kind == "norm-limit":
        P = synthesize_norm_limit(A, tol)
        PP = adjoint(P) @ P
        result = {
            "kind": "norm-limit",
            "target": matrix_to_obj(A),
            "P": matrix_to_obj(P),
            "idempotency_defect": float(operator_norm(P @ P - P)),
            "round_trip_residual": float(operator_norm(PP - A)),
        }
        return result, digest, EXIT_OK

    res = synthesize(A, seed=args.seed, tol=tol)
    cols = np.linalg.norm(res.certificate_S, axis=0)
    result = {
        "kind": "limit",
        "target": matrix_to_obj(A),
        "T": matrix_to_obj(res.T),
        "certificate_S": matrix_to_obj(res.certificate_S),
        "certificate_note": res.certificate_note,
        "certificate_unit_defect": float(np.max(np.abs(cols - 1.0))),
        "realized": _limit_obj(res.realized_A),
        "round_trip_residual": float(operator_norm(res.realized_A.A - A)),
    }
    return result, digest, EXIT_OK


# check suites -------------------------------------------------------------


def _suite_harmonic2x2(trials: int, seed: int, tol: Tolerances) -> dict:
    worst = 0.0
    for i in range(trials):
        inst = generate_instance(2, 0, seed + i)
        worst = max(worst, harmonic_mean_check(inst.T, tol))
    return {"max_residual": float(worst), "passed": bool(worst <= tol.ident)}


def _suite_counterexample(tol: Tolerances) -> dict:
    eigs = harmonic_mean_counterexample(tol)
    diffs = np.abs(eigs - np.array(COUNTEREXAMPLE_EIGS))
    resid_from_2i = float(max(abs(e - 2.0) for e in eigs))
    return {
        "eigenvalues": _real_list(eigs),
        "max_deviation": float(diffs.max()),
        "residual_from_2I": resid_from_2i,
        "passed": bool(diffs.max() <= 1e-4 and resid_from_2i >= 0.2),
    }


def _suite_normbound(trials: int, seed: int, tol: Tolerances) -> dict:
    violations = 0
    worst_idem = 0.0
    for i in range(trials):
        d = 1 + (i % 8)
        if i % 2 == 0:
            l = (seed + i) % (d + 1)
            lim = cesaro_limit(generate_instance(d, l, seed + i).T, tol)
        else:
            T = random_contraction(d, seed + i)
            lim = cesaro_limit(T, tol)
            worst_idem = max(worst_idem, operator_norm(lim.A @ lim.A - lim.A))
        if not norm_lower_bound_check(lim, tol):
            violations += 1
    return {
        "violations": violations,
        "max_idempotency_defect": float(worst_idem),
        "passed": bool(violations == 0 and worst_idem <= 1e-9),
    }


def _suite_convergence(trials: int, seed: int, tol: Tolerances) -> dict:
    worst_ratio = 0.0
    for i in range(trials):
        d = 2 + (i % 7)
        l = (seed + i) % (d + 1)
        inst = generate_instance(d, l, seed + i)
        report = classify(inst.T, tol)
        env = oracle_envelope(report, tol)
        A = cesaro_limit(inst.T, tol, report=report).A
        means = cesaro_means(inst.T, [1000, 2000], tol)
        for n in (1000, 2000):
            resid = operator_norm(means[n] - A)
            bound = env / n + tol.recon_for(d)
            worst_ratio = max(worst_ratio, resid / bound)
    return {"max_residual_over_envelope": float(worst_ratio), "passed": bool(worst_ratio <= 1.0)}


def _random_spectral_set_member(d: int, rng: np.random.Generator) -> np.ndarray:
    zeros = int(rng.integers(1, d + 1)) if d > 1 else rng.integers(0, 2)
    zeros = min(zeros, d)
    bigs = int(rng.integers(0, zeros + 1))
    bigs = min(bigs, d - zeros)
    ones = d - zeros - bigs
    w = np.concatenate([
        1.0 + rng.uniform(0.5, 3.0, size=bigs),
        np.ones(ones),
        np.zeros(zeros),
    ])
    V = haar_unitary(d, rng)
    return (V * w[None, :]) @ adjoint(V)


def _suite_sets(trials: int, seed: int, tol: Tolerances) -> dict:
    worst_const = 0.0
    worst_round = 0.0
    members = 0
    for i in range(trials):
        rng = np.random.default_rng(seed + i)
        d = 2 + (i % 6)
        P = random_idempotent(d, seed + i)
        PP = adjoint(P) @ P
        means = cesaro_means(P, [1, 9], tol)
        worst_const = max(
            worst_const,
            operator_norm(means[1] - PP),
            operator_norm(means[9] - PP),
        )
        if not spectral_set_membership(PP, tol):
            return {"passed": False, "reason": f"membership failed at trial {i}"}
        A = _random_spectral_set_member(d, rng)
        Q = synthesize_norm_limit(A, tol)
        worst_round = max(worst_round, operator_norm(adjoint(Q) @ Q - A))
        members += 1
    return {
        "max_constant_sequence_defect": float(worst_const),
        "max_round_trip_residual": float(worst_round),
        "members_checked": members,
        "passed": bool(worst_const <= 1e-9 and worst_round <= 1e-9),
    }


def _cmd_check(args, tol: Tolerances) -> tuple[dict, str, int]:
    suite = args.suite
    trials = args.trials
    if suite == "harmonic2x2":
        result = _suite_harmonic2x2(trials, args.seed, tol)
    elif suite == "counterexample3x3":
        result = _suite_counterexample(tol)
    elif suite == "normbound":
        result = _suite_normbound(trials, args.seed, tol)
    elif suite == "convergence":
        result = _suite_convergence(trials, args.seed, tol)
    elif suite == "sets":
        result = _suite_sets(trials, args.seed, tol)
    else:  # pragma: no cover - argparse restricts choices
        raise MatrixFileError(f"unknown suite {suite!r}")
    result["suite"] = suite
    result["trials"] = trials
    digest = _digest_text(f"check:{suite};trials={trials};seed={args.seed}")
    code = EXIT_OK if result["passed"] else EXIT_SUITE_FAIL
    return result, digest, code


def _cmd_shift(args, tol: Tolerances) -> tuple[dict, str, int]:
    if (args.example is None) == (args.rule is None):
        raise MatrixFileError("exactly one of --example or --rule is required")
    if args.example is not None:
        rule = ShiftRule.example(args.example)
        digest = _digest_text(f"shift:example{args.example};horizon={args.horizon}")
    else:
        text = Path(args.rule).read_text()
        rule = ShiftRule.from_json(json.loads(text))
        digest = _digest_bytes(text.encode())
    trace = evaluate(rule, args.horizon, power_cap=args.power_cap)
    cv = cesaro_verdict(trace, tol)
    pv = powerbounded_verdict(trace)
    result: dict = {
        "rule": rule.name,
        "horizon": trace.horizon,
        "exact_dyadic": trace.exact_dyadic,
        "cesaro_verdict": {"kind": cv.kind, "value": cv.value, "lo": cv.lo, "hi": cv.hi},
        "power_verdict": {
            "kind": pv.kind,
            "sup": pv.sup,
            "growth_exponent": pv.growth_exponent,
        },
        "tail": {
            "a_last": float(trace.a[-1]),
            "cesaro_last": float(trace.cesaro[-1]),
        },
        "banach": None,
        "csv_path": None,
    }
    if args.banach:
        br = banach_bracket(trace, p_max=args.pmax, tuples_budget=args.budget, seed=args.seed)
        result["banach"] = {
            "q_upper": br.q_upper,
            "qprime_lower": br.qprime_lower,
            "trivial_bounds": list(br.trivial_bounds),
            "witnesses": {k: list(v) for k, v in br.witnesses.items()},
        }
    if args.csv:
        _write_csv(args.csv, trace)
        result["csv_path"] = args.csv
    return result, digest, EXIT_OK


def _write_csv(path, trace) -> None:
    lines = ["n,a_n,cesaro_n,power_norm_n"]
    cap = len(trace.power_norm)
    for i in range(trace.horizon):
        power = repr(float(trace.power_norm[i])) if i < cap else ""
        lines.append(f"{i + 1},{float(trace.a[i])!r},{float(trace.cesaro[i])!r},{power}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cesaro",
        description="Cesaro asymptotic limits of power-bounded matrices",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                       help="override a tolerance, e.g. --tol unimod=1e-7")
        p.add_argument("--out", help="also write the JSON report to this file")
        p.add_argument("--timing", action="store_true",
                       help="include wall time (breaks byte-identical reports)")

    p = sub.add_parser("classify", help="power-boundedness verdict and spectral split")
    p.add_argument("matrix", help="path to a matrix JSON file")
    common(p)

    p = sub.add_parser("limit", help="Cesaro asymptotic limit")
    p.add_argument("matrix", help="path to a matrix JSON file")
    p.add_argument("--method", choices=["spectral", "iterate", "both"], default="spectral")
    p.add_argument("--n", type=int, default=None, help="iteration count for --method iterate/both")
    common(p)

    p = sub.add_parser("synthesize", help="build a matrix realizing a prescribed limit")
    p.add_argument("--target", help="path to a matrix JSON file with the target limit")
    p.add_argument("--spectrum", help="comma-separated nonzero limit eigenvalues")
    p.add_argument("--d", type=int, help="dimension (with --spectrum)")
    p.add_argument("--l", type=int, help="stable dimension (with --spectrum)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=["limit", "norm-limit"], default="limit")
    common(p)

    p = sub.add_parser("check", help="run a property suite")
    p.add_argument("--suite", required=True,
                   choices=["harmonic2x2", "counterexample3x3", "normbound", "convergence", "sets"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("shift", help="weighted-shift diagonal traces and verdicts")
    p.add_argument("--example", type=int, choices=[1, 2, 3])
    p.add_argument("--rule", help="path to a custom weight rule JSON file")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--power-cap", type=int, default=512, dest="power_cap")
    p.add_argument("--banach", action="store_true", help="bracket the Banach-limit range")
    p.add_argument("--pmax", type=int, default=4)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write (n, a_n, cesaro_n, power_norm_n) rows to this file")
    common(p)

    return parser


_HANDLERS = {
    "classify": _cmd_classify,
    "limit": _cmd_limit,
    "synthesize": _cmd_synthesize,
    "check": _cmd_check,
    "shift": _cmd_shift,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        tol = _parse_tolerances(args.tol)
        result, digest, code = _HANDLERS[args.command](args, tol)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes below
        code = _exit_code_for(exc)
        sys.stderr.write(f"error: {exc}\n")
        return code
    timing = round((time.perf_counter() - started) * 1000.0, 3) if args.timing else None
    arguments = {
        k: v for k, v in vars(args).items()
        if k not in ("command", "out", "timing") and v is not None
    }
    report = _report(args.command, arguments, digest, tol, result, timing)
    _emit(report, args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

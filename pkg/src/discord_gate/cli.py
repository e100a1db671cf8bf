"""Command-line entry point: ``discord-gate analyze | verify | generate``.

Exit codes: 0 success, 1 verification anomalies, 2 malformed input,
3 invariant-violating state, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DiscordGateError, StateInvariantError
from .linalg import RandomSource, check_unitary
from .maps import induced_map, is_cp
from .states import (
    KINDS,
    BipartiteState,
    GenParams,
    decompose,
    find_blocks,
    find_cq_basis,
    generate_state,
    is_vqd,
    structural_cp_form,
)
from .verify import VerifyConfig, discord_oracle, find_cp_violation, monte_carlo_verify

log = logging.getLogger("discord_gate")

EXIT_OK, EXIT_ANOMALY, EXIT_MALFORMED, EXIT_INVARIANT, EXIT_INTERNAL = 0, 1, 2, 3, 4


class MalformedInput(Exception):
    pass


# ---------------------------------------------------------------------------
# canonical JSON
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    s = format(x, ".17g")
    # keep floats distinguishable from ints so a reload re-serializes identically
    return s if any(c in s for c in ".e") else s + ".0"


def canonical_dumps(obj) -> str:
    """JSON with sorted keys, no whitespace, floats at 17 significant digits."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{canonical_dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return canonical_dumps(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data, name: str) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise MalformedInput(f"{name}: expected a non-empty list of rows")
    ncols = len(data[0])
    out = np.zeros((len(data), ncols), dtype=complex)
    for i, row in enumerate(data):
        if len(row) != ncols:
            raise MalformedInput(f"{name}: row {i} has {len(row)} entries, expected {ncols}")
        for j, z in enumerate(row):
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
                raise MalformedInput(f"{name}[{i}][{j}]: expected [re, im] pair of numbers")
            out[i, j] = complex(z[0], z[1])
    return out


def _read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MalformedInput(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise MalformedInput(f"{path}: top-level value must be an object")
    return data


def state_to_json(state: BipartiteState, metadata: dict | None = None) -> dict:
    out = {"dim_s": state.dS, "dim_b": state.dB, "matrix": encode_matrix(state.matrix)}
    if not np.array_equal(state.basis, np.eye(state.dS)):
        out["basis"] = encode_matrix(state.basis)
    if metadata:
        out["metadata"] = metadata
    return out


def state_from_json(data: dict, source: str = "<state>") -> tuple[BipartiteState, dict]:
    for key in ("dim_s", "dim_b", "matrix"):
        if key not in data:
            raise MalformedInput(f"{source}: missing key {key!r}")
    dS, dB = data["dim_s"], data["dim_b"]
    if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in (dS, dB)):
        raise MalformedInput(f"{source}: dim_s and dim_b must be positive integers")
    matrix = decode_matrix(data["matrix"], f"{source}: matrix")
    basis = decode_matrix(data["basis"], f"{source}: basis") if data.get("basis") is not None else None
    meta = data.get("metadata") or {}
    if not isinstance(meta, dict):
        raise MalformedInput(f"{source}: metadata must be an object")
    state = BipartiteState(matrix, dS, dB, basis, str(meta.get("label", "")))
    return state, meta


def load_state(path) -> tuple[BipartiteState, dict]:
    return state_from_json(_read_json(path), str(path))


def load_unitaries(path, dim: int) -> list[np.ndarray]:
    """Accepts ``{"matrix": ...}`` or ``{"unitaries": [...]}``."""
    data = _read_json(path)
    if "unitaries" in data:
        raw = data["unitaries"]
        if not isinstance(raw, list) or not raw:
            raise MalformedInput(f"{path}: 'unitaries' must be a non-empty list")
    elif "matrix" in data:
        raw = [data["matrix"]]
    else:
        raise MalformedInput(f"{path}: expected key 'matrix' or 'unitaries'")
    out = []
    for n, m in enumerate(raw):
        U = decode_matrix(m, f"{path}: unitary {n}")
        try:
            out.append(check_unitary(U, dim))
        except ValueError as exc:
            raise StateInvariantError("unitary", f"{path}: unitary {n}: {exc}") from exc
    return out


def write_json(path, obj):
    Path(path).write_text(canonical_dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def analyze_state(state: BipartiteState, unitaries=(), tol: float = 1e-9, budget: int = 0, seed: int = 0) -> dict:
    """Run the full pipeline on one state and return the verdict as a plain dict."""
    gen = RandomSource(seed).generator()
    d = decompose(state)
    verdict = {
        "dims": [state.dS, state.dB],
        "sl": d.sl,
        "trace_tags": [[t.value for t in row] for row in d.trace_tags],
        "blocks": None,
        "structural_cp": None,
        "structural_failure": None,
        "vqd": None,
        "cq_basis_found": find_cq_basis(state, gen) is not None,
        "discord_estimate": discord_oracle(state) if state.dS == 2 else None,
        "choi_min_eig": [],
        "cp_per_unitary": [],
        "certificates": [],
    }
    if d.sl:
        part = find_blocks(d)
        verdict["blocks"] = [list(b) for b in part.blocks]
        form = structural_cp_form(d)
        verdict["structural_cp"] = bool(form)
        if not form:
            verdict["structural_failure"] = {
                "reason": form.reason,
                "block": list(form.block),
                "pairs": None if form.pairs is None else [list(p) for p in form.pairs],
            }
        verdict["vqd"] = is_vqd(d, gen, state.matrix)[0]
        for U in unitaries:
            ok, lo = is_cp(induced_map(d, U), tol)
            verdict["choi_min_eig"].append(lo)
            verdict["cp_per_unitary"].append(ok)
        if budget > 0 and not verdict["structural_cp"]:
            cert, _ = find_cp_violation(state, budget, gen)
            if cert is not None:
                verdict["certificates"].append(cert.to_json())
    return verdict


def _human_report(v: dict) -> str:
    lines = [f"dims            {v['dims'][0]}x{v['dims'][1]}", f"SL              {v['sl']}"]
    if not v["sl"]:
        lines.append("block stage     skipped (state is not SL in its declared basis)")
    else:
        lines.append(f"blocks          {v['blocks']}")
        sc = v["structural_cp"]
        fail = v["structural_failure"]
        lines.append(f"structural CP   {sc}" + ("" if sc else f"  ({fail['reason']} at {fail['pairs']})"))
        lines.append(f"VQD             {v['vqd']}")
    lines.append(f"CQ basis found  {v['cq_basis_found']}")
    if v["discord_estimate"] is not None:
        lines.append(f"discord (bits)  {v['discord_estimate']:.6g}")
    for n, (lo, ok) in enumerate(zip(v["choi_min_eig"], v["cp_per_unitary"])):
        lines.append(f"unitary {n}: Choi min eigenvalue {lo:.6e}  CP={ok}")
    for c in v["certificates"]:
        lines.append(
            f"certificate: min Choi eigenvalue {c['min_choi_eigenvalue']:.6e} "
            f"pair={c['pair']} source={c['source']} attempts={c['attempts']}"
        )
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    state, meta = load_state(args.state)
    unitaries = load_unitaries(args.unitary, state.dim) if args.unitary else []
    v = analyze_state(state, unitaries, args.tol, args.budget, args.seed)
    if args.json:
        print(canonical_dumps(v))
    else:
        print(_human_report(v))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify / generate
# ---------------------------------------------------------------------------

def parse_dims(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 2x3, got {text!r}") from None


def parse_dims_list(text: str):
    return tuple(parse_dims(t) for t in text.split(",") if t)


def parse_families(text: str):
    fams = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in fams if f not in KINDS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown families {bad}; choose from {', '.join(KINDS)}")
    return fams


def report_without_metadata(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "metadata"}


def cmd_verify(args) -> int:
    cfg = VerifyConfig(
        families=args.families,
        dims=args.dims,
        n_states=args.n_states,
        n_unitaries=args.n_unitaries,
        budget=args.budget,
        seed=args.seed,
        threads=args.threads,
    )
    report = monte_carlo_verify(cfg).to_json()
    if args.out:
        write_json(args.out, report)
    for fam, t in report["families"].items():
        print(f"{fam:22s} tested={t['tested']:4d} cp_confirmed={t['cp_confirmed']:4d} "
              f"violations_found={t['violations_found']:4d} unresolved={t['unresolved']:4d}")
    print(f"anomalies: {len(report['anomalies'])}")
    return EXIT_OK if not report["anomalies"] else EXIT_ANOMALY


def cmd_generate(args) -> int:
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out_dir}: {exc.strerror}", file=sys.stderr)
        return EXIT_MALFORMED
    dS, dB = args.dims
    for i in range(args.count):
        src = RandomSource(args.seed, i)
        state = generate_state(args.kind, GenParams(dS=dS, dB=dB), src)
        meta = {"label": args.kind, "seed": args.seed, "index": i}
        path = out_dir / f"{args.kind}-{i}.json"
        try:
            write_json(path, state_to_json(state, meta))
        except OSError as exc:
            print(f"error: cannot write {path}: {exc.strerror}", file=sys.stderr)
            return EXIT_MALFORMED
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="discord-gate",
        description="Check whether system-bath dynamics reduces to a completely positive map on the system.",
    )
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="decide CP-ness of the reduced dynamics for one state")
    a.add_argument("state")
    a.add_argument("--unitary", help="JSON file with 'matrix' or 'unitaries'")
    a.add_argument("--tol", type=float, default=1e-9)
    a.add_argument("--budget", type=int, default=0, help="search budget for a CP-violation certificate")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run the randomized CP <=> vanishing-discord campaign")
    v.add_argument("--families", type=parse_families, default=("product", "cq", "separable-discordant", "sl-generic"),
                   help="comma-separated state families")
    v.add_argument("--dims", type=parse_dims_list, default=((2, 2),), help="comma-separated dSxdB list, e.g. 2x2,3x2")
    v.add_argument("--n-states", type=int, default=20, help="states per family and dims")
    v.add_argument("--n-unitaries", type=int, default=10, help="Haar unitaries per sufficiency state")
    v.add_argument("--budget", type=int, default=500, help="certificate search attempts per necessity state")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--threads", type=int, default=None, help="worker threads (capped by DISCORD_GATE_THREADS)")
    v.add_argument("--out", help="write the JSON report here")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("generate", help="write random states of one family to JSON files")
    g.add_argument("--kind", choices=KINDS, default="cq")
    g.add_argument("--dims", type=parse_dims, default=(2, 2))
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", default=".")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_MALFORMED
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except StateInvariantError as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except DiscordGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

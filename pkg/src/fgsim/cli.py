"""Command-line front end.

Every subcommand prints one JSON document on stdout.  Exit codes: 0 on
success, 2 on a parse or validation error, 3 when a resource limit is hit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import oracle as O
from .decomp_channel import branch_index
from .decomp_unitary import optimal_unitary_decomposition
from .errors import FgsimError, InvalidArgument, ParseError, ResourceLimit, ValidationError
from .norm_estimation import exact_norm, fast_norm
from .rng import keyed_rng
from .gaussian_core import apply_circuit, prepare_basis_state
from .sampler import (CircuitProgram, GaussianGate, NonGaussianGate, Sampler, TerminalMeasure,
                      channel_decomposition, evolve_circuit, make_channel, make_gate)
from .sparsify import (SparseSuperposition, c_tilde, ensemble_bound, expected_trace,
                       sparsify_circuit, variance_bound)

SCHEMA_VERSION = 1

TOP_KEYS = {"schema_version", "n", "elements", "metadata"}
ELEMENT_KEYS = {
    "gate": ({"type", "id", "targets"}, {"theta", "matrix"}),
    "channel": ({"type", "id", "targets", "theta", "p"}, {"axis", "noise", "adaptive"}),
    "measure": ({"type", "qubits"}, set()),
}
GATE_ALIASES = {"hadamard": "hadamard", "h": "hadamard", "rzz": "rzz", "cphase": "cphase",
                "swap": "swap_nn", "swap_nn": "swap_nn", "ry": "ry", "rx": "rx"}


# --------------------------------------------------------------------------
# JSON with fixed 17-digit floats
# --------------------------------------------------------------------------

def _num(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def dumps(obj) -> str:
    """Compact JSON with every float written to 17 significant digits."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag])
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# --------------------------------------------------------------------------
# circuit files
# --------------------------------------------------------------------------

def _reject_constant(name):
    raise ValueError(f"non-finite number {name}")


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ValueError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _int_list(v, what, i):
    if not isinstance(v, list) or not all(_is_int(t) for t in v):
        raise ValidationError(f"{what} must be a list of integers", element=i)
    return tuple(v)


def _parse_matrix(v, i):
    if not isinstance(v, list) or len(v) != 16:
        raise ValidationError("matrix must hold 16 [re, im] pairs", element=i)
    out = []
    for e in v:
        if not (isinstance(e, list) and len(e) == 2 and all(_is_num(x) for x in e)):
            raise ValidationError("matrix entries must be [re, im] pairs", element=i)
        out.append(complex(e[0], e[1]))
    return tuple(out)


def _parse_element(d, i, n):
    if not isinstance(d, dict):
        raise ValidationError("element must be an object", element=i)
    kind = d.get("type")
    if kind not in ELEMENT_KEYS:
        raise ValidationError(f"unknown element type {kind!r}", element=i)
    required, optional = ELEMENT_KEYS[kind]
    missing = required - d.keys()
    extra = d.keys() - required - optional
    if missing:
        raise ValidationError(f"missing keys {sorted(missing)}", element=i)
    if extra:
        raise ValidationError(f"unknown keys {sorted(extra)}", element=i)
    if kind == "measure":
        return TerminalMeasure(_int_list(d["qubits"], "qubits", i))
    if not isinstance(d["id"], str):
        raise ValidationError("id must be a string", element=i)
    targets = _int_list(d["targets"], "targets", i)
    if kind == "gate":
        gid = d["id"]
        if gid not in O.GATE_VOCABULARY:
            raise ValidationError(f"unknown gate id {gid!r}", element=i)
        _, npar = O.GATE_VOCABULARY[gid]
        if gid == "custom_u4":
            if "theta" in d or "matrix" not in d:
                raise ValidationError("custom_u4 takes a matrix and no theta", element=i)
            params = _parse_matrix(d["matrix"], i)
        else:
            if "matrix" in d:
                raise ValidationError(f"{gid} takes no matrix", element=i)
            if npar and "theta" not in d:
                raise ValidationError(f"{gid} needs theta", element=i)
            if not npar and "theta" in d:
                raise ValidationError(f"{gid} takes no theta", element=i)
            if npar and not _is_num(d["theta"]):
                raise ValidationError("theta must be a finite number", element=i)
            params = (float(d["theta"]),) if npar else ()
        return make_gate(gid, targets, params)
    cid = d["id"]
    if not _is_num(d["theta"]) or not _is_num(d["p"]):
        raise ValidationError("theta and p must be finite numbers", element=i)
    if cid == "noisy_rot":
        if "noise" in d or "adaptive" in d:
            raise ValidationError("noisy_rot takes axis only", element=i)
        if "axis" not in d:
            raise ValidationError("noisy_rot needs axis", element=i)
        return make_channel(cid, d["theta"], d["p"], targets, axis=d["axis"])
    if cid == "noisy_rzz":
        if "axis" in d:
            raise ValidationError("noisy_rzz takes noise, not axis", element=i)
        if "noise" not in d:
            raise ValidationError("noisy_rzz needs noise", element=i)
        adaptive = d.get("adaptive", False)
        if not isinstance(adaptive, bool):
            raise ValidationError("adaptive must be a boolean", element=i)
        return make_channel(cid, d["theta"], d["p"], targets, noise=d["noise"],
                            adaptive=adaptive)
    raise ValidationError(f"unknown channel id {cid!r}", element=i)


def parse_circuit_file(text) -> CircuitProgram:
    """Strict parse of a circuit document."""
    try:
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        doc = json.loads(text, object_pairs_hook=_no_duplicates, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if not isinstance(doc, dict):
        raise ValidationError("document must be an object")
    extra = doc.keys() - TOP_KEYS
    if extra:
        raise ValidationError(f"unknown keys {sorted(extra)}")
    for key in ("schema_version", "n", "elements"):
        if key not in doc:
            raise ValidationError(f"missing key {key!r}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {doc['schema_version']!r}")
    n = doc["n"]
    if not _is_int(n) or n < 1:
        raise ValidationError("n must be a positive integer")
    if not isinstance(doc["elements"], list):
        raise ValidationError("elements must be a list")
    metadata = doc.get("metadata")
    if metadata is not None and not isinstance(metadata, dict):
        raise ValidationError("metadata must be an object")
    elements = [_parse_element(d, i, n) for i, d in enumerate(doc["elements"])]
    return CircuitProgram(n, tuple(elements), metadata)


def element_to_dict(el) -> dict:
    if isinstance(el, TerminalMeasure):
        return {"type": "measure", "qubits": list(el.qubits)}
    if isinstance(el, (GaussianGate, NonGaussianGate)):
        d = {"type": "gate", "id": el.id, "targets": list(el.targets)}
        if el.id == "custom_u4":
            d["matrix"] = [[c.real, c.imag] for c in el.params]
        elif el.params:
            d["theta"] = float(el.params[0])
        return d
    d = {"type": "channel", "id": el.id, "theta": el.theta, "p": el.p,
         "targets": list(el.targets)}
    if el.id == "noisy_rot":
        d["axis"] = el.axis
    else:
        d["noise"] = el.noise
        d["adaptive"] = el.adaptive
    return d


def program_to_dict(program: CircuitProgram) -> dict:
    d = {"schema_version": SCHEMA_VERSION, "n": program.n,
         "elements": [element_to_dict(el) for el in program.elements]}
    if program.metadata is not None:
        d["metadata"] = program.metadata
    return d


def serialize_circuit(program: CircuitProgram) -> str:
    return dumps(program_to_dict(program))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _generator_dict(g) -> dict:
    if g.kind == "rotation":
        return {"kind": "rotation", "j": g.j, "k": g.k, "theta": g.theta}
    if g.kind == "majorana":
        return {"kind": "majorana", "j": g.j}
    return {"kind": "matchgate", "name": g.name, "qubits": list(g.qubits),
            "params": [p if isinstance(p, str) else float(p) for p in g.params]}


def _load(path) -> CircuitProgram:
    with open(path, "rb") as fh:
        return parse_circuit_file(fh.read())


def cmd_decompose(args):
    gid = GATE_ALIASES.get(args.gate)
    if gid is None:
        raise InvalidArgument(f"no catalog decomposition for {args.gate!r}")
    d = optimal_unitary_decomposition(gid, args.theta)
    terms = [[c.real, c.imag, {"phase": [circ.phase.real, circ.phase.imag],
                               "gates": [_generator_dict(g) for g in circ.gates]}]
             for c, circ in d.terms]
    return {"gate": gid, "theta": args.theta, "n": d.n, "terms": terms, "rank": d.rank,
            "l1_norm": d.l1_norm, "extent": d.extent, "extent_claim": d.extent_claim,
            "optimal": d.optimal}


def cmd_extent(args):
    prog = _load(args.circuit)
    rows = []
    product = 1.0
    for i, el in enumerate(prog.body):
        ch = channel_decomposition(el, prog.n)
        rows.append({"element": i, "id": el.id, "cost": ch.cost, "label": ch.label,
                     "flag": ch.optimal_flag, "equimagical": ch.equimagical})
        product *= ch.cost
    return {"n": prog.n, "elements": rows, "product": product}


def _qubit_range(text):
    if text is None:
        return None
    if ".." in text:
        a, b = text.split("..", 1)
        a, b = int(a), int(b)
        if b < a:
            raise InvalidArgument(f"empty qubit range {text!r}")
        return tuple(range(a, b + 1))
    return tuple(int(v) for v in text.split(","))


def cmd_sample(args):
    prog = _load(args.circuit)
    kw = {}
    if args.mode != "exact":
        if args.delta is None:
            raise InvalidArgument(f"{args.mode} sampling needs --delta")
        if args.eps is None:
            kw["delta_total"] = args.delta
        else:
            kw.update(delta=args.delta, epsilon=args.eps)
        kw["p_fail"] = args.pfail
    smp = Sampler(prog, args.mode, qubits=_qubit_range(args.qubits), seed=args.seed,
                  reuse=args.reuse, **kw)
    t0 = time.perf_counter()
    reports = smp.run(args.shots)
    counts = {}
    for r in reports:
        counts[r.bitstring] = counts.get(r.bitstring, 0) + 1
    out = {"mode": args.mode, "shots": args.shots, "seed": args.seed,
           "qubits": list(smp.qubits), "counts": dict(sorted(counts.items()))}
    if not args.counts_only:
        out["reports"] = [r.to_dict() for r in reports]
    out["timing"] = time.perf_counter() - t0
    return out


def _trajectory_decomps(prog, seed):
    decomps = []
    for t, el in enumerate(prog.body):
        ch = channel_decomposition(el, prog.n)
        b = ch.branches[branch_index(ch, keyed_rng(seed, "trajectory", t).random())]
        if b.kind != "unitary":
            raise InvalidArgument(f"element {t} drew an adaptive branch; norms need unitaries")
        decomps.append(b.decomp)
    return decomps


def cmd_norm(args):
    prog = _load(args.circuit)
    decomps = _trajectory_decomps(prog, args.seed)
    sup = evolve_circuit(decomps, prepare_basis_state([0] * prog.n))
    out = {"mode": args.mode, "rank": sup.k, "l1_norm": sup.l1_norm}
    if args.mode == "exact":
        out["value"] = exact_norm(sup)
    else:
        est = fast_norm(sup, args.eps, args.pfail, args.seed)
        out.update(value=est.value, epsilon=est.epsilon, p_fail=est.p_fail,
                   samples=est.samples_used, additive=est.additive)
    return out


def cmd_sparsify_report(args):
    prog = _load(args.circuit)
    decomps = _trajectory_decomps(prog, args.seed)
    zero = prepare_basis_state([0] * prog.n)
    full = evolve_circuit(decomps, zero)
    l1sq = float(np.prod([d.l1_norm ** 2 for d in decomps]))
    ct = c_tilde(full, full) if full.k > 1 else 1.0
    traces = []
    for trial in range(args.trials):
        circuits, scale = sparsify_circuit(decomps, args.k, (args.seed, trial))
        sup = SparseSuperposition(prog.n, tuple((scale, apply_circuit(zero, c))
                                                for c in circuits))
        traces.append(exact_norm(sup))
    traces = np.array(traces)
    var = float(traces.var(ddof=1)) if len(traces) > 1 else 0.0
    vb = variance_bound(ct, l1sq, args.k)
    return {"k": args.k, "trials": args.trials, "l1_squared": l1sq, "c_tilde": ct,
            "mean_trace": float(traces.mean()), "expected_trace": expected_trace(l1sq, args.k),
            "trace_variance": var, "variance_bound": vb,
            "ensemble_bound": ensemble_bound(l1sq, args.k, vb)}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fgsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="catalog decomposition of a gate")
    d.add_argument("--gate", required=True)
    d.add_argument("--theta", type=float)
    d.set_defaults(func=cmd_decompose)

    e = sub.add_parser("extent", help="per-element cost and their product")
    e.add_argument("--circuit", required=True)
    e.set_defaults(func=cmd_extent)

    s = sub.add_parser("sample", help="sample measured bits")
    s.add_argument("--circuit", required=True)
    s.add_argument("--shots", type=int, default=1)
    s.add_argument("--mode", choices=("exact", "approx", "adaptive"), default="exact")
    s.add_argument("--delta", type=float)
    s.add_argument("--eps", type=float)
    s.add_argument("--pfail", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--qubits")
    s.add_argument("--reuse", type=int, default=1,
                   help="consecutive shots sharing one trajectory and sparsification")
    s.add_argument("--counts-only", action="store_true")
    s.set_defaults(func=cmd_sample)

    nm = sub.add_parser("norm", help="squared norm of the expanded output state")
    nm.add_argument("--circuit", required=True)
    nm.add_argument("--mode", choices=("exact", "fast"), default="exact")
    nm.add_argument("--eps", type=float, default=0.05)
    nm.add_argument("--pfail", type=float, default=0.01)
    nm.add_argument("--seed", type=int, default=0)
    nm.set_defaults(func=cmd_norm)

    r = sub.add_parser("sparsify-report", help="trace statistics of sparsified outputs")
    r.add_argument("--circuit", required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_sparsify_report)
    return p


def run_command(argv, out=None) -> int:
    """Run one subcommand, print its JSON document and return the exit code."""
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = args.func(args)
        code = 0
    except (ValidationError, ParseError, InvalidArgument) as exc:
        result, code = {"error": type(exc).__name__, "message": str(exc)}, 2
    except ResourceLimit as exc:
        result = {"error": "ResourceLimit", "message": str(exc),
                  "requested": exc.requested, "limit": exc.limit}
        code = 3
    except FgsimError as exc:
        result, code = {"error": type(exc).__name__, "message": str(exc)}, 1
    except OSError as exc:
        result, code = {"error": "OSError", "message": str(exc)}, 2
    out.write(dumps(result) + "\n")
    return code


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())

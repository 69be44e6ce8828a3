"""Command-line front end.

Exit codes: 0 success, 1 a requested check failed, 2 invalid input
(schema violation, unknown preset, singular structure data).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field

import jsonschema

from . import gla
from .base import (
    Base,
    BaseError,
    VForm,
    base_from_config,
    base_preset,
    check_fedosov_base,
    random_fedosov_base,
)
from .curv import (
    CurvError,
    bianchi_check,
    curv_basic,
    l_structure_check,
    block_identity_check,
    pipeline_mismatches,
    r_tau,
    render_flat,
    ric_antisym_check,
    ric_even_symmetry_report,
    ricci,
    scalar,
)
from .sconn import (
    PACK_NAMES,
    GConn,
    SConnError,
    TensorPack,
    check_L_condition,
    is_fedosov,
    is_symmetric,
    make_L_connection,
    make_symmetric_fedosov,
    pack_preset,
    sample_lcond_L,
)
from .sfields import INS, NABLA, SVec, act, omega_H, pair, random_form, random_svec
from .symalg import SymalgError

SCHEMA_VERSION = 1
COMMANDS = ("check", "curvature", "ricci", "scalar", "suite")
CHECKS = ("fedosov_base", "symmetric", "fedosov")

_TABLE = {"type": "array", "items": {"type": "array"}}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "superfedosov job configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": list(COMMANDS)},
        "base": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["preset"],
                    "properties": {"preset": {"type": "string"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["dim", "gamma", "H"],
                    "properties": {
                        "dim": {"type": "integer", "minimum": 1},
                        "gamma": {"type": "array"},
                        "H": {"type": "array"},
                        "params": {"type": "array", "items": {"type": "string"}},
                        "kind": {"enum": ["symplectic", "riemannian", "general"]},
                    },
                },
            ]
        },
        "connection": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["preset"],
                    "properties": {"preset": {"type": "string"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["pack"],
                    "properties": {
                        "pack": {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {name: _TABLE for name in PACK_NAMES},
                        },
                        "name": {"type": "string"},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["L"],
                    "properties": {"L": _TABLE, "name": {"type": "string"}},
                },
            ]
        },
        "format": {"enum": ["text", "json"]},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "n": {"type": "integer", "minimum": 0},
        "family": {"enum": ["symmetric", "L"]},
        "base_only": {"type": "boolean"},
        "checks": {"type": "array", "items": {"enum": list(CHECKS)}, "uniqueItems": True},
    },
}


class InputError(ValueError):
    """Invalid configuration or structure data (exit status 2)."""


INPUT_ERRORS = (InputError, BaseError, SConnError, SymalgError, gla.GlaError, CurvError)


@dataclass
class Job:
    command: str
    base: object = "torus"
    connection: object = None
    format: str = "text"
    seed: int = 0
    n: int = 10
    family: str = "symmetric"
    base_only: bool = False
    checks: list = field(default_factory=lambda: list(CHECKS))


def validate_config(cfg) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"config schema violation at {where}: {exc.message}") from None


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from None
    validate_config(cfg)
    return cfg


def build_job(args: argparse.Namespace) -> Job:
    cfg = load_config(args.config) if args.config else {}
    if cfg.get("command", args.command) != args.command:
        raise InputError(f"config command {cfg['command']!r} does not match {args.command!r}")
    job = Job(command=args.command)
    for key in ("base", "connection", "format", "seed", "n", "family", "base_only", "checks"):
        if key in cfg:
            setattr(job, key, cfg[key])
    if args.preset is not None:
        job.base = args.preset
    if args.connection is not None:
        job.connection = args.connection
    for key in ("format", "seed", "n"):
        v = getattr(args, key)
        if v is not None:
            setattr(job, key, v)
    if getattr(args, "family", None) is not None:
        job.family = args.family
    if getattr(args, "base_only", False):
        job.base_only = True
    if job.seed < 0 or job.seed > 2**64 - 1:
        raise InputError("seed must be an unsigned 64-bit integer")
    if job.n < 0:
        raise InputError("n must be non-negative")
    return job


def resolve_base(spec) -> Base:
    if isinstance(spec, str):
        return base_preset(spec)
    if "preset" in spec:
        return base_preset(spec["preset"])
    return base_from_config(spec)


def default_connection(B: Base) -> str:
    return "L-connection(canonical)" if B.kind == "symplectic" else "zero"


def resolve_connection(spec, B: Base, seed: int) -> GConn:
    if spec is None:
        spec = default_connection(B)
    if isinstance(spec, str):
        return pack_preset(spec, B, seed)
    if "preset" in spec:
        return pack_preset(spec["preset"], B, seed)
    if "pack" in spec:
        return GConn(B, TensorPack.from_json(spec["pack"], B.m, B.params), name=spec.get("name", "custom"))
    rows = spec["L"]
    if len(rows) != B.m or any(len(r) != B.m for r in rows):
        raise InputError(f"L must be an {B.m}x{B.m} table")
    L = tuple(tuple(VForm.from_json(v, B.m, B.params) for v in r) for r in rows)
    return make_L_connection(B, L, name=spec.get("name", "L-connection(custom)"))


# -- output ----------------------------------------------------------------------

def emit(payload: dict, lines: list, fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    else:
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _lbl(kind: int, l: int) -> str:
    return f"{'nabla' if kind == NABLA else 'i'}_{l + 1}"


# -- commands -------------------------------------------------------------------

def cmd_check(job: Job):
    B = resolve_base(job.base)
    C = resolve_connection(job.connection, B, job.seed)
    results = []
    lines = [f"base: {B.name}", f"connection: {C.name}"]
    for name in job.checks:
        if name == "fedosov_base":
            if B.kind != "symplectic":
                results.append({"check": name, "ok": True, "skipped": "base is not symplectic"})
                lines.append(f"{name}: skipped (base is not symplectic)")
                continue
            rep = check_fedosov_base(B)
            results.append({"check": name, "ok": rep.fedosov, "failures": rep.failures})
            lines.append(f"{name}: {'pass' if rep.fedosov else 'FAIL'}")
            for f in rep.failures[:5]:
                lines.append(f"  condition {f['condition']} at {f['indices']}")
        elif name == "symmetric":
            rep = is_symmetric(C)
            results.append(rep.to_json())
            d = rep.details
            lines.append(
                f"{name}: {'pass' if rep.ok else 'FAIL'} (direct {'pass' if d['direct'] else 'fail'}, "
                f"closed form {'pass' if d['closed_form'] else 'fail'}, agree {'yes' if d['agree'] else 'NO'})"
            )
            for v in d["violated"]:
                lines.append(f"  violated: {v}")
            for cx in d["counterexamples"]:
                lines.append(f"  counterexample: Tor({cx[0]}, {cx[1]}) != 0")
        else:
            rep = is_fedosov(C)
            results.append(rep.to_json())
            d = rep.details
            lines.append(
                f"{name}: {'pass' if rep.ok else 'FAIL'} (direct {'pass' if d['direct'] else 'fail'}, "
                f"closed form {'pass' if d['closed_form'] else 'fail'}, agree {'yes' if d['agree'] else 'NO'})"
            )
            for cx in d["counterexamples"]:
                lines.append(f"  counterexample: {cx['case']} at X=d{cx['X']} Y=d{cx['Y']} Z=d{cx['Z']}")
    ok = all(r["ok"] for r in results)
    lines.append(f"result: {'pass' if ok else 'FAIL'}")
    payload = {"command": "check", "base": B.name, "connection": C.name, "results": results, "ok": ok}
    return payload, lines, 0 if ok else 1


def cmd_curvature(job: Job):
    B = resolve_base(job.base)
    m = B.m
    if job.base_only:
        R = B.curvature
        entries, lines = [], [f"base: {B.name}"]
        for i in range(m):
            for j in range(i + 1, m):
                for k in range(m):
                    v = VForm.vector(m, R[i][j][k])
                    entries.append({"X": i + 1, "Y": j + 1, "Z": k + 1, "value": v.render(), "vform": v.to_json()})
                    lines.append(f"Curv(d{i + 1},d{j + 1})d{k + 1} = {v.render()}")
        return {"command": "curvature", "base": B.name, "base_curvature": entries}, lines, 0
    C = resolve_connection(job.connection, B, job.seed)
    entries, lines = [], [f"base: {B.name}", f"connection: {C.name}"]
    kinds = [(k, l) for k in (NABLA, INS) for l in range(m)]
    for k1, i in kinds:
        for k2, j in kinds:
            for k3, k in kinds:
                v = curv_basic(C, k1, i, k2, j, k3, k)
                label = f"Curv({_lbl(k1, i)},{_lbl(k2, j)}){_lbl(k3, k)}"
                entries.append({"args": [_lbl(k1, i), _lbl(k2, j), _lbl(k3, k)], "value": v.render(), "svec": v.to_json()})
                lines.append(f"{label} = {v.render()}")
    return {"command": "curvature", "base": B.name, "connection": C.name, "curvature": entries}, lines, 0


def cmd_ricci(job: Job):
    B = resolve_base(job.base)
    C = resolve_connection(job.connection, B, job.seed)
    ric = ricci(C)
    m = B.m
    lines = [f"base: {B.name}", f"connection: {C.name}"]
    names = {"R": ric.R, "S": ric.S, "T": ric.T, "U": ric.U}
    for name, blk in names.items():
        for i in range(m):
            for j in range(m):
                lines.append(f"{name}[{i + 1}][{j + 1}] = {blk[i][j].render()}")
    payload = {"command": "ricci", "base": B.name, "connection": C.name, **ric.to_json()}
    return payload, lines, 0


def cmd_scalar(job: Job):
    B = resolve_base(job.base)
    C = resolve_connection(job.connection, B, job.seed)
    res = scalar(C)
    dx = res.value.render()
    flat = render_flat(B, res.value)
    lines = [f"base: {B.name}", f"connection: {C.name}", f"Scal = {dx}", f"Scal = {flat}  (flat basis)"]
    payload = {
        "command": "scalar",
        "base": B.name,
        "connection": C.name,
        "scalar": {"dx": dx, "flat": flat, "form": res.value.to_json()},
    }
    return payload, lines, 0


# -- property suites ------------------------------------------------------------------

M4_BASES = 4


@dataclass
class PropertyTally:
    name: str
    passed: int = 0
    failed: int = 0
    first_failure: int | None = None

    def add(self, idx: int, ok: bool) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if self.first_failure is None:
                self.first_failure = idx

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "failed": self.failed, "first_failure": self.first_failure}


def instance_base(seed: int, idx: int, pool: dict) -> Base:
    """Even instances use the symbolic torus, odd ones a pool of random m=4 Fedosov bases."""
    if idx % 2 == 0:
        if "torus" not in pool:
            pool["torus"] = base_preset("torus")
        return pool["torus"]
    slot = (idx // 2) % M4_BASES
    key = ("m4", slot)
    if key not in pool:
        pool[key] = random_fedosov_base(4, random.Random(f"base:{seed}:{slot}"))
    return pool[key]


def instance_connection(family: str, seed: int, idx: int, pool: dict) -> GConn:
    B = instance_base(seed, idx, pool)
    pseed = random.Random(f"pack:{seed}:{idx}").randrange(2**32)
    if family == "symmetric":
        return make_symmetric_fedosov(B, pseed)
    return make_L_connection(B, sample_lcond_L(B, pseed), name=f"L-connection(random:{pseed})")


def rtau_skew_ok(C: GConn, rng: random.Random, samples: int = 4) -> bool:
    W = omega_H(C.base)
    m = C.m
    for _ in range(samples):
        p1, p2 = rng.randint(0, 1), rng.randint(0, 1)
        D1, D2 = random_svec(m, rng, p1), random_svec(m, rng, p2)
        D3 = SVec.basic(m, rng.randint(0, 1), rng.randrange(m))
        D4 = SVec.basic(m, rng.randint(0, 1), rng.randrange(m))
        a = r_tau(C, W, D1, D2, D3, D4)
        b = r_tau(C, W, D2, D1, D3, D4)
        if a != (b if (p1 & p2) else -b):
            return False
    return True


def axioms_ok(C: GConn, rng: random.Random, samples: int = 3) -> bool:
    """Additivity and the two coefficient rules on random form-scaled inputs."""
    B, m = C.base, C.m
    for _ in range(samples):
        p1, p2 = rng.randint(0, 1), rng.randint(0, 1)
        D1, D2, D2b = random_svec(m, rng, p1), random_svec(m, rng, p2), random_svec(m, rng, p2)
        a = random_form(m, rng, rng.randint(0, 2))
        if C.apply(D1, D2 + D2b) != C.apply(D1, D2) + C.apply(D1, D2b):
            return False
        if C.apply(D1.lmul(a), D2) != C.apply(D1, D2).lmul(a):
            return False
        lhs = C.apply(D1, D2.lmul(a))
        s = -1 if (a.parity() & p1) else 1
        rhs = D2.lmul(act(B, D1, a)) + C.apply(D1, D2).lmul(a.scale(s))
        if lhs != rhs:
            return False
    return True


def parallel_curvature_table_ok(C: GConn) -> bool:
    """<Curv(i,i)i, i; omega> = 0 and <Curv(nabla,nabla)nabla, i_T; omega> = -H(A1, T)."""
    B, m = C.base, C.m
    W = omega_H(B)
    for x in range(m):
        for y in range(m):
            for z in range(m):
                v6 = curv_basic(C, INS, x, INS, y, INS, z)
                v1 = curv_basic(C, NABLA, x, NABLA, y, NABLA, z)
                for t in range(m):
                    if not pair(v6, SVec.ins(m, t), W).is_zero():
                        return False
                    if pair(v1, SVec.ins(m, t), W) != -B.H_pair(v1.a, VForm.basis(m, t)):
                        return False
    return True


def run_suite(family: str, n: int, seed: int) -> dict:
    names = (
        ["pipeline equivalence", "symmetric (direct = closed form)", "fedosov (direct = closed form)",
         "K1 = K2 = 0", "L3 = 0", "ricci methods agree", "scalar vanishes", "r_tau skew in first two slots",
         "connection axioms", "curvature table with parallel H"]
        if family == "symmetric"
        else ["pipeline equivalence", "L condition holds", "fedosov verdicts agree", "ricci methods agree",
              "T block vanishes", "S block formula", "r_tau skew in first two slots", "connection axioms",
              "torsion witness Tor(nabla, i) = nabla_L"]
    )
    report_only = ["bianchi", "curvature block identities", "ricci S = -T^t", "ricci even-symmetric", "fedosov"]
    tallies = {k: PropertyTally(k) for k in names}
    info = {k: PropertyTally(k) for k in report_only}
    pool: dict = {}
    for idx in range(n):
        rng = random.Random(f"props:{seed}:{idx}")
        try:
            C = instance_connection(family, seed, idx, pool)
        except INPUT_ERRORS:
            for t in tallies.values():
                t.add(idx, False)
            continue
        t = tallies
        t["pipeline equivalence"].add(idx, not pipeline_mismatches(C))
        fed = is_fedosov(C)
        try:
            ric = ricci(C)
            t["ricci methods agree"].add(idx, True)
        except CurvError:
            t["ricci methods agree"].add(idx, False)
            ric = None
        t["r_tau skew in first two slots"].add(idx, rtau_skew_ok(C, rng))
        t["connection axioms"].add(idx, axioms_ok(C, rng))
        if family == "symmetric":
            sym = is_symmetric(C)
            t["symmetric (direct = closed form)"].add(idx, sym.ok and sym.details["agree"])
            t["fedosov (direct = closed form)"].add(idx, fed.ok and fed.details["agree"])
            t["K1 = K2 = 0"].add(idx, C.pack.is_zero("K1") and C.pack.is_zero("K2"))
            t["L3 = 0"].add(idx, C.pack.is_zero("L3"))
            t["scalar vanishes"].add(idx, ric is not None and scalar(C, ric=ric).value.is_zero())
            t["curvature table with parallel H"].add(idx, parallel_curvature_table_ok(C))
            info["curvature block identities"].add(idx, block_identity_check(C).ok)
        else:
            L = C.pack["K1"]
            t["L condition holds"].add(idx, check_L_condition(C.base, L))
            t["fedosov verdicts agree"].add(idx, fed.details["agree"])
            if ric is not None:
                ls = l_structure_check(C, ric)
                t["T block vanishes"].add(idx, ls.details["T_zero"])
                t["S block formula"].add(idx, ls.details["S_formula"])
            else:
                t["T block vanishes"].add(idx, False)
                t["S block formula"].add(idx, False)
            m = C.m
            wit = all(
                C.torsion(SVec.nabla(m, i), SVec.ins(m, j)) == SVec.nabla_of(L[i][j])
                for i in range(m) for j in range(m)
            )
            t["torsion witness Tor(nabla, i) = nabla_L"].add(idx, wit)
        info["bianchi"].add(idx, bianchi_check(C).ok)
        info["fedosov"].add(idx, fed.ok)
        if ric is not None:
            info["ricci S = -T^t"].add(idx, ric_antisym_check(C, ric).ok)
            info["ricci even-symmetric"].add(idx, ric_even_symmetry_report(C, ric).ok)
    props = [tallies[k].to_json() for k in names] if n else []
    extra = [info[k].to_json() for k in report_only if info[k].passed + info[k].failed] if n else []
    ok = all(p["failed"] == 0 for p in props)
    return {"command": "suite", "family": family, "n": n, "seed": seed, "properties": props,
            "report_only": extra, "ok": ok}


def cmd_suite(job: Job):
    rep = run_suite(job.family, job.n, job.seed)
    lines = [f"suite: family={job.family} n={job.n} seed={job.seed}"]
    for p in rep["properties"]:
        status = "pass" if p["failed"] == 0 else f"FAIL (first failing instance {p['first_failure']})"
        lines.append(f"{p['name']}: {status} [{p['passed']}/{p['passed'] + p['failed']}]")
    for p in rep["report_only"]:
        lines.append(f"report-only {p['name']}: holds on {p['passed']}/{p['passed'] + p['failed']}")
    lines.append(f"result: {'pass' if rep['ok'] else 'FAIL'}")
    return rep, lines, 0 if rep["ok"] else 1


HANDLERS = {
    "check": cmd_check,
    "curvature": cmd_curvature,
    "ricci": cmd_ricci,
    "scalar": cmd_scalar,
    "suite": cmd_suite,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", help="base preset: torus, torus(a,b,c,d), flat, flat(m)")
    common.add_argument("--connection", help="connection preset: zero, symmetric-random(seed), "
                                             "L-connection(canonical|zero|random:seed)")
    common.add_argument("--config", help="JSON job configuration")
    common.add_argument("--format", choices=("text", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--out", help="write results to this file instead of stdout")
    p = argparse.ArgumentParser(prog="superfedosov", description="Graded connections on (M, Omega(M)).")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="Fedosov base, symmetry and Fedosov checks")
    c = sub.add_parser("curvature", parents=[common], help="graded or base curvature")
    c.add_argument("--base-only", action="store_true", help="curvature of the base connection only")
    sub.add_parser("ricci", parents=[common], help="graded Ricci tensor blocks")
    sub.add_parser("scalar", parents=[common], help="odd symplectic scalar curvature")
    s = sub.add_parser("suite", parents=[common], help="property suite over sampled instances")
    s.add_argument("--family", choices=("symmetric", "L"))
    sub.add_parser("schema", help="print the configuration JSON schema")
    return p


def main(argv=None) -> int:
    try:
        sys.stdout.reconfigure(encoding="utf-8")
    except (AttributeError, ValueError):
        pass
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command == "schema":
        sys.stdout.write(json.dumps(CONFIG_SCHEMA, sort_keys=True, indent=2) + "\n")
        return 0
    try:
        job = build_job(args)
        payload, lines, code = HANDLERS[job.command](job)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit(payload, lines, job.format, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())

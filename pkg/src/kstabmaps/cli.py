"""Command-line interface: every command writes one versioned JSON report.

Reports are deterministic: keys are sorted, rationals are "p/q" strings and
nothing time-dependent is recorded, so re-running a manifest reproduces the
report byte for byte.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import factorial

from . import errors as E
from .exactmath import Q, extract_e_coefficients, fmt
from .fibration import cm_degree, delta, df_m_expansion, propagate_instability, slope_expansion
from .intersect import sym
from .invariants import (
    chow_sign_threshold,
    chow_weight,
    df_from_coefficients,
    df_from_intersections,
    j_functional,
    log_df,
    minimum_norm,
    twist_sweep,
    verdict,
)
from .io import fibration_from_json, lattice_polytope_from_json, need, polytope_from_json, read_json, \
    table_from_json, tc_from_json
from .kodaira import ChernNumbers, NefOracle, embedding_threshold, family_threshold, j_df_decomposition, \
    toric_embedding_threshold
from .pipeline import routes_agree, toric_norms, toric_report
from .polytope import Facet, ehrhart, lattice_count
from .suites import INEQUALITY_DOMAINS, identities_suite, inequalities_suite
from .torictc import (
    bivariate_weight_oracle,
    boundary_divisor_data,
    df_intersection_inputs,
    hilbert_weight_data,
    j_intersection_inputs,
    pullback_canonical_term,
    relative_canonical_term,
    slope_numbers,
)

SCHEMA_VERSION = "1.0"
DEFAULT_SEED = 0

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3
STATUS = {EXIT_OK: "ok", EXIT_VERIFY: "verification_failure", EXIT_INPUT: "input_error",
          EXIT_INCONCLUSIVE: "inconclusive"}

VERIFY_ERRORS = (E.InconsistentSamples, E.LeadingTermNonzero, E.DegreeOverflow, E.TriangulationFailure)
INCONCLUSIVE_ERRORS = (E.Inconclusive, E.NefCertificateUnavailable, E.NoThresholdBelowCap)


class VerificationFailed(Exception):
    """A command finished but one of its cross-checks came out false."""

    def __init__(self, message: str, result: dict | None = None):
        super().__init__(message)
        self.result = result


def _check(ok: bool, what: str, result: dict) -> None:
    if not ok:
        raise VerificationFailed(what, result)


def _jsonable(x):
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------- commands

def cmd_ehrhart(args) -> dict:
    P = lattice_polytope_from_json(read_json(args.polytope))
    poly = ehrhart(P)
    d = P.ambient_dim
    lead_ok = poly.coeff(d) == P.volume
    out = {
        "ehrhart": {"coefficients": poly.to_json(), "route": "lattice-count interpolation"},
        "volume": {"value": fmt(P.volume), "route": "facet cone decomposition"},
        "counts": {str(r): lattice_count(P, r) for r in range(d + 4)},
        "leading_matches_volume": lead_ok,
    }
    _check(lead_ok, "Ehrhart leading coefficient differs from the volume", out)
    return out


def _log_divisor(tc, entry) -> Facet:
    normal = tuple(int(x) for x in need(entry, "normal")[0])
    for f in tc.polytope.facets:
        if tuple(f.normal) == normal:
            return f
    raise ValueError(f"no facet of the polytope has normal {list(normal)}")


def cmd_df_toric(args) -> dict:
    data = read_json(args.input)
    tc = tc_from_json(data)
    eps = Q(data["epsilon"]) if data.get("epsilon") is not None else None
    rep = toric_report(tc, eps)
    out = rep.to_json()
    out["hilbert_weight"] = rep.hilbert_weight.to_json()
    out["denominator_s"] = tc.s
    out["routes_agree"] = routes_agree(rep, tc.n)
    if data.get("log_divisor"):
        facet = _log_divisor(tc, data["log_divisor"])
        DdotL, LD = boundary_divisor_data(tc, facet)
        out["log_df"] = {"value": fmt(log_df(rep.hilbert_weight, DdotL, LD)),
                         "route": "coefficients(divisor as twist)"}
    _check(out["routes_agree"], "DF or norm routes disagree", out)
    return out


def cmd_df_table(args) -> dict:
    """DF from intersection tables with symbols L, K, T (on X) and Lc, K, T, L (on the total space)."""
    data = read_json(args.input)
    n, xt, tt = need(data, "n", "x_table", "tc_table")
    n = int(n)
    X, T = table_from_json(xt), table_from_json(tt)
    r = int(data.get("r", 1))
    L, K, Lc = sym("L"), sym("K"), sym("Lc")
    has_twist = "T" in X.symbols or "T" in T.symbols
    Ln = X.evaluate(L ** n)
    KdotL = X.evaluate(K * L ** (n - 1))
    TdotL = X.evaluate(sym("T") * L ** (n - 1)) if has_twist else Fraction(0)
    mu = -(KdotL + TdotL) / Ln
    Lnp1 = T.evaluate(Lc ** (n + 1))
    LK = T.evaluate(Lc ** n * K)
    LT = T.evaluate(Lc ** n * sym("T")) if has_twist else Fraction(0)
    df = df_from_intersections(mu, Lnp1, LK, LT, n)
    out = {
        "df": {"value": fmt(df), "route": "intersection(table)"},
        "mu": {"value": fmt(mu), "route": "intersection(table)"},
        "inputs": {"Ln": fmt(Ln), "KdotL": fmt(KdotL), "TdotL": fmt(TdotL), "Lnp1": fmt(Lnp1),
                   "LK": fmt(LK), "LT": fmt(LT)},
    }
    norm = None
    if "L" in T.symbols:
        norm = minimum_norm("intersection", LdotL=T.evaluate(Lc ** n * L) / r, Lnp1=Lnp1, n=n, r=r)
        out["minimum_norm"] = {"value": fmt(norm), "route": "intersection(table)"}
    if norm is not None:
        eps = Q(data["epsilon"]) if data.get("epsilon") is not None else None
        out["verdict"] = verdict([(df, norm)], eps).to_json()
    return out


def cmd_norm(args) -> dict:
    tc = tc_from_json(read_json(args.input))
    routes = ("intersection", "odaka", "b0") if args.route == "all" else (args.route,)
    norms = toric_norms(tc, routes)
    out = {"norms": {k: {"value": fmt(v), "route": k} for k, v in sorted(norms.items())}}
    if len(norms) > 1:
        out["agree"] = len(set(norms.values())) == 1
        _check(out["agree"], "norm routes disagree", out)
    return out


def cmd_jtest(args) -> dict:
    data = read_json(args.input)
    if "polytope" not in data:
        gamma, Lnp1, LT, n = need(data, "gamma", "Lnp1", "LT", "n")
        jv = j_functional(gamma, Lnp1, LT, int(n))
        out = {"j_value": {"value": fmt(jv), "route": "intersection(inputs)"}}
        if data.get("relative_canonical_term") is not None:
            dec = j_df_decomposition(jv, data["relative_canonical_term"], bool(data.get("log_canonical", False)),
                                     data.get("df"))
            out["decomposition"] = dec.to_json()
            _check(dec.matches is not False, "J + relative canonical term differs from the supplied DF", out)
        return out
    tc = tc_from_json(data)
    n = tc.n
    out = {}
    if tc.pair.twist is not None:
        ji = j_intersection_inputs(tc)
        out["j_value"] = {"value": fmt(j_functional(ji["gamma"], ji["Lnp1"], ji["LT"], n)),
                          "route": "intersection(mixed volumes)"}
    # DF without twist splits as J^{K_X} plus the relative canonical term
    plain = tc.with_twist(None)
    sl = slope_numbers(plain.polytope)
    Lnp1 = factorial(n + 1) * plain.Q.volume
    jk = j_functional(sl["KdotL"] / sl["Ln"], Lnp1, pullback_canonical_term(plain), n)
    rel = relative_canonical_term(plain)
    ii = df_intersection_inputs(plain)
    df_i = df_from_intersections(ii["mu_p"], ii["Lnp1"], ii["LK"], ii["LT"], n)
    dec = j_df_decomposition(jk, rel, bool(data.get("log_canonical", False)), df_i)
    out["canonical_decomposition"] = dec.to_json()
    out["canonical_decomposition"]["route"] = "intersection(pushed facets, ray heights)"
    _check(dec.matches, "J^K + relative canonical term differs from DF", out)
    return out


def cmd_chow_weight(args) -> dict:
    data = read_json(args.input)
    tc = tc_from_json(data)
    n = tc.n
    wt = bivariate_weight_oracle(tc)
    hwd = hilbert_weight_data(tc)
    r = Q(args.r)
    poly = chow_weight(wt, hwd.hilbert, r)
    sgn, r0 = chow_sign_threshold(wt, n)
    e = extract_e_coefficients(wt, n)
    lead = e[n + 1].coeff(2 * n)
    df_c = df_from_coefficients(hwd)
    matches = lead / hwd.a0 == df_c
    out = {
        "r": fmt(r),
        "chow_weight_in_k": {"coefficients": poly.to_json(), "route": "bivariate lattice count"},
        "e_coefficients": [p.to_json() for p in e],
        "sign": sgn,
        "sign_from_r": r0,
        "leading_over_a0": {"value": fmt(lead / hwd.a0), "route": "bivariate lattice count"},
        "df_coefficients": {"value": fmt(df_c), "route": "coefficients(lattice-count fit)"},
        "leading_matches_df": matches,
    }
    _check(matches, "leading weight coefficient differs from DF", out)
    return out


def cmd_fibration_expand(args) -> dict:
    data = read_json(args.input)
    fd = fibration_from_json(data)
    base_hwd = hilbert_weight_data(tc_from_json(data["base_configuration"])) \
        if data.get("base_configuration") else None
    exp = df_m_expansion(fd, base_hwd)
    out = exp.to_json()
    out["route"] = "intersection(table, m-expansion)"
    out["delta"] = fmt(delta(fd.n, fd.b, fd.V))
    sl = slope_expansion(fd)
    out["slope"] = _jsonable(sl)
    if exp.coeff_b < 0:
        out["unstable_from_m"] = propagate_instability(exp)
    failed = sorted(k for k, v in exp.checks.items() if not v)
    _check(not failed, f"fibration checks failed: {failed}", out)
    _check(bool(sl.get("agree", True)), "slope expansion disagrees with the closed formula", out)
    return out


def cmd_cm_degree(args) -> dict:
    data = read_json(args.input)
    A, B, mu, n = need(data, "A", "B", "mu", "n")
    b = int(data.get("b", 1))
    deg = cm_degree(A, B, mu, int(n), b)
    out = {"cm_degree": {"value": fmt(deg), "route": "intersection(inputs)"}}
    if data.get("V") is not None:
        d = delta(int(n), b, data["V"])
        out["delta"] = fmt(d)
        out["twisted_degree"] = {"value": fmt(d * deg), "route": "intersection(inputs)"}
    return out


def cmd_kodaira_embed(args) -> dict:
    data = read_json(args.input)
    if "polytope" in data:
        P = lattice_polytope_from_json(data["polytope"])
        gens = {k: polytope_from_json(v) for k, v in sorted(data.get("nef_generators", {}).items())}
        th = toric_embedding_threshold(P, gens, args.cap)
    else:
        n, mu, L, K, gens = need(data, "n", "mu", "L", "K", "generators")
        oracle = NefOracle(gens, data.get("relations", ()))
        th = embedding_threshold(int(n), mu, L, K, oracle, args.cap)
    return th.to_json()


def cmd_kodaira_family(args) -> dict:
    data = read_json(args.input)
    n, values = need(data, "n", "values")
    c = ChernNumbers(int(n), tuple(values))
    return family_threshold(c, args.cap, args.very_ample_floor).to_json()


def cmd_verify_identities(args) -> dict:
    res = identities_suite(args.n_max)
    if not res.passed:
        raise VerificationFailed("identity suite reported failures", res.to_json())
    return res.to_json()


def cmd_verify_inequalities(args) -> dict:
    domains = args.domains or sorted(INEQUALITY_DOMAINS)
    res = inequalities_suite(args.trials, args.seed, domains)
    out = res.to_json()
    out["failures"] = sum(not c["passed"] for c in res.cases)
    if not res.passed:
        raise VerificationFailed("inequality suite reported failures", out)
    return out


def _rationals(text: str, count: int, what: str) -> tuple:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != count:
        raise ValueError(f"{what} expects {count} comma-separated rationals")
    return tuple(Q(p) for p in parts)


def cmd_sweep_twist(args) -> dict:
    data = read_json(args.input)
    tc = tc_from_json(data)
    base = hilbert_weight_data(tc)
    direction = _rationals(args.direction, 2, "--direction")
    start, stop, step = _rationals(args.range, 3, "--range")
    if step <= 0:
        raise ValueError("sweep step must be positive")
    ts = []
    t = start
    while t <= stop:
        ts.append(t)
        t += step
    rows = twist_sweep(base, direction, ts)
    changes = [fmt(rows[i + 1][0]) for i in range(len(rows) - 1)
               if (rows[i][1] > 0) != (rows[i + 1][1] > 0) or (rows[i][1] < 0) != (rows[i + 1][1] < 0)]
    return {
        "direction": [fmt(x) for x in direction],
        "route": "coefficients(lattice-count fit)",
        "sweep": [{"t": fmt(t), "df": fmt(v)} for t, v in rows],
        "sign_changes_at": changes,
    }


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kstabmaps", description="Exact K-stability computations for maps.")
    p.add_argument("--out", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    def add(parser, name, func, **kw):
        q = parser.add_parser(name, **kw)
        q.set_defaults(func=func)
        q.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
        return q

    q = add(sub, "ehrhart", cmd_ehrhart, help="Ehrhart polynomial of a lattice polytope")
    q.add_argument("polytope")

    df = sub.add_parser("df", help="Donaldson-Futaki invariant").add_subparsers(dest="mode", required=True)
    add(df, "toric", cmd_df_toric).add_argument("input")
    add(df, "table", cmd_df_table).add_argument("input")

    q = add(sub, "norm", cmd_norm, help="minimum norm of a toric configuration")
    q.add_argument("input")
    q.add_argument("--route", choices=["intersection", "odaka", "b0", "all"], default="all")

    add(sub, "jtest", cmd_jtest, help="J-functional and the J/DF decomposition").add_argument("input")

    q = add(sub, "chow-weight", cmd_chow_weight, help="normalised Mumford weight at a given r")
    q.add_argument("input")
    q.add_argument("--r", required=True)

    fib = sub.add_parser("fibration", help="fibred configurations").add_subparsers(dest="mode", required=True)
    add(fib, "expand", cmd_fibration_expand).add_argument("input")

    add(sub, "cm-degree", cmd_cm_degree, help="degree of the CM line bundle over a curve").add_argument("input")

    kod = sub.add_parser("kodaira", help="embedding thresholds").add_subparsers(dest="mode", required=True)
    q = add(kod, "embed", cmd_kodaira_embed)
    q.add_argument("input")
    q.add_argument("--cap", type=int, default=1000)
    q = add(kod, "family", cmd_kodaira_family)
    q.add_argument("input")
    q.add_argument("--very-ample-floor", type=int, required=True)
    q.add_argument("--cap", type=int, required=True)

    ver = sub.add_parser("verify", help="bundled verification suites").add_subparsers(dest="mode", required=True)
    q = add(ver, "identities", cmd_verify_identities)
    q.add_argument("--n-max", type=int, default=8)
    q = add(ver, "inequalities", cmd_verify_inequalities)
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--seed", type=int, default=DEFAULT_SEED)
    q.add_argument("--domains", nargs="*", choices=sorted(INEQUALITY_DOMAINS))

    sw = sub.add_parser("sweep", help="parameter sweeps").add_subparsers(dest="mode", required=True)
    q = add(sw, "twist", cmd_sweep_twist)
    q.add_argument("input")
    q.add_argument("--direction", required=True, metavar="DA_Q,DB_Q",
                   help="change of (a_q, b_q) per unit t, e.g. --direction=-1/2,-1/2")
    q.add_argument("--range", required=True, metavar="START,STOP,STEP",
                   help="inclusive t range, e.g. --range=-2,2,1/2")
    return p


def _manifest(args) -> dict:
    command = " ".join(x for x in (args.command, getattr(args, "mode", None)) if x)
    inputs = [getattr(args, k) for k in ("polytope", "input") if getattr(args, k, None)]
    options = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "command", "mode", "polytope", "input", "out", "seed"):
            continue
        options[k] = v
    return {
        "command": command,
        "inputs": inputs,
        "output": getattr(args, "out", None),
        "seed": getattr(args, "seed", DEFAULT_SEED),
        "options": options,
    }


def run(argv=None) -> tuple[int, dict]:
    """Parse, dispatch and build the report; returns (exit code, report)."""
    args = build_parser().parse_args(argv)
    result, error = None, None
    try:
        result = args.func(args)
        code = EXIT_OK
    except VerificationFailed as exc:
        code, result = EXIT_VERIFY, exc.result
        error = {"code": "verification_failed", "type": "VerificationFailed", "message": str(exc)}
    except Exception as exc:  # mapped to exit codes below
        if isinstance(exc, VERIFY_ERRORS):
            code = EXIT_VERIFY
        elif isinstance(exc, INCONCLUSIVE_ERRORS):
            code = EXIT_INCONCLUSIVE
        elif isinstance(exc, (E.KStabError, ValueError, TypeError, KeyError, OSError, ZeroDivisionError)):
            code = EXIT_INPUT
        else:
            raise
        error = {"code": getattr(exc, "code", "input_error"), "type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, E.MissingEntry):
            error["monomial"] = list(exc.monomial)
    report = {
        "schema_version": SCHEMA_VERSION,
        "manifest": _manifest(args),
        "status": STATUS[code],
        "result": result,
        "error": error,
    }
    return code, report


def render(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    code, report = run(argv)
    text = render(report)
    out = report["manifest"]["output"]
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

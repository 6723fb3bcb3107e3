"""End-to-end toric analysis shared by the CLI and the tests."""
from __future__ import annotations

from fractions import Fraction

from .invariants import (
    StabilityReport,
    coefficient_scale,
    df_from_coefficients,
    df_from_intersections,
    j_functional,
    minimum_norm,
    verdict,
)
from .torictc import (
    ToricTestConfiguration,
    df_intersection_inputs,
    hilbert_weight_data,
    j_intersection_inputs,
    norm_data,
    odaka_data,
    restricted_weight_b0,
)


def toric_norms(tc: ToricTestConfiguration, routes=("intersection", "odaka", "b0")) -> dict:
    n, r = tc.n, tc.exponent
    out = {}
    hwd = None
    for route in routes:
        if route == "intersection":
            LdotL, Lnp1 = norm_data(tc)
            out[route] = minimum_norm(route, LdotL=LdotL, Lnp1=Lnp1, n=n, r=r)
        elif route == "odaka":
            A, B = odaka_data(tc)
            out[route] = minimum_norm(route, LE_L=A, LE_E=B, n=n, r=r)
        elif route == "b0":
            hwd = hwd or hilbert_weight_data(tc)
            out[route] = minimum_norm(route, b_tilde0=restricted_weight_b0(tc), b0=hwd.b0, n=n, r=r)
        else:
            raise ValueError(f"unknown norm route {route}")
    return out


def toric_report(tc: ToricTestConfiguration, epsilon=None) -> StabilityReport:
    """DF by both routes, the minimum norm by all three, J when twisted, and a verdict.

    ``df`` is the coefficient-route value; the intersection-route value
    (larger by 2 n!) is listed under routes and drives the verdict.
    """
    hwd = hilbert_weight_data(tc)
    df_c = df_from_coefficients(hwd)
    ii = df_intersection_inputs(tc)
    df_i = df_from_intersections(ii["mu_p"], ii["Lnp1"], ii["LK"], ii["LT"], ii["n"])
    norms = toric_norms(tc)
    routes = {
        "df_coefficients": df_c,
        "df_intersection": df_i,
        **{f"norm_{k}": v for k, v in norms.items()},
    }
    provenance = {
        "df": "coefficients(lattice-count fit)",
        "df_intersection": "intersection(mixed volumes, facet lattice volumes)",
        "minimum_norm": "intersection(mixed volumes)",
        "norm_odaka": "odaka(intersection table)",
        "norm_b0": "b0(restricted lattice-count fit)",
        "route_agreement": str(df_i == coefficient_scale(tc.n) * df_c
                               and len(set(norms.values())) == 1).lower(),
    }
    jv = None
    if tc.pair.twist is not None:
        ji = j_intersection_inputs(tc)
        jv = j_functional(ji["gamma"], ji["Lnp1"], ji["LT"], ji["n"])
        provenance["j_value"] = "intersection(mixed volumes)"
    norm = norms["intersection"]
    v = verdict([(df_i, norm)], epsilon)
    rep = StabilityReport(df_c, norm, v, jv, None, routes, provenance)
    rep.hilbert_weight = hwd
    return rep


def routes_agree(report: StabilityReport, n: int) -> bool:
    r = report.routes
    norms = [v for k, v in r.items() if k.startswith("norm_")]
    return r["df_intersection"] == coefficient_scale(n) * r["df_coefficients"] and len(set(norms)) == 1


def zero(x) -> bool:
    return Fraction(x) == 0

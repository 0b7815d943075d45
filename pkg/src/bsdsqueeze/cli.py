"""Command-line front end.

Every command reads one JSON document (a path, ``-`` for stdin, or the JSON
text itself) and writes a JSON report to stdout.  Complex vectors may be
given as real lists, interleaved ``[re, im, ...]`` lists, or lists of
strings such as ``"0.3-0.1j"``.

Exit status: 0 on success, 2 for bad input, 3 when an internal consistency
check fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import kobayashi, phjts, squeezing, symdomain, wlc
from .errors import ConsistencyError, PreconditionError
from .phjts import CartanFactor, JtsElement
from .symdomain import DomainSpec

COMMANDS = (
    "jts-check", "spectral", "rank", "stratum", "shilov", "normalize", "kobayashi",
    "squeeze-exact", "squeeze-product", "squeeze-removed", "squeeze-certify",
    "wlc-frame", "wlc-bound", "hhr-scan",
)


# -- input parsing -------------------------------------------------------------


def _load(source):
    if source == "-":
        text, where = sys.stdin.read(), "<stdin>"
    elif source.lstrip().startswith(("{", "[")):
        text, where = source, "<inline>"
    else:
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as exc:
            raise PreconditionError(f"cannot read {source}: {exc.strerror}") from exc
        where = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PreconditionError(
            f"{where}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise PreconditionError(f"{where}: expected a JSON object")
    return doc


def parse_vector(vals, n):
    """Complex vector of length ``n`` from any of the accepted spellings."""
    if not isinstance(vals, list):
        raise PreconditionError("a point must be a JSON list")
    try:
        if vals and all(isinstance(v, list) for v in vals):
            out = np.array([complex(re, im) for re, im in vals])
        elif len(vals) == n:
            out = np.array([complex(str(v).replace(" ", "")) for v in vals])
        elif len(vals) == 2 * n:
            arr = np.asarray(vals, dtype=float)
            out = arr[0::2] + 1j * arr[1::2]
        else:
            raise PreconditionError(f"expected {n} complex coordinates, got a list of {len(vals)}")
    except (TypeError, ValueError) as exc:
        raise PreconditionError(f"cannot read point {vals!r}: {exc}") from exc
    if out.shape != (n,):
        raise PreconditionError(f"expected {n} coordinates")
    if not np.all(np.isfinite(out)):
        raise PreconditionError("coordinates must be finite")
    return out


def _factor(doc):
    return CartanFactor.from_dict(doc.get("factor", doc))


def _domain(doc):
    if "domain" in doc:
        return DomainSpec.from_dict(doc["domain"])
    if "factors" in doc:
        return DomainSpec.from_dict(doc)
    if "factor" in doc:
        return DomainSpec((CartanFactor.from_dict(doc["factor"]),))
    raise PreconditionError('need a "domain" (or "factors") entry')


def _point(doc, key, n):
    if key not in doc:
        raise PreconditionError(f'missing "{key}"')
    return parse_vector(doc[key], n)


def _element(doc, factor):
    if "matrix" in doc:
        try:
            mat = np.array([[complex(str(v).replace(" ", "")) for v in row] for row in doc["matrix"]])
        except (TypeError, ValueError) as exc:
            raise PreconditionError(f"cannot read matrix: {exc}") from exc
        return factor.element_from_matrix(mat)
    return JtsElement(factor, _point(doc, "element", factor.ambient_dim))


def _body(doc):
    spec = doc.get("body", doc)
    preset = spec.get("preset")
    if preset == "polydisk":
        return wlc.ConvexBody.polygon_polydisk(int(spec.get("n", 2)), int(spec.get("m", 64)))
    if preset == "ball":
        return wlc.ConvexBody.polyhedral_ball(int(spec.get("alphas", 9)), int(spec.get("phases", 16)))
    if preset is not None:
        raise PreconditionError(f"unknown body preset {preset!r}")
    return wlc.ConvexBody.from_dict(spec)


def _removed(doc, domain, cfg):
    if "set" not in doc:
        raise PreconditionError('missing removed set "set"')
    data = dict(doc["set"])
    if data.get("kind") == "points":
        data["data"] = [list(np.ravel([[v.real, v.imag] for v in parse_vector(p, domain.total_dim)]))
                        for p in data.get("data", [])]
    elif cfg.samples and "samples" not in data:
        data["samples"] = cfg.samples
    return kobayashi.RemovedSet.from_dict(domain, data, seed=cfg.seed)


# -- output helpers ------------------------------------------------------------


def _vec(z):
    return wlc._interleave(z)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _vec(obj.ravel())
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# -- commands ------------------------------------------------------------------


def cmd_jts_check(doc, cfg):
    f = _factor(doc)
    count = cfg.samples or 1000
    rng = np.random.default_rng(cfg.seed)
    batch = [phjts.random_unit_batch(f, rng, count) for _ in range(5)]
    res = phjts.jordan_residual(f, *batch)
    worst = float(np.max(res))
    return {
        "factor": f.to_dict(), "samples": count, "max_residual": worst,
        "passed": worst < cfg.tol,
        "provenance": [{"fact": "Jordan identity on unit-norm random quintuples"}],
    }


def cmd_spectral(doc, cfg):
    f = _factor(doc)
    if "element" in doc or "matrix" in doc:
        x = _element(doc, f)
    else:
        x = phjts.random_element(f, np.random.default_rng(cfg.seed))
    dec = phjts.spectral_decompose(x, cfg.tol)
    return {
        "factor": f.to_dict(), "element": x.coords,
        "lambdas": list(dec.lambdas), "tripotents": [e.coords for e in dec.tripotents],
        "spectral_norm": dec.lambdas[0] if dec.lambdas else 0.0,
        "residual": dec.residual,
        "provenance": [{"fact": "x = sum of lambda_i e_i, pairwise orthogonal tripotents"}],
    }


def cmd_rank(doc, cfg):
    f = _factor(doc)
    if "element" in doc or "matrix" in doc:
        e = _element(doc, f)
        return {"factor": f.to_dict(), "tripotent_rank": phjts.tripotent_rank(e, cfg.tol),
                "provenance": [{"fact": "rank of a tripotent: number of orthogonal primitive summands"}]}
    return {
        "factor": f.to_dict(), "rank": f.rank,
        "system_rank": phjts.system_rank(f, trials=8, seed=cfg.seed),
        "provenance": [{"fact": "rank = spectral length of a generic element"}],
    }


def _boundary_input(doc):
    dom = _domain(doc)
    return dom, _point(doc, "point", dom.total_dim)


def cmd_stratum(doc, cfg):
    dom, x = _boundary_input(doc)
    st = symdomain.boundary_stratum(dom, x, max(cfg.tol, symdomain.UNIT_LAMBDA_TOL))
    return {
        "stratum": st.j, "rank": dom.rank, "e": st.e.coords, "v": st.v.coords,
        "v_spectral_norm": st.v_norm, "reconstruction_residual": st.reconstruction_residual,
        "pierce_residual": st.pierce_residual,
        "provenance": [{"fact": "boundary point = e + v with e a tripotent and v in V_0(e) of norm < 1"}],
    }


def cmd_shilov(doc, cfg):
    dom, x = _boundary_input(doc)
    st = symdomain.boundary_stratum(dom, x, max(cfg.tol, symdomain.UNIT_LAMBDA_TOL))
    return {
        "shilov": st.j == dom.rank, "stratum": st.j, "rank": dom.rank,
        "provenance": [{"fact": "Shilov boundary = stratum of maximal tripotents"}],
    }


def cmd_normalize(doc, cfg):
    f = _factor(doc)
    lam = symdomain.normalize_realization(f)
    return {
        "factor": f.to_dict(), "rank": f.rank, "scale": lam.scale,
        "boundary_distance": lam.scale, "shilov_distance": 1.0,
        "provenance": [{"fact": "normalized realization: Shilov boundary on the unit sphere, "
                                "distance 1/sqrt(rank) from 0 to the boundary"}],
    }


def cmd_kobayashi(doc, cfg):
    dom = _domain(doc)
    z = _point(doc, "z", dom.total_dim)
    if "set" in doc:
        env = kobayashi.dist_to_set(dom, z, _removed(doc, dom, cfg), int(doc.get("levels", 4)))
        out = env.to_dict()
        out["distance"] = env.value
        return out
    w = _point(doc, "w", dom.total_dim)
    return {"distance": kobayashi.pointwise_distance(dom, z, w),
            "provenance": [{"fact": "K(0,w) = atanh |w|_D; ball distance in closed form; max over factors"}]}


def cmd_squeeze_exact(doc, cfg):
    return squeezing.exact_constant(_domain(doc)).to_dict()


def cmd_squeeze_product(doc, cfg):
    if "parts" in doc:
        parts = [float(s) for s in doc["parts"]]
    else:
        dom = _domain(doc)
        parts = [squeezing.exact_constant(DomainSpec((f,))).lower for f in dom.factors]
    return {"parts": parts, "lower": squeezing.product_lower_bound(parts),
            "provenance": [{"fact": "product of factor embeddings: (sum 1/s_i^2)^(-1/2)"}]}


def cmd_squeeze_removed(doc, cfg):
    dom = _domain(doc)
    z = _point(doc, "z", dom.total_dim)
    return squeezing.removed_set_bounds(dom, z, _removed(doc, dom, cfg), int(doc.get("levels", 4))).to_dict()


def cmd_squeeze_certify(doc, cfg):
    dom = _domain(doc)
    cert = squeezing.symmetric_domain_certificate(dom, samples=cfg.samples or 4096)
    out = cert.to_dict()
    out["exact_constant"] = squeezing.exact_constant(dom).lower
    return out


def _base_point(doc, body):
    return _point(doc, "z0", body.dim) if "z0" in doc else body.interior_point


def cmd_wlc_frame(doc, cfg):
    body = _body(doc)
    return wlc.build_frame(body, _base_point(doc, body)).to_dict()


def cmd_wlc_bound(doc, cfg):
    body = _body(doc)
    fr = wlc.build_frame(body, _base_point(doc, body))
    return {"bound": fr.bound, "c": fr.c, "n": fr.n, "residuals": fr.residuals,
            "provenance": [dict(wlc.KOEBE_PROVENANCE)]}


def cmd_hhr_scan(doc, cfg):
    body = _body(doc)
    if "grid" in doc:
        grid = np.array([parse_vector(p, body.dim) for p in doc["grid"]])
    else:
        grid = body.sample_interior(np.random.default_rng(cfg.seed), cfg.samples or 100)
    res = wlc.hhr_scan(body, grid, threads=cfg.threads)
    out = res.to_dict()
    out["bounds"] = res.bounds
    out["points"] = [_vec(p) for p in grid]
    return out


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def _scan_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "point", "bound"])
    for i, (pt, b) in enumerate(zip(report["points"], report["bounds"])):
        w.writerow([i, json.dumps(pt), repr(float(b))])
    return buf.getvalue()


def build_parser():
    ap = argparse.ArgumentParser(prog="bsdsqueeze", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("input", nargs="?", default="-", help="JSON file, '-' for stdin, or inline JSON")
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


def _fail(code, kind, msg):
    sys.stderr.write(json.dumps({"error": kind, "message": msg}) + "\n")
    return code


def run(cfg):
    """Execute a parsed configuration and return the report text."""
    if cfg.command not in HANDLERS:
        raise PreconditionError(f"unknown command {cfg.command!r}; choose from {', '.join(COMMANDS)}")
    if not cfg.tol > 0:
        raise PreconditionError("--tol must be positive")
    if cfg.samples is not None and cfg.samples < 1:
        raise PreconditionError("--samples must be positive")
    if cfg.threads < 1:
        raise PreconditionError("--threads must be positive")
    if cfg.format == "csv" and cfg.command != "hhr-scan":
        raise PreconditionError("csv output is only available for hhr-scan")
    doc = _load(cfg.input)
    report = _clean(HANDLERS[cfg.command](doc, cfg))
    report.setdefault("provenance", [])
    report["config"] = {"command": cfg.command, "tol": cfg.tol, "seed": cfg.seed,
                        "samples": cfg.samples}
    if cfg.format == "csv":
        return _scan_csv(report)
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None):
    ap = build_parser()
    try:
        cfg = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = run(cfg)
    except PreconditionError as exc:
        return _fail(2, type(exc).__name__, str(exc))
    except ConsistencyError as exc:
        return _fail(3, type(exc).__name__, str(exc))
    except (KeyError, TypeError, ValueError) as exc:
        # schema violations that slipped past the explicit checks
        return _fail(2, "MalformedInput", f"{type(exc).__name__}: {exc}")
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

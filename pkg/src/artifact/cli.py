"""Command-line front end.

Every run prints (or writes) one JSON document with a versioned header.
Exit status: 0 success, 1 usage error, 2 a check reported a violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import SCHEMA_VERSION, __version__
from .exactcore import ArtifactError, DomainError, ViolationError, scalar_str

CACHE_ENV = "ARTIFACT_CACHE_DIR"

# per-command defaults; a config file or flags override them
DEFAULTS = {
    "trdeg wgn": {"g": 1, "n": 1},
    "trdeg fg": {"g": 2},
    "trdeg pi-check": {"gmax": 5},
    "trell yseries": {"kmax": 3},
    "trell wgn": {"g": 0, "n": 3, "kmax": 1},
    "trell fg": {"g": 2, "kmax": 3},
    "trell weber": {"g": 1, "n": 1},
    "hae solve": {"gmax": 4, "depth": 4},
    "hae gap": {"g": 2, "depth": 4},
    "hae beta": {"gmax": 3, "depth": 4, "beta_mode": True},
    "block descendants": {"k": 2},
    "block coeffs": {"kmax": 3},
    "block realization": {"s": 3},
    "dict": {"order": 6},
    "crosscheck cft-pi": {"kmax": 5},
    "crosscheck tr-pi": {"gmax": 4, "order": 6},
    "crosscheck beta-block": {"kmax": 5},
    "crosscheck tr-hae": {"g": 2, "kmax": 3},
    "crosscheck instanton": {"order": 4, "hbar_order": 2},
}
COMMON = {"format": "json", "branch": "minus", "output": None, "beta_mode": False}
INT_KEYS = {"g", "n", "gmax", "kmax", "order", "depth", "k", "s", "hbar_order"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- config

def load_config(path: str) -> dict:
    """key=value lines; '#' starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {num}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = _coerce(key, val)
    return out


def _coerce(key, val):
    if key in INT_KEYS:
        try:
            return int(val)
        except ValueError as exc:
            raise UsageError(f"{key} must be an integer") from exc
    if key == "beta_mode":
        if val.lower() in ("1", "true", "yes", "on"):
            return True
        if val.lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError("beta_mode must be a boolean")
    return val


def resolve(command: str, flags: dict, config: dict) -> dict:
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[command])
    for k, v in config.items():
        if k in cfg:
            cfg[k] = v
    for k, v in flags.items():
        if v is not None and k in cfg:
            cfg[k] = v
    for k in INT_KEYS & set(cfg):
        if cfg[k] < 0:
            raise UsageError(f"{k} must be non-negative")
    if cfg["format"] not in ("json", "csv"):
        raise UsageError("format must be json or csv")
    if cfg["branch"] not in ("minus", "plus"):
        raise UsageError("branch must be minus or plus")
    return cfg


# ---------------------------------------------------------------- commands

def _trdeg(sub, c):
    from . import trdeg
    if sub == "wgn":
        return trdeg.deg_correlator(c["g"], c["n"]).to_json()
    if sub == "fg":
        return {"g": c["g"], "c_g": scalar_str(trdeg.deg_free_energy_coeff(c["g"]))}
    return trdeg.check_zero_param_pi(c["gmax"])


def _trell(sub, c):
    from . import trell
    if sub == "yseries":
        ys = trell.y_series(c["kmax"])
        return {"kmax": c["kmax"], "variable": "zeta, X = zeta^2 - 2/3",
                "U": [scalar_str(u) for u in trell.u_series(c["kmax"])],
                "Y": [dict(k=k, **y.to_json()) for k, y in enumerate(ys)],
                "period_check": [scalar_str(v) for v in trell.period_check(c["kmax"])]}
    if sub == "wgn":
        w = trell.lambda_wgn(c["g"], c["n"], c["kmax"])
        d = w.to_json()
        d["symmetric"] = w.is_symmetric()
        d["poles_ok"] = w.poles_ok()
        return d
    if sub == "fg":
        vals = trell.lambda_fg(c["g"], c["kmax"])
        return {"g": c["g"], "F_g^[k]": [scalar_str(v) for v in vals],
                "expansion": "F_g = kappa_g nu^(2-2g) + Lambda^(2g-2) sum_k F_g^[k] (nu Lambda)^k"}
    w = trell.weber_tr(c["g"], c["n"])
    d = {"correlator": w.to_json(), "symmetric": w.is_symmetric(), "poles_ok": w.poles_ok()}
    if c["n"] == 1 and c["g"] >= 2:
        d["free_energy"] = {"g": c["g"], "coeff_nu^(2-2g)": scalar_str(trell.weber_free_energy(c["g"])),
                            "closed_form": scalar_str(trell.weber_closed_form(c["g"]))}
    return d


def _hae(sub, c):
    from . import hae
    if sub == "gap":
        st = hae.HaeState(max(c["g"], 2), c["beta_mode"]).solve()
        return hae.verify_strong_gap(st, c["g"], c["depth"]).to_json()
    beta = c["beta_mode"] or sub == "beta"
    st = hae.HaeState(c["gmax"], beta).solve()
    out = {"gmax": c["gmax"], "beta_mode": beta, "genera": []}
    for g in range(2, c["gmax"] + 1):
        out["genera"].append({
            "g": g,
            "P_g": st.F[g].pure(2 * g - 2).to_json(),
            "alphas": [hae._cstr(a) for a in st.alphas[g]],
            "gap": hae.verify_strong_gap(st, g, c["depth"]).to_json(),
        })
    return out


def _block(sub, c):
    from . import virasoro
    if sub == "descendants":
        return {"k": c["k"], "G": virasoro.whittaker_descendant(c["k"]).to_json()}
    if sub == "coeffs":
        return virasoro.block_coeffs_json(c["kmax"])
    return virasoro.check_half_integer_realization(c["s"])


def _dict(sub, c):
    from . import painleve
    return painleve.build_dictionary(c["order"], c["branch"]).to_json()


def _cross(sub, c):
    from . import painleve
    if sub == "cft-pi":
        return painleve.cft_pi_check(c["kmax"])
    if sub == "tr-pi":
        rep = painleve.tr_pi_residual(c["gmax"], c["order"])
        if rep["residuals"]:
            raise ViolationError("TR and Painleve I expansions disagree", rep)
        return rep
    if sub == "beta-block":
        return painleve.beta_block_check(c["kmax"])
    if sub == "tr-hae":
        return painleve.tr_hae_crosscheck(c["g"], c["kmax"])
    return painleve.one_instanton(c["order"], c["hbar_order"]).to_json()


GROUPS = {
    "trdeg": (["wgn", "fg", "pi-check"], _trdeg),
    "trell": (["yseries", "wgn", "fg", "weber"], _trell),
    "hae": (["solve", "gap", "beta"], _hae),
    "block": (["descendants", "coeffs", "realization"], _block),
    "crosscheck": (["cft-pi", "tr-pi", "beta-block", "tr-hae", "instanton"], _cross),
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="artifact", description="Exact checks of the Painleve I genus expansion.")
    p.add_argument("--version", action="version", version=__version__)
    top = p.add_subparsers(dest="group", parser_class=_Parser)

    def common(sp, command):
        sp.add_argument("--config", help="key=value file; flags take precedence")
        sp.add_argument("--format", choices=["json", "csv"])
        sp.add_argument("--output", help="write here instead of stdout")
        sp.add_argument("--branch", choices=["minus", "plus"])
        sp.add_argument("--beta-mode", dest="beta_mode", action="store_const", const=True)
        for key in sorted(set(DEFAULTS[command]) - set(COMMON)):
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=int)
        sp.set_defaults(command=command)

    for group, (subs, _) in GROUPS.items():
        gp = top.add_parser(group)
        inner = gp.add_subparsers(dest="sub", parser_class=_Parser)
        for s in subs:
            common(inner.add_parser(s), f"{group} {s}")
    common(top.add_parser("dict"), "dict")
    return p


# ---------------------------------------------------------------- output

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _csv(doc):
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "value"])
    for k, v in _flatten(doc):
        w.writerow([k, "" if v is None else json.dumps(v) if isinstance(v, bool) else v])
    return buf.getvalue()


def _no_floats(obj):
    if isinstance(obj, float):
        raise ArtifactError("floating point value in output")
    if isinstance(obj, dict):
        for v in obj.values():
            _no_floats(v)
    elif isinstance(obj, list):
        for v in obj:
            _no_floats(v)


def render(doc, fmt):
    _no_floats(doc)
    if fmt == "csv":
        return _csv(doc)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _header(command, cfg, status):
    return {"schema_version": SCHEMA_VERSION, "artifact_version": __version__,
            "command": command, "status": status,
            "config": {k: v for k, v in sorted(cfg.items()) if k not in ("output",)}}


def _emit(text, cfg, out):
    if cfg.get("output"):
        with open(cfg["output"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    # bare "hae [flags]" means "hae solve"
    if argv and argv[0] == "hae" and (len(argv) == 1 or argv[1].startswith("-")):
        argv.insert(1, "solve")
    try:
        ns = build_parser().parse_args(argv)
        if not getattr(ns, "command", None):
            raise UsageError("missing command")
        flags = vars(ns)
        config = load_config(ns.config) if ns.config else {}
        unknown = set(config) - set(COMMON) - set(DEFAULTS[ns.command])
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg = resolve(ns.command, flags, config)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return 1

    group, _, sub = ns.command.partition(" ")
    handler = _dict if group == "dict" else GROUPS[group][1]
    cache_path = _cache_path(ns.command, cfg)
    if cache_path and os.path.exists(cache_path):
        with open(cache_path, encoding="utf-8") as fh:
            _emit(fh.read(), cfg, out)
        return 0
    try:
        result = handler(sub, cfg)
    except ViolationError as exc:
        doc = _header(ns.command, cfg, "violation")
        doc["error"] = {"message": str(exc.args[0]) if exc.args else "", "details": _jsonable(exc.details)}
        _emit(render(doc, cfg["format"]), cfg, out)
        return 2
    except DomainError as exc:
        err.write(f"usage error: {exc}\n")
        return 1
    doc = _header(ns.command, cfg, "ok")
    doc["result"] = _jsonable(result)
    text = render(doc, cfg["format"])
    if cache_path:
        os.makedirs(os.path.dirname(cache_path), exist_ok=True)
        with open(cache_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    _emit(text, cfg, out)
    return 0


def _cache_path(command, cfg):
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    key = json.dumps({"v": __version__, "c": command,
                      "cfg": {k: v for k, v in cfg.items() if k != "output"}}, sort_keys=True)
    return os.path.join(root, hashlib.sha256(key.encode()).hexdigest() + "." + cfg["format"])


def _jsonable(obj):
    """Make exact scalars JSON-safe (strings); leave containers and plain values."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, (str, bool, int)):
        return obj
    return str(obj)


def main(argv=None):
    sys.exit(run(argv))

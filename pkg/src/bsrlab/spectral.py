"""Boundary spectral data: model, persistence and synthetic perturbations.

A data set holds, for every eigenvalue lambda_n of the Robin operator on the
unit ball, the Dirichlet trace psi_n = boundary_value * Y_lm of the
corresponding eigenfunction.  Arrays are stored column-wise; ``entries`` gives
a per-entry view.
"""
from dataclasses import dataclass, field, replace
import json
import math
import os
import tempfile

import numpy as np

from .errors import InvalidArgument, SchemaError, ValidationError

SCHEMA = "bsd/1"
DOMAIN = "unit-ball-3d"


@dataclass(frozen=True)
class SpectralEntry:
    n: int
    lam: float
    l: int
    m: int
    boundary_value: float
    trace_known: bool = True


@dataclass(frozen=True, eq=False)
class BoundarySpectralData:
    """Eigenvalues and boundary traces, index-paired by rank ``n = 1..N``.

    ``shift`` carries synthetic eigenvalue perturbations on top of ``lam_base``
    so that a perturbation followed by its negation restores ``lam`` exactly.
    """

    lam_base: np.ndarray
    l: np.ndarray
    m: np.ndarray
    boundary_value: np.ndarray
    trace_known: np.ndarray
    alpha: float
    lambda_max: float
    provenance: dict = field(default_factory=dict)
    shift: np.ndarray | None = None
    domain: str = DOMAIN

    def __post_init__(self):
        validate_bsd(self)

    @classmethod
    def from_arrays(cls, lam, l, m, boundary_value, alpha, lambda_max,
                    trace_known=None, provenance=None):
        lam = np.asarray(lam, dtype=np.float64).copy()
        n = lam.shape[0]
        tk = np.ones(n, dtype=bool) if trace_known is None else np.asarray(trace_known, dtype=bool).copy()
        return cls(lam, np.asarray(l, dtype=np.int64).copy(), np.asarray(m, dtype=np.int64).copy(),
                   np.asarray(boundary_value, dtype=np.float64).copy(), tk, float(alpha),
                   float(lambda_max), dict(provenance or {}))

    @property
    def lam(self):
        if self.shift is None:
            return self.lam_base
        return self.lam_base + self.shift

    def __len__(self):
        return self.lam_base.shape[0]

    def entry(self, n):
        i = n - 1
        if not 0 <= i < len(self):
            raise InvalidArgument(f"entry n={n} out of range 1..{len(self)}")
        return SpectralEntry(n, float(self.lam[i]), int(self.l[i]), int(self.m[i]),
                             float(self.boundary_value[i]), bool(self.trace_known[i]))

    @property
    def entries(self):
        return [self.entry(n) for n in range(1, len(self) + 1)]

    def same_data(self, other):
        """Structural equality of all stored fields (bitwise on floats)."""
        return (len(self) == len(other)
                and np.array_equal(self.lam, other.lam)
                and np.array_equal(self.l, other.l)
                and np.array_equal(self.m, other.m)
                and np.array_equal(self.boundary_value, other.boundary_value)
                and np.array_equal(self.trace_known, other.trace_known)
                and self.alpha == other.alpha
                and self.lambda_max == other.lambda_max
                and self.domain == other.domain)

    def groups(self):
        """Degenerate blocks: entries sharing l, base eigenvalue and boundary value.

        Returns a list of ``(l, indices)`` with 0-based indices.
        """
        out = {}
        keys = zip(self.l.tolist(), self.lam_base.tolist(), self.boundary_value.tolist())
        for i, key in enumerate(keys):
            out.setdefault(key, []).append(i)
        return [(key[0], np.asarray(idx)) for key, idx in out.items()]


def validate_bsd(bsd):
    n = bsd.lam_base.shape[0]
    for name in ("l", "m", "boundary_value", "trace_known"):
        if getattr(bsd, name).shape != (n,):
            raise ValidationError(f"column {name!r} has wrong length")
    if bsd.shift is not None and bsd.shift.shape != (n,):
        raise ValidationError("shift column has wrong length")
    if bsd.domain != DOMAIN:
        raise ValidationError(f"unsupported domain {bsd.domain!r}")
    if np.any(bsd.l < 0) or np.any(np.abs(bsd.m) > bsd.l):
        bad = int(np.argmax((bsd.l < 0) | (np.abs(bsd.m) > bsd.l))) + 1
        raise ValidationError(f"entry n={bad} has invalid harmonic index")
    lam = bsd.lam
    if not np.all(np.isfinite(lam)) or not np.all(np.isfinite(bsd.boundary_value)):
        raise ValidationError("eigenvalues and boundary values must be finite")
    if not math.isfinite(bsd.alpha) or not math.isfinite(bsd.lambda_max):
        raise ValidationError("alpha and lambda_max must be finite")
    perm = bsd.provenance.get("sort_permutation")
    order = lam if perm is None else lam[np.asarray(perm, dtype=np.int64)]
    if n and np.any(np.diff(order) < 0.0):
        bad = int(np.argmax(np.diff(order) < 0.0)) + 2
        raise ValidationError(f"eigenvalues decrease at n={bad}")


# ---------------------------------------------------------------------------
# perturbations


@dataclass(frozen=True)
class PerturbationSpec:
    """Eigenvalue perturbation eps_n, explicit or from a rule.

    Rules: ``"constant"`` (eps_n = amplitude), ``"decaying"``
    (eps_n = amplitude / n), ``"explicit"`` (``eps`` given).
    """

    rule: str = "constant"
    amplitude: float = 0.0
    eps: tuple | None = None
    transient: int = 0
    n0: int = 1

    def __post_init__(self):
        if self.rule not in ("constant", "decaying", "explicit"):
            raise InvalidArgument(f"unknown perturbation rule {self.rule!r}")
        if self.rule == "explicit" and self.eps is None:
            raise InvalidArgument("explicit rule needs eps values")
        if not math.isfinite(self.amplitude):
            raise InvalidArgument("non-finite amplitude")

    @classmethod
    def explicit(cls, eps, transient=0, n0=1):
        return cls("explicit", 0.0, tuple(float(e) for e in eps), transient, n0)

    def values(self, count):
        if self.rule == "constant":
            out = np.full(count, float(self.amplitude))
        elif self.rule == "decaying":
            out = float(self.amplitude) / np.arange(1, count + 1, dtype=np.float64)
        else:
            if len(self.eps) < count:
                raise InvalidArgument(f"need {count} eps values, got {len(self.eps)}")
            out = np.asarray(self.eps[:count], dtype=np.float64)
        if not np.all(np.isfinite(out)):
            raise InvalidArgument("non-finite eps")
        return out

    def negated(self):
        eps = None if self.eps is None else tuple(-e for e in self.eps)
        return replace(self, amplitude=-self.amplitude, eps=eps)

    def sup_norm(self, count):
        """Lambda_1 = sup_n |eps_n|."""
        v = self.values(count)
        return float(np.max(np.abs(v))) if count else 0.0

    def delta(self, count):
        """Finite-data proxy for limsup |eps_n|: sup over n beyond ``transient``.

        The rules have known limits (|amplitude| and 0), which are used instead.
        """
        if self.rule == "constant":
            return abs(float(self.amplitude))
        if self.rule == "decaying":
            return 0.0
        v = np.abs(self.values(count))[self.transient:]
        return float(np.max(v)) if v.size else 0.0


def perturb_eigenvalues(bsd, spec):
    """Return a copy with lam_n -> lam_n + eps_n and traces unchanged.

    Index pairing is kept; if the perturbed list is no longer sorted, the
    sorting permutation is recorded in provenance but not applied.
    """
    count = len(bsd)
    eps = spec.values(count)
    shift = eps.copy() if bsd.shift is None else bsd.shift + eps
    if not np.any(shift):
        shift = None
    prov = dict(bsd.provenance)
    prov["perturbation"] = {
        "rule": spec.rule,
        "amplitude": float(spec.amplitude),
        "Lambda_1": spec.sup_norm(count),
        "delta": spec.delta(count),
        "transient": int(spec.transient),
        "corollary1_regime": spec.delta(count) == 0.0,
    }
    prov.pop("sort_permutation", None)
    lam = bsd.lam_base if shift is None else bsd.lam_base + shift
    if count and np.any(np.diff(lam) < 0.0):
        prov["sort_permutation"] = np.argsort(lam, kind="stable").tolist()
    return replace(bsd, shift=shift, provenance=prov)


def drop_traces(bsd, n0):
    """Flag traces of entries n < n0 as unknown."""
    if not 1 <= n0 <= len(bsd):
        raise InvalidArgument(f"n0 = {n0} out of range 1..{len(bsd)}")
    tk = bsd.trace_known.copy()
    tk[: n0 - 1] = False
    prov = dict(bsd.provenance)
    prov["n0"] = max(int(n0), int(prov.get("n0", 1)))
    return replace(bsd, trace_known=tk, provenance=prov)


def scale_traces(bsd, factor, upto):
    """Multiply boundary values of entries n <= upto by ``factor`` (synthetic trace change)."""
    b = bsd.boundary_value.copy()
    b[:upto] *= factor
    prov = dict(bsd.provenance)
    prov["trace_scaling"] = {"factor": float(factor), "upto": int(upto)}
    return replace(bsd, boundary_value=b, provenance=prov)


# ---------------------------------------------------------------------------
# persistence


def _fmt(x):
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise ValidationError("cannot serialise non-finite number")
        s = "%.17g" % x
        if "." not in s and "e" not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps_json(obj):
    """JSON text with every float written at 17 significant digits."""
    return _fmt(obj)


def write_atomic(path, text):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def bsd_to_document(bsd):
    lam = bsd.lam
    entries = [
        {"n": i + 1, "lambda": float(lam[i]), "l": int(bsd.l[i]), "m": int(bsd.m[i]),
         "boundary_value": float(bsd.boundary_value[i]), "trace_known": bool(bsd.trace_known[i])}
        for i in range(len(bsd))
    ]
    return {"schema": SCHEMA, "domain": bsd.domain, "alpha": float(bsd.alpha),
            "lambda_max": float(bsd.lambda_max), "entries": entries,
            "provenance": bsd.provenance}


def save_bsd(bsd, path):
    doc = bsd_to_document(bsd)
    head = {k: v for k, v in doc.items() if k != "entries"}
    rows = ",\n    ".join(_fmt(e) for e in doc["entries"])
    text = _fmt(head)[:-1] + ', "entries": [\n    ' + rows + "\n  ]}\n"
    write_atomic(path, text)


def bsd_from_document(doc):
    if not isinstance(doc, dict):
        raise SchemaError("BSD document must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"expected schema {SCHEMA!r}, got {doc.get('schema')!r}")
    missing = {"domain", "alpha", "lambda_max", "entries"} - set(doc)
    if missing:
        raise SchemaError(f"missing fields: {sorted(missing)}")
    if doc["domain"] != DOMAIN:
        raise SchemaError(f"unsupported domain {doc['domain']!r}")
    rows = doc["entries"]
    if not isinstance(rows, list):
        raise SchemaError("entries must be a list")
    keys = ("n", "lambda", "l", "m", "boundary_value", "trace_known")
    for i, e in enumerate(rows):
        if not isinstance(e, dict) or set(keys) - set(e):
            raise SchemaError(f"entry {i + 1} lacks one of {keys}")
        if e["n"] != i + 1:
            raise ValidationError(f"entry {i + 1} has rank n={e['n']}")
        if not isinstance(e["trace_known"], bool):
            raise SchemaError(f"entry {i + 1}: trace_known must be boolean")
        if (not isinstance(e["l"], int) or isinstance(e["l"], bool)
                or not isinstance(e["m"], int) or isinstance(e["m"], bool)):
            raise SchemaError(f"entry {i + 1}: l and m must be integers")
    prov = doc.get("provenance") or {}
    if not isinstance(prov, dict):
        raise SchemaError("provenance must be an object")
    return BoundarySpectralData.from_arrays(
        [e["lambda"] for e in rows], [e["l"] for e in rows], [e["m"] for e in rows],
        [e["boundary_value"] for e in rows], doc["alpha"], doc["lambda_max"],
        trace_known=[e["trace_known"] for e in rows], provenance=prov)


def load_bsd(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return bsd_from_document(doc)

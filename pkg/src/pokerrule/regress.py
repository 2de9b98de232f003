"""Least-squares models of the optimal defense frequency and the MIN rule.

Every model is a linear form over a few features of (MDF, RA), optionally
truncated at MDF or split at an RA threshold.  Fitted models are solved from
the normal equations on the raw linear form; truncation is applied only when
predicting.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

FEATURES = ("ra^2", "ra*mdf", "mdf^2", "ra", "mdf", "const")

_LABELS = {"ra^2": "RA^2", "ra*mdf": "RA*MDF", "mdf^2": "MDF^2", "ra": "RA", "mdf": "MDF", "const": ""}


class DegenerateDesignError(ValueError):
    """Design matrix without full column rank."""


def feature_columns(mdf: np.ndarray, ra: np.ndarray) -> dict[str, np.ndarray]:
    mdf = np.asarray(mdf, dtype=float)
    ra = np.asarray(ra, dtype=float)
    return {
        "ra^2": ra * ra,
        "ra*mdf": ra * mdf,
        "mdf^2": mdf * mdf,
        "ra": ra,
        "mdf": mdf,
        "const": np.ones_like(mdf),
    }


@dataclass(frozen=True)
class ModelSpec:
    """One predictor of ODF.

    ``mode`` is ``fitted`` (coefficients learned by OLS over ``features``) or
    ``fixed`` (``coefficients`` given).  ``truncate`` takes the minimum with
    MDF; ``piecewise_threshold`` switches to ``piecewise_high`` when RA
    exceeds it.
    """

    name: str
    features: tuple[str, ...]
    mode: str = "fitted"
    coefficients: Mapping[str, float] | None = None
    truncate: bool = False
    piecewise_threshold: float | None = None
    piecewise_high: Mapping[str, float] = field(default_factory=lambda: {"ra": -1.0, "const": 1.0})

    def __post_init__(self):
        unknown = set(self.features) - set(FEATURES)
        if unknown:
            raise ValueError(f"unknown features {sorted(unknown)}")
        if self.mode not in ("fitted", "fixed"):
            raise ValueError("mode must be 'fitted' or 'fixed'")
        if self.mode == "fixed":
            if self.coefficients is None or set(self.coefficients) != set(self.features):
                raise ValueError(f"{self.name}: fixed model needs one coefficient per feature")
        elif self.coefficients is not None:
            raise ValueError(f"{self.name}: fitted model must not carry coefficients")


@dataclass
class FittedModel:
    spec: ModelSpec
    coefficients: dict[str, float]
    train_mse: float = float("nan")
    cv_mse: float = float("nan")

    @property
    def name(self) -> str:
        return self.spec.name

    def formula(self, digits: int = 3) -> str:
        return format_formula(self, digits)


def _as_fitted(model) -> FittedModel:
    if isinstance(model, FittedModel):
        return model
    if isinstance(model, ModelSpec):
        if model.mode != "fixed":
            raise ValueError(f"{model.name}: fitted model has not been fit")
        return FittedModel(model, dict(model.coefficients))
    raise TypeError("expected a ModelSpec or FittedModel")


def columns(rows) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(mdf, ra, odf)`` arrays from dataset rows or a mapping of arrays."""
    if isinstance(rows, Mapping):
        return (np.asarray(rows["mdf"], dtype=float), np.asarray(rows["ra"], dtype=float),
                np.asarray(rows["odf"], dtype=float))
    rows = list(rows)
    return (np.array([r.mdf for r in rows], dtype=float), np.array([r.ra for r in rows], dtype=float),
            np.array([r.odf for r in rows], dtype=float))


def _subset(data, idx):
    mdf, ra, odf = data
    return mdf[idx], ra[idx], odf[idx]


def _ols(X: np.ndarray, y: np.ndarray, name: str) -> np.ndarray:
    if X.shape[0] < X.shape[1] or np.linalg.matrix_rank(X) < X.shape[1]:
        raise DegenerateDesignError(
            f"{name}: design matrix is rank deficient (e.g. MDF is constant on a single bet size); "
            "use the constant-only model instead")
    gram = X.T @ X
    beta = np.linalg.solve(gram, X.T @ y)
    # one step of iterative refinement on the normal equations
    beta = beta + np.linalg.solve(gram, X.T @ (y - X @ beta))
    return beta


def fit_ols(rows, spec: ModelSpec) -> FittedModel:
    """Least-squares coefficients of ``spec``'s untransformed linear form."""
    if spec.mode != "fitted":
        raise ValueError(f"{spec.name}: fixed-coefficient models are not fit")
    data = rows if isinstance(rows, tuple) else columns(rows)
    mdf, ra, odf = data
    if odf.size == 0:
        raise ValueError("no rows to fit")
    cols = feature_columns(mdf, ra)
    X = np.column_stack([cols[f] for f in spec.features])
    beta = _ols(X, odf, spec.name)
    model = FittedModel(spec, {f: float(b) for f, b in zip(spec.features, beta)})
    model.train_mse = mse(model, data)
    return model


def linear_form(model, mdf, ra) -> np.ndarray:
    model = _as_fitted(model)
    cols = feature_columns(mdf, ra)
    out = np.zeros_like(cols["const"])
    for f, c in model.coefficients.items():
        out = out + c * cols[f]
    return out


def predict(model, mdf, ra):
    """Predicted ODF, clamped to [0, 1].  Scalars in, scalar out."""
    model = _as_fitted(model)
    scalar = np.ndim(mdf) == 0 and np.ndim(ra) == 0
    mdf_a = np.atleast_1d(np.asarray(mdf, dtype=float))
    ra_a = np.atleast_1d(np.asarray(ra, dtype=float))
    out = linear_form(model, mdf_a, ra_a)
    spec = model.spec
    if spec.truncate:
        out = np.minimum(mdf_a, out)
    if spec.piecewise_threshold is not None:
        cols = feature_columns(mdf_a, ra_a)
        high = sum(c * cols[f] for f, c in spec.piecewise_high.items())
        out = np.where(ra_a > spec.piecewise_threshold, high, out)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def mse(model, rows) -> float:
    data = rows if isinstance(rows, tuple) else columns(rows)
    mdf, ra, odf = data
    if odf.size == 0:
        raise ValueError("no rows to score")
    err = predict(model, mdf, ra) - odf
    return float(np.mean(err * err))


def kfold_indices(n_rows: int, k: int, seed: int) -> list[np.ndarray]:
    """Deterministic shuffled split of ``range(n_rows)`` into ``k`` near-equal folds."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if n_rows < k:
        raise ValueError(f"need at least k={k} rows, got {n_rows}")
    order = np.random.default_rng(seed).permutation(n_rows)
    return np.array_split(order, k)


def kfold_cv(rows, spec: ModelSpec, k: int = 10, seed: int = 0) -> float:
    """Mean held-out MSE over ``k`` folds.  Fixed models are scored without fitting."""
    data = rows if isinstance(rows, tuple) else columns(rows)
    n_rows = data[2].size
    folds = kfold_indices(n_rows, k, seed)
    if spec.mode == "fixed":
        return mse(spec, data)
    scores = []
    for i, test in enumerate(folds):
        train = np.concatenate([f for j, f in enumerate(folds) if j != i])
        model = fit_ols(_subset(data, train), spec)
        scores.append(mse(model, _subset(data, test)))
    return float(np.mean(scores))


def _fixed(name, coefs, **kw) -> ModelSpec:
    return ModelSpec(name, tuple(coefs), mode="fixed", coefficients=dict(coefs), **kw)


SIMPLE_RULE = {"mdf": 1.0, "ra": -0.5, "const": 0.25}


def table1_models() -> list[ModelSpec]:
    """Models for data with a single bet size (MDF is a constant there)."""
    return [
        _fixed("Fixed MDF", {"mdf": 1.0}),
        ModelSpec("Linear MDF", ("const",)),
        ModelSpec("Linear RA", ("ra", "const")),
        ModelSpec("Quadratic RA", ("ra^2", "ra", "const")),
    ]


def table2_models() -> list[ModelSpec]:
    """Models for data pooled over several bet sizes."""
    return [
        _fixed("Fixed MDF", {"mdf": 1.0}),
        ModelSpec("Linear MDF", ("mdf", "const")),
        ModelSpec("Linear MDF with RA", ("mdf", "ra", "const")),
        ModelSpec("Linear MDF with RA*MDF", ("mdf", "ra*mdf", "const")),
        ModelSpec("Linear MDF with RA and RA*MDF", ("mdf", "ra", "ra*mdf", "const")),
        _fixed("Simplified Linear MDF with RA", SIMPLE_RULE),
        ModelSpec("Min Linear MDF with RA", ("mdf", "ra", "const"), truncate=True),
        _fixed("Simplified Min Linear MDF with RA", SIMPLE_RULE, truncate=True),
        _fixed("Piecewise Simp. Min Linear MDF w. RA", SIMPLE_RULE, truncate=True,
               piecewise_threshold=0.75),
        ModelSpec("Quadratic MDF with RA and MDF*RA",
                  ("ra^2", "ra*mdf", "mdf^2", "ra", "mdf", "const")),
    ]


def _linear_text(coefs: Mapping[str, float], digits: int, constant_mdf: float | None,
                 exact: bool = False) -> str:
    if constant_mdf is not None and set(coefs) <= {"mdf", "const"}:
        value = coefs.get("mdf", 0.0) * constant_mdf + coefs.get("const", 0.0)
        return f"{value:.{digits}g}"
    out = ""
    for f, c in coefs.items():
        mag = f"{abs(c):g}" if exact else f"{abs(c):.{digits}f}"
        label = _LABELS[f]
        if not label:
            term = mag
        elif exact and abs(c) == 1:
            term = label
        else:
            term = f"{mag}*{label}"
        if not out:
            out = f"-{term}" if c < 0 else term
        else:
            out += f" - {term}" if c < 0 else f" + {term}"
    return out or "0"


def format_formula(model, digits: int = 3, constant_mdf: float | None = None) -> str:
    """Human-readable predictor, e.g. ``min(MDF, MDF - 0.5*RA + 0.25)``."""
    model = _as_fitted(model)
    spec = model.spec
    coefs = {f: model.coefficients[f] for f in spec.features}
    text = _linear_text(coefs, digits, constant_mdf, exact=spec.mode == "fixed")
    if spec.truncate:
        mdf_text = f"{constant_mdf:g}" if constant_mdf is not None else "MDF"
        text = f"min({mdf_text}, {text})"
    if spec.piecewise_threshold is not None:
        high = _linear_text(dict(spec.piecewise_high), digits, None, exact=True)
        if dict(spec.piecewise_high) == {"ra": -1.0, "const": 1.0}:
            high = "1 - RA"
        t = f"{spec.piecewise_threshold:g}"
        text = f"{high}, RA > {t}; {text}, RA <= {t}"
    return text


@dataclass
class ZooReport:
    table: int
    seed: int
    k: int
    n_rows: int
    models: list[FittedModel]
    formulas: list[str]

    def by_name(self, name: str) -> FittedModel:
        for m in self.models:
            if m.name == name:
                return m
        raise KeyError(name)

    def to_text(self) -> str:
        header = f"# table={self.table} rows={self.n_rows} folds={self.k} seed={self.seed}"
        w_name = max(len(m.name) for m in self.models)
        w_form = max(len(f) for f in self.formulas)
        lines = [header,
                 f"{'model':<{w_name}}  {'formula':<{w_form}}  {'train_mse':>10}  {'cv_mse':>10}"]
        for m, f in zip(self.models, self.formulas):
            lines.append(f"{m.name:<{w_name}}  {f:<{w_form}}  {m.train_mse:>10.6f}  {m.cv_mse:>10.6f}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["model", "formula", "train_mse", "cv_mse"])
        for m, f in zip(self.models, self.formulas):
            writer.writerow([m.name, f, f"{m.train_mse:.12g}", f"{m.cv_mse:.12g}"])
        return buf.getvalue()


def run_model_zoo(rows, table: int | None = None, k: int = 10, seed: int = 0) -> ZooReport:
    """Fit and score every model of one results table.

    ``table`` defaults to 1 for a single bet size and 2 otherwise.
    Coefficients come from the full-data fit; ``cv_mse`` from k-fold CV.
    """
    data = rows if isinstance(rows, tuple) else columns(rows)
    mdf, ra, odf = data
    if odf.size == 0:
        raise ValueError("no rows")
    sizes = np.unique(mdf)
    if table is None:
        table = 1 if sizes.size == 1 else 2
    if table == 1 and sizes.size != 1:
        raise ValueError(f"table 1 needs a single bet size, data has {sizes.size}")
    if table not in (1, 2):
        raise ValueError("table must be 1 or 2")
    specs = table1_models() if table == 1 else table2_models()
    constant_mdf = float(sizes[0]) if sizes.size == 1 else None
    fitted, formulas = [], []
    for spec in specs:
        try:
            model = fit_ols(data, spec) if spec.mode == "fitted" else _as_fitted(spec)
            if spec.mode == "fixed":
                model = replace(model, train_mse=mse(model, data))
            model.cv_mse = kfold_cv(data, spec, k=k, seed=seed)
        except DegenerateDesignError as exc:
            raise DegenerateDesignError(f"model {spec.name!r}: {exc}") from exc
        fitted.append(model)
        formulas.append(format_formula(model, constant_mdf=constant_mdf))
    return ZooReport(table, seed, k, int(odf.size), fitted, formulas)


def _check_mdf(mdf: float) -> None:
    if not 0.0 < mdf < 1.0:
        raise ValueError(f"MDF must lie in (0, 1), got {mdf!r}")


def rule_100_50_25(mdf: float, ra: float) -> float:
    """Calling frequency ``min(MDF, MDF - 0.5*RA + 0.25)`` for RA in [0, 1]."""
    _check_mdf(mdf)
    if not 0.0 <= ra <= 1.0:
        raise ValueError(f"RA must lie in [0, 1], got {ra!r}")
    return min(mdf, mdf - 0.5 * ra + 0.25)


def rule_signed(mdf: float, ra_signed: float) -> float:
    """Same rule with RA rescaled to [-1, 1] (0 = no advantage): ``min(MDF, MDF - 0.25*RA)``."""
    _check_mdf(mdf)
    if not -1.0 <= ra_signed <= 1.0:
        raise ValueError(f"signed RA must lie in [-1, 1], got {ra_signed!r}")
    return rule_100_50_25(mdf, (ra_signed + 1.0) / 2.0)
